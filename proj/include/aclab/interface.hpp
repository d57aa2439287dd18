#pragma once

// Zero level set extraction (marching squares with linear edge interpolation),
// least-squares circle fits and contact-point detection on the bottom face.

#include <aclab/grid.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

namespace aclab {

struct CircleFit {
  Vec2 center;
  double radius = 0.0;
  double rms = 0.0;  // rms of |p - center| - radius
};

struct InterfaceExtract {
  std::vector<std::vector<Vec2>> polylines;
  std::optional<CircleFit> circle;

  std::size_t point_count() const {
    std::size_t n = 0;
    for (const auto& p : polylines) n += p.size();
    return n;
  }
  bool empty() const { return polylines.empty(); }
};

/// Kasa algebraic fit refined by Gauss-Newton on the geometric distance.
inline std::optional<CircleFit> fit_circle(const std::vector<Vec2>& pts) {
  if (pts.size() < 3) return std::nullopt;
  // Kasa: minimise sum (x^2 + y^2 + D x + E y + F)^2, centred for conditioning.
  Vec2 m;
  for (const Vec2& p : pts) m = m + p;
  m = (1.0 / pts.size()) * m;
  double a[3][4] = {};
  for (const Vec2& p : pts) {
    const double x = p.x - m.x, y = p.y - m.y, z = x * x + y * y;
    const double row[3] = {x, y, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a[r][c] += row[r] * row[c];
      a[r][3] -= row[r] * z;
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) return std::nullopt;
    for (int k = 0; k < 4; ++k) std::swap(a[c][k], a[piv][k]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
    }
  }
  const double D = a[0][3] / a[0][0], E = a[1][3] / a[1][1], F = a[2][3] / a[2][2];
  double cx = -D / 2.0, cy = -E / 2.0;
  const double r2 = cx * cx + cy * cy - F;
  if (!(r2 > 0.0)) return std::nullopt;
  double r = std::sqrt(r2);
  for (int it = 0; it < 20; ++it) {
    double jtj[3][3] = {}, jtr[3] = {};
    for (const Vec2& p : pts) {
      const double dx = p.x - m.x - cx, dy = p.y - m.y - cy;
      const double d = std::hypot(dx, dy);
      if (d == 0.0) continue;
      const double res = d - r;
      const double j[3] = {-dx / d, -dy / d, -1.0};
      for (int u = 0; u < 3; ++u) {
        for (int v = 0; v < 3; ++v) jtj[u][v] += j[u] * j[v];
        jtr[u] += j[u] * res;
      }
    }
    double aug[3][4];
    for (int u = 0; u < 3; ++u) {
      for (int v = 0; v < 3; ++v) aug[u][v] = jtj[u][v];
      aug[u][3] = -jtr[u];
    }
    bool ok = true;
    for (int c = 0; c < 3 && ok; ++c) {
      int piv = c;
      for (int q = c + 1; q < 3; ++q)
        if (std::abs(aug[q][c]) > std::abs(aug[piv][c])) piv = q;
      if (std::abs(aug[piv][c]) < 1e-300) ok = false;
      if (!ok) break;
      for (int k = 0; k < 4; ++k) std::swap(aug[c][k], aug[piv][k]);
      for (int q = 0; q < 3; ++q) {
        if (q == c) continue;
        const double f = aug[q][c] / aug[c][c];
        for (int k = c; k < 4; ++k) aug[q][k] -= f * aug[c][k];
      }
    }
    if (!ok) break;
    const double s0 = aug[0][3] / aug[0][0], s1 = aug[1][3] / aug[1][1], s2 = aug[2][3] / aug[2][2];
    cx += s0;
    cy += s1;
    r += s2;
    if (std::abs(s0) + std::abs(s1) + std::abs(s2) < 1e-14 * (1.0 + r)) break;
  }
  CircleFit fit;
  fit.center = {cx + m.x, cy + m.y};
  fit.radius = r;
  double ss = 0.0;
  for (const Vec2& p : pts) {
    const double e = norm(p - fit.center) - r;
    ss += e * e;
  }
  fit.rms = std::sqrt(ss / pts.size());
  return fit;
}

namespace detail {

/// Crossing of the zero level on the edge from node a to node b.
inline Vec2 edge_point(Vec2 pa, double ua, Vec2 pb, double ub) {
  const double s = ua / (ua - ub);
  return pa + s * (pb - pa);
}

}  // namespace detail

/// Marching squares on u = 0 (u >= 0 counts as positive). Saddle cells are
/// resolved with the cell average. On a 1D grid each sign change gives a
/// one-point polyline.
inline InterfaceExtract extract_interface(const ScalarField2D& u, bool fit = false) {
  const auto& g = u.grid;
  InterfaceExtract out;
  if (g.is_1d()) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double a = u(i, 0), b = u(i + 1, 0);
      if ((a >= 0.0) != (b >= 0.0))
        out.polylines.push_back({detail::edge_point({g.x(i), g.y0}, a, {g.x(i + 1), g.y0}, b)});
    }
    return out;
  }
  // Edge keys: 2*index(i,j) for the x edge (i,j)-(i+1,j), +1 for the y edge (i,j)-(i,j+1).
  auto hkey = [&](int i, int j) { return static_cast<std::int64_t>(2 * g.index(i, j)); };
  auto vkey = [&](int i, int j) { return static_cast<std::int64_t>(2 * g.index(i, j) + 1); };
  std::unordered_map<std::int64_t, Vec2> point;
  std::vector<std::pair<std::int64_t, std::int64_t>> segs;
  auto crossing = [&](std::int64_t key, int i0, int j0, int i1, int j1) {
    if (!point.count(key))
      point[key] = detail::edge_point({g.x(i0), g.y(j0)}, u(i0, j0), {g.x(i1), g.y(j1)}, u(i1, j1));
    return key;
  };
  for (int j = 0; j + 1 < g.ny; ++j)
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double c[4] = {u(i, j), u(i + 1, j), u(i + 1, j + 1), u(i, j + 1)};
      int mask = 0;
      for (int k = 0; k < 4; ++k)
        if (c[k] >= 0.0) mask |= 1 << k;
      if (mask == 0 || mask == 15) continue;
      // Edges: 0 bottom, 1 right, 2 top, 3 left.
      auto key = [&](int e) {
        switch (e) {
          case 0: return crossing(hkey(i, j), i, j, i + 1, j);
          case 1: return crossing(vkey(i + 1, j), i + 1, j, i + 1, j + 1);
          case 2: return crossing(hkey(i, j + 1), i, j + 1, i + 1, j + 1);
          default: return crossing(vkey(i, j), i, j, i, j + 1);
        }
      };
      std::vector<int> cut;
      for (int e = 0; e < 4; ++e)
        if (((mask >> e) & 1) != ((mask >> ((e + 1) % 4)) & 1)) cut.push_back(e);
      if (cut.size() == 2) {
        segs.emplace_back(key(cut[0]), key(cut[1]));
      } else {
        // Saddle: corners 0 and 2 share a sign. Join around the corners whose
        // sign differs from the centre value.
        const bool centre_pos = 0.25 * (c[0] + c[1] + c[2] + c[3]) >= 0.0;
        const bool c0_pos = (mask & 1) != 0;
        if (c0_pos == centre_pos) {
          segs.emplace_back(key(0), key(1));
          segs.emplace_back(key(2), key(3));
        } else {
          segs.emplace_back(key(3), key(0));
          segs.emplace_back(key(1), key(2));
        }
      }
    }
  // Chain segments through shared edge keys.
  std::unordered_map<std::int64_t, std::vector<std::size_t>> at;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    at[segs[s].first].push_back(s);
    at[segs[s].second].push_back(s);
  }
  std::vector<bool> used(segs.size(), false);
  auto other = [&](std::size_t s, std::int64_t k) { return segs[s].first == k ? segs[s].second : segs[s].first; };
  auto next_seg = [&](std::int64_t k) -> std::optional<std::size_t> {
    for (std::size_t s : at[k])
      if (!used[s]) return s;
    return std::nullopt;
  };
  // Open chains start at keys with a single segment; then closed loops.
  std::vector<std::int64_t> starts;
  for (const auto& [k, v] : at)
    if (v.size() == 1) starts.push_back(k);
  std::sort(starts.begin(), starts.end());
  auto walk = [&](std::int64_t k) {
    std::vector<Vec2> line{point[k]};
    while (auto s = next_seg(k)) {
      used[*s] = true;
      k = other(*s, k);
      line.push_back(point[k]);
    }
    out.polylines.push_back(std::move(line));
  };
  for (std::int64_t k : starts)
    if (next_seg(k)) walk(k);
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) walk(segs[s].first);
  if (fit) {
    std::vector<Vec2> all;
    for (const auto& p : out.polylines) all.insert(all.end(), p.begin(), p.end());
    out.circle = fit_circle(all);
  }
  return out;
}

/// Outermost interface points with y < y0 + 2 hy (left, right), if any.
inline std::optional<std::pair<Vec2, Vec2>> contact_points(const InterfaceExtract& ex, const Grid2D& g) {
  const double ycut = g.y0 + 2.0 * g.hy;
  std::optional<std::pair<Vec2, Vec2>> out;
  for (const auto& line : ex.polylines)
    for (const Vec2& p : line) {
      if (!(p.y < ycut)) continue;
      if (!out) {
        out = std::make_pair(p, p);
        continue;
      }
      if (p.x < out->first.x) out->first = p;
      if (p.x > out->second.x) out->second = p;
    }
  return out;
}

inline void write_interface_csv(std::ostream& os, const InterfaceExtract& ex) {
  os << "polyline,point,x,y\n";
  char buf[96];
  for (std::size_t l = 0; l < ex.polylines.size(); ++l)
    for (std::size_t k = 0; k < ex.polylines[l].size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", l, k, ex.polylines[l][k].x, ex.polylines[l][k].y);
      os << buf;
    }
}

}  // namespace aclab
