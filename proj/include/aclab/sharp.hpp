#pragma once

// Sharp-interface references: the closed-form shrinking arc on the half plane
// and a polyline curve-shortening front with the contact law
// v_b = sigma / tan(theta) on y = 0.

#include <aclab/error.hpp>
#include <aclab/grid.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace aclab {

struct ArcContact {
  double x0 = 0.0;
  double x1 = 0.0;
  double vb = 0.0;         // speed of each contact point
  double sin_theta = 0.0;
};

struct ArcSolution {
  double sigma = 1.0;
  double t = 0.0;
  double R = 0.0;          // initial radius
  Vec2 center;
  double r = 0.0;
  std::optional<ArcContact> contact;  // absent once the arc has detached
};

/// Circle centred at (1, -1/sigma) through (0,0) and (2,0) at t = 0, shrinking
/// by r' = -1/r; the contacts exist while t < 1/2.
inline ArcSolution arc_exact(double sigma, double t) {
  if (!(sigma > 0.0)) throw UsageError("arc_exact: sigma must be positive");
  if (t < 0.0) throw UsageError("arc_exact: negative time");
  ArcSolution a;
  a.sigma = sigma;
  a.t = t;
  const double is2 = 1.0 / (sigma * sigma);
  a.R = std::sqrt(1.0 + is2);
  a.center = {1.0, -1.0 / sigma};
  const double r2 = 1.0 + is2 - 2.0 * t;
  if (!(r2 > 0.0)) throw ExtinctionError("arc_exact: the circle has vanished");
  a.r = std::sqrt(r2);
  if (t < 0.5) {
    const double q = std::sqrt(1.0 - 2.0 * t);
    a.contact = ArcContact{1.0 - q, 1.0 + q, 1.0 / q, q / std::sqrt(1.0 - 2.0 * t + is2)};
  }
  return a;
}

// Polyline fronts -----------------------------------------------------------------

enum class EndpointLaw { dynamic, pinned };

struct PolylineFront {
  std::vector<Vec2> nodes;
  bool closed = false;
  /// Open fronts: both endpoints lie on y = 0.
  bool attached = false;
  double t = 0.0;
  long steps = 0;
};

struct PolylineOptions {
  EndpointLaw law = EndpointLaw::dynamic;
  /// Arclength redistribution period in steps (0 disables it).
  int redistribute_every = 10;
  /// Ratio of consecutive segment lengths moving away from an attached
  /// endpoint; 1 gives uniform spacing.
  double grading = 1.0;
  /// dt must satisfy dt <= stability * (shortest segment)^2.
  double stability = 0.5;
};

namespace detail {

/// Offset from b to the circumcentre of (a, b, c); nullopt when collinear.
inline std::optional<Vec2> circumcenter_offset(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 p = a - b, q = c - b;
  const double d = 2.0 * (p.x * q.y - p.y * q.x);
  const double scale = dot(p, p) * dot(q, q);
  if (std::abs(d) <= 1e-14 * std::sqrt(std::max(scale, 1e-300))) return std::nullopt;
  const double pp = dot(p, p), qq = dot(q, q);
  return Vec2{(q.y * pp - p.y * qq) / d, (p.x * qq - q.x * pp) / d};
}

/// Curvature vector at b from the circle through the triple.
inline Vec2 curvature_vector(Vec2 a, Vec2 b, Vec2 c) {
  const auto off = circumcenter_offset(a, b, c);
  if (!off) return {};
  const double r2 = dot(*off, *off);
  return (1.0 / r2) * *off;
}

/// Unit tangent at p0 of the circle through p0, p1, p2, oriented towards p1.
inline Vec2 end_tangent(Vec2 p0, Vec2 p1, Vec2 p2) {
  Vec2 tau;
  if (auto off = circumcenter_offset(p1, p0, p2)) {
    tau = {-off->y, off->x};
  } else {
    tau = p1 - p0;
  }
  if (dot(tau, p1 - p0) < 0.0) tau = -1.0 * tau;
  return (1.0 / norm(tau)) * tau;
}

/// Point at fraction s of the arc from p to q on the circle through p, q and
/// the helper point m (chord interpolation when collinear); also returns the
/// arc length.
struct ArcPiece {
  Vec2 p, q, c;
  double theta = 0.0;
  double length = 0.0;
  bool straight = true;

  ArcPiece(Vec2 p_, Vec2 q_, Vec2 m) : p(p_), q(q_) {
    if (auto off = circumcenter_offset(p, m, q)) {
      c = m + *off;
      const Vec2 a = p - c, b = q - c;
      theta = std::atan2(a.x * b.y - a.y * b.x, dot(a, b));
      length = norm(a) * std::abs(theta);
      straight = false;
    } else {
      length = norm(q - p);
    }
  }

  Vec2 at(double s) const {
    if (straight) return p + s * (q - p);
    const Vec2 a = p - c;
    const double cs = std::cos(s * theta), sn = std::sin(s * theta);
    return c + Vec2{cs * a.x - sn * a.y, sn * a.x + cs * a.y};
  }
};

inline double min_segment(const PolylineFront& f) {
  double m = INFINITY;
  const std::size_t n = f.nodes.size();
  const std::size_t segs = f.closed ? n : n - 1;
  for (std::size_t k = 0; k < segs; ++k) m = std::min(m, norm(f.nodes[(k + 1) % n] - f.nodes[k]));
  return m;
}

}  // namespace detail

/// Arclength positions of the redistributed nodes in [0, 1].
inline std::vector<double> graded_positions(std::size_t n, double grading, bool graded_ends) {
  std::vector<double> len(n - 1, 1.0);
  if (graded_ends && grading != 1.0) {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double d = static_cast<double>(std::min(k, n - 2 - k));
      len[k] = std::min(std::pow(1.0 / grading, d), 8.0);
    }
  }
  std::vector<double> s(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) s[k] = s[k - 1] + len[k - 1];
  for (double& v : s) v /= s.back();
  return s;
}

/// Moves nodes along the piecewise-circular interpolant so that arclength
/// spacing follows graded_positions; node 0 and open endpoints stay put.
inline void redistribute(PolylineFront& f, double grading = 1.0) {
  const std::size_t n = f.nodes.size();
  const std::size_t segs = f.closed ? n : n - 1;
  auto node = [&](long k) { return f.nodes[static_cast<std::size_t>((k + static_cast<long>(n)) % static_cast<long>(n))]; };
  std::vector<detail::ArcPiece> pieces;
  pieces.reserve(segs);
  for (std::size_t k = 0; k < segs; ++k) {
    const long i = static_cast<long>(k);
    Vec2 m;
    if (f.closed || k > 0) {
      m = node(i - 1);
    } else {
      m = n > 2 ? node(2) : node(1);
    }
    pieces.emplace_back(node(i), node(i + 1), m);
  }
  std::vector<double> cum(segs + 1, 0.0);
  for (std::size_t k = 0; k < segs; ++k) cum[k + 1] = cum[k] + pieces[k].length;
  const double total = cum.back();
  const std::size_t slots = f.closed ? n + 1 : n;
  const std::vector<double> target = graded_positions(slots, grading, f.attached && !f.closed);
  std::vector<Vec2> out(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = target[k] * total;
    while (seg + 1 < segs && cum[seg + 1] < s) ++seg;
    const double frac = pieces[seg].length > 0.0 ? (s - cum[seg]) / pieces[seg].length : 0.0;
    out[k] = pieces[seg].at(std::clamp(frac, 0.0, 1.0));
  }
  out[0] = f.nodes[0];
  if (!f.closed) {
    out[n - 1] = f.nodes[n - 1];
    if (f.attached) out[0].y = out[n - 1].y = 0.0;
  }
  f.nodes = std::move(out);
}

/// Uniform-angle arc of arc_exact(sigma, t) from the left contact over the top
/// to the right contact.
inline PolylineFront make_arc_front(double sigma, std::size_t n, double t = 0.0) {
  if (n < 3) throw UsageError("arc front needs at least 3 nodes");
  const ArcSolution a = arc_exact(sigma, t);
  if (!a.contact) throw UsageError("arc front requires t < 1/2");
  const double yl = -a.center.y;
  const double phi_l = std::atan2(yl, a.contact->x0 - a.center.x);
  const double phi_r = std::atan2(yl, a.contact->x1 - a.center.x);
  PolylineFront f;
  f.attached = true;
  f.t = t;
  f.nodes.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = phi_l + (phi_r - phi_l) * static_cast<double>(k) / static_cast<double>(n - 1);
    f.nodes[k] = a.center + a.r * Vec2{std::cos(phi), std::sin(phi)};
  }
  f.nodes.front() = {a.contact->x0, 0.0};
  f.nodes.back() = {a.contact->x1, 0.0};
  return f;
}

inline PolylineFront make_circle_front(Vec2 center, double radius, std::size_t n) {
  if (n < 3) throw UsageError("circle front needs at least 3 nodes");
  if (!(radius > 0.0)) throw UsageError("circle front needs a positive radius");
  PolylineFront f;
  f.closed = true;
  f.nodes.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    f.nodes[k] = center + radius * Vec2{std::cos(phi), std::sin(phi)};
  }
  return f;
}

/// Slip speed of an attached endpoint: sigma * tau_x / tau_y with tau the end
/// tangent pointing into the front. Positive speeds move towards +x.
inline double contact_speed(Vec2 p0, Vec2 p1, Vec2 p2, double sigma) {
  const Vec2 tau = detail::end_tangent(p0, p1, p2);
  if (std::abs(tau.y) < 1e-8) throw ContactSingularityError("front meets the boundary tangentially");
  return sigma * tau.x / tau.y;
}

/// One explicit step: interior nodes by the curvature vector, attached
/// endpoints along y = 0 by the contact law (or pinned), then arclength
/// redistribution every opts.redistribute_every steps.
inline PolylineFront polyline_step(PolylineFront f, double sigma, double dt, const PolylineOptions& opts = {}) {
  const std::size_t n = f.nodes.size();
  if (n < 3) throw UsageError("polyline_step: front needs at least 3 nodes");
  if (!(dt > 0.0)) throw UsageError("polyline_step: dt must be positive");
  const double hmin = detail::min_segment(f);
  if (!(dt <= opts.stability * hmin * hmin))
    throw ResolutionError("polyline_step: segments too short for dt (min segment " + std::to_string(hmin) + ")");
  std::vector<Vec2> next = f.nodes;
  const std::size_t first = f.closed ? 0 : 1;
  const std::size_t last = f.closed ? n : n - 1;
  for (std::size_t k = first; k < last; ++k) {
    const Vec2 a = f.nodes[(k + n - 1) % n], b = f.nodes[k], c = f.nodes[(k + 1) % n];
    next[k] = b + dt * detail::curvature_vector(a, b, c);
  }
  if (!f.closed && f.attached && opts.law == EndpointLaw::dynamic) {
    next[0].x += dt * contact_speed(f.nodes[0], f.nodes[1], f.nodes[2], sigma);
    next[n - 1].x += dt * contact_speed(f.nodes[n - 1], f.nodes[n - 2], f.nodes[n - 3], sigma);
  }
  f.nodes = std::move(next);
  f.t += dt;
  ++f.steps;
  if (opts.redistribute_every > 0 && f.steps % opts.redistribute_every == 0) redistribute(f, opts.grading);
  return f;
}

/// Any pair of non-adjacent segments crossing.
inline bool self_intersects(const PolylineFront& f) {
  const std::size_t n = f.nodes.size();
  const std::size_t segs = f.closed ? n : n - 1;
  auto cross = [](Vec2 a, Vec2 b, Vec2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); };
  for (std::size_t i = 0; i < segs; ++i)
    for (std::size_t j = i + 2; j < segs; ++j) {
      if (f.closed && i == 0 && j == segs - 1) continue;
      const Vec2 a = f.nodes[i], b = f.nodes[(i + 1) % n], c = f.nodes[j], d = f.nodes[(j + 1) % n];
      const double d1 = cross(a, b, c), d2 = cross(a, b, d), d3 = cross(c, d, a), d4 = cross(c, d, b);
      if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) return true;
    }
  return false;
}

/// Shoelace area of a closed front.
inline double enclosed_area(const PolylineFront& f) {
  double a = 0.0;
  const std::size_t n = f.nodes.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 p = f.nodes[k], q = f.nodes[(k + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(a);
}

struct FrontHistory {
  std::vector<PolylineFront> snapshots;
};

/// Steps until t_end (last step shortened), keeping a snapshot every
/// `every` steps plus the initial and final fronts.
inline FrontHistory evolve_front(PolylineFront f, double sigma, double dt, double t_end, long every,
                                 const PolylineOptions& opts = {}) {
  if (every < 1) throw UsageError("evolve_front: snapshot period must be >= 1");
  FrontHistory h;
  h.snapshots.push_back(f);
  long since = 0;
  const double tol = 1e-12 * std::max(1.0, t_end);
  while (f.t < t_end - tol) {
    const double step = std::min(dt, t_end - f.t);
    f = polyline_step(std::move(f), sigma, step, opts);
    if (f.t >= t_end - tol) f.t = t_end;
    if (++since == every || f.t == t_end) {
      since = 0;
      h.snapshots.push_back(f);
    }
  }
  return h;
}

/// CSV rows "t,node,x,y" for every snapshot.
inline void write_front_csv(std::ostream& os, const FrontHistory& h) {
  os << "t,node,x,y\n";
  char buf[128];
  for (const auto& f : h.snapshots)
    for (std::size_t k = 0; k < f.nodes.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", f.t, k, f.nodes[k].x, f.nodes[k].y);
      os << buf;
    }
}

struct FrontErrorRow {
  double t = 0.0;
  double radius_error = 0.0;   // sup over nodes of | |P - c| - r(t) |
  double contact_error = 0.0;  // max over both contacts
  double x0 = 0.0, x1 = 0.0;
  double vb_measured = NAN;    // central difference of the contact positions
  double vb_exact = NAN;
  double vb_rel_error = NAN;
};

/// Error table of an arc history against arc_exact; the first snapshot must be
/// the sigma arc.
inline std::vector<FrontErrorRow> compare_to_exact(const FrontHistory& h, double sigma) {
  if (h.snapshots.empty()) throw UsageError("compare_to_exact: empty history");
  const PolylineFront& f0 = h.snapshots.front();
  if (!f0.attached || f0.closed) throw UsageError("compare_to_exact: history is not an attached arc");
  const ArcSolution a0 = arc_exact(sigma, f0.t);
  for (const Vec2& p : f0.nodes)
    if (std::abs(norm(p - a0.center) - a0.r) > 1e-9)
      throw UsageError("compare_to_exact: initial front is not the sigma arc");
  std::vector<FrontErrorRow> rows;
  for (const auto& f : h.snapshots) {
    const ArcSolution a = arc_exact(sigma, f.t);
    FrontErrorRow r;
    r.t = f.t;
    for (const Vec2& p : f.nodes) r.radius_error = std::max(r.radius_error, std::abs(norm(p - a.center) - a.r));
    r.x0 = f.nodes.front().x;
    r.x1 = f.nodes.back().x;
    if (a.contact) {
      r.contact_error = std::max(std::abs(r.x0 - a.contact->x0), std::abs(r.x1 - a.contact->x1));
      r.vb_exact = a.contact->vb;
    }
    rows.push_back(r);
  }
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double dt = rows[k + 1].t - rows[k - 1].t;
    const double v0 = (rows[k + 1].x0 - rows[k - 1].x0) / dt;
    const double v1 = -(rows[k + 1].x1 - rows[k - 1].x1) / dt;
    rows[k].vb_measured = 0.5 * (v0 + v1);
    if (std::isfinite(rows[k].vb_exact)) rows[k].vb_rel_error = std::abs(rows[k].vb_measured / rows[k].vb_exact - 1.0);
  }
  return rows;
}

}  // namespace aclab
