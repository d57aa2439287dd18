#pragma once

// Structured rectangular grids, nodal fields and the second-order discrete
// calculus used by every other module.
//
// Layout: nodal values are stored row-major, index = j * nx + i, where i runs
// along x and j along y. A grid with ny == 1 is the 1D mode (x only).

#include <aclab/error.hpp>
#include <aclab/parallel.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace aclab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// 2x2 matrix; for a vector field g, grad(g)(r, c) = d g_r / d x_c.
struct Mat2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;
  double trace() const { return xx + yy; }
};

enum class Face : int { bottom = 0, right = 1, top = 2, left = 3 };

/// Order also defines corner ownership: a corner node belongs to the first
/// face in this list that contains it.
inline constexpr std::array<Face, 4> kAllFaces{Face::bottom, Face::right, Face::top, Face::left};

inline std::string_view face_name(Face f) {
  switch (f) {
    case Face::bottom: return "bottom";
    case Face::right: return "right";
    case Face::top: return "top";
    case Face::left: return "left";
  }
  return "?";
}

inline std::optional<Face> face_from_name(std::string_view s) {
  for (Face f : kAllFaces)
    if (face_name(f) == s) return f;
  return std::nullopt;
}

struct Grid2D {
  int nx = 2;
  int ny = 1;
  double hx = 1.0;
  double hy = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  /// Boundary role identifier per face, indexed by Face.
  std::array<std::string, 4> face_tags{"bottom", "right", "top", "left"};

  static Grid2D box(double x_min, double x_max, double y_min, double y_max, int nx, int ny) {
    if (nx < 2) throw ConfigError("grid.nx must be >= 2");
    if (ny < 1) throw ConfigError("grid.ny must be >= 1");
    if (!(x_max > x_min)) throw ConfigError("grid x extent must be positive");
    Grid2D g;
    g.nx = nx;
    g.ny = ny;
    g.x0 = x_min;
    g.y0 = y_min;
    g.hx = (x_max - x_min) / (nx - 1);
    if (ny == 1) {
      g.hy = 1.0;
    } else {
      if (!(y_max > y_min)) throw ConfigError("grid y extent must be positive");
      g.hy = (y_max - y_min) / (ny - 1);
    }
    return g;
  }

  static Grid2D line(double x_min, double x_max, int nx) { return box(x_min, x_max, 0.0, 0.0, nx, 1); }

  bool is_1d() const { return ny == 1; }
  int dim() const { return is_1d() ? 1 : 2; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double x(int i) const { return x0 + i * hx; }
  double y(int j) const { return is_1d() ? y0 : y0 + j * hy; }
  double x_max() const { return x0 + (nx - 1) * hx; }
  double y_max() const { return is_1d() ? y0 : y0 + (ny - 1) * hy; }
  double min_spacing() const { return is_1d() ? hx : std::min(hx, hy); }

  /// Trapezoid weights along x and y (wy == 1 in 1D).
  double wx(int i) const { return (i == 0 || i == nx - 1) ? 0.5 * hx : hx; }
  double wy(int j) const {
    if (is_1d()) return 1.0;
    return (j == 0 || j == ny - 1) ? 0.5 * hy : hy;
  }

  std::vector<Face> faces() const {
    if (is_1d()) return {Face::left, Face::right};
    return {kAllFaces.begin(), kAllFaces.end()};
  }
  bool has_face(Face f) const { return !is_1d() || f == Face::left || f == Face::right; }

  int face_count(Face f) const {
    if (is_1d()) return 1;
    return (f == Face::bottom || f == Face::top) ? nx : ny;
  }

  /// k-th node of a face. Bottom/top run along +x, left/right along +y.
  std::pair<int, int> face_node(Face f, int k) const {
    switch (f) {
      case Face::bottom: return {k, 0};
      case Face::top: return {k, ny - 1};
      case Face::left: return {0, is_1d() ? 0 : k};
      case Face::right: return {nx - 1, is_1d() ? 0 : k};
    }
    return {0, 0};
  }

  /// Offset (di, dj) from a face node one step into the domain.
  std::pair<int, int> inward_step(Face f) const {
    switch (f) {
      case Face::bottom: return {0, 1};
      case Face::top: return {0, -1};
      case Face::left: return {1, 0};
      case Face::right: return {-1, 0};
    }
    return {0, 0};
  }

  Vec2 outward_normal(Face f) const {
    switch (f) {
      case Face::bottom: return {0.0, -1.0};
      case Face::top: return {0.0, 1.0};
      case Face::left: return {-1.0, 0.0};
      case Face::right: return {1.0, 0.0};
    }
    return {};
  }

  Vec2 tangent(Face f) const {
    return (f == Face::bottom || f == Face::top) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  }

  double normal_spacing(Face f) const { return (f == Face::bottom || f == Face::top) ? hy : hx; }
  double face_spacing(Face f) const { return (f == Face::bottom || f == Face::top) ? hx : hy; }

  /// Hausdorff measure of a face (counting measure of a point in 1D).
  double face_length(Face f) const {
    if (is_1d()) return 1.0;
    return face_spacing(f) * (face_count(f) - 1);
  }

  /// Face that owns a boundary node, nullopt for interior nodes.
  std::optional<Face> owner(int i, int j) const {
    if (is_1d()) {
      if (i == 0) return Face::left;
      if (i == nx - 1) return Face::right;
      return std::nullopt;
    }
    if (j == 0) return Face::bottom;
    if (i == nx - 1) return Face::right;
    if (j == ny - 1) return Face::top;
    if (i == 0) return Face::left;
    return std::nullopt;
  }

  const std::string& tag(Face f) const { return face_tags[static_cast<int>(f)]; }

  bool same_geometry(const Grid2D& o) const {
    return nx == o.nx && ny == o.ny && hx == o.hx && hy == o.hy && x0 == o.x0 && y0 == o.y0;
  }
};

struct ScalarField2D {
  Grid2D grid;
  std::vector<double> values;

  ScalarField2D() = default;
  explicit ScalarField2D(Grid2D g, double fill = 0.0) : grid(std::move(g)), values(grid.size(), fill) {}

  template <class Fn>
  static ScalarField2D sample(const Grid2D& g, Fn&& fn) {
    ScalarField2D f(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) f.values[g.index(i, j)] = fn(g.x(i), g.y(j));
    return f;
  }

  double& operator()(int i, int j) { return values[grid.index(i, j)]; }
  double operator()(int i, int j) const { return values[grid.index(i, j)]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct VectorField2D {
  Grid2D grid;
  std::vector<double> vx;
  std::vector<double> vy;

  VectorField2D() = default;
  explicit VectorField2D(Grid2D g) : grid(std::move(g)), vx(grid.size(), 0.0), vy(grid.size(), 0.0) {}

  Vec2 at(int i, int j) const {
    const auto k = grid.index(i, j);
    return {vx[k], vy[k]};
  }
};

/// Values of a field restricted to one face, with trapezoid weights.
struct FaceTrace {
  Face face = Face::bottom;
  std::vector<double> values;
  std::vector<double> weights;
  std::vector<double> x;
  std::vector<double> y;

  double integral() const {
    std::vector<double> p(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) p[k] = values[k] * weights[k];
    return pairwise_sum(p.data(), p.size());
  }
};

namespace detail {

inline void require_active(const Grid2D& g) {
  if (g.nx < 2) throw ConfigError("degenerate grid: nx < 2");
  if (!g.is_1d() && g.ny < 2) throw ConfigError("degenerate grid: ny < 2");
}

/// First derivative along a strided line: central inside, 3-point one-sided
/// at the ends (2-point if the line has only two samples).
inline double diff1(const double* p, std::ptrdiff_t stride, int n, int k, double h) {
  if (n == 2) return (p[stride] - p[0]) / h;
  if (k == 0) return (-3.0 * p[0] + 4.0 * p[stride] - p[2 * stride]) / (2.0 * h);
  const double* q = p + k * stride;
  if (k == n - 1) return (3.0 * q[0] - 4.0 * q[-stride] + q[-2 * stride]) / (2.0 * h);
  return (q[stride] - q[-stride]) / (2.0 * h);
}

/// Second derivative along a strided line; one-sided 4-point at the ends.
inline double diff2(const double* p, std::ptrdiff_t stride, int n, int k, double h) {
  if (n < 3) return 0.0;
  const double h2 = h * h;
  if (k == 0) {
    if (n == 3) return (p[0] - 2.0 * p[stride] + p[2 * stride]) / h2;
    return (2.0 * p[0] - 5.0 * p[stride] + 4.0 * p[2 * stride] - p[3 * stride]) / h2;
  }
  const double* q = p + k * stride;
  if (k == n - 1) {
    if (n == 3) return (q[0] - 2.0 * q[-stride] + q[-2 * stride]) / h2;
    return (2.0 * q[0] - 5.0 * q[-stride] + 4.0 * q[-2 * stride] - q[-3 * stride]) / h2;
  }
  return (q[stride] - 2.0 * q[0] + q[-stride]) / h2;
}

}  // namespace detail

inline double ddx(const ScalarField2D& f, int i, int j) {
  const auto& g = f.grid;
  return detail::diff1(&f.values[g.index(0, j)], 1, g.nx, i, g.hx);
}

inline double ddy(const ScalarField2D& f, int i, int j) {
  const auto& g = f.grid;
  if (g.is_1d()) return 0.0;
  return detail::diff1(&f.values[g.index(i, 0)], g.nx, g.ny, j, g.hy);
}

inline VectorField2D gradient(const ScalarField2D& f) {
  const auto& g = f.grid;
  detail::require_active(g);
  VectorField2D out(g);
  const int nx = g.nx, ny = g.ny;
  const double i2hx = 1.0 / (2.0 * g.hx), i2hy = 1.0 / (2.0 * g.hy);
  parallel_rows(ny, [&](int jb, int je) {
    for (int j = jb; j < je; ++j) {
      const double* r = &f.values[g.index(0, j)];
      double* gx = &out.vx[g.index(0, j)];
      double* gy = &out.vy[g.index(0, j)];
      gx[0] = detail::diff1(r, 1, nx, 0, g.hx);
      gx[nx - 1] = detail::diff1(r, 1, nx, nx - 1, g.hx);
      for (int i = 1; i + 1 < nx; ++i) gx[i] = (r[i + 1] - r[i - 1]) * i2hx;
      if (g.is_1d()) continue;
      if (j == 0 || j == ny - 1 || ny == 2) {
        for (int i = 0; i < nx; ++i) gy[i] = detail::diff1(&f.values[g.index(i, 0)], nx, ny, j, g.hy);
      } else {
        const double* dn = r - nx;
        const double* up = r + nx;
        for (int i = 0; i < nx; ++i) gy[i] = (up[i] - dn[i]) * i2hy;
      }
    }
  });
  return out;
}

/// 5-point Laplacian at interior nodes; boundary nodes get one-sided second
/// derivatives (diagnostic use only, the solver applies boundary laws there).
inline ScalarField2D laplacian(const ScalarField2D& f) {
  const auto& g = f.grid;
  detail::require_active(g);
  ScalarField2D out(g);
  parallel_rows(g.ny, [&](int jb, int je) {
    for (int j = jb; j < je; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double v = detail::diff2(&f.values[g.index(0, j)], 1, g.nx, i, g.hx);
        if (!g.is_1d()) v += detail::diff2(&f.values[g.index(i, 0)], g.nx, g.ny, j, g.hy);
        out(i, j) = v;
      }
  });
  return out;
}

inline FaceTrace boundary_trace(const ScalarField2D& f, Face face) {
  const auto& g = f.grid;
  if (!g.has_face(face)) throw UsageError("face " + std::string(face_name(face)) + " is not active on a 1D grid");
  FaceTrace tr;
  tr.face = face;
  const int n = g.face_count(face);
  const double h = g.face_spacing(face);
  tr.values.resize(n);
  tr.weights.resize(n);
  tr.x.resize(n);
  tr.y.resize(n);
  for (int k = 0; k < n; ++k) {
    auto [i, j] = g.face_node(face, k);
    tr.values[k] = f(i, j);
    tr.weights[k] = g.is_1d() ? 1.0 : ((k == 0 || k == n - 1) ? 0.5 * h : h);
    tr.x[k] = g.x(i);
    tr.y[k] = g.y(j);
  }
  return tr;
}

/// Derivative along the face direction (+x on bottom/top, +y on left/right).
inline std::vector<double> tangential_derivative(const ScalarField2D& f, Face face) {
  const auto& g = f.grid;
  if (!g.has_face(face)) throw UsageError("inactive face");
  if (g.is_1d()) return {0.0};
  const int n = g.face_count(face);
  std::vector<double> d(n);
  for (int k = 0; k < n; ++k) {
    auto [i, j] = g.face_node(face, k);
    d[k] = (face == Face::bottom || face == Face::top) ? ddx(f, i, j) : ddy(f, i, j);
  }
  return d;
}

/// Outward normal derivative by the 3-point one-sided stencil.
inline std::vector<double> normal_derivative(const ScalarField2D& f, Face face) {
  const auto& g = f.grid;
  if (!g.has_face(face)) throw UsageError("inactive face");
  const int n = g.face_count(face);
  std::vector<double> d(n);
  for (int k = 0; k < n; ++k) {
    auto [i, j] = g.face_node(face, k);
    const Vec2 nu = g.outward_normal(face);
    d[k] = nu.x * ddx(f, i, j) + nu.y * ddy(f, i, j);
  }
  return d;
}

/// Tensor-product trapezoid rule. Each row is reduced pairwise, then the
/// weighted row sums are reduced pairwise: the order never depends on threads.
/// Trapezoid integral of the node density f(k), k the flat node index, without
/// materialising the density. Rows are summed in 4 lanes, then pairwise across rows.
template <class Fn>
double integrate_nodes(const Grid2D& g, Fn&& f) {
  std::vector<double> rows(g.ny);
  parallel_rows(g.ny, [&](int jb, int je) {
    for (int j = jb; j < je; ++j) {
      const std::size_t k0 = g.index(0, j);
      double acc[4] = {0.0, 0.0, 0.0, 0.0};
      int i = 1;
      for (; i + 4 < g.nx; i += 4)
        for (int l = 0; l < 4; ++l) acc[l] += f(k0 + i + l);
      for (; i < g.nx - 1; ++i) acc[0] += f(k0 + i);
      const double ends = 0.5 * (f(k0) + f(k0 + g.nx - 1));
      rows[j] = g.wy(j) * g.hx * (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ends);
    }
  });
  return pairwise_sum(rows.data(), rows.size());
}

inline double integrate_domain(const ScalarField2D& density) {
  const double* p = density.values.data();
  return integrate_nodes(density.grid, [p](std::size_t k) { return p[k]; });
}

/// Integral over the active faces of per-face sampled densities.
template <class Fn>
double integrate_boundary(const Grid2D& g, Fn&& per_face_values) {
  double total = 0.0;
  for (Face f : g.faces()) {
    const std::vector<double> v = per_face_values(f);
    const int n = g.face_count(f);
    const double h = g.face_spacing(f);
    std::vector<double> p(n);
    for (int k = 0; k < n; ++k) p[k] = v[k] * (g.is_1d() ? 1.0 : ((k == 0 || k == n - 1) ? 0.5 * h : h));
    total += pairwise_sum(p.data(), p.size());
  }
  return total;
}

// Field dumps -------------------------------------------------------------
//
// CSV: first line holds the six header values "nx,ny,hx,hy,x0,y0"; then ny
// lines with nx comma-separated values each (row j = 0 first).
// Binary: magic "ACLF", int32 nx, int32 ny, float64 hx, hy, x0, y0, then
// nx*ny float64 values row-major, all little-endian (host order).

inline void write_field_csv(std::ostream& os, const ScalarField2D& f) {
  const auto& g = f.grid;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << g.nx << ',' << g.ny << ',' << num(g.hx) << ',' << num(g.hy) << ',' << num(g.x0) << ',' << num(g.y0) << '\n';
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) os << (i ? "," : "") << num(f(i, j));
    os << '\n';
  }
}

inline ScalarField2D read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("empty field file");
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream hs(line);
  Grid2D g;
  if (!(hs >> g.nx >> g.ny >> g.hx >> g.hy >> g.x0 >> g.y0)) throw UsageError("bad field header");
  ScalarField2D f(g);
  for (int j = 0; j < g.ny; ++j) {
    if (!std::getline(is, line)) throw UsageError("truncated field file");
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream rs(line);
    for (int i = 0; i < g.nx; ++i)
      if (!(rs >> f(i, j))) throw UsageError("truncated field row");
  }
  return f;
}

inline void write_field_binary(std::ostream& os, const ScalarField2D& f) {
  const auto& g = f.grid;
  os.write("ACLF", 4);
  const std::int32_t n[2] = {g.nx, g.ny};
  os.write(reinterpret_cast<const char*>(n), sizeof n);
  const double h[4] = {g.hx, g.hy, g.x0, g.y0};
  os.write(reinterpret_cast<const char*>(h), sizeof h);
  os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

inline ScalarField2D read_field_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "ACLF", 4) != 0) throw UsageError("not an ACLF field file");
  std::int32_t n[2];
  double h[4];
  is.read(reinterpret_cast<char*>(n), sizeof n);
  is.read(reinterpret_cast<char*>(h), sizeof h);
  Grid2D g;
  g.nx = n[0];
  g.ny = n[1];
  g.hx = h[0];
  g.hy = h[1];
  g.x0 = h[2];
  g.y0 = h[3];
  ScalarField2D f(g);
  if (!is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double))))
    throw UsageError("truncated binary field");
  return f;
}

}  // namespace aclab
