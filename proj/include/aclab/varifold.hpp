#pragma once

// First variations, mean curvature and Brakke-type balances of the diffuse
// interface measure, evaluated on the discrete state.

#include <aclab/grid.hpp>
#include <aclab/measures.hpp>
#include <aclab/record.hpp>
#include <aclab/solver.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace aclab {

// Test fields -----------------------------------------------------------------

/// Closed-form vector field g(x, y, t) with its Jacobian.
struct VectorTestField {
  std::string name;
  std::function<Vec2(double, double, double)> g;
  std::function<Mat2(double, double, double)> grad;
  /// Faces on which g may be nonzero; empty means support inside the domain.
  std::set<Face> support_faces{kAllFaces.begin(), kAllFaces.end()};
  /// g . nu = 0 on every face.
  bool tangential_on_boundary = false;
};

/// Closed-form scalar field phi(x, y, t) with gradient and time derivative.
struct ScalarTestField {
  std::string name;
  std::function<double(double, double, double)> phi;
  std::function<Vec2(double, double, double)> grad;
  std::function<double(double, double, double)> dt = [](double, double, double) { return 0.0; };
  bool time_dependent = false;
  std::set<Face> support_faces{kAllFaces.begin(), kAllFaces.end()};
  /// grad phi . nu = 0 on every face.
  bool neumann_compatible = false;
};

inline constexpr double kFlagTolerance = 1e-10;

/// Samples the declared flags on the boundary nodes; throws UsageError on a
/// violation larger than kFlagTolerance.
inline void verify_flags(const VectorTestField& f, const Grid2D& g, double t = 0.0) {
  for (Face face : g.faces()) {
    const Vec2 nu = g.outward_normal(face);
    const bool supported = f.support_faces.count(face) > 0;
    for (int k = 0; k < g.face_count(face); ++k) {
      auto [i, j] = g.face_node(face, k);
      const Vec2 v = f.g(g.x(i), g.y(j), t);
      if (!supported && norm(v) > kFlagTolerance)
        throw UsageError("test field " + f.name + " is nonzero on face " + std::string(face_name(face)));
      if (f.tangential_on_boundary && std::abs(dot(v, nu)) > kFlagTolerance)
        throw UsageError("test field " + f.name + " is not tangential on face " + std::string(face_name(face)));
    }
  }
}

inline void verify_flags(const ScalarTestField& f, const Grid2D& g, double t = 0.0) {
  for (Face face : g.faces()) {
    const Vec2 nu = g.outward_normal(face);
    const bool supported = f.support_faces.count(face) > 0;
    for (int k = 0; k < g.face_count(face); ++k) {
      auto [i, j] = g.face_node(face, k);
      const double x = g.x(i), y = g.y(j);
      if (!supported && std::abs(f.phi(x, y, t)) > kFlagTolerance)
        throw UsageError("test function " + f.name + " is nonzero on face " + std::string(face_name(face)));
      // In 1D only the x component of the normal exists.
      const Vec2 gr = f.grad(x, y, t);
      const double flux = g.is_1d() ? gr.x * nu.x : dot(gr, nu);
      if (f.neumann_compatible && std::abs(flux) > kFlagTolerance)
        throw UsageError("test function " + f.name + " violates grad phi . nu = 0 on face " +
                         std::string(face_name(face)));
    }
  }
}

namespace catalog {

/// Radial profile b(r) = (1 - r^2/rho^2)^3 on r < rho; C^2, returns (b, db/dr / r).
inline std::pair<double, double> bump_profile(double dx, double dy, double rho) {
  const double q = (dx * dx + dy * dy) / (rho * rho);
  if (q >= 1.0) return {0.0, 0.0};
  const double a = 1.0 - q;
  return {a * a * a, -6.0 * a * a / (rho * rho)};
}

inline VectorTestField constant(Vec2 c, std::string name = "constant") {
  VectorTestField f;
  f.name = std::move(name);
  f.g = [c](double, double, double) { return c; };
  f.grad = [](double, double, double) { return Mat2{}; };
  return f;
}

/// c * b(|x - center|) with the compact bump above.
inline VectorTestField bump(Vec2 c, Vec2 center, double rho, std::string name = "bump") {
  VectorTestField f;
  f.name = std::move(name);
  f.g = [=](double x, double y, double) {
    return bump_profile(x - center.x, y - center.y, rho).first * c;
  };
  f.grad = [=](double x, double y, double) {
    const double s = bump_profile(x - center.x, y - center.y, rho).second;
    const double gx = s * (x - center.x), gy = s * (y - center.y);
    return Mat2{c.x * gx, c.x * gy, c.y * gx, c.y * gy};
  };
  return f;
}

/// c * exp(-|x - center|^2 / s^2).
inline VectorTestField gaussian(Vec2 c, Vec2 center, double s, std::string name = "gaussian") {
  VectorTestField f;
  f.name = std::move(name);
  f.g = [=](double x, double y, double) {
    const double dx = x - center.x, dy = y - center.y;
    return std::exp(-(dx * dx + dy * dy) / (s * s)) * c;
  };
  f.grad = [=](double x, double y, double) {
    const double dx = x - center.x, dy = y - center.y;
    const double e = std::exp(-(dx * dx + dy * dy) / (s * s));
    const double gx = -2.0 * dx / (s * s) * e, gy = -2.0 * dy / (s * s) * e;
    return Mat2{c.x * gx, c.x * gy, c.y * gx, c.y * gy};
  };
  return f;
}

/// (x - center) * b(|x - center|): radial dilation localised by the bump.
inline VectorTestField radial_bump(Vec2 center, double rho, std::string name = "radial_bump") {
  VectorTestField f;
  f.name = std::move(name);
  f.g = [=](double x, double y, double) {
    const double dx = x - center.x, dy = y - center.y;
    const double b = bump_profile(dx, dy, rho).first;
    return Vec2{b * dx, b * dy};
  };
  f.grad = [=](double x, double y, double) {
    const double dx = x - center.x, dy = y - center.y;
    const auto [b, s] = bump_profile(dx, dy, rho);
    return Mat2{b + s * dx * dx, s * dx * dy, s * dy * dx, b + s * dy * dy};
  };
  return f;
}

inline ScalarTestField constant_scalar(double c, std::string name = "one") {
  ScalarTestField f;
  f.name = std::move(name);
  f.phi = [c](double, double, double) { return c; };
  f.grad = [](double, double, double) { return Vec2{}; };
  f.neumann_compatible = true;
  return f;
}

inline ScalarTestField gaussian_scalar(Vec2 center, double s, std::string name = "gaussian") {
  ScalarTestField f;
  f.name = std::move(name);
  f.phi = [=](double x, double y, double) {
    const double dx = x - center.x, dy = y - center.y;
    return std::exp(-(dx * dx + dy * dy) / (s * s));
  };
  f.grad = [=](double x, double y, double) {
    const double dx = x - center.x, dy = y - center.y;
    const double e = std::exp(-(dx * dx + dy * dy) / (s * s));
    return Vec2{-2.0 * dx / (s * s) * e, -2.0 * dy / (s * s) * e};
  };
  return f;
}

/// Gaussian summed over its mirror images in the faces of the grid box, so
/// grad phi . nu = 0 on every face (up to images more than two periods away).
inline ScalarTestField neumann_gaussian(Vec2 center, double s, const Grid2D& box, std::string name = "neumann_gaussian") {
  auto images = [](double c, double a, double b) {
    std::vector<double> out;
    const double L = b - a;
    for (int k = -2; k <= 2; ++k) {
      out.push_back(c + 2.0 * k * L);
      out.push_back(2.0 * a - c + 2.0 * k * L);
    }
    return out;
  };
  const std::vector<double> xs = images(center.x, box.x0, box.x_max());
  const std::vector<double> ys = box.is_1d() ? std::vector<double>{center.y} : images(center.y, box.y0, box.y_max());
  ScalarTestField f;
  f.name = std::move(name);
  f.phi = [=](double x, double y, double) {
    double sum = 0.0;
    for (double cx : xs)
      for (double cy : ys) sum += std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (s * s));
    return sum;
  };
  f.grad = [=](double x, double y, double) {
    Vec2 gsum;
    for (double cx : xs)
      for (double cy : ys) {
        const double e = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (s * s));
        gsum.x += -2.0 * (x - cx) / (s * s) * e;
        gsum.y += -2.0 * (y - cy) / (s * s) * e;
      }
    return gsum;
  };
  f.neumann_compatible = true;
  return f;
}

inline ScalarTestField bump_scalar(Vec2 center, double rho, std::string name = "bump") {
  ScalarTestField f;
  f.name = std::move(name);
  f.phi = [=](double x, double y, double) { return bump_profile(x - center.x, y - center.y, rho).first; };
  f.grad = [=](double x, double y, double) {
    const double s = bump_profile(x - center.x, y - center.y, rho).second;
    return Vec2{s * (x - center.x), s * (y - center.y)};
  };
  return f;
}

}  // namespace catalog

// First variation ---------------------------------------------------------------

/// Expanded first variation, one entry per term:
///   bulk         int (g . grad u)(eps Lap u - W'(u)/eps)
///   discrepancy  int_{|grad u| > floor} grad g : (a (x) a) dxi
///   boundary_mu  int_bdry (g . nu)(eps |grad u|^2/2 + W(u)/eps)
///   boundary_nu  -int_bdry eps (g . grad u)(du/dnu)
///   flat         -int_{|grad u| <= floor} div g W(u)/eps
struct VariationReport {
  double delta_direct = 0.0;
  double delta_expanded = 0.0;
  double bulk = 0.0, discrepancy = 0.0, boundary_mu = 0.0, boundary_nu = 0.0, flat = 0.0;
  double ibp_residual = 0.0;

  double abs_terms() const {
    return std::abs(bulk) + std::abs(discrepancy) + std::abs(boundary_mu) + std::abs(boundary_nu) + std::abs(flat);
  }
};

namespace detail {

inline double contract(const Mat2& m, double ax, double ay) {
  return m.xx * ax * ax + m.xy * ax * ay + m.yx * ay * ax + m.yy * ay * ay;
}

/// Jacobian restricted to the active dimensions.
inline Mat2 active_grad(const VectorTestField& f, const Grid2D& g, double x, double y, double t) {
  Mat2 m = f.grad(x, y, t);
  if (g.is_1d()) m.xy = m.yx = m.yy = 0.0;
  return m;
}

}  // namespace detail

inline double first_variation_direct(const PhaseState& s, const VectorTestField& f) {
  const auto& g = s.u.grid;
  const ScalarField2D mu = mu_density(s.u, s.eps);
  const VectorField2D gu = gradient(s.u);
  const double floor = gradient_floor(s.eps);
  ScalarField2D dens(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const double n = std::hypot(gu.vx[k], gu.vy[k]);
      if (n <= floor) continue;
      const Mat2 m = detail::active_grad(f, g, g.x(i), g.y(j), s.t);
      const double trace = g.is_1d() ? m.xx : m.trace();
      dens.values[k] = (trace - detail::contract(m, gu.vx[k] / n, gu.vy[k] / n)) * mu.values[k];
    }
  return integrate_domain(dens);
}

inline VariationReport first_variation_expanded(const PhaseState& s, const VectorTestField& f) {
  const auto& g = s.u.grid;
  const double eps = s.eps;
  const double floor = gradient_floor(eps);
  const VectorField2D gu = gradient(s.u);
  const ScalarField2D lap = laplacian(s.u);
  const ScalarField2D xi = xi_density(s.u, eps);
  ScalarField2D bulk(g), disc(g), flat(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const double x = g.x(i), y = g.y(j);
      const Vec2 gv = f.g(x, y, s.t);
      const double gdu = gv.x * gu.vx[k] + (g.is_1d() ? 0.0 : gv.y * gu.vy[k]);
      const double u = s.u.values[k];
      bulk.values[k] = gdu * (eps * lap.values[k] - double_well_prime(u) / eps);
      const Mat2 m = detail::active_grad(f, g, x, y, s.t);
      const double n = std::hypot(gu.vx[k], gu.vy[k]);
      if (n > floor) {
        disc.values[k] = detail::contract(m, gu.vx[k] / n, gu.vy[k] / n) * xi.values[k];
      } else {
        flat.values[k] = -(g.is_1d() ? m.xx : m.trace()) * double_well(u) / eps;
      }
    }
  VariationReport r;
  r.bulk = integrate_domain(bulk);
  r.discrepancy = integrate_domain(disc);
  r.flat = integrate_domain(flat);
  for (Face face : g.faces()) {
    const Vec2 nu = g.outward_normal(face);
    FaceTrace mu_b = boundary_trace(s.u, face);
    FaceTrace nu_b = mu_b;
    for (int k = 0; k < g.face_count(face); ++k) {
      auto [i, j] = g.face_node(face, k);
      const std::size_t q = g.index(i, j);
      const Vec2 gv = f.g(g.x(i), g.y(j), s.t);
      const double gx = gu.vx[q], gy = g.is_1d() ? 0.0 : gu.vy[q];
      const double gdu = gv.x * gx + (g.is_1d() ? 0.0 : gv.y * gy);
      const double gnu = gv.x * nu.x + (g.is_1d() ? 0.0 : gv.y * nu.y);
      const double dnu = gx * nu.x + gy * nu.y;
      const double u = s.u.values[q];
      mu_b.values[k] = gnu * (0.5 * eps * (gx * gx + gy * gy) + double_well(u) / eps);
      nu_b.values[k] = -eps * gdu * dnu;
    }
    r.boundary_mu += mu_b.integral();
    r.boundary_nu += nu_b.integral();
  }
  r.delta_expanded = r.bulk + r.discrepancy + r.boundary_mu + r.boundary_nu + r.flat;
  r.delta_direct = first_variation_direct(s, f);
  r.ibp_residual = std::abs(r.delta_direct - r.delta_expanded);
  return r;
}

/// H = -(Lap u - W'(u)/eps^2) grad u / |grad u|^2 on {|grad u| > floor}, the
/// inward curvature vector of the level sets; int g . H dmu ~ -delta V(g).
inline VectorField2D mean_curvature_field(const PhaseState& s) {
  const ScalarField2D lap = laplacian(s.u);
  ScalarField2D rate = lap;
  const double ie2 = 1.0 / (s.eps * s.eps);
  for (std::size_t k = 0; k < rate.values.size(); ++k) rate.values[k] -= double_well_prime(s.u.values[k]) * ie2;
  return velocity_field(s.u, rate, s.eps);
}

/// int g . H dmu.
inline double curvature_pairing(const PhaseState& s, const VectorTestField& f) {
  const auto& g = s.u.grid;
  const VectorField2D h = mean_curvature_field(s);
  const ScalarField2D mu = mu_density(s.u, s.eps);
  ScalarField2D d(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const Vec2 gv = f.g(g.x(i), g.y(j), s.t);
      d.values[k] = (gv.x * h.vx[k] + (g.is_1d() ? 0.0 : gv.y * h.vy[k])) * mu.values[k];
    }
  return integrate_domain(d);
}

// Boundary functionals ----------------------------------------------------------

/// sum over faces of int g . v_b dalpha at one instant.
inline double boundary_pairing(const DiffuseDiagnostics& d, const VectorTestField& f, double t) {
  double total = 0.0;
  for (const auto& fd : d.faces) {
    if (fd.vb.empty()) throw UsageError("boundary_pairing: diagnostics carry no boundary velocity");
    std::vector<double> v(fd.x.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = dot(f.g(fd.x[k], fd.y[k], t), fd.vb[k]) * fd.alpha[k];
    total += fd.integral(v);
  }
  return total;
}

inline double boundary_pairing(const PhaseState& s, const VectorTestField& f) {
  double total = 0.0;
  for (Face face : s.u.grid.faces()) {
    const FaceDiagnostics fd = face_diagnostics(s, face);
    if (fd.vb.empty()) throw UsageError("boundary_pairing: state carries no rate");
    std::vector<double> v(fd.x.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = dot(f.g(fd.x[k], fd.y[k], s.t), fd.vb[k]) * fd.alpha[k];
    total += fd.integral(v);
  }
  return total;
}

inline std::string boundary_functional_column(const std::string& field) { return "bf_" + field; }

/// Time integral over [t1, t2] of the pairing recorded by a
/// BoundaryFunctionalObserver for the named field.
inline double boundary_functional(const RunRecord& rec, const std::string& field, double t1, double t2) {
  return window_integral(rec.times(), rec.snapshots.column(boundary_functional_column(field)), t1, t2);
}

/// Boundary part of the first variation (terms boundary_mu + boundary_nu).
inline double boundary_first_variation(const PhaseState& s, const VectorTestField& f) {
  VariationReport r = first_variation_expanded(s, f);
  return r.boundary_mu + r.boundary_nu;
}

/// Boundary first variation with g replaced by g - (g . nu) nu on each face.
inline double tangential_first_variation(const PhaseState& s, const VectorTestField& f) {
  const auto& g = s.u.grid;
  const VectorField2D gu = gradient(s.u);
  double total = 0.0;
  for (Face face : g.faces()) {
    const Vec2 nu = g.outward_normal(face);
    FaceTrace tr = boundary_trace(s.u, face);
    for (int k = 0; k < g.face_count(face); ++k) {
      auto [i, j] = g.face_node(face, k);
      const std::size_t q = g.index(i, j);
      Vec2 gv = f.g(g.x(i), g.y(j), s.t);
      if (g.is_1d()) gv.y = 0.0;
      const Vec2 gt = gv - dot(gv, nu) * nu;
      const double gx = gu.vx[q], gy = g.is_1d() ? 0.0 : gu.vy[q];
      tr.values[k] = -s.eps * (gt.x * gx + gt.y * gy) * (gx * nu.x + gy * nu.y);
    }
    total += tr.integral();
  }
  return total;
}

/// Writes bf_<name> = int g . v_b dalpha and tfv_<name> (tangential first
/// variation) at every snapshot.
struct BoundaryFunctionalObserver {
  std::vector<VectorTestField> fields;

  StepHooks hooks() const {
    StepHooks h;
    h.on_snapshot = [fields = fields](const PhaseState& s, RunRecord& rec) {
      for (const auto& f : fields) {
        rec.snapshots.set(boundary_functional_column(f.name), s.dudt ? boundary_pairing(s, f) : 0.0);
        rec.snapshots.set("tfv_" + f.name, tangential_first_variation(s, f));
      }
    };
    return h;
  }
};

// Brakke balance ----------------------------------------------------------------

enum class BrakkeMode { dirichlet, dynamic, neumann };

inline std::string brakke_series_name(const std::string& phi) { return "brakke_" + phi; }

/// Per-step monitor of the terms of the weighted energy balance
///
///   mu(phi)|_{t1}^{t2} = int int (-phi f^2/eps + f grad phi . grad u) dx dt
///                        + int int d_t phi dmu dt - boundary term
///
/// with f = -eps u_t taken from the solver's own rate. Rows of
/// step_series["brakke_<phi>"]: t, dt, mu_phi, interior, dphidt, bdry_dynamic
/// (sum over dynamic faces of int (eps/sigma) phi u_t^2) and bdry_dirichlet
/// (int eps sigma phi (du/dnu)^2 over the same faces). The snapshot hook adds a
/// row with mu_phi only when no step starts at that time (the final one).
struct BrakkeMonitor {
  ScalarTestField phi;
  std::shared_ptr<SharedStepFields> shared = nullptr;

  StepHooks hooks() const {
    StepHooks h;
    auto state = std::make_shared<Cache>();
    state->phi = phi;
    state->fields = shared ? shared : std::make_shared<SharedStepFields>();
    h.before_step = [state](const PhaseState& s, double dt, RunRecord& rec) { state->before(s, dt, rec); };
    h.on_snapshot = [state](const PhaseState& s, RunRecord& rec) { state->snapshot(s, rec); };
    return h;
  }

 private:
  struct Cache {
    ScalarTestField phi;
    std::shared_ptr<SharedStepFields> fields;
    ScalarField2D phi_n, gx, gy, dphi;
    bool sampled = false;

    void sample(const PhaseState& s) {
      if (sampled && !phi.time_dependent) return;
      const auto& g = s.u.grid;
      phi_n = ScalarField2D(g);
      gx = ScalarField2D(g);
      gy = ScalarField2D(g);
      dphi = ScalarField2D(g);
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          const std::size_t k = g.index(i, j);
          const double x = g.x(i), y = g.y(j);
          phi_n.values[k] = phi.phi(x, y, s.t);
          const Vec2 gr = phi.grad(x, y, s.t);
          gx.values[k] = gr.x;
          gy.values[k] = g.is_1d() ? 0.0 : gr.y;
          dphi.values[k] = phi.dt(x, y, s.t);
        }
      sampled = true;
    }

    double mu_phi(const ScalarField2D& mu) const {
      const double* m = mu.values.data();
      const double* p = phi_n.values.data();
      return integrate_nodes(mu.grid, [m, p](std::size_t k) { return m[k] * p[k]; });
    }

    void start_row(RunRecord& rec, double t) {
      auto& tab = rec.step_series[brakke_series_name(phi.name)];
      if (tab.empty() || tab.at(tab.size() - 1, "t") != t) {
        tab.begin_row();
        tab.set("t", t);
      }
    }

    void snapshot(const PhaseState& s, RunRecord& rec) {
      sample(s);
      auto& tab = rec.step_series[brakke_series_name(phi.name)];
      if (!tab.empty() && tab.at(tab.size() - 1, "t") == s.t) return;
      start_row(rec, s.t);
      tab.set("mu_phi", mu_phi(fields->mu(s)));
    }

    void before(const PhaseState& s, double dt, RunRecord& rec) {
      sample(s);
      const auto& g = s.u.grid;
      const ScalarField2D& mu = fields->mu(s);
      const VectorField2D& gu = fields->grad(s);
      const ScalarField2D& r = *s.dudt;
      const double eps = s.eps;
      const double interior = integrate_nodes(g, [&](std::size_t k) {
        const double f = -eps * r.values[k];
        return -phi_n.values[k] * f * f / eps + f * (gx.values[k] * gu.vx[k] + gy.values[k] * gu.vy[k]);
      });
      const double dphidt = phi.time_dependent
                                ? integrate_nodes(g, [&](std::size_t k) { return dphi.values[k] * mu.values[k]; })
                                : 0.0;
      double b_dyn = 0.0, b_dir = 0.0;
      for (Face face : g.faces())
        if (auto* d = std::get_if<Dynamic>(&law_of(s.laws, face))) {
          FaceTrace a = boundary_trace(r, face), b = a;
          const auto dn = normal_derivative(s.u, face);
          for (int k = 0; k < g.face_count(face); ++k) {
            auto [i, j] = g.face_node(face, k);
            const double p = phi_n(i, j);
            a.values[k] = (s.eps / d->sigma) * p * a.values[k] * a.values[k];
            b.values[k] = s.eps * d->sigma * p * dn[k] * dn[k];
          }
          b_dyn += a.integral();
          b_dir += b.integral();
        }
      start_row(rec, s.t);
      auto& tab = rec.step_series[brakke_series_name(phi.name)];
      tab.set("dt", dt);
      tab.set("mu_phi", mu_phi(mu));
      tab.set("interior", interior);
      tab.set("dphidt", dphidt);
      tab.set("bdry_dynamic", b_dyn);
      tab.set("bdry_dirichlet", b_dir);
    }
  };
};

struct BrakkeResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double interior = 0.0, dphidt = 0.0, boundary = 0.0;
  double t1 = 0.0, t2 = 0.0;  // step times actually used
  /// Residual relative to max(|lhs|, |rhs|).
  double relative() const {
    const double m = std::max(std::abs(lhs), std::abs(rhs));
    return m > 0.0 ? std::abs(residual) / m : 0.0;
  }
};

/// Evaluates the balance over the steps whose start times lie in [t1, t2]:
/// lhs = mu(phi)(t_b) - mu(phi)(t_a), rhs the left Riemann sum of the
/// integrands, where t_a is the first recorded time >= t1 and t_b the last
/// <= t2. The boundary term depends on the mode (none for neumann).
inline BrakkeResult brakke_residual(const RunRecord& rec, const ScalarTestField& phi, double t1, double t2,
                                    BrakkeMode mode) {
  if (mode == BrakkeMode::dynamic && !phi.neumann_compatible)
    throw UsageError("dynamic-mode balance needs a test function with grad phi . nu = 0");
  if (!(t1 < t2)) throw UsageError("brakke_residual: need t1 < t2");
  auto it = rec.step_series.find(brakke_series_name(phi.name));
  if (it == rec.step_series.end()) throw UsageError("no balance monitor recorded for " + phi.name);
  const Table& tab = it->second;
  const auto t = tab.column("t");
  const double slack = 1e-9 * std::max(1.0, std::abs(t.back()));
  if (t1 < t.front() - slack || t2 > t.back() + slack) throw UsageError("window outside record");
  std::size_t a = 0;
  while (a < t.size() && t[a] < t1 - slack) ++a;
  std::size_t b = t.size() - 1;
  while (b > 0 && t[b] > t2 + slack) --b;
  if (!(a < b)) throw UsageError("brakke_residual: window shorter than one step");
  const auto mu = tab.column("mu_phi"), dt = tab.column("dt"), in = tab.column("interior"),
             tp = tab.column("dphidt"), bdy = tab.column("bdry_dynamic"), bdi = tab.column("bdry_dirichlet");
  BrakkeResult r;
  r.t1 = t[a];
  r.t2 = t[b];
  r.lhs = mu[b] - mu[a];
  for (std::size_t n = a; n < b; ++n) {
    r.interior += dt[n] * in[n];
    r.dphidt += dt[n] * tp[n];
    if (mode == BrakkeMode::dynamic) r.boundary += dt[n] * bdy[n];
    if (mode == BrakkeMode::dirichlet) r.boundary += dt[n] * bdi[n];
  }
  r.rhs = r.interior + r.dphidt - r.boundary;
  r.residual = r.lhs - r.rhs;
  return r;
}

}  // namespace aclab
