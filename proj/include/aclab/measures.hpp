#pragma once

// Diffuse measures, velocities and a priori quantities of a phase state.
//
//   mu    = eps |grad u|^2 / 2 + W(u) / eps
//   xi    = eps |grad u|^2 / 2 - W(u) / eps
//   alpha = eps |grad_b u|^2                   (on the boundary)
//   v     = -u_t grad u / |grad u|^2
//   v_b   = -u_t grad_b u / |grad_b u|^2
//
// In the volume densities |grad u|^2 is the edge average of squared forward
// differences, so that the trapezoid integral of mu is exactly the energy whose
// gradient the solver follows. Pointwise boundary quantities use the
// second-order node gradient.

#include <aclab/grid.hpp>
#include <aclab/record.hpp>
#include <aclab/solver.hpp>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aclab {

inline constexpr double kSigma0 = 4.0 / 3.0;

inline double gradient_floor(double eps) { return 1e-12 / eps; }

/// Edge-averaged |grad u|^2 per node: the mean of the squared forward
/// differences on the (one or two) edges touching the node in each direction.
inline ScalarField2D grad_sq_energy(const ScalarField2D& u) {
  const auto& g = u.grid;
  detail::require_active(g);
  ScalarField2D out(g);
  const int nx = g.nx;
  const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = g.is_1d() ? 0.0 : 1.0 / (g.hy * g.hy);
  parallel_rows(g.ny, [&](int jb, int je) {
    std::vector<double> ex(nx - 1);
    for (int j = jb; j < je; ++j) {
      const double* r = &u.values[g.index(0, j)];
      double* o = &out.values[g.index(0, j)];
      for (int i = 0; i + 1 < nx; ++i) {
        const double d = r[i + 1] - r[i];
        ex[i] = d * d * ihx2;
      }
      o[0] = ex[0];
      o[nx - 1] = ex[nx - 2];
      for (int i = 1; i + 1 < nx; ++i) o[i] = 0.5 * (ex[i - 1] + ex[i]);
      if (g.is_1d()) continue;
      const double* dn = j > 0 ? r - nx : nullptr;
      const double* up = j + 1 < g.ny ? r + nx : nullptr;
      if (dn && up) {
        for (int i = 0; i < nx; ++i) {
          const double a = r[i] - dn[i], b = up[i] - r[i];
          o[i] += 0.5 * (a * a + b * b) * ihy2;
        }
      } else {
        const double* q = dn ? dn : up;
        for (int i = 0; i < nx; ++i) {
          const double a = r[i] - q[i];
          o[i] += a * a * ihy2;
        }
      }
    }
  });
  return out;
}

inline ScalarField2D mu_density(const ScalarField2D& u, double eps) {
  ScalarField2D d = grad_sq_energy(u);
  for (std::size_t k = 0; k < d.values.size(); ++k)
    d.values[k] = 0.5 * eps * d.values[k] + double_well(u.values[k]) / eps;
  return d;
}

inline ScalarField2D xi_density(const ScalarField2D& u, double eps) {
  ScalarField2D d = grad_sq_energy(u);
  for (std::size_t k = 0; k < d.values.size(); ++k)
    d.values[k] = 0.5 * eps * d.values[k] - double_well(u.values[k]) / eps;
  return d;
}

inline double energy(const PhaseState& s) { return integrate_domain(mu_density(s.u, s.eps)); }

/// Pointwise quantities on one face, ordered as boundary_trace.
struct FaceDiagnostics {
  Face face = Face::bottom;
  std::vector<double> x, y, weights;
  std::vector<double> u;
  std::vector<double> d_tan;   // derivative along the face
  std::vector<double> d_nu;    // outward normal derivative
  std::vector<double> alpha;   // eps |grad_b u|^2
  std::vector<double> sin_theta, cos_theta;
  std::vector<Vec2> vb;        // empty when no rate is available
  std::vector<double> dudt;    // empty when no rate is available

  double integral(const std::vector<double>& v) const {
    std::vector<double> p(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) p[k] = v[k] * weights[k];
    return pairwise_sum(p.data(), p.size());
  }
};

struct DiffuseDiagnostics {
  ScalarField2D mu_density;
  ScalarField2D xi_density;
  std::optional<VectorField2D> v_field;
  std::vector<FaceDiagnostics> faces;
  double E_total = 0.0;
  double mu_total = 0.0;
  double xi_abs_total = 0.0;
  double alpha_total = 0.0;

  const FaceDiagnostics& face(Face f) const {
    for (const auto& fd : faces)
      if (fd.face == f) return fd;
    throw UsageError("face " + std::string(face_name(f)) + " not present");
  }
};

inline FaceDiagnostics face_diagnostics(const PhaseState& s, Face f) {
  const auto& g = s.u.grid;
  const FaceTrace tr = boundary_trace(s.u, f);
  FaceDiagnostics fd;
  fd.face = f;
  fd.x = tr.x;
  fd.y = tr.y;
  fd.weights = tr.weights;
  fd.u = tr.values;
  fd.d_tan = tangential_derivative(s.u, f);
  fd.d_nu = normal_derivative(s.u, f);
  const std::size_t n = tr.values.size();
  const double floor = gradient_floor(s.eps);
  fd.alpha.resize(n);
  fd.sin_theta.assign(n, 0.0);
  fd.cos_theta.assign(n, 0.0);
  std::vector<double> rate;
  if (s.dudt) {
    rate = boundary_trace(*s.dudt, f).values;
    fd.dudt = rate;
    fd.vb.assign(n, Vec2{});
  }
  const Vec2 tau = g.tangent(f);
  for (std::size_t k = 0; k < n; ++k) {
    const double dt2 = fd.d_tan[k] * fd.d_tan[k];
    fd.alpha[k] = s.eps * dt2;
    const double gn = std::sqrt(dt2 + fd.d_nu[k] * fd.d_nu[k]);
    if (gn > floor) {
      fd.sin_theta[k] = std::abs(fd.d_tan[k]) / gn;
      fd.cos_theta[k] = std::abs(fd.d_nu[k]) / gn;
    }
    if (s.dudt && std::abs(fd.d_tan[k]) > floor) fd.vb[k] = (-rate[k] / fd.d_tan[k]) * tau;
  }
  return fd;
}

/// v = -u_t grad u / |grad u|^2 where |grad u| > floor, 0 elsewhere.
inline VectorField2D velocity_field(const ScalarField2D& u, const ScalarField2D& dudt, double eps) {
  VectorField2D gu = gradient(u);
  const double floor = gradient_floor(eps);
  for (std::size_t k = 0; k < gu.vx.size(); ++k) {
    const double n2 = gu.vx[k] * gu.vx[k] + gu.vy[k] * gu.vy[k];
    if (std::sqrt(n2) > floor) {
      const double c = -dudt.values[k] / n2;
      gu.vx[k] *= c;
      gu.vy[k] *= c;
    } else {
      gu.vx[k] = gu.vy[k] = 0.0;
    }
  }
  return gu;
}

inline DiffuseDiagnostics diagnostics(const PhaseState& s) {
  DiffuseDiagnostics d;
  d.mu_density = mu_density(s.u, s.eps);
  d.xi_density = xi_density(s.u, s.eps);
  d.E_total = integrate_domain(d.mu_density);
  d.mu_total = d.E_total;
  ScalarField2D ax = d.xi_density;
  for (double& v : ax.values) v = std::abs(v);
  d.xi_abs_total = integrate_domain(ax);
  if (s.dudt) d.v_field = velocity_field(s.u, *s.dudt, s.eps);
  for (Face f : s.u.grid.faces()) {
    d.faces.push_back(face_diagnostics(s, f));
    d.alpha_total += d.faces.back().integral(d.faces.back().alpha);
  }
  return d;
}

// Dissipation -----------------------------------------------------------------

/// Pieces of the discrete energy balance over one step.
struct DissipationTerms {
  double dE_dt = 0.0;      // (E_after - E_before) / dt
  double interior = 0.0;   // int eps u_t^2
  double boundary = 0.0;   // sum over dynamic faces of int (eps/sigma) u_t^2
  double raw = 0.0;        // dE_dt + interior + boundary
  double normalized = 0.0; // raw / max(E_before, 1)
};

namespace detail {

inline double rate_interior(const ScalarField2D& rate, double eps) {
  const double* r = rate.values.data();
  return integrate_nodes(rate.grid, [r, eps](std::size_t k) { return eps * r[k] * r[k]; });
}

inline double rate_boundary(const PhaseState& s, const ScalarField2D& rate) {
  double total = 0.0;
  for (Face f : s.u.grid.faces())
    if (auto* dyn = std::get_if<Dynamic>(&law_of(s.laws, f))) {
      FaceTrace tr = boundary_trace(rate, f);
      for (double& v : tr.values) v = (s.eps / dyn->sigma) * v * v;
      total += tr.integral();
    }
  return total;
}

inline DissipationTerms balance(double e_before, double e_after, double dt, double interior, double boundary) {
  DissipationTerms t;
  t.dE_dt = (e_after - e_before) / dt;
  t.interior = interior;
  t.boundary = boundary;
  t.raw = t.dE_dt + interior + boundary;
  t.normalized = t.raw / std::max(e_before, 1.0);
  return t;
}

}  // namespace detail

/// Energy balance between two consecutive states; after.dudt must be the rate
/// of the step that produced `after`.
inline DissipationTerms dissipation_terms(const PhaseState& before, const PhaseState& after, double dt) {
  if (!after.dudt) throw UsageError("dissipation_residual: state has no rate");
  return detail::balance(energy(before), energy(after), dt, detail::rate_interior(*after.dudt, after.eps),
                         detail::rate_boundary(after, *after.dudt));
}

inline double dissipation_residual(const PhaseState& before, const PhaseState& after, double dt) {
  return dissipation_terms(before, after, dt).normalized;
}

// Boundary quantities ---------------------------------------------------------

/// int eps (du/dnu)^2 over the listed faces (all active faces by default).
inline double normal_dirichlet_energy(const PhaseState& s, std::vector<Face> faces = {}) {
  if (faces.empty()) faces = s.u.grid.faces();
  double total = 0.0;
  for (Face f : faces) {
    FaceTrace tr = boundary_trace(s.u, f);
    const auto dn = normal_derivative(s.u, f);
    for (std::size_t k = 0; k < dn.size(); ++k) tr.values[k] = s.eps * dn[k] * dn[k];
    total += tr.integral();
  }
  return total;
}

/// int (eps |grad_b u|^2 / 2 + W(u) / eps) over the boundary.
inline double boundary_energy(const PhaseState& s) {
  double total = 0.0;
  for (Face f : s.u.grid.faces()) {
    FaceTrace tr = boundary_trace(s.u, f);
    const auto dt = tangential_derivative(s.u, f);
    for (std::size_t k = 0; k < dt.size(); ++k)
      tr.values[k] = 0.5 * s.eps * dt[k] * dt[k] + double_well(tr.values[k]) / s.eps;
    total += tr.integral();
  }
  return total;
}

inline double alpha_mass(const PhaseState& s) {
  double total = 0.0;
  for (Face f : s.u.grid.faces()) {
    FaceTrace tr = boundary_trace(s.u, f);
    const auto dt = tangential_derivative(s.u, f);
    for (std::size_t k = 0; k < dt.size(); ++k) tr.values[k] = s.eps * dt[k] * dt[k];
    total += tr.integral();
  }
  return total;
}

inline double boundary_energy_window(const RunRecord& rec, double t1, double t2) {
  return window_integral(rec.times(), rec.snapshots.column("boundary_energy"), t1, t2);
}

/// Phi(u) = u - u^3 / 3.
inline ScalarField2D w_transform(const ScalarField2D& u) {
  ScalarField2D w = u;
  for (double& v : w.values) v = v - v * v * v / 3.0;
  return w;
}

/// (|int_face w|, (2/3) |face|); the first strictly below the second signals
/// a phase boundary on the face.
inline std::pair<double, double> boundary_phase_indicator(const PhaseState& s, Face f) {
  FaceTrace tr = boundary_trace(s.u, f);
  for (double& v : tr.values) v = v - v * v * v / 3.0;
  return {std::abs(tr.integral()), 2.0 / 3.0 * s.u.grid.face_length(f)};
}

/// ||w - mean||_1 / ||dw/ds||_1 for uniformly spaced samples. A periodic trace
/// lists each point once; otherwise the samples span a closed interval and
/// use trapezoid weights and one-sided end differences. 0/0 -> 0, c/0 -> inf.
inline double poincare_wirtinger_ratio(const std::vector<double>& w, double spacing, bool periodic) {
  const std::size_t n = w.size();
  if (n < 3) throw UsageError("poincare_wirtinger_ratio needs at least 3 samples");
  std::vector<double> wt(n, spacing), dw(n);
  if (!periodic) wt.front() = wt.back() = 0.5 * spacing;
  for (std::size_t k = 0; k < n; ++k) {
    if (periodic) {
      dw[k] = (w[(k + 1) % n] - w[(k + n - 1) % n]) / (2.0 * spacing);
    } else {
      dw[k] = detail::diff1(w.data(), 1, static_cast<int>(n), static_cast<int>(k), spacing);
    }
  }
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = wt[k] * w[k];
  const double len = pairwise_sum(wt.data(), n);
  const double mean = pairwise_sum(p.data(), n) / len;
  for (std::size_t k = 0; k < n; ++k) p[k] = wt[k] * std::abs(w[k] - mean);
  const double num = pairwise_sum(p.data(), n);
  for (std::size_t k = 0; k < n; ++k) p[k] = wt[k] * std::abs(dw[k]);
  const double den = pairwise_sum(p.data(), n);
  if (den == 0.0) {
    // A constant trace leaves only rounding in the numerator.
    for (std::size_t k = 0; k < n; ++k) p[k] = wt[k] * std::abs(w[k]);
    return num <= 1e-14 * pairwise_sum(p.data(), n) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return num / den;
}

/// mu density and gradient of the current state, computed once per state and
/// shared by the observers that need them.
struct SharedStepFields {
  const ScalarField2D& mu(const PhaseState& s) {
    if (!same(s, mu_key_)) {
      mu_ = mu_density(s.u, s.eps);
      mu_key_ = {s.step_index, s.t};
    }
    return mu_;
  }

  const VectorField2D& grad(const PhaseState& s) {
    if (!same(s, grad_key_)) {
      grad_ = gradient(s.u);
      grad_key_ = {s.step_index, s.t};
    }
    return grad_;
  }

 private:
  static bool same(const PhaseState& s, const std::pair<long, double>& k) { return k.first == s.step_index && k.second == s.t; }
  std::pair<long, double> mu_key_{-1, std::numeric_limits<double>::quiet_NaN()};
  std::pair<long, double> grad_key_{-1, std::numeric_limits<double>::quiet_NaN()};
  ScalarField2D mu_;
  VectorField2D grad_;
};

// Observers -------------------------------------------------------------------

/// Per-snapshot columns written by the series observer.
///
///   E, E_over_sigma0, mu_total, xi_abs, alpha_total, boundary_energy,
///   normal_dirichlet_energy, normal_dirichlet_<face>, w_integral_<face>,
///   w_bound_<face>, dissipation_residual (latest step, NaN at t0),
///   dissipation_residual_max (largest |.| since the previous snapshot)
///
/// With per-step monitoring, step_series["dissipation"] holds one row per
/// step: t (start of step), dt, E (before), residual, raw.
struct SeriesObserver {
  bool per_step = true;
  std::shared_ptr<SharedStepFields> shared = std::make_shared<SharedStepFields>();
  double e_cached = std::numeric_limits<double>::quiet_NaN();
  double interior = 0.0, boundary = 0.0;
  double last_residual = std::numeric_limits<double>::quiet_NaN();
  double max_residual = 0.0;

  StepHooks hooks() {
    StepHooks h;
    h.on_snapshot = [this](const PhaseState& s, RunRecord& rec) { snapshot(s, rec); };
    if (per_step) {
      h.before_step = [this](const PhaseState& s, double dt, RunRecord& rec) { before(s, dt, rec); };
      h.after_step = [this](const PhaseState& s, double dt, RunRecord& rec) { after(s, dt, rec); };
    }
    return h;
  }

  void before(const PhaseState& s, double dt, RunRecord& rec) {
    if (std::isnan(e_cached)) e_cached = integrate_domain(shared->mu(s));
    interior = detail::rate_interior(*s.dudt, s.eps);
    boundary = detail::rate_boundary(s, *s.dudt);
    auto& tab = rec.step_series["dissipation"];
    tab.begin_row();
    tab.set("t", s.t);
    tab.set("dt", dt);
    tab.set("E", e_cached);
  }

  void after(const PhaseState& s, double dt, RunRecord& rec) {
    const double e_after = integrate_domain(shared->mu(s));
    const DissipationTerms t = detail::balance(e_cached, e_after, dt, interior, boundary);
    e_cached = e_after;
    auto& tab = rec.step_series["dissipation"];
    tab.set("residual", t.normalized);
    tab.set("raw", t.raw);
    last_residual = t.normalized;
    max_residual = std::max(max_residual, std::abs(t.normalized));
  }

  void snapshot(const PhaseState& s, RunRecord& rec) {
    const DiffuseDiagnostics d = diagnostics(s);
    auto& tab = rec.snapshots;
    tab.set("E", d.E_total);
    tab.set("E_over_sigma0", d.E_total / kSigma0);
    tab.set("mu_total", d.mu_total);
    tab.set("xi_abs", d.xi_abs_total);
    tab.set("alpha_total", d.alpha_total);
    tab.set("boundary_energy", boundary_energy(s));
    double nd = 0.0;
    for (Face f : s.u.grid.faces()) {
      const double v = normal_dirichlet_energy(s, {f});
      nd += v;
      const std::string name(face_name(f));
      tab.set("normal_dirichlet_" + name, v);
      const auto [wi, wb] = boundary_phase_indicator(s, f);
      tab.set("w_integral_" + name, wi);
      tab.set("w_bound_" + name, wb);
    }
    tab.set("normal_dirichlet_energy", nd);
    tab.set("dissipation_residual", last_residual);
    tab.set("dissipation_residual_max", max_residual);
    max_residual = 0.0;
  }
};

/// Bounds monitored over a finished run.
struct AprioriReport {
  double D0 = 0.0;
  std::vector<double> times;
  std::vector<double> mu_sup;               // running max of mu_t(closure)
  std::vector<double> dissipation_residual; // per snapshot
  std::vector<double> normal_dirichlet_energy;
  double boundary_energy_integral = 0.0;    // over the whole record
  bool mu_bounded = true;                   // mu_sup <= D0 (1 + 1e-9)
};

inline AprioriReport apriori_report(const RunRecord& rec) {
  AprioriReport r;
  r.times = rec.times();
  if (r.times.empty()) throw UsageError("apriori_report: empty record");
  const auto mu = rec.snapshots.column("mu_total");
  r.D0 = mu.front();
  double run = 0.0;
  for (double m : mu) {
    run = std::max(run, m);
    r.mu_sup.push_back(run);
    if (run > r.D0 * (1.0 + 1e-9) + 1e-12) r.mu_bounded = false;
  }
  r.dissipation_residual = rec.snapshots.column("dissipation_residual");
  r.normal_dirichlet_energy = rec.snapshots.column("normal_dirichlet_energy");
  if (r.times.size() > 1)
    r.boundary_energy_integral = boundary_energy_window(rec, r.times.front(), r.times.back());
  return r;
}

}  // namespace aclab
