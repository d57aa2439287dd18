#pragma once

// Explicit Allen-Cahn integrator
//
//   du/dt = Lap(u) - W'(u) / eps^2          in the interior,
//   du/dt + sigma * du/dnu = 0              on faces with a dynamic law,
//
// with frozen (Dirichlet) and zero-flux (Neumann) faces as the two limits of
// the sigma family.

#include <aclab/error.hpp>
#include <aclab/grid.hpp>
#include <aclab/record.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace aclab {

/// Dynamic boundary law du/dt = -sigma du/dnu.
struct Dynamic {
  double sigma = 1.0;
};
/// sigma -> 0 limit: the initial trace is kept forever.
struct DirichletFrozen {
  std::vector<double> trace;
};
/// sigma -> infinity limit: du/dnu = 0 through a mirrored ghost node.
struct NeumannZeroFlux {};

using BoundaryLaw = std::variant<Dynamic, DirichletFrozen, NeumannZeroFlux>;
using FaceLaws = std::array<BoundaryLaw, 4>;

inline FaceLaws all_neumann() { return {NeumannZeroFlux{}, NeumannZeroFlux{}, NeumannZeroFlux{}, NeumannZeroFlux{}}; }

inline const BoundaryLaw& law_of(const FaceLaws& laws, Face f) { return laws[static_cast<int>(f)]; }

inline std::string law_name(const BoundaryLaw& law) {
  if (std::holds_alternative<Dynamic>(law)) return "dynamic";
  if (std::holds_alternative<DirichletFrozen>(law)) return "dirichlet";
  return "neumann";
}

// Initial interfaces --------------------------------------------------------

/// Plane x = position; positive phase on the side selected by sign.
struct Line1D {
  double position = 0.5;
  double sign = 1.0;
};
/// Circle; sign = +1 puts the positive phase inside.
struct CircleArc {
  Vec2 center;
  double radius = 1.0;
  double sign = 1.0;
};
/// Half plane {normal . x > offset} is the positive phase.
struct Halfspace {
  Vec2 normal{1.0, 0.0};
  double offset = 0.0;
};

using InterfaceDescriptor = std::variant<Line1D, CircleArc, Halfspace>;

/// Circle through (0,0) and (2,0) centred at (1, -1/sigma).
inline CircleArc sigma_arc(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("sigma arc needs sigma > 0");
  return CircleArc{{1.0, -1.0 / sigma}, std::sqrt(1.0 + 1.0 / (sigma * sigma)), 1.0};
}

/// Signed distance to the interface, positive in the positive phase.
inline double signed_distance(const InterfaceDescriptor& d, double x, double y) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Line1D>) {
          return s.sign * (x - s.position);
        } else if constexpr (std::is_same_v<T, CircleArc>) {
          return s.sign * (s.radius - std::hypot(x - s.center.x, y - s.center.y));
        } else {
          const double n = norm(s.normal);
          return (s.normal.x * x + s.normal.y * y) / n - s.offset;
        }
      },
      d);
}

// Double well ---------------------------------------------------------------

inline double double_well(double s) {
  const double a = 1.0 - s * s;
  return 0.5 * a * a;
}

inline double double_well_prime(double s) { return -2.0 * s * (1.0 - s * s); }

// State ---------------------------------------------------------------------

struct PhaseState {
  ScalarField2D u;
  double t = 0.0;
  double eps = 0.05;
  FaceLaws laws = all_neumann();
  /// Rate used by the last step: dudt = (u_{n+1} - u_n) / dt.
  std::optional<ScalarField2D> dudt;
  long step_index = 0;
  /// sup|u0| <= 1 held initially, so the maximum principle is enforced.
  bool bounded = true;
};

namespace detail {

inline void validate_physics(double eps, const FaceLaws& laws) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("physics.eps out of (0,1)");
  for (Face f : kAllFaces)
    if (auto* d = std::get_if<Dynamic>(&law_of(laws, f)); d && !(d->sigma > 0.0))
      throw ConfigError("dynamic law on face " + std::string(face_name(f)) + " needs sigma > 0");
}

inline void validate_descriptor(const Grid2D& g, const InterfaceDescriptor& desc) {
  const double xa = g.x0, xb = g.x_max(), ya = g.y0, yb = g.y_max();
  if (auto* l = std::get_if<Line1D>(&desc)) {
    if (!(l->position > xa && l->position < xb)) throw ConfigError("initial.x outside the grid extent");
    if (l->sign == 0.0) throw ConfigError("initial.sign must be nonzero");
  } else if (auto* c = std::get_if<CircleArc>(&desc)) {
    if (!(c->radius > 0.0)) throw ConfigError("initial.radius must be positive");
    // The circle must cross the box: nearest point inside, farthest corner outside.
    const double qx = std::clamp(c->center.x, xa, xb), qy = std::clamp(c->center.y, ya, yb);
    const double near = std::hypot(qx - c->center.x, qy - c->center.y);
    const double far = std::hypot(std::max(std::abs(xa - c->center.x), std::abs(xb - c->center.x)),
                                  std::max(std::abs(ya - c->center.y), std::abs(yb - c->center.y)));
    if (!(near < c->radius && far > c->radius)) throw ConfigError("initial circle does not cross the grid");
  } else if (auto* h = std::get_if<Halfspace>(&desc)) {
    if (norm(h->normal) == 0.0) throw ConfigError("initial.normal must be nonzero");
    double lo = INFINITY, hi = -INFINITY;
    for (double x : {xa, xb})
      for (double y : {ya, yb}) {
        const double d = signed_distance(desc, x, y);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    if (!(lo < 0.0 && hi > 0.0)) throw ConfigError("initial half plane does not cut the grid");
  }
}

}  // namespace detail

/// u0 = tanh(d / eps) with d the signed distance to the described interface.
inline PhaseState init_profile(const Grid2D& grid, const InterfaceDescriptor& desc, double eps,
                               FaceLaws laws = all_neumann()) {
  detail::validate_physics(eps, laws);
  detail::validate_descriptor(grid, desc);
  PhaseState s;
  s.eps = eps;
  s.u = ScalarField2D::sample(grid, [&](double x, double y) { return std::tanh(signed_distance(desc, x, y) / eps); });
  s.laws = std::move(laws);
  for (Face f : grid.faces())
    if (auto* d = std::get_if<DirichletFrozen>(&s.laws[static_cast<int>(f)])) d->trace = boundary_trace(s.u, f).values;
  s.bounded = s.u.max_abs() <= 1.0;
  return s;
}

/// State from explicit nodal data (tests, restarts of dumped fields).
inline PhaseState make_state(ScalarField2D u, double eps, FaceLaws laws = all_neumann()) {
  detail::validate_physics(eps, laws);
  PhaseState s;
  s.eps = eps;
  s.u = std::move(u);
  s.laws = std::move(laws);
  for (Face f : s.u.grid.faces())
    if (auto* d = std::get_if<DirichletFrozen>(&s.laws[static_cast<int>(f)])) d->trace = boundary_trace(s.u, f).values;
  s.bounded = s.u.max_abs() <= 1.0;
  return s;
}

/// Largest admissible explicit step: diffusion limit h^2/(2 dim), reaction
/// stiffness eps^2/8, and 2h/(3 sigma) for the one-sided dynamic boundary ODE.
inline double stability_bound(const PhaseState& s) {
  const auto& g = s.u.grid;
  const double h = g.min_spacing();
  double bound = std::min(h * h / (2.0 * g.dim()), s.eps * s.eps / 8.0);
  for (Face f : g.faces())
    if (auto* d = std::get_if<Dynamic>(&law_of(s.laws, f)))
      bound = std::min(bound, 2.0 * g.normal_spacing(f) / (3.0 * d->sigma));
  return bound;
}

inline double stable_dt(const PhaseState& s, double safety = 0.5) { return safety * stability_bound(s); }

namespace detail {

/// Laplacian with mirrored ghosts wherever a neighbour is missing.
inline double ghost_laplacian(const ScalarField2D& u, int i, int j) {
  const auto& g = u.grid;
  const double c = u(i, j);
  const double xl = i > 0 ? u(i - 1, j) : u(i + 1, j);
  const double xr = i < g.nx - 1 ? u(i + 1, j) : u(i - 1, j);
  double v = (xl + xr - 2.0 * c) / (g.hx * g.hx);
  if (!g.is_1d()) {
    const double yd = j > 0 ? u(i, j - 1) : u(i, j + 1);
    const double yu = j < g.ny - 1 ? u(i, j + 1) : u(i, j - 1);
    v += (yd + yu - 2.0 * c) / (g.hy * g.hy);
  }
  return v;
}

inline double boundary_rate(const PhaseState& s, Face f, int i, int j) {
  const auto& u = s.u;
  const auto& law = law_of(s.laws, f);
  if (std::holds_alternative<DirichletFrozen>(law)) return 0.0;
  if (auto* d = std::get_if<Dynamic>(&law)) {
    const Vec2 nu = u.grid.outward_normal(f);
    const double dnu = nu.x * ddx(u, i, j) + nu.y * ddy(u, i, j);
    return -d->sigma * dnu;
  }
  return ghost_laplacian(u, i, j) - double_well_prime(u(i, j)) / (s.eps * s.eps);
}

}  // namespace detail

/// du/dt as the scheme evaluates it at every node (boundary laws included).
inline void compute_rate(const PhaseState& s, ScalarField2D& rate) {
  const auto& g = s.u.grid;
  if (rate.values.size() != g.size()) rate = ScalarField2D(g);
  const double ihx2 = 1.0 / (g.hx * g.hx);
  const double ihy2 = g.is_1d() ? 0.0 : 1.0 / (g.hy * g.hy);
  const double ieps2 = 1.0 / (s.eps * s.eps);
  const double* u = s.u.values.data();
  double* r = rate.values.data();
  const int nx = g.nx;
  parallel_rows(g.ny, [&](int jb, int je) {
    for (int j = jb; j < je; ++j) {
      if (!g.is_1d() && (j == 0 || j == g.ny - 1)) {
        for (int i = 0; i < nx; ++i) r[g.index(i, j)] = detail::boundary_rate(s, *g.owner(i, j), i, j);
        continue;
      }
      const std::size_t k0 = g.index(0, j);
      r[k0] = detail::boundary_rate(s, *g.owner(0, j), 0, j);
      r[k0 + nx - 1] = detail::boundary_rate(s, *g.owner(nx - 1, j), nx - 1, j);
      const std::ptrdiff_t sy = g.is_1d() ? 0 : nx;
      for (std::size_t k = k0 + 1; k < k0 + nx - 1; ++k) {
        const double c = u[k];
        const double lap = (u[k + 1] + u[k - 1] - 2.0 * c) * ihx2 + (u[k + sy] + u[k - sy] - 2.0 * c) * ihy2;
        r[k] = lap - double_well_prime(c) * ieps2;
      }
    }
  });
}

namespace detail {

/// u += dt * rate; returns max|u| after the update and flags non-finite values.
inline double apply_rate(PhaseState& s, double dt, bool& finite) {
  auto& u = s.u.values;
  const auto& r = s.dudt->values;
  double m = 0.0;
  finite = true;
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] += dt * r[k];
    const double a = std::abs(u[k]);
    if (!(a <= m)) {
      if (!std::isfinite(a)) finite = false;
      m = std::max(m, a);
    }
  }
  return m;
}

inline void check_dt(const PhaseState& s, double dt) {
  if (!(dt > 0.0)) throw UsageError("time step must be positive");
  const double bound = stability_bound(s);
  if (dt > bound * (1.0 + 1e-12))
    throw StabilityError("dt = " + std::to_string(dt) + " exceeds the explicit stability bound " + std::to_string(bound));
}

inline void finish_step(PhaseState& s, double dt) {
  bool finite = true;
  const double m = apply_rate(s, dt, finite);
  s.t += dt;
  ++s.step_index;
  if (!finite) throw DivergenceError("non-finite values at step " + std::to_string(s.step_index), s.step_index);
  if (s.bounded && m > 1.0 + 1e-12) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "maximum principle violated at step %ld: max|u| = %.17g", s.step_index, m);
    throw DivergenceError(buf, s.step_index);
  }
}

}  // namespace detail

/// One explicit Euler step.
inline PhaseState step(PhaseState s, double dt) {
  detail::check_dt(s, dt);
  if (!s.dudt) s.dudt.emplace(s.u.grid);
  compute_rate(s, *s.dudt);
  detail::finish_step(s, dt);
  return s;
}

/// Callbacks invoked by run(). before_step sees u_n together with the rate
/// about to be applied (in dudt); after_step sees u_{n+1}.
struct StepHooks {
  std::function<void(const PhaseState&, double, RunRecord&)> before_step;
  std::function<void(const PhaseState&, double, RunRecord&)> after_step;
  std::function<void(const PhaseState&, RunRecord&)> on_snapshot;
};

/// Runs both sets of callbacks, a first.
inline StepHooks chain(StepHooks a, StepHooks b) {
  StepHooks c;
  auto join = [](auto f, auto g) -> decltype(f) {
    if (!f) return g;
    if (!g) return f;
    return [f, g](auto&&... args) {
      f(args...);
      g(args...);
    };
  };
  c.before_step = join(std::move(a.before_step), std::move(b.before_step));
  c.after_step = join(std::move(a.after_step), std::move(b.after_step));
  c.on_snapshot = join(std::move(a.on_snapshot), std::move(b.on_snapshot));
  return c;
}

/// Steps with dt = stable_dt until t_end, taking a snapshot every `cadence`
/// steps and at the final time. The initial snapshot carries the rate at t0.
inline RunRecord run(PhaseState& state, double t_end, int cadence, const StepHooks& hooks = {}, double safety = 0.5) {
  if (t_end < state.t) throw UsageError("run: t_end precedes the current time");
  if (cadence < 1) throw UsageError("run: cadence must be >= 1");
  if (!(safety > 0.0 && safety <= 1.0)) throw ConfigError("schedule.safety out of (0,1]");
  RunRecord rec;
  auto snapshot = [&] {
    rec.begin_snapshot(state.t);
    rec.snapshots.set("step", static_cast<double>(state.step_index));
    rec.snapshots.set("max_abs_u", state.u.max_abs());
    if (hooks.on_snapshot) hooks.on_snapshot(state, rec);
  };
  if (!state.dudt) state.dudt.emplace(state.u.grid);
  compute_rate(state, *state.dudt);
  snapshot();
  const double dt_nominal = stable_dt(state, safety);
  long since = 0;
  const double t_tol = 1e-12 * std::max(1.0, std::abs(t_end));
  while (state.t < t_end - t_tol) {
    const double dt = std::min(dt_nominal, t_end - state.t);
    detail::check_dt(state, dt);
    compute_rate(state, *state.dudt);
    if (hooks.before_step) hooks.before_step(state, dt, rec);
    detail::finish_step(state, dt);
    if (state.t >= t_end - t_tol) state.t = t_end;
    if (hooks.after_step) hooks.after_step(state, dt, rec);
    if (++since == cadence || state.t == t_end) {
      since = 0;
      snapshot();
    }
  }
  return rec;
}

}  // namespace aclab
