#include <aclab/measures.hpp>

#include <gtest/gtest.h>

using namespace aclab;

namespace {

FaceLaws bottom_dynamic(double sigma) {
  FaceLaws l = all_neumann();
  l[static_cast<int>(Face::bottom)] = Dynamic{sigma};
  return l;
}

PhaseState arc_state(int n, double eps, double sigma) {
  const Grid2D g = Grid2D::box(-1.0, 3.0, 0.0, 2.0, 2 * n, n);
  return init_profile(g, sigma_arc(sigma), eps, bottom_dynamic(sigma));
}

/// Mean |normalized residual| over the first `steps` steps at safety s.
double mean_residual(PhaseState s, double safety, int steps) {
  const double dt = stable_dt(s, safety);
  double acc = 0.0;
  for (int n = 0; n < steps; ++n) {
    PhaseState next = step(s, dt);
    acc += std::abs(dissipation_residual(s, next, dt));
    s = std::move(next);
  }
  return acc / steps;
}

}  // namespace

TEST(Measures, TanhProfileHasUnitSurfaceTension) {
  const Grid2D g = Grid2D::line(0.0, 1.0, 2001);
  const PhaseState s = init_profile(g, Line1D{0.5, 1.0}, 0.05);
  EXPECT_NEAR(energy(s) / kSigma0, 1.0, 1e-3);
  const DiffuseDiagnostics d = diagnostics(s);
  EXPECT_LT(d.xi_abs_total, 1e-3 * d.E_total);
}

TEST(Measures, DensitiesSplitIntoGradientAndPotential) {
  const Grid2D g = Grid2D::line(0.0, 1.0, 101);
  const PhaseState s = init_profile(g, Line1D{0.3, -1.0}, 0.1);
  const ScalarField2D mu = mu_density(s.u, s.eps), xi = xi_density(s.u, s.eps);
  const ScalarField2D gs = grad_sq_energy(s.u);
  for (std::size_t k = 0; k < mu.values.size(); ++k) {
    EXPECT_NEAR(mu.values[k] + xi.values[k], s.eps * gs.values[k], 1e-12);
    EXPECT_NEAR(mu.values[k] - xi.values[k], 2.0 * double_well(s.u.values[k]) / s.eps, 1e-12);
  }
}

TEST(Measures, GradientEnergyExactForLinearData) {
  const Grid2D g = Grid2D::box(0.0, 1.0, 0.0, 2.0, 9, 11);
  const auto u = ScalarField2D::sample(g, [](double x, double y) { return 0.3 * x - 0.2 * y; });
  const ScalarField2D gs = grad_sq_energy(u);
  EXPECT_NEAR(integrate_domain(gs), (0.09 + 0.04) * 2.0, 1e-12);
}

TEST(Measures, EnergyDecreasesAlongTheFlow) {
  PhaseState s = arc_state(64, 0.08, 1.0);
  const double dt = stable_dt(s);
  double e = energy(s);
  for (int n = 0; n < 100; ++n) {
    s = step(std::move(s), dt);
    const double e2 = energy(s);
    ASSERT_LE(e2, e + 1e-12);
    e = e2;
  }
}

TEST(Measures, DissipationResidualIsFirstOrderInDt) {
  const Grid2D g = Grid2D::line(0.0, 1.0, 201);
  const PhaseState s = init_profile(g, Line1D{0.4, 1.0}, 0.05);
  const double r1 = mean_residual(s, 0.5, 400);
  const double r2 = mean_residual(s, 0.25, 800);
  EXPECT_LT(r1, 1e-2);
  EXPECT_GT(r1 / r2, 1.7);
  EXPECT_LT(r1 / r2, 2.3);
}

TEST(Measures, DissipationIncludesDynamicBoundary) {
  // As dt -> 0 the balance leaves only the half cell of the dynamic face, whose
  // nodes follow the boundary law r_b instead of the Allen-Cahn rate r_ac:
  //   raw -> sum_b hx (hy / 2) eps r_b (r_b - r_ac),
  // r_ac with the one-sided second difference across the face. The arc keeps
  // the corners in a pure phase, so they do not contribute.
  const PhaseState s = arc_state(32, 0.08, 1.0);
  const auto& g = s.u.grid;
  const double dt = 1e-4 * stable_dt(s);
  const PhaseState next = step(s, dt);
  const DissipationTerms t = dissipation_terms(s, next, dt);
  EXPECT_GT(t.boundary, 0.0);
  double expected = 0.0;
  for (int i = 1; i + 1 < g.nx; ++i) {
    const double u0 = s.u(i, 0), u1 = s.u(i, 1), u2 = s.u(i, 2);
    const double rb = (*next.dudt)(i, 0);
    const double lap = (s.u(i + 1, 0) - 2.0 * u0 + s.u(i - 1, 0)) / (g.hx * g.hx) + (u0 - 2.0 * u1 + u2) / (g.hy * g.hy);
    const double rac = lap - double_well_prime(u0) / (s.eps * s.eps);
    expected += g.hx * 0.5 * g.hy * s.eps * rb * (rb - rac);
  }
  EXPECT_GT(std::abs(expected), 1e-2 * (t.interior + t.boundary));
  EXPECT_NEAR(t.raw, expected, 1e-3 * std::abs(expected));
}

TEST(Measures, ResidualNeedsRate) {
  const PhaseState s = arc_state(8, 0.1, 1.0);
  EXPECT_THROW(dissipation_residual(s, s, 1e-4), UsageError);
}

TEST(Measures, FaceDiagnosticsAngles) {
  const PhaseState s = arc_state(32, 0.08, 1.0);
  const FaceDiagnostics fd = face_diagnostics(s, Face::bottom);
  for (std::size_t k = 0; k < fd.x.size(); ++k) {
    const double st = fd.sin_theta[k], ct = fd.cos_theta[k];
    if (st == 0.0 && ct == 0.0) continue;
    EXPECT_NEAR(st * st + ct * ct, 1.0, 1e-12);
    EXPECT_NEAR(fd.alpha[k], s.eps * fd.d_tan[k] * fd.d_tan[k], 1e-15);
  }
  EXPECT_TRUE(fd.vb.empty());
}

TEST(Measures, BoundaryVelocityIsTangential) {
  PhaseState s = arc_state(32, 0.08, 1.0);
  s = step(std::move(s), stable_dt(s));
  const FaceDiagnostics fd = face_diagnostics(s, Face::bottom);
  ASSERT_EQ(fd.vb.size(), fd.x.size());
  for (const Vec2& v : fd.vb) EXPECT_EQ(v.y, 0.0);
}

TEST(Measures, PhaseIndicatorBoundAndStrictness) {
  const Grid2D g = Grid2D::box(0.0, 2.0, 0.0, 1.0, 65, 33);
  const PhaseState pure = make_state(ScalarField2D::sample(g, [](double, double) { return 1.0; }), 0.1);
  auto [w1, b1] = boundary_phase_indicator(pure, Face::bottom);
  EXPECT_NEAR(w1, b1, 1e-12);
  EXPECT_NEAR(b1, 4.0 / 3.0, 1e-12);
  const PhaseState arc = init_profile(g, sigma_arc(1.0), 0.05);
  auto [w2, b2] = boundary_phase_indicator(arc, Face::bottom);
  EXPECT_LT(w2, b2);
}

TEST(Measures, PoincareWirtingerRatio) {
  const int n = 400;
  const double h = 1.0 / n;
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) w[k] = std::sin(2.0 * M_PI * k * h);
  // ||sin||_1 / ||2 pi cos||_1 = 1 / (2 pi)
  EXPECT_NEAR(poincare_wirtinger_ratio(w, h, true), 1.0 / (2.0 * M_PI), 1e-4);
  std::vector<double> c(10, 3.0);
  EXPECT_EQ(poincare_wirtinger_ratio(c, 0.1, false), 0.0);
  EXPECT_THROW(poincare_wirtinger_ratio({1.0, 2.0}, 0.1, false), UsageError);
}

TEST(Measures, NormalDirichletEnergyOnLinearData) {
  const Grid2D g = Grid2D::box(0.0, 2.0, 0.0, 1.0, 9, 5);
  const auto u = ScalarField2D::sample(g, [](double x, double y) { return 0.1 * x + 0.2 * y; });
  const PhaseState s = make_state(u, 0.5);
  // bottom: eps * 0.04 * 2
  EXPECT_NEAR(normal_dirichlet_energy(s, {Face::bottom}), 0.5 * 0.04 * 2.0, 1e-12);
}

TEST(Measures, BoundaryEnergyOnLinearData) {
  const Grid2D g = Grid2D::box(0.0, 2.0, 0.0, 1.0, 801, 401);
  const auto u = ScalarField2D::sample(g, [](double x, double y) { return 0.1 * x + 0.2 * y; });
  const double eps = 0.5;
  const PhaseState s = make_state(u, eps);
  // Tangential part: eps/2 (0.01 * 2 on bottom and top, 0.04 * 1 on left and right).
  double expected = 0.5 * eps * (0.01 * 2.0 * 2.0 + 0.04 * 1.0 * 2.0);
  // Potential part by composite Simpson on each face.
  auto simpson = [](auto f, double a, double b) {
    const int n = 2000;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return acc * h / 3.0;
  };
  auto w = [eps](double v) { return double_well(v) / eps; };
  expected += simpson([&](double x) { return w(0.1 * x); }, 0.0, 2.0);
  expected += simpson([&](double x) { return w(0.1 * x + 0.2); }, 0.0, 2.0);
  expected += simpson([&](double y) { return w(0.2 * y); }, 0.0, 1.0);
  expected += simpson([&](double y) { return w(0.2 + 0.2 * y); }, 0.0, 1.0);
  EXPECT_NEAR(boundary_energy(s), expected, 1e-6);
}

TEST(Measures, SeriesObserverColumnsAndAprioriBound) {
  PhaseState s = arc_state(16, 0.3, 1.0);
  SeriesObserver obs;
  const RunRecord rec = run(s, 0.01, 20, obs.hooks());
  for (const char* c : {"E", "E_over_sigma0", "xi_abs", "alpha_total", "boundary_energy", "normal_dirichlet_bottom",
                        "w_integral_bottom", "w_bound_bottom", "dissipation_residual"})
    EXPECT_TRUE(rec.snapshots.has(c)) << c;
  const Table& d = rec.step_series.at("dissipation");
  EXPECT_EQ(static_cast<long>(d.size()), s.step_index);
  const AprioriReport ap = apriori_report(rec);
  EXPECT_TRUE(ap.mu_bounded);
  EXPECT_DOUBLE_EQ(ap.D0, rec.snapshots.column("mu_total").front());
  EXPECT_GT(ap.boundary_energy_integral, 0.0);
}

TEST(Record, WindowIntegralInterpolatesEnds) {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0}, v{0.0, 1.0, 2.0, 3.0};
  EXPECT_NEAR(window_integral(t, v, 0.5, 2.5), 0.5 * (2.5 * 2.5 - 0.25), 1e-14);
  EXPECT_THROW(window_integral(t, v, -1.0, 1.0), UsageError);
}

TEST(Record, SnapshotTimesStrictlyIncrease) {
  RunRecord r;
  r.begin_snapshot(0.0);
  r.begin_snapshot(1.0);
  EXPECT_THROW(r.begin_snapshot(1.0), UsageError);
}
