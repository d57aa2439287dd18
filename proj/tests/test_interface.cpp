#include <aclab/interface.hpp>
#include <aclab/solver.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace aclab;

TEST(CircleFit, ExactOnCirclePoints) {
  std::vector<Vec2> pts;
  for (int k = 0; k < 30; ++k) {
    const double a = 0.2 + 0.05 * k;
    pts.push_back({1.0 + 1.4 * std::cos(a), -1.0 + 1.4 * std::sin(a)});
  }
  const auto fit = fit_circle(pts);
  ASSERT_TRUE(fit);
  EXPECT_NEAR(fit->center.x, 1.0, 1e-10);
  EXPECT_NEAR(fit->center.y, -1.0, 1e-10);
  EXPECT_NEAR(fit->radius, 1.4, 1e-10);
  EXPECT_LT(fit->rms, 1e-10);
  EXPECT_FALSE(fit_circle({{0, 0}, {1, 1}}).has_value());
  EXPECT_FALSE(fit_circle({{0, 0}, {1, 1}, {2, 2}}).has_value());
}

TEST(Interface, ExtractsArcAndContacts) {
  const Grid2D g = Grid2D::box(-1.0, 3.0, 0.0, 2.0, 256, 128);
  const PhaseState s = init_profile(g, sigma_arc(1.0), 0.04);
  const InterfaceExtract ex = extract_interface(s.u, true);
  ASSERT_EQ(ex.polylines.size(), 1u);
  ASSERT_TRUE(ex.circle);
  EXPECT_NEAR(ex.circle->radius, std::sqrt(2.0), 2e-3);
  const auto c = contact_points(ex, g);
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->first.x, 0.0, 1e-3);
  EXPECT_NEAR(c->second.x, 2.0, 1e-3);
}

TEST(Interface, ClosedCircleIsOneLoop) {
  const Grid2D g = Grid2D::box(-1.0, 1.0, -1.0, 1.0, 101, 101);
  const auto u = ScalarField2D::sample(g, [](double x, double y) { return 0.5 - std::hypot(x - 0.1, y); });
  const InterfaceExtract ex = extract_interface(u, true);
  ASSERT_EQ(ex.polylines.size(), 1u);
  EXPECT_LT(norm(ex.polylines[0].front() - ex.polylines[0].back()), 1e-12);
  EXPECT_NEAR(ex.circle->radius, 0.5, 1e-3);
  EXPECT_FALSE(contact_points(ex, g).has_value());
}

TEST(Interface, OneDimensionalCrossings) {
  const Grid2D g = Grid2D::line(0.0, 1.0, 101);
  const auto u = ScalarField2D::sample(g, [](double x, double) { return std::tanh((x - 0.333) / 0.05); });
  const InterfaceExtract ex = extract_interface(u);
  ASSERT_EQ(ex.polylines.size(), 1u);
  EXPECT_NEAR(ex.polylines[0][0].x, 0.333, 1e-4);
}

TEST(Interface, CsvHasOneRowPerPoint) {
  const Grid2D g = Grid2D::box(-1.0, 1.0, -1.0, 1.0, 21, 21);
  const auto u = ScalarField2D::sample(g, [](double x, double y) { return 0.5 - std::hypot(x, y); });
  const InterfaceExtract ex = extract_interface(u);
  std::ostringstream os;
  write_interface_csv(os, ex);
  const std::string s = os.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), ex.point_count() + 1);
}
