#include <aclab/grid.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace aclab;

namespace {

Grid2D unit_box(int n) { return Grid2D::box(0.0, 2.0, 0.0, 1.0, 2 * n + 1, n + 1); }

ScalarField2D quadratic(const Grid2D& g) {
  return ScalarField2D::sample(g, [](double x, double y) { return 1.0 + 2.0 * x - y + 0.5 * x * x + x * y + 1.5 * y * y; });
}

}  // namespace

TEST(Grid, GeometryOfBox) {
  const Grid2D g = unit_box(8);
  EXPECT_EQ(g.dim(), 2);
  EXPECT_DOUBLE_EQ(g.hx, 2.0 / 16);
  EXPECT_DOUBLE_EQ(g.hy, 1.0 / 8);
  EXPECT_DOUBLE_EQ(g.face_length(Face::bottom), 2.0);
  EXPECT_DOUBLE_EQ(g.face_length(Face::left), 1.0);
  for (Face f : g.faces()) {
    const Vec2 n = g.outward_normal(f), t = g.tangent(f);
    EXPECT_DOUBLE_EQ(dot(n, t), 0.0);
    EXPECT_DOUBLE_EQ(norm(n), 1.0);
  }
}

TEST(Grid, CornerOwnershipFollowsFaceOrder) {
  const Grid2D g = unit_box(4);
  EXPECT_EQ(*g.owner(0, 0), Face::bottom);
  EXPECT_EQ(*g.owner(g.nx - 1, 0), Face::bottom);
  EXPECT_EQ(*g.owner(g.nx - 1, g.ny - 1), Face::right);
  EXPECT_EQ(*g.owner(0, g.ny - 1), Face::top);
  EXPECT_EQ(*g.owner(0, 2), Face::left);
  EXPECT_FALSE(g.owner(2, 2).has_value());
}

TEST(Grid, LineHasTwoPointFaces) {
  const Grid2D g = Grid2D::line(0.0, 1.0, 11);
  EXPECT_TRUE(g.is_1d());
  ASSERT_EQ(g.faces().size(), 2u);
  EXPECT_EQ(g.face_count(Face::left), 1);
  EXPECT_DOUBLE_EQ(g.face_length(Face::right), 1.0);
  EXPECT_FALSE(g.has_face(Face::bottom));
}

TEST(Grid, RejectsDegenerateBoxes) {
  EXPECT_THROW(Grid2D::box(0, 1, 0, 1, 1, 4), ConfigError);
  EXPECT_THROW(Grid2D::box(1, 0, 0, 1, 4, 4), ConfigError);
}

TEST(Grid, DifferencesExactOnQuadratics) {
  const Grid2D g = unit_box(6);
  const ScalarField2D f = quadratic(g);
  const VectorField2D gr = gradient(f);
  const ScalarField2D lap = laplacian(f);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j);
      const std::size_t k = g.index(i, j);
      EXPECT_NEAR(gr.vx[k], 2.0 + x + y, 1e-11);
      EXPECT_NEAR(gr.vy[k], -1.0 + x + 3.0 * y, 1e-11);
      EXPECT_NEAR(lap.values[k], 4.0, 1e-9);
    }
}

TEST(Grid, NormalDerivativeMatchesOutwardGradient) {
  const Grid2D g = unit_box(6);
  const ScalarField2D f = quadratic(g);
  for (Face face : g.faces()) {
    const auto dn = normal_derivative(f, face);
    const auto dt = tangential_derivative(f, face);
    const Vec2 n = g.outward_normal(face), t = g.tangent(face);
    for (int k = 0; k < g.face_count(face); ++k) {
      auto [i, j] = g.face_node(face, k);
      const double x = g.x(i), y = g.y(j);
      const Vec2 grad{2.0 + x + y, -1.0 + x + 3.0 * y};
      EXPECT_NEAR(dn[k], dot(grad, n), 1e-10);
      EXPECT_NEAR(dt[k], dot(grad, t), 1e-10);
    }
  }
}

TEST(Grid, TrapezoidIntegralsExactOnBilinear) {
  const Grid2D g = unit_box(5);
  const auto f = ScalarField2D::sample(g, [](double x, double y) { return 1.0 + x + 2.0 * y + 3.0 * x * y; });
  // int_0^2 int_0^1 = 2 + 2 + 2 + 3
  EXPECT_NEAR(integrate_domain(f), 9.0, 1e-12);
  EXPECT_NEAR(boundary_trace(f, Face::bottom).integral(), 4.0, 1e-12);
  EXPECT_NEAR(boundary_trace(f, Face::right).integral(), 3.0 + 4.0, 1e-12);
}

TEST(Grid, IntegralConvergesSecondOrder) {
  auto err = [](int n) {
    const Grid2D g = unit_box(n);
    // exp(x + y): the x and y trapezoid errors add (sin(x) exp(y) cancels them on a square mesh).
    const auto f = ScalarField2D::sample(g, [](double x, double y) { return std::exp(x + y); });
    return std::abs(integrate_domain(f) - (std::exp(2.0) - 1.0) * (std::exp(1.0) - 1.0));
  };
  const double ratio = err(16) / err(32);
  EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(Grid, FieldCsvAndBinaryRoundTrip) {
  const Grid2D g = Grid2D::box(-1.0, 1.0, 0.5, 1.5, 7, 5);
  const auto f = ScalarField2D::sample(g, [](double x, double y) { return std::sin(3 * x) / (1 + y); });
  std::stringstream csv, bin;
  write_field_csv(csv, f);
  write_field_binary(bin, f);
  const ScalarField2D a = read_field_csv(csv), b = read_field_binary(bin);
  EXPECT_TRUE(a.grid.same_geometry(g));
  EXPECT_TRUE(b.grid.same_geometry(g));
  EXPECT_EQ(a.values, f.values);
  EXPECT_EQ(b.values, f.values);
}

TEST(Grid, FaceNamesRoundTrip) {
  for (Face f : kAllFaces) EXPECT_EQ(*face_from_name(face_name(f)), f);
  EXPECT_FALSE(face_from_name("front").has_value());
}
