#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nodalab/eigenmodes.hpp"
#include "nodalab/specfun.hpp"

namespace nodalab {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Eigenmode, RectangleEigenvalueFormula) {
  Eigenmode e = make_eigenmode(make_rectangle(1.0, 2.0), {2, 1, 1});
  EXPECT_DOUBLE_EQ(e.lambda, kPi * kPi * 4.0 + kPi * kPi / 4.0);
}

TEST(Eigenmode, DiskEigenvalueUsesDerivativeZeros) {
  Eigenmode e = make_eigenmode(make_disk(2.0), {3, 2, 2});
  const double z = compute_zeros(3, ZeroKind::JPrime, 2).values[1];
  EXPECT_DOUBLE_EQ(e.lambda, z * z / 4.0);
  Eigenmode r = make_eigenmode(make_disk(1.0), {0, 1, 1});
  EXPECT_NEAR(r.scaled_zero, 3.831705970207512, 1e-10);
}

TEST(Eigenmode, RejectsInvalidIndices) {
  EXPECT_THROW(make_eigenmode(make_disk(1.0), {0, 3, 2}), std::invalid_argument);
  EXPECT_THROW(make_eigenmode(make_disk(1.0), {1, 0, 1}), std::invalid_argument);
  EXPECT_THROW(make_eigenmode(make_disk(1.0), {1, 1, 3}), std::invalid_argument);
  EXPECT_THROW(make_eigenmode(make_rectangle(1, 1), {-1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(make_rectangle(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(make_disk(-1.0), std::invalid_argument);
  EXPECT_THROW(parse_domain("square:1"), std::invalid_argument);
}

TEST(Eigenmode, ParsesDomainAndIndex) {
  ModelDomain d = parse_domain("rect:1.5,2");
  EXPECT_DOUBLE_EQ(std::get<Rectangle>(d).a, 1.5);
  EXPECT_DOUBLE_EQ(std::get<Disk>(parse_domain("disk:3")).R, 3.0);
  ModeIndex i = parse_index("2,3,2");
  EXPECT_EQ(i.n, 2);
  EXPECT_EQ(i.m, 3);
  EXPECT_EQ(i.k, 2);
  EXPECT_EQ(parse_index("4,5").k, 1);
  EXPECT_THROW(parse_index("1.5,2"), std::invalid_argument);
}

TEST(EvalMode, ClosedFormValues) {
  Eigenmode e = make_eigenmode(make_rectangle(1, 1), {1, 1, 1});
  EXPECT_DOUBLE_EQ(eval_mode(e, 0.0, 0.0), 1.0);
  for (double y : {0.0, 0.3, 0.77, 1.0}) EXPECT_NEAR(eval_mode(e, 0.5, y), 0.0, 1e-15);
  Eigenmode d = make_eigenmode(make_disk(1.0), {0, 1, 1});
  const double r = compute_zeros(0, ZeroKind::J, 1).values[0] / compute_zeros(1, ZeroKind::J, 1).values[0];
  EXPECT_NEAR(eval_mode(d, r * std::cos(0.4), r * std::sin(0.4)), 0.0, 1e-10);
}

TEST(EvalMode, ThrowsOutsideDomain) {
  Eigenmode e = make_eigenmode(make_rectangle(1, 1), {1, 1, 1});
  EXPECT_THROW(eval_mode(e, 1.1, 0.5), std::domain_error);
  Eigenmode d = make_eigenmode(make_disk(1.0), {1, 1, 1});
  EXPECT_THROW(eval_mode(d, 0.8, 0.8), std::domain_error);
  EXPECT_NO_THROW(eval_mode(d, 1.0, 0.0));
}

TEST(EvalMode, DiskAngularDependence) {
  Eigenmode c = make_eigenmode(make_disk(1.0), {2, 1, 1});
  Eigenmode s = make_eigenmode(make_disk(1.0), {2, 1, 2});
  const double r = 0.6, th = 0.35;
  const double radial = bessel_j(2, c.scaled_zero * r);
  EXPECT_NEAR(eval_mode(c, r * std::cos(th), r * std::sin(th)), radial * std::cos(2 * th), 1e-14);
  EXPECT_NEAR(eval_mode(s, r * std::cos(th), r * std::sin(th)), radial * std::sin(2 * th), 1e-14);
}

TEST(GradMode, MatchesFiniteDifferences) {
  for (const auto& [dom, idx] : std::vector<std::pair<ModelDomain, ModeIndex>>{
           {make_rectangle(1, 2), {3, 2, 1}}, {make_disk(1.5), {2, 3, 1}}, {make_disk(1.0), {1, 2, 2}}}) {
    Eigenmode e = make_eigenmode(dom, idx);
    for (auto [x, y] : std::vector<std::pair<double, double>>{{0.3, 0.4}, {0.7, 0.1}, {0.2, 0.9}}) {
      const double h = 1e-6;
      auto g = grad_mode(e, x, y);
      EXPECT_NEAR(g[0], (eval_extended(e, x + h, y) - eval_extended(e, x - h, y)) / (2 * h), 1e-7);
      EXPECT_NEAR(g[1], (eval_extended(e, x, y + h) - eval_extended(e, x, y - h)) / (2 * h), 1e-7);
    }
  }
}

TEST(Neumann, RectangleResidualIsSmall) {
  Eigenmode e = make_eigenmode(make_rectangle(1, 1), {2, 2, 1});
  auto pts = boundary_samples(e.domain, 100);
  EXPECT_LE(neumann_residual(e, pts, 1e-5), 1e-6 * (1 + e.lambda));
}

TEST(Neumann, DiskResidualIsSmall) {
  for (ModeIndex idx : {ModeIndex{0, 1, 1}, ModeIndex{3, 2, 1}, ModeIndex{5, 4, 2}}) {
    Eigenmode e = make_eigenmode(make_disk(1.0), idx);
    auto pts = boundary_samples(e.domain, 100);
    EXPECT_LE(neumann_residual(e, pts, 1e-5), 1e-6 * (1 + e.lambda));
  }
}

TEST(Neumann, ConstantModeIsExactlyZero) {
  Eigenmode e = make_eigenmode(make_rectangle(2, 1), {0, 0, 1});
  EXPECT_EQ(neumann_residual(e, boundary_samples(e.domain, 50), 1e-5), 0.0);
}

TEST(Neumann, RejectsBadStencils) {
  Eigenmode e = make_eigenmode(make_rectangle(1, 1), {1, 1, 1});
  EXPECT_THROW(neumann_residual(e, {{0.5, 0.5}}, 1e-5), std::invalid_argument);
  EXPECT_THROW(neumann_residual(e, {{0.5, 0.0}}, 0.6), std::invalid_argument);
}

TEST(Grid, ConstantModeIsOneOnMaskedCells) {
  Eigenmode e = make_eigenmode(make_rectangle(1, 3), {0, 0, 1});
  ScalarGrid g = sample_grid(e, 16);
  for (double v : g.values) EXPECT_EQ(v, 1.0);
}

TEST(Grid, DoublingResolutionKeepsSharedNodes) {
  Eigenmode e = make_eigenmode(make_disk(1.0), {2, 1, 1});
  ScalarGrid g1 = sample_grid(e, 32), g2 = sample_grid(e, 64);
  for (int j = 0; j <= 32; ++j)
    for (int i = 0; i <= 32; ++i) EXPECT_EQ(g1.at(i, j), g2.at(2 * i, 2 * j));
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) {
      const double xc = 0.5 * (g1.x(i) + g1.x(i + 1)), yc = 0.5 * (g1.y(j) + g1.y(j + 1));
      EXPECT_EQ(g1.cell(i, j), std::hypot(xc, yc) <= 1.0 ? 1 : 0);
    }
}

TEST(Grid, SignChangeStraddlesHalf) {
  Eigenmode e = make_eigenmode(make_rectangle(1, 1), {1, 0, 1});
  ScalarGrid g = sample_grid(e, 9);
  for (int j = 0; j <= 9; ++j) {
    EXPECT_GT(g.at(4, j), 0.0);
    EXPECT_LT(g.at(5, j), 0.0);
    EXPECT_LT(g.x(4), 0.5);
    EXPECT_GT(g.x(5), 0.5);
  }
}

// Five-point Laplacian residual max |Delta_h u + lambda u| over interior nodes.
double laplacian_residual(const Eigenmode& e, int n) {
  ScalarGrid g = sample_grid(e, n);
  const double hx = (g.x1 - g.x0) / n, hy = (g.y1 - g.y0) / n;
  double worst = 0.0;
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) {
      if (!contains(e.domain, g.x(i), g.y(j))) continue;
      const double lap = (g.at(i + 1, j) - 2 * g.at(i, j) + g.at(i - 1, j)) / (hx * hx) +
                         (g.at(i, j + 1) - 2 * g.at(i, j) + g.at(i, j - 1)) / (hy * hy);
      worst = std::max(worst, std::fabs(lap + e.lambda * g.at(i, j)));
    }
  return worst;
}

TEST(Properties, LaplacianResidualIsSecondOrder) {
  for (const auto& [dom, idx] : std::vector<std::pair<ModelDomain, ModeIndex>>{
           {make_rectangle(1, 2), {3, 2, 1}}, {make_disk(1.0), {2, 2, 1}}, {make_disk(2.0), {0, 3, 1}}}) {
    Eigenmode e = make_eigenmode(dom, idx);
    const double r1 = laplacian_residual(e, 32), r2 = laplacian_residual(e, 64), r3 = laplacian_residual(e, 128);
    EXPECT_GE(std::log2(r1 / r2), 1.8);
    EXPECT_GE(std::log2(r2 / r3), 1.8);
  }
}

TEST(Properties, RectangleReflectionSymmetry) {
  for (int n = 0; n <= 6; ++n)
    for (int m = 0; m <= 4; ++m) {
      Eigenmode e = make_eigenmode(make_rectangle(1.3, 0.7), {n, m, 1});
      for (double x : {0.1, 0.45, 0.9})
        for (double y : {0.05, 0.5})
          EXPECT_NEAR(eval_mode(e, x, y), (n % 2 ? -1.0 : 1.0) * eval_mode(e, 1.3 - x, y), 1e-13);
    }
}

}  // namespace
}  // namespace nodalab
