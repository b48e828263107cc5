#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nodalab/quadrature.hpp"
#include "nodalab/reflect.hpp"

namespace nodalab {
namespace {

constexpr double kPi = std::numbers::pi;

double raw_bump(double r2) { return r2 < 1.0 ? std::exp(1.0 / (r2 - 1.0)) : 0.0; }

// Oracle for the normal field, written from the graph definition alone.
Vec oracle_normal_2d(const ReflectionChart& c, double x) {
  const double g = c.dphi(x);
  return vec2(g, -1.0) / std::sqrt(1.0 + g * g);
}

// Oracle convolution (eta_s * nu)(x) in d = 2 by adaptive quadrature on the support.
Vec oracle_smoothed_normal_2d(const ReflectionChart& c, double x, double s) {
  const double C = 1.0 / 0.443993816168079437823;
  Vec out(2);
  for (int comp = 0; comp < 2; ++comp) {
    auto f = [&](double t) { return C * raw_bump(t * t) * oracle_normal_2d(c, x - s * t)[comp]; };
    out[comp] = integrate_adaptive(f, -1.0, 1.0, 1e-14, 1e-16).value;
  }
  return out;
}

// Oracle in d = 3: full 2D convolution over the unit disk in polar coordinates.
Vec oracle_smoothed_normal_3d(const ReflectionChart& c, double x, double s) {
  const double C = 1.0 / 0.4665123931783276;
  Vec out = Vec::Zero(3);
  const QuadratureRule g = composite_gauss(32, 8, 0.0, 1.0);
  const int nth = 128;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const double r = g.nodes[i];
    for (int j = 0; j < nth; ++j) {
      const double th = 2 * kPi * (j + 0.5) / nth;
      const Vec n = oracle_normal_2d(c, x - s * r * std::cos(th));
      const double w = g.weights[i] * r * (2 * kPi / nth) * C * raw_bump(r * r);
      out[0] += w * n[0];
      out[2] += w * n[1];
    }
  }
  return out;
}

Mat fd_jacobian(const ReflectionChart& c, const Vec& p, double h) {
  const int d = c.dim();
  Mat J(d, d);
  for (int k = 0; k < d; ++k) {
    Vec a = p, b = p;
    a[k] += h;
    b[k] -= h;
    J.col(k) = (c.flatten(a) - c.flatten(b)) / (2 * h);
  }
  return J;
}

// Oracle inverse: Newton with a finite-difference Jacobian, seeded at the point itself.
Vec oracle_invert(const ReflectionChart& c, const Vec& X) {
  Vec p = X.cwiseMax(-0.9 * c.delta()).cwiseMin(0.9 * c.delta());
  for (int it = 0; it < 100; ++it) {
    const Vec r = c.flatten(p) - X;
    if (r.norm() < 1e-14) break;
    p -= fd_jacobian(c, p, 1e-7).partialPivLu().solve(r);
  }
  return p;
}

ReflectionChart parabola(int d = 2) { return ReflectionChart(ChartKind::Parabola, 1.0, d); }
ReflectionChart arc(int d = 2) { return ReflectionChart(ChartKind::Arc, 1.0, d); }

TEST(Mollifier, SupportAndMass) {
  EXPECT_EQ(mollifier(Vec::Constant(1, 1.0)), 0.0);
  EXPECT_EQ(mollifier(Vec::Constant(1, -1.5)), 0.0);
  EXPECT_EQ(mollifier(vec2(0.8, 0.6)), 0.0);
  EXPECT_GT(mollifier(vec2(0.5, 0.5)), 0.0);
  EXPECT_NEAR(mollifier_constant(1), 1.0 / 0.443993816168079437823, 1e-12);
  EXPECT_NEAR(mollifier_constant(2), 1.0 / 0.4665123931783276, 1e-12);
  // Mass by an independent composite rule.
  const QuadratureRule g = composite_gauss(20, 64, -1.0, 1.0);
  double m1 = 0.0, m1s = 0.0;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    m1 += g.weights[i] * mollifier(Vec::Constant(1, g.nodes[i]));
    m1s += g.weights[i] * 0.25 * mollifier_scaled(0.25, Vec::Constant(1, 0.25 * g.nodes[i]));
  }
  EXPECT_NEAR(m1, 1.0, 1e-10);
  EXPECT_NEAR(m1s, 1.0, 1e-10);
  double m2 = 0.0;
  const QuadratureRule gr = composite_gauss(20, 32, 0.0, 1.0);
  for (size_t i = 0; i < gr.nodes.size(); ++i)
    for (int j = 0; j < 64; ++j) {
      const double th = 2 * kPi * j / 64.0, r = gr.nodes[i];
      m2 += gr.weights[i] * r * (2 * kPi / 64) * mollifier(vec2(r * std::cos(th), r * std::sin(th)));
    }
  EXPECT_NEAR(m2, 1.0, 1e-10);
  EXPECT_THROW(mollifier_scaled(0.0, Vec::Constant(1, 0.1)), std::invalid_argument);
}

TEST(SmoothedNormal, ConstantNormalChartsAreExact) {
  ReflectionChart flat(ChartKind::Flat, 0.0, 2);
  EXPECT_EQ(flat.smoothed_normal(Vec::Constant(1, 0.1), 0.05), vec2(0.0, -1.0));
  ReflectionChart aff(ChartKind::Affine, 0.5, 2);
  EXPECT_EQ(aff.smoothed_normal(Vec::Constant(1, 0.1), 0.05), aff.normal(Vec::Constant(1, 0.3)));
}

TEST(SmoothedNormal, MatchesAdaptiveOracle) {
  for (const ReflectionChart& c : {parabola(), arc()})
    for (double x : {-0.2, 0.0, 0.13})
      for (double s : {1e-3, 0.05, 0.2}) {
        const Vec n = c.smoothed_normal(Vec::Constant(1, x), s);
        EXPECT_NEAR((n - oracle_smoothed_normal_2d(c, x, s)).norm(), 0.0, 1e-12);
      }
}

TEST(SmoothedNormal, ProductChartMatchesFullConvolution) {
  for (const ReflectionChart& c : {parabola(3), arc(3)})
    for (double x : {-0.1, 0.17})
      for (double s : {0.02, 0.2}) {
        const Vec n = c.smoothed_normal(vec2(x, 0.4), s);
        EXPECT_NEAR((n - oracle_smoothed_normal_3d(c, x, s)).norm(), 0.0, 1e-12);
      }
}

TEST(SmoothedNormal, ConvergesToNormalAsScaleShrinks) {
  ReflectionChart c = parabola();
  const Vec x = Vec::Constant(1, 0.1);
  const Vec nu = c.normal(x);
  double prev = 0.0;
  for (double s : {1e-2, 1e-3, 1e-4}) {
    const double err = (c.smoothed_normal(x, s) - nu).norm();
    EXPECT_LE(err, s);
    if (prev > 0.0) {
      EXPECT_GE(std::log10(prev / err), 1.0);
    }
    prev = err;
  }
}

TEST(SmoothedNormal, SupportLeavingChartThrows) {
  ReflectionChart c(ChartKind::Arc, 1.0, 2, 0.1);
  EXPECT_THROW(c.smoothed_normal(Vec::Constant(1, 0.9), 0.2), std::domain_error);
}

TEST(Flatten, FlatChartIsIdentity) {
  ReflectionChart c(ChartKind::Flat, 0.0, 2);
  for (double x : {-0.5, 0.0, 0.7})
    for (double s : {-0.3, 0.0, 0.4}) EXPECT_EQ(c.flatten(vec2(x, s)), vec2(x, s));
  ReflectionChart c3(ChartKind::Flat, 0.0, 3);
  EXPECT_EQ(c3.jacobian(vec3(0.1, 2.0, -0.2)), Mat::Identity(3, 3));
}

TEST(Flatten, BoundaryAndSmallOffsets) {
  ReflectionChart c = parabola();
  for (double x : {-0.2, -0.05, 0.0, 0.11, 0.2}) {
    const Vec g = c.flatten(vec2(x, 0.0));
    EXPECT_EQ(g, vec2(x, 0.5 * x * x));
    for (double s : {-1e-3, 1e-3}) EXPECT_LE((c.flatten(vec2(x, s)) - g).norm(), 2 * std::fabs(s));
    // Positive s lands in the domain, negative s outside.
    EXPECT_TRUE(c.in_domain(c.flatten(vec2(x, 1e-3))));
    EXPECT_FALSE(c.in_domain(c.flatten(vec2(x, -1e-3))));
  }
  EXPECT_THROW(c.flatten(vec2(0.5, 0.0)), std::domain_error);
}

TEST(Flatten, BranchesMatchDefinitions) {
  // F(x, s) = graph - s N_s and G(x, s) = graph + s N_s with F~(x, s) = G(x, -s) for s < 0.
  ReflectionChart c = parabola();
  const double x = 0.07;
  for (double s : {0.03, 0.15}) {
    const Vec n = oracle_smoothed_normal_2d(c, x, s);
    const Vec graph = vec2(x, c.phi(x));
    EXPECT_NEAR((c.flatten(vec2(x, s)) - (graph - s * n)).norm(), 0.0, 1e-13);
    EXPECT_NEAR((c.flatten(vec2(x, -s)) - (graph + s * n)).norm(), 0.0, 1e-13);
  }
}

TEST(Jacobian, MatchesFiniteDifferences) {
  ReflectionChart c = parabola();
  const Vec p = vec2(0.1, 0.05);
  EXPECT_LE((c.jacobian(p) - fd_jacobian(c, p, 1e-6)).cwiseAbs().maxCoeff(), 1e-8);
  for (const ReflectionChart& ch : {parabola(), arc(), parabola(3), arc(3)}) {
    for (double s : {0.07, -0.11}) {
      Vec q = Vec::Zero(ch.dim());
      q[0] = -0.08;
      q[ch.dim() - 1] = s;
      const Mat J = ch.jacobian(q);
      double e1 = (J - fd_jacobian(ch, q, 4e-3)).norm();
      double e2 = (J - fd_jacobian(ch, q, 2e-3)).norm();
      double e3 = (J - fd_jacobian(ch, q, 1e-3)).norm();
      EXPECT_GE(std::log2(e1 / e2), 1.8);
      EXPECT_GE(std::log2(e2 / e3), 1.8);
    }
  }
}

TEST(Jacobian, LimitAtOriginIsIdentity) {
  for (const ReflectionChart& c : {parabola(), arc(), parabola(3)}) {
    Vec p = Vec::Zero(c.dim());
    p[c.dim() - 1] = 1e-7;
    EXPECT_LE((c.jacobian(p) - Mat::Identity(c.dim(), c.dim())).norm(), 1e-6);
  }
}

TEST(Invert, FlatChartIsIdentity) {
  ReflectionChart c(ChartKind::Flat, 0.0, 2);
  EXPECT_EQ(c.invert(vec2(0.3, -0.2)), vec2(0.3, -0.2));
}

TEST(Invert, RoundTripAndBoundaryPoints) {
  for (const ReflectionChart& c : {parabola(), arc(), arc(3)}) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int d = c.dim();
    for (int i = 0; i < 1000; ++i) {
      Vec p = Vec::Zero(d);
      for (int a = 0; a < d; ++a) p[a] = 0.95 * c.delta() * u(rng);
      const Vec X = c.flatten(p);
      const Vec q = c.invert(X);
      ASSERT_LE((c.flatten(q) - X).norm(), 1e-11);
      EXPECT_LE((q - p).norm(), 1e-10);
    }
    for (double x : {-0.2, 0.0, 0.15}) {
      Vec X = Vec::Zero(d);
      X[0] = x;
      X[d - 1] = c.phi(x);
      Vec p = c.invert(X);
      EXPECT_NEAR(p[0], x, 1e-11);
      EXPECT_NEAR(p[d - 1], 0.0, 1e-11);
    }
  }
}

TEST(Invert, FarPointThrows) {
  ReflectionChart c = parabola();
  EXPECT_THROW(c.invert(vec2(0.9, 0.0)), std::runtime_error);
}

TEST(Coefficients, FlatChartIsIdentity) {
  ReflectionChart c(ChartKind::Flat, 0.0, 2);
  for (double s : {-0.2, 0.0, 0.3}) {
    EXPECT_EQ(c.coefficient_A(vec2(0.1, std::fabs(s))), Mat::Identity(2, 2));
    EXPECT_EQ(c.coefficient_Atilde(vec2(0.1, s)), Mat::Identity(2, 2));
    EXPECT_EQ(c.coefficient_B(vec2(0.1, s)), Mat::Identity(2, 2));
  }
}

TEST(Coefficients, AMatchesFiniteDifferencePullback) {
  // Oracle: A from a finite-difference Jacobian, using the change-of-variables formula.
  ReflectionChart c = parabola();
  for (double s : {0.02, 0.2}) {
    const Vec p = vec2(0.12, s);
    const Mat J = fd_jacobian(c, p, 1e-5);
    const Mat Ji = J.inverse();
    const Mat A = std::fabs(J.determinant()) * Ji * Ji.transpose();
    EXPECT_LE((c.coefficient_A(p) - A).norm(), 1e-8);
  }
  EXPECT_THROW(c.coefficient_A(vec2(0.0, -0.1)), std::invalid_argument);
}

TEST(Coefficients, SymmetricAndReflectionSigns) {
  for (const ReflectionChart& c : {parabola(), arc(), parabola(3)}) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int d = c.dim();
    for (int i = 0; i < 1000; ++i) {
      Vec p = Vec::Zero(d);
      for (int a = 0; a < d; ++a) p[a] = c.delta() * u(rng);
      Vec pp = p;
      pp[d - 1] = std::fabs(p[d - 1]);
      const Mat A = c.coefficient_A(pp), At = c.coefficient_Atilde(p);
      const Mat B = c.coefficient_B(c.flatten(p));
      EXPECT_LE((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((At - At.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((B - B.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const bool flip = p[d - 1] < 0 && ((a == d - 1) != (b == d - 1));
          EXPECT_NEAR(At(a, b), flip ? -A(a, b) : A(a, b), 1e-12);
        }
    }
  }
}

TEST(Coefficients, OffDiagonalDecaysLinearlyAtInterface) {
  for (const ReflectionChart& c : {parabola(), arc()}) {
    std::vector<double> ls, le;
    for (double s : {1e-2, 1e-3, 1e-4, 1e-5}) {
      const double v = std::fabs(c.coefficient_Atilde(vec2(0.1, s))(0, 1));
      ls.push_back(std::log(s));
      le.push_back(std::log(v));
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < ls.size(); ++i) {
      mx += ls[i] / ls.size();
      my += le[i] / le.size();
    }
    double num = 0, den = 0;
    for (size_t i = 0; i < ls.size(); ++i) {
      num += (ls[i] - mx) * (le[i] - my);
      den += (ls[i] - mx) * (ls[i] - mx);
    }
    EXPECT_GE(num / den, 0.9);
  }
}

TEST(Coefficients, BIsIdentityInsideAndContinuousAcross) {
  ReflectionChart c = parabola();
  EXPECT_EQ(c.coefficient_B(vec2(0.1, 0.2)), Mat::Identity(2, 2));
  for (double x : {-0.15, 0.0, 0.1}) {
    const Mat Bm = c.coefficient_B_chart(vec2(x, -1e-8));
    EXPECT_LE((Bm - Mat::Identity(2, 2)).norm(), 1e-6);
  }
}

TEST(Coefficients, FieldBoundsAndLipschitz) {
  ReflectionChart c = parabola();
  CoefficientField f = coefficient_field_B(c);
  EXPECT_LE(f.max_asymmetry, 1e-12);
  EXPECT_LE(f.lambda_bound, 2.0);
  EXPECT_GE(f.eig_min, 1.0 / f.lambda_bound);
  EXPECT_TRUE(std::isfinite(f.lipschitz));
  EXPECT_GT(f.lipschitz, 0.0);
}

TEST(Validity, DeterminantWithinMarginForShippedCharts) {
  std::vector<ReflectionChart> charts = {ReflectionChart(ChartKind::Flat, 0, 2), ReflectionChart(ChartKind::Affine, 0.3, 2),
                                         parabola(), arc(), ReflectionChart(ChartKind::Arc, 3.0, 2),
                                         ReflectionChart(ChartKind::Arc, 1.0, 2, 0.1), parabola(3), arc(3)};
  for (const auto& c : charts) {
    auto v = c.sample_validity(c.delta(), 41);
    EXPECT_GE(v.det_min, 0.5) << c.describe();
    EXPECT_LE(v.det_max, 1.5) << c.describe();
  }
  // The chosen delta is the largest dyadic one: its double fails or exceeds the chart.
  ReflectionChart p = parabola();
  auto v = p.sample_validity(2 * p.delta());
  EXPECT_TRUE(v.det_min < 0.5 || v.det_max > 1.5);
}

TEST(Reflect, FlatChartIsEvenReflection) {
  ReflectionChart c(ChartKind::Flat, 0.0, 2);
  auto u = [](const Vec& X) { return std::cos(kPi * X[0]) * std::cosh(kPi * X[1]); };
  for (double x : {-0.3, 0.1, 0.45})
    for (double y : {0.0, 0.05, 0.3}) {
      EXPECT_NEAR(c.reflect_field(u, vec2(x, -y)), u(vec2(x, y)), 1e-14);
      EXPECT_EQ(c.phi_map(vec2(x, -y)), vec2(x, y));
    }
}

TEST(Reflect, ContinuousAcrossBoundary) {
  for (const ReflectionChart& c : {parabola(), arc()}) {
    auto u = [](const Vec& X) { return std::exp(X[0]) * std::cos(X[1]) + X[1]; };
    for (double x : {-0.2, 0.0, 0.17}) {
      const Vec nu = c.normal(Vec::Constant(1, x));
      const Vec X0 = vec2(x, c.phi(x));
      const double a = c.reflect_field(u, X0 - 1e-10 * nu), b = c.reflect_field(u, X0 + 1e-10 * nu);
      EXPECT_LE(std::fabs(a - b), 1e-9);
    }
  }
}

TEST(Reflect, CompositionIdentityOnDomainSide) {
  ReflectionChart c = parabola();
  auto u = [](const Vec& X) { return std::sin(3 * X[0]) * std::exp(X[1]); };
  for (double x : {-0.1, 0.2})
    for (double s : {0.01, 0.2}) {
      const Vec p = vec2(x, s);
      EXPECT_NEAR(c.reflect_field(u, c.flatten(p)), u(c.flatten(p)), 1e-12);
      EXPECT_NEAR(c.reflect_field(u, c.flatten(vec2(x, -s))), u(c.flatten(p)), 1e-12);
    }
}

TEST(Phi, FixedPointAndOracleEquivalence) {
  for (const ReflectionChart& c : {parabola(), arc()}) {
    for (double x : {-0.2, 0.0, 0.2}) {
      const Vec X0 = vec2(x, c.phi(x));
      EXPECT_LE((c.phi_map(X0) - X0).norm(), 1e-10);
    }
    auto u = [](const Vec& X) { return std::exp(X[0]) * std::cos(X[1]); };
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> un(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const Vec X = c.flatten(vec2(0.9 * c.delta() * un(rng), 0.9 * c.delta() * un(rng)));
      Vec p = oracle_invert(c, X);
      p[1] = std::fabs(p[1]);
      const double via_oracle = u(c.flatten(p));
      ASSERT_NEAR(c.reflect_field(u, X), via_oracle, 1e-10);
      ASSERT_NEAR(u(c.phi_map(X)), via_oracle, 1e-10);
    }
    PhiDistanceReport rep = phi_distance_check(c, vec2(0.05, c.phi(0.05)), 0.1, 500, 9);
    EXPECT_TRUE(std::isfinite(rep.c));
    EXPECT_GE(rep.c, 0.5);
    EXPECT_LE(rep.c, 3.0);
  }
}

TEST(WeakResidual, ZeroFieldGivesZero) {
  Bump b{vec2(0.0, 0.0), 0.2};
  auto I = [](const Vec&) { return Mat::Identity(2, 2); };
  EXPECT_EQ(weak_residual(I, [](const Vec&) { return 0.0; }, b, 1.0 / 64), 0.0);
}

TEST(WeakResidual, FlatReflectionIsWeakSolution) {
  ReflectionChart c(ChartKind::Flat, 0.0, 2);
  auto u = [](const Vec& X) { return std::cos(kPi * X[0]) * std::cosh(kPi * X[1]); };
  auto ut = [&](const Vec& X) { return c.reflect_field(u, X); };
  auto B = [&](const Vec& X) { return c.coefficient_B(X); };
  Bump b{vec2(0.1, 0.0), 0.25};
  EXPECT_LE(std::fabs(weak_residual(B, ut, b, 1.0 / 256)), 1e-6);
  // A non-solution gives a residual far from zero: the check has teeth.
  auto bad = [&](const Vec& X) { return std::fabs(X[1]); };
  EXPECT_GT(std::fabs(weak_residual(B, bad, b, 1.0 / 256)), 1e-3);
}

TEST(WeakResidual, OutsideRegionThrows) {
  Bump b{vec2(0.0, 0.0), 0.2};
  auto I = [](const Vec&) { return Mat::Identity(2, 2); };
  auto f = [](const Vec& X) { return X[0]; };
  EXPECT_THROW(weak_residual(I, f, b, 1.0 / 32, 4, [](const Vec& X) { return X[1] > -0.1; }), std::domain_error);
}

std::vector<double> pullback_residuals(const ReflectionChart& c, int order) {
  auto u = [](const Vec& X) { return std::exp(2 * X[0]) * std::cos(2 * X[1]); };
  auto v = [&](const Vec& p) { return u(c.flatten(p)); };
  auto A = [&](const Vec& p) { return c.coefficient_A(p); };
  const double d = c.delta();
  Bump b{vec2(0.0, 0.5 * d), 0.3 * d};
  std::vector<double> out;
  for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) out.push_back(std::fabs(weak_residual(A, v, b, h, order)));
  return out;
}

TEST(WeakResidual, PullbackConverges) {
  for (const ReflectionChart& c : {parabola(), arc()}) {
    auto r = pullback_residuals(c, 4);
    EXPECT_GE(std::log2(r[0] / r[1]), 1.0) << c.describe();
    EXPECT_GE(std::log2(r[1] / r[2]), 1.0) << c.describe();
  }
}

TEST(WeakResidual, ReflectedNeumannFieldAcrossArc) {
  // (rho^k + R^{2k} rho^{-k}) cos(k theta) about the disk center is harmonic with zero normal
  // derivative on the circle; its reflection must solve div(B grad u~) = 0 across it.
  const double R = 1.0;
  ReflectionChart c(ChartKind::Arc, R, 2);
  auto u = [R](const Vec& X) {
    const double dx = X[0], dy = R - X[1];
    const double rho = std::hypot(dx, dy), th = std::atan2(dx, dy);
    return (std::pow(rho, 2) + std::pow(R, 4) / std::pow(rho, 2)) * std::cos(2 * th);
  };
  auto ut = [&](const Vec& X) { return c.reflect_field(u, X); };
  auto B = [&](const Vec& X) { return c.coefficient_B(X); };
  Bump b{vec2(0.02, 0.0), 0.1};
  std::vector<double> r;
  for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) r.push_back(std::fabs(weak_residual(B, ut, b, h)));
  EXPECT_GE(std::log2(r[0] / r[1]), 1.0);
  EXPECT_GE(std::log2(r[1] / r[2]), 1.0);
  // Same field with B replaced by the identity is not a weak solution.
  auto I = [](const Vec&) { return Mat::Identity(2, 2); };
  EXPECT_GT(std::fabs(weak_residual(I, ut, b, 1.0 / 256)), 100 * r[2]);
}

TEST(Lipschitz, ConstantAndIdentityFields) {
  auto constant = [](const Vec&) { Mat m(2, 2); m << 1, 2, 2, 5; return m; };
  EXPECT_EQ(lipschitz_estimate(constant, vec2(-1, -1), vec2(1, 1), 1000, 1).constant, 0.0);
  ReflectionChart flat(ChartKind::Flat, 0.0, 2);
  auto J = [&](const Vec& p) { return flat.jacobian(p); };
  EXPECT_EQ(lipschitz_estimate(J, vec2(-0.5, -0.5), vec2(0.5, 0.5), 1000, 1).constant, 0.0);
}

TEST(Lipschitz, ParabolaBStableUnderDensification) {
  ReflectionChart c(ChartKind::Parabola, 1.0, 2, 0.1);
  auto B = [&](const Vec& X) { return c.coefficient_B(X); };
  const Vec lo = vec2(-0.08, -0.08), hi = vec2(0.08, 0.08);
  const double l1 = lipschitz_estimate(B, lo, hi, 1000, 21).constant;
  const double l4 = lipschitz_estimate(B, lo, hi, 4000, 22).constant;
  EXPECT_TRUE(std::isfinite(l1));
  EXPECT_GT(l1, 0.0);
  EXPECT_NEAR(l4 / l1, 1.0, 0.2);
}

}  // namespace
}  // namespace nodalab
