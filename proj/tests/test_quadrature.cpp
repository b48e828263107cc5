#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nodalab/quadrature.hpp"

namespace nodalab {
namespace {

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n : {1, 2, 5, 16, 32}) {
    const QuadratureRule& r = gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = (p % 2 == 0) ? 2.0 / (p + 1) : 0.0;
      EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " p=" << p;
    }
  }
}

TEST(ClenshawCurtis, NestedAndExactForLowDegree) {
  for (int level = 1; level <= 6; ++level) {
    const QuadratureRule& r = clenshaw_curtis(level);
    const int n = 1 << level;
    for (int p = 0; p <= n; ++p) {
      double s = 0.0;
      for (size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = (p % 2 == 0) ? 2.0 / (p + 1) : 0.0;
      EXPECT_NEAR(s, exact, 1e-13);
    }
    const QuadratureRule& fine = clenshaw_curtis(level + 1);
    for (size_t i = 0; i < r.nodes.size(); ++i) EXPECT_DOUBLE_EQ(r.nodes[i], fine.nodes[2 * i]);
  }
}

TEST(Adaptive, BumpIntegralMatchesHighPrecisionValue) {
  // Reference value of the integral of exp(1/(x^2-1)) over (-1, 1) from 40-digit arithmetic.
  const double ref = 0.443993816168079437823;
  auto f = [](double x) { return std::fabs(x) < 1.0 ? std::exp(1.0 / (x * x - 1.0)) : 0.0; };
  AdaptiveResult r = integrate_adaptive(f, -1.0, 1.0, 1e-13);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, ref, 1e-14);
}

TEST(Composite, MatchesAdaptiveOnBump) {
  auto f = [](double x) { return std::fabs(x) < 1.0 ? std::exp(1.0 / (x * x - 1.0)) : 0.0; };
  QuadratureRule c = composite_gauss(32, 8, -1.0, 1.0);
  double s = 0.0;
  for (size_t i = 0; i < c.nodes.size(); ++i) s += c.weights[i] * f(c.nodes[i]);
  EXPECT_NEAR(s, 0.443993816168079437823, 1e-14);
}

}  // namespace
}  // namespace nodalab
