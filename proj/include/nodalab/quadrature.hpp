#pragma once

#include <functional>
#include <vector>

namespace nodalab {

/// Nodes and weights on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points. Rules are computed once and cached.
const QuadratureRule& gauss_legendre(int n);

/// Clenshaw-Curtis rule with 2^level + 1 points (level 0 is the midpoint rule).
/// The points of level k are a subset of the points of level k + 1.
const QuadratureRule& clenshaw_curtis(int level);

/// Composite Gauss-Legendre rule on [a, b] split into `panels` equal pieces.
QuadratureRule composite_gauss(int points_per_panel, int panels, double a, double b);

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  long evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod-style integration using nested GL pairs.
/// Stops when the summed error estimate is below max(abs_tol, rel_tol * |I|).
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol, double abs_tol = 0.0, int max_intervals = 4096);

}  // namespace nodalab
