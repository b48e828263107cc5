#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nodalab/linalg.hpp"

namespace nodalab {

/// Normalizing constant C of exp(1/(|x|^2 - 1)) on the unit ball of R^dim, dim in {1, 2}.
double mollifier_constant(int dim);

/// Unit-mass bump on R^dim with dim = x.size(); zero for |x| >= 1.
double mollifier(const Vec& x);

/// s^{-dim} * mollifier(x / s). Requires s > 0.
double mollifier_scaled(double s, const Vec& x);

enum class ChartKind { Flat, Affine, Parabola, Arc };

/// Boundary chart: Omega lies above the graph X_d = phi(X'), with X' in R^{d-1}.
///
/// The graph depends on the first tangential coordinate only; in d = 3 it is constant in the
/// second one (a product chart). Chart points are p = (x, s) with x in R^{d-1}. The flattening
/// map is F~(x, s) = (x, phi(x)) - s (eta_|s| * nu)(x), which is F for s >= 0 and the G branch
/// for s < 0. Convolutions use a composite Gauss-Legendre rule on [-1, 1] fixed at
/// construction; for d = 3 the kernel is integrated over the constant direction first.
class ReflectionChart {
 public:
  /// Builds the chart. `param` is the slope (affine), curvature c of c|x|^2/2 (parabola) or the
  /// radius (arc). Without `delta` the largest dyadic delta passing the validity checks is used.
  ReflectionChart(ChartKind kind, double param, int dim, std::optional<double> delta = std::nullopt);

  /// Parses "flat", "affine:c", "parabola:c" or "arc:R".
  static ReflectionChart parse(const std::string& spec, int dim, std::optional<double> delta = std::nullopt);

  ChartKind kind() const { return kind_; }
  double param() const { return param_; }
  int dim() const { return dim_; }
  double delta() const { return delta_; }
  double mollifier_constant() const { return c_eta_; }
  /// Lipschitz constant of grad phi over |x| <= 2 delta.
  double grad_lipschitz() const;
  /// Number of quadrature nodes used by each convolution.
  int convolution_nodes() const { return static_cast<int>(tau_.size()); }
  std::string describe() const;

  double phi(double x1) const;
  double dphi(double x1) const;
  /// phi at the tangential part of a point (first d-1 coordinates).
  double phi_at(const Vec& X) const { return phi(X[0]); }
  /// True for points on or above the graph.
  bool in_domain(const Vec& X) const { return X[dim_ - 1] >= phi(X[0]); }

  /// Outward unit normal (grad phi, -1) / sqrt(1 + |grad phi|^2) at the tangential point x.
  Vec normal(const Vec& x) const;

  /// (eta_s * nu)(x) for s > 0; throws std::domain_error if the support leaves the chart.
  Vec smoothed_normal(const Vec& x, double s) const;

  /// True if p = (x, s) lies in the validity box |x_1| <= delta, |s| <= delta.
  bool in_validity(const Vec& p) const;

  /// F~(x, s); throws std::domain_error outside the validity box.
  Vec flatten(const Vec& p) const;

  /// Jacobian with entries dF~_i / dp_j (column k is the k-th partial derivative).
  /// At s = 0 both one-sided limits coincide and are returned.
  Mat jacobian(const Vec& p) const;

  /// Both F~ and its Jacobian in one pass.
  void flatten_with_jacobian(const Vec& p, Vec& value, Mat& jac) const;

  /// Damped Newton solve of F~(p) = X from (X', X_d - phi(X')). Throws std::runtime_error
  /// if the residual does not reach 1e-12 within 50 iterations or the root is not valid.
  Vec invert(const Vec& X, int* iterations = nullptr) const;

  /// |det J| J^{-1} J^{-T} with J the Jacobian of F at (x, s), s >= 0.
  Mat coefficient_A(const Vec& p) const;
  /// A for s >= 0 and DR A(x, -s) DR for s < 0, DR = diag(1, ..., 1, -1).
  Mat coefficient_Atilde(const Vec& p) const;
  /// |det J~|^{-1} J~ A~ J~^T at p = F~^{-1}(X); the identity on the domain side.
  Mat coefficient_B(const Vec& X) const;
  /// B evaluated directly at chart coordinates p (no inversion).
  Mat coefficient_B_chart(const Vec& p) const;

  /// Phi(X) = F(x, |s|) with (x, s) = F~^{-1}(X); the identity on the domain side.
  Vec phi_map(const Vec& X) const;

  /// Even reflection u~(X) = u(Phi(X)).
  double reflect_field(const std::function<double(const Vec&)>& u, const Vec& X) const;

  /// Extremes of det J~ and of the eigenvalues of B over an n x n grid of the validity box.
  struct Validity {
    double det_min, det_max, eig_min, eig_max;
  };
  Validity sample_validity(double delta, int n = 17) const;

 private:
  struct ConvResult {
    double n[2], dn[2], kn[2];  // eta, eta' and (d-1) eta + tau eta' against nu, in (x1, normal)
  };
  ConvResult convolve(double x1, double sigma) const;
  Vec embed(const double v[2]) const;
  double phi_domain_radius() const;
  void check_support(double x1, double sigma) const;
  void build_kernels();
  double auto_delta() const;

  ChartKind kind_;
  double param_;
  int dim_;
  double c_eta_;
  double delta_;
  bool constant_normal_;
  std::vector<double> tau_, w_eta_, w_deta_, w_k_;
};

/// Matrix field with ellipticity and Lipschitz data gathered by sampling.
struct CoefficientField {
  std::function<Mat(const Vec&)> eval;
  double lambda_bound = 1.0;  ///< eigenvalues observed in [1/Lambda, Lambda]
  double eig_min = 1.0, eig_max = 1.0;
  double max_asymmetry = 0.0;
  double lipschitz = 0.0;
  int samples = 0;
};

/// Samples B over the chart image of the validity box (n^d chart points) and fills the bounds.
CoefficientField coefficient_field_B(const ReflectionChart& chart, int n = 17);

/// Compactly supported test function exp(1/(|X - c|^2 / rho^2 - 1)).
struct Bump {
  Vec center;
  double radius = 1.0;
  double value(const Vec& X) const;
  Vec gradient(const Vec& X) const;
};

/// Sum over the grid center + h Z^d inside the bump of h^d (M grad_h f) . grad psi, with grad_h the
/// central difference of the given order (2 or 4). `in_region` (when set) must accept every
/// stencil point, otherwise std::domain_error is thrown.
double weak_residual(const std::function<Mat(const Vec&)>& coeff, const std::function<double(const Vec&)>& field,
                     const Bump& bump, double h, int order = 4,
                     const std::function<bool(const Vec&)>& in_region = nullptr);

struct LipschitzEstimate {
  double constant = 0.0;
  int pairs = 0;
  double min_separation = 0.0, max_separation = 0.0;
};

/// max ||M(p) - M(q)||_F / |p - q| over random pairs with p uniform in [lo, hi] and
/// q = p + r u, u a random unit vector, r log-uniform in [1e-4, 1e-1] times the box diameter.
/// Pairs leaving the box are redrawn. A lower bound on the true constant.
LipschitzEstimate lipschitz_estimate(const std::function<Mat(const Vec&)>& M, const Vec& lo, const Vec& hi,
                                     int pairs, std::uint64_t seed);

struct PhiDistanceReport {
  double c = 0.0;  ///< max |Phi(X) - X0| / |X - X0|
  int samples = 0;
};

/// Samples X in the chart image within distance `radius` of the boundary point X0.
PhiDistanceReport phi_distance_check(const ReflectionChart& chart, const Vec& X0, double radius, int samples,
                                     std::uint64_t seed);

}  // namespace nodalab
