#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "nodalab/eigenmodes.hpp"
#include "nodalab/linalg.hpp"
#include "nodalab/reflect.hpp"
#include "nodalab/tiling.hpp"

namespace nodalab {

using ScalarField = std::function<double(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;

/// h(x, y, t) = u(x, y) exp(sqrt(lambda) t), harmonic in R^3 wherever u is defined.
struct LiftedField {
  Eigenmode mode;
  double T = 1.0;  ///< slab half-height
  double sqrt_lambda = 0.0;

  /// Value at X = (x, y, t); throws std::domain_error if (x, y) is outside the base domain.
  double operator()(const Vec& X) const;
  /// The closed form at any point of R^3.
  double extended(const Vec& X) const;
};

/// Throws std::invalid_argument unless T > 0.
LiftedField lift(const Eigenmode& mode, double T = 1.0);

/// Omega = {X_d >= phi(X_1)} in the coordinates of the integrand.
struct GraphClip {
  std::function<double(double)> phi;
};

/// Quadrature parameters chosen by the adaptive loop, reusable at nearby radii.
struct BallRule {
  bool split = false;
  std::array<int, 3> levels{0, 0, 0};  ///< radius, polar cosine, azimuth
  int order = 0;                       ///< Gauss points per piece on the split route
};

struct BallMass {
  double value = 0.0;
  double error = 0.0;  ///< change against the next coarser rule
  long evaluations = 0;
  BallRule rule;
};

/// H = integral over B(center, r) of alpha v^2 in dimension center.size() (2 or 3).
/// Without `clip` the rule is polar: nested Clenshaw-Curtis in the radius (and the polar
/// cosine in 3D) with the periodic trapezoid in the azimuth, each axis refined until it
/// stops changing the value by more than rel_tol. With `clip` the split form
/// int_{B cap Omega} v^2 + int_{B \ Omega} alpha v^2 is integrated along chords cut at the
/// graph, with Gauss-Legendre order doubling. A null alpha is 1. Throws std::runtime_error
/// with the achieved tolerance on failure.
BallMass ball_mass(const ScalarField& v, const ScalarField& alpha, const Vec& center, double r,
                   const GraphClip* clip = nullptr, double rel_tol = 1e-8);

/// The same integral with a fixed rule.
double ball_mass_with_rule(const ScalarField& v, const ScalarField& alpha, const Vec& center, double r,
                           const GraphClip* clip, const BallRule& rule);

/// Weight (M~(Y) Y, Y) / |Y|^2 with Y = S (X - c), S = M(c)^{-1/2} and M~ = S M S, so that
/// the normalized matrix is the identity at the center. Equals 1 at X = c.
ScalarField recentred_alpha(const MatrixField& M, const Vec& center);

/// Integral of exp(w . Y) over the ball |Y| <= r in dimension 2 or 3 as a function of the
/// (possibly negative) invariant kappa2 = w . w; valid for complex w with real w . w.
double ball_exp_integral(int dim, double kappa2, double r);

/// Exact ball mass of the extended closed form of a rectangle mode: the 2D mode for a
/// 2-vector center, the lift for a 3-vector. The extension is the even reflection across
/// every side, so this is also the reflected ball mass. Throws std::invalid_argument for disks.
double rectangle_ball_mass(const Eigenmode& mode, const Vec& center, double r);

/// N(x, r) = r H'(r) / H(r), H' by a central difference with step 1e-4 r on a frozen rule.
/// Throws std::domain_error for zero ball mass.
double frequency(const ScalarField& v, const Vec& center, double r, const ScalarField& alpha = nullptr,
                 const GraphClip* clip = nullptr);

/// log(H(2r) / H(r)). Throws std::domain_error for zero ball mass.
double doubling_index(const ScalarField& v, const Vec& center, double r, const ScalarField& alpha = nullptr,
                      const GraphClip* clip = nullptr);

/// Orthonormal frame placing chart coordinates in the field's space: X = origin + axes * p.
struct ChartFrame {
  Vec origin;
  Mat axes;

  Vec to_global(const Vec& local) const { return origin + axes * local; }
  Vec to_local(const Vec& global) const { return axes.transpose() * (global - origin); }
};

/// Frame of a 3D slab chart at a boundary point (x, y) of the base domain and height t:
/// first axis tangent to the base boundary, second along t, third the inward normal.
ChartFrame boundary_frame(const ModelDomain& d, double x, double y, double t);

/// Split ball mass of the reflected field h~ = h o Phi in chart coordinates, with alpha from
/// the coefficient matrix B recentred at the ball center. `x` is a global point.
/// Throws std::domain_error ("reduce r or move the chart") if the ball leaves the chart.
BallMass reflected_ball_mass(const ScalarField& h, const ReflectionChart& chart, const ChartFrame& frame,
                             const Vec& x, double r, double rel_tol = 1e-8);

/// N*(x, r): doubling index of the reflected field.
double boundary_doubling_index(const ScalarField& h, const ReflectionChart& chart, const ChartFrame& frame,
                               const Vec& x, double r);

/// N*(x, r) of a lifted eigenmode. Rectangles use the exact reflected ball mass; disks use
/// the interior quadrature when B(x, 2r) stays inside the cylinder and an arc chart at the
/// nearest boundary point otherwise.
class ReflectedLift {
 public:
  explicit ReflectedLift(const LiftedField& h);

  const LiftedField& field() const { return h_; }
  int dim() const { return 3; }
  /// Reflected ball mass H*(x, r).
  double mass(const Vec& x, double r) const;
  double doubling_index(const Vec& x, double r) const;

 private:
  LiftedField h_;
  std::optional<ReflectionChart> chart_;
};

/// Sample set for the supremum over a cube.
struct CubeSampling {
  int density = 8;                  ///< lattice intervals per side, (density + 1)^d candidate points
  int radii = 12;                   ///< geometric ladder length
  double min_fraction = 1.0 / 64.0;  ///< smallest radius as a fraction of diam(Q)
};

struct CubeIndex {
  double value = 0.0;  ///< lower bound for the supremum
  Vec argmax_center;
  double argmax_r = 0.0;
  int samples = 0;
};

/// max of N*(x, r) over lattice points x in Q cap closure(Omega) and radii
/// diam(Q) * min_fraction ... diam(Q).
CubeIndex cube_doubling_index(const ReflectedLift& h, const Cube& Q, const CubeSampling& sampling = {});

/// Ball mass, frequency and doubling index along a radius ladder at one center.
struct FrequencyProfile {
  Vec center;
  std::vector<double> radii;
  std::vector<double> H;
  std::vector<double> N;
  std::vector<double> doubling;  ///< log(H(2r) / H(r))
  std::vector<double> N_double;  ///< N at 2r
};

FrequencyProfile frequency_profile(const ScalarField& v, const Vec& center, const std::vector<double>& radii,
                                   const ScalarField& alpha = nullptr, const GraphClip* clip = nullptr);

/// Smallest constants, in the norm |(C1 - 1, C2)|, with C1 in [1, 8] multiplicative and
/// C2 >= 0 additive, for one family of inequalities.
struct ConstantFit {
  double C1 = 1.0;
  double C2 = 0.0;
  double min_slack = 0.0;  ///< tightest inequality at the fitted constants
  int constraints = 0;
  int violations_at_identity = 0;  ///< inequalities failing at C1 = 1, C2 = 0
};

struct MonotonicityFit {
  double rho0 = 0.0;           ///< largest radius in the profile
  ConstantFit frequency;       ///< N(r1) <= C1 N(r2) + C2 for 2 r1 < r2
  ConstantFit comparability;   ///< N(r)/C1 - C2 <= doubling(r) <= C1 N(2r) + C2
  ConstantFit growth;          ///< (r2/r1)^(doubling(r1)/C1 - C2) <= H(r2)/H(r1) <= (r2/r1)^(C1 doubling(r2) + C2)
};

/// Requires at least 8 radii; throws std::invalid_argument otherwise and std::domain_error
/// when every H is zero.
MonotonicityFit fit_monotonicity(const FrequencyProfile& p);

/// Most negative second difference of log H against log r (divided differences scaled by the
/// mean squared step). Requires at least 5 radii.
double log_convexity_check(const FrequencyProfile& p);

}  // namespace nodalab
