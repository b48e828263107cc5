#pragma once

#include <string>
#include <vector>

namespace nodalab {

/// Largest supported Bessel order.
inline constexpr int kMaxBesselOrder = 50;

/// Bessel function of the first kind J_order(x) for integer order in [0, 50] and x >= 0.
/// Power series below x = 12, normalized Miller backward recurrence above.
/// Throws std::domain_error for negative or non-finite x, or an unsupported order.
double bessel_j(int order, double x);

/// dJ_order/dx. Uses J0' = -J1 and J_n' = (J_{n-1} - J_{n+1}) / 2.
double bessel_j_derivative(int order, double x);

enum class ZeroKind { J, JPrime };

ZeroKind parse_zero_kind(const std::string& s);
std::string to_string(ZeroKind k);

/// First positive zeros of J_order or J_order', in increasing order.
struct ZeroTable {
  int order = 0;
  ZeroKind kind = ZeroKind::J;
  std::vector<double> values;
  std::vector<double> residuals;  ///< |f(value)| for each zero
};

/// Bracket on a grid of step 0.5 starting at 1e-3, bisect to width 1e-8, then polish with Newton.
/// Throws std::runtime_error when fewer than `count` zeros can be bracketed or a residual
/// exceeds 1e-10.
ZeroTable compute_zeros(int order, ZeroKind kind, int count);

}  // namespace nodalab
