#include "nodalab/specfun.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nodalab {

namespace {

constexpr double kSeriesLimit = 12.0;
constexpr double kScanStart = 1e-3;
constexpr double kScanStep = 0.5;
constexpr double kBracketWidth = 1e-8;
constexpr int kNewtonMaxIter = 60;
constexpr double kResidualLimit = 1e-10;

long double series_j(int n, long double x) {
  const long double half = 0.5L * x;
  long double term = 1.0L;
  for (int k = 1; k <= n; ++k) term *= half / k;
  const long double q = -half * half;
  long double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<long double>(k) * (k + n));
    sum += term;
    if (std::fabs(term) < 1e-24L * (1.0L + std::fabs(sum))) break;
  }
  return sum;
}

// Fills out[0..n] with J_0..J_n at x > 0 via backward recurrence normalized by
// J_0 + 2 * sum_k J_{2k} = 1.
void miller_j(int n, long double x, long double* out) {
  const int m = std::max(n, static_cast<int>(x));
  int start = m + 20 + static_cast<int>(std::sqrt(60.0 * m));
  if (start % 2 == 1) ++start;
  long double jp1 = 0.0L, j = 1e-30L, norm = 0.0L;
  for (int k = start; k >= 1; --k) {
    long double jm1 = (2.0L * k / x) * j - jp1;
    jp1 = j;
    j = jm1;
    if (k - 1 <= n) out[k - 1] = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0L * j;
    if (std::fabs(j) > 1e250L) {
      j *= 1e-250L;
      jp1 *= 1e-250L;
      norm *= 1e-250L;
      for (int i = k - 1; i <= n; ++i) out[i] *= 1e-250L;
    }
  }
  norm += j;
  for (int i = 0; i <= n; ++i) out[i] /= norm;
}

long double bessel_j_ld(int order, double x) {
  if (x == 0.0) return order == 0 ? 1.0L : 0.0L;
  if (x < kSeriesLimit) return series_j(order, x);
  long double buf[kMaxBesselOrder + 2];
  miller_j(order, x, buf);
  return buf[order];
}

void check_args(int order, double x, int max_order) {
  if (!std::isfinite(x) || x < 0.0) throw std::domain_error("bessel: x must be finite and >= 0");
  if (order < 0 || order > max_order) throw std::domain_error("bessel: order must be in [0, 50]");
}

double eval_kind(int order, ZeroKind kind, double x) {
  return kind == ZeroKind::J ? bessel_j(order, x) : bessel_j_derivative(order, x);
}

// Derivative of the function whose zeros are sought.
double eval_kind_derivative(int order, ZeroKind kind, double x) {
  if (kind == ZeroKind::J) return bessel_j_derivative(order, x);
  // J'' from the Bessel equation x^2 J'' + x J' + (x^2 - n^2) J = 0.
  const double j = bessel_j(order, x);
  const double jp = bessel_j_derivative(order, x);
  return -jp / x - (1.0 - static_cast<double>(order) * order / (x * x)) * j;
}

}  // namespace

double bessel_j(int order, double x) {
  check_args(order, x, kMaxBesselOrder + 1);
  return static_cast<double>(bessel_j_ld(order, x));
}

double bessel_j_derivative(int order, double x) {
  check_args(order, x, kMaxBesselOrder);
  if (order == 0) return -static_cast<double>(bessel_j_ld(1, x));
  return static_cast<double>(0.5L * (bessel_j_ld(order - 1, x) - bessel_j_ld(order + 1, x)));
}

ZeroKind parse_zero_kind(const std::string& s) {
  if (s == "j") return ZeroKind::J;
  if (s == "jprime") return ZeroKind::JPrime;
  throw std::invalid_argument("unknown zero kind '" + s + "' (expected j or jprime)");
}

std::string to_string(ZeroKind k) { return k == ZeroKind::J ? "j" : "jprime"; }

ZeroTable compute_zeros(int order, ZeroKind kind, int count) {
  if (order < 0 || order > kMaxBesselOrder) throw std::invalid_argument("zeros: order must be in [0, 50]");
  if (count < 1 || count > 200) throw std::invalid_argument("zeros: count must be in [1, 200]");
  ZeroTable table;
  table.order = order;
  table.kind = kind;
  // Every zero lies below (count + order/2 + 2) * pi by McMahon-type spacing; 4x margin.
  const double limit = 4.0 * (count + order + 4) * 3.141592653589793;
  double x0 = kScanStart;
  double f0 = eval_kind(order, kind, x0);
  while (static_cast<int>(table.values.size()) < count && x0 < limit) {
    const double x1 = x0 + kScanStep;
    const double f1 = eval_kind(order, kind, x1);
    double root;
    bool found = false;
    if (f1 == 0.0) {
      root = x1;
      found = true;
    } else if ((f0 < 0.0) != (f1 < 0.0) && f0 != 0.0) {
      double lo = x0, hi = x1, flo = f0;
      while (hi - lo > kBracketWidth) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval_kind(order, kind, mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      root = 0.5 * (lo + hi);
      for (int it = 0; it < kNewtonMaxIter; ++it) {
        const double f = eval_kind(order, kind, root);
        const double df = eval_kind_derivative(order, kind, root);
        if (f == 0.0 || df == 0.0) break;
        double next = root - f / df;
        if (next < lo - kBracketWidth || next > hi + kBracketWidth) break;
        const double step = std::fabs(next - root);
        root = next;
        if (step <= 1e-16 * root) break;
      }
      found = true;
    }
    if (found) {
      const double r = std::fabs(eval_kind(order, kind, root));
      if (r > kResidualLimit) {
        throw std::runtime_error("zeros: residual " + std::to_string(r) + " exceeds 1e-10 near x = " +
                                 std::to_string(root));
      }
      table.values.push_back(root);
      table.residuals.push_back(r);
    }
    x0 = x1;
    f0 = f1;
  }
  if (static_cast<int>(table.values.size()) < count) {
    throw std::runtime_error("zeros: bracketing found only " + std::to_string(table.values.size()) +
                             " of " + std::to_string(count) + " zeros");
  }
  return table;
}

}  // namespace nodalab
