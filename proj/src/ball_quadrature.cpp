#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nodalab/lift.hpp"
#include "nodalab/quadrature.hpp"

namespace nodalab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<int, 3> kMaxLevel{12, 12, 13};
constexpr long kMaxNodes = 1L << 23;
constexpr int kMaxSplitOrder2 = 256;
constexpr int kMaxSplitOrder3 = 96;

struct Axis {
  std::vector<double> x, w;
};

Axis radius_axis(int level, double r, int dim) {
  const QuadratureRule& cc = clenshaw_curtis(level);
  Axis a;
  a.x.resize(cc.nodes.size());
  a.w.resize(cc.nodes.size());
  for (size_t i = 0; i < cc.nodes.size(); ++i) {
    a.x[i] = 0.5 * r * (1.0 + cc.nodes[i]);
    a.w[i] = 0.5 * r * cc.weights[i] * (dim == 3 ? a.x[i] * a.x[i] : a.x[i]);
  }
  return a;
}

Axis cosine_axis(int level, int dim) {
  if (dim == 2) return Axis{{0.0}, {1.0}};
  const QuadratureRule& cc = clenshaw_curtis(level);
  return Axis{cc.nodes, cc.weights};
}

Axis azimuth_axis(int level) {
  const int n = 1 << level;
  Axis a;
  a.x.resize(n);
  a.w.assign(n, 2.0 * kPi / n);
  for (int j = 0; j < n; ++j) a.x[j] = 2.0 * kPi * j / n;
  return a;
}

std::array<Axis, 3> polar_axes(const std::array<int, 3>& lv, double r, int dim) {
  return {radius_axis(lv[0], r, dim), cosine_axis(lv[1], dim), azimuth_axis(lv[2])};
}

double integrand(const ScalarField& v, const ScalarField& alpha, const Vec& X) {
  const double f = v(X);
  return alpha ? alpha(X) * f * f : f * f;
}

/// Values of alpha v^2 on the tensor grid; entries flagged in `known` are kept.
void fill_polar(const ScalarField& v, const ScalarField& alpha, const Vec& c, const std::array<Axis, 3>& ax,
                std::vector<double>& val, const std::vector<char>& known, long& evals) {
  const int dim = static_cast<int>(c.size());
  const size_t n1 = ax[1].x.size(), n2 = ax[2].x.size();
  std::vector<double> cphi(n2), sphi(n2);
  for (size_t k = 0; k < n2; ++k) cphi[k] = std::cos(ax[2].x[k]), sphi[k] = std::sin(ax[2].x[k]);
  Vec X(dim);
  for (size_t i = 0; i < ax[0].x.size(); ++i) {
    const double rho = ax[0].x[i];
    for (size_t j = 0; j < n1; ++j) {
      const double mu = ax[1].x[j];
      const double s = dim == 3 ? std::sqrt(std::max(0.0, 1.0 - mu * mu)) : 1.0;
      for (size_t k = 0; k < n2; ++k) {
        const size_t idx = (i * n1 + j) * n2 + k;
        if (!known.empty() && known[idx]) continue;
        X[0] = c[0] + rho * s * cphi[k];
        X[1] = c[1] + rho * s * sphi[k];
        if (dim == 3) X[2] = c[2] + rho * mu;
        val[idx] = integrand(v, alpha, X);
        ++evals;
      }
    }
  }
}

/// Tensor sum; axis `coarse` (if >= 0) uses the rule one level down on its even indices.
double polar_sum(const std::vector<double>& val, const std::array<Axis, 3>& ax, int coarse,
                 const std::array<int, 3>& lv, double r, int dim) {
  std::array<std::vector<double>, 3> w{ax[0].w, ax[1].w, ax[2].w};
  std::array<int, 3> stride{1, 1, 1};
  if (coarse >= 0) {
    std::array<int, 3> lc = lv;
    --lc[coarse];
    const std::array<Axis, 3> axc = polar_axes(lc, r, dim);
    std::vector<double> wc(ax[coarse].w.size(), 0.0);
    for (size_t i = 0; i < axc[coarse].w.size(); ++i) wc[2 * i] = axc[coarse].w[i];
    w[coarse] = wc;
    stride[coarse] = 2;
  }
  const size_t n0 = ax[0].x.size(), n1 = ax[1].x.size(), n2 = ax[2].x.size();
  double total = 0.0;
  for (size_t i = 0; i < n0; i += stride[0]) {
    double s1 = 0.0;
    for (size_t j = 0; j < n1; j += stride[1]) {
      double s2 = 0.0;
      const double* row = &val[(i * n1 + j) * n2];
      for (size_t k = 0; k < n2; k += stride[2]) s2 += w[2][k] * row[k];
      s1 += w[1][j] * s2;
    }
    total += w[0][i] * s1;
  }
  return total;
}

size_t polar_size(const std::array<int, 3>& lv, int dim) {
  return static_cast<size_t>(clenshaw_curtis(lv[0]).nodes.size()) *
         (dim == 3 ? clenshaw_curtis(lv[1]).nodes.size() : 1u) * (static_cast<size_t>(1) << lv[2]);
}

double polar_fixed(const ScalarField& v, const ScalarField& alpha, const Vec& c, double r,
                   const std::array<int, 3>& lv, long& evals) {
  const int dim = static_cast<int>(c.size());
  const auto ax = polar_axes(lv, r, dim);
  std::vector<double> val(polar_size(lv, dim));
  fill_polar(v, alpha, c, ax, val, {}, evals);
  return polar_sum(val, ax, -1, lv, r, dim);
}

BallMass polar_adaptive(const ScalarField& v, const ScalarField& alpha, const Vec& c, double r, double tol) {
  const int dim = static_cast<int>(c.size());
  std::array<int, 3> lv{4, dim == 3 ? 4 : 0, 5};
  BallMass out;
  auto ax = polar_axes(lv, r, dim);
  std::vector<double> val(polar_size(lv, dim));
  fill_polar(v, alpha, c, ax, val, {}, out.evaluations);
  for (;;) {
    const double q = polar_sum(val, ax, -1, lv, r, dim);
    std::array<bool, 3> refine{false, false, false};
    double err = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (a == 1 && dim == 2) continue;
      const double e = std::fabs(q - polar_sum(val, ax, a, lv, r, dim));
      err = std::max(err, e);
      refine[a] = e > tol * std::fabs(q);
    }
    if (!refine[0] && !refine[1] && !refine[2]) {
      out.value = q;
      out.error = err;
      out.rule.split = false;
      out.rule.levels = lv;
      return out;
    }
    std::array<int, 3> nl = lv;
    for (int a = 0; a < 3; ++a)
      if (refine[a]) ++nl[a];
    bool too_big = static_cast<long>(polar_size(nl, dim)) > kMaxNodes;
    for (int a = 0; a < 3; ++a) too_big = too_big || nl[a] > kMaxLevel[a];
    if (too_big) {
      std::ostringstream os;
      os << "ball_mass: relative tolerance " << tol << " not reached, achieved "
         << err / std::max(std::fabs(q), 1e-300);
      throw std::runtime_error(os.str());
    }
    const auto nax = polar_axes(nl, r, dim);
    const size_t n1 = nax[1].x.size(), n2 = nax[2].x.size();
    const size_t o1 = ax[1].x.size(), o2 = ax[2].x.size();
    std::vector<double> nval(polar_size(nl, dim));
    std::vector<char> known(nval.size(), 0);
    for (size_t i = 0; i < nax[0].x.size(); ++i) {
      if (refine[0] && i % 2) continue;
      const size_t oi = refine[0] ? i / 2 : i;
      for (size_t j = 0; j < n1; ++j) {
        if (refine[1] && j % 2) continue;
        const size_t oj = refine[1] ? j / 2 : j;
        for (size_t k = 0; k < n2; ++k) {
          if (refine[2] && k % 2) continue;
          const size_t ok = refine[2] ? k / 2 : k;
          const size_t idx = (i * n1 + j) * n2 + k;
          nval[idx] = val[(oi * o1 + oj) * o2 + ok];
          known[idx] = 1;
        }
      }
    }
    fill_polar(v, alpha, c, nax, nval, known, out.evaluations);
    val.swap(nval);
    ax = nax;
    lv = nl;
  }
}

// Chord route for the split form. Outer angle theta_1 gives X_1 = c_1 + R sin(theta_1); in
// 3D the middle angle theta_2 gives X_2 = c_2 + w_1 sin(theta_2); the innermost coordinate runs
// along the chord and is cut at phi(X_1).

std::vector<double> sign_change_roots(const std::function<double(double)>& g, double a, double b) {
  constexpr int kScan = 512;
  std::vector<double> roots;
  double x0 = a, g0 = g(a);
  for (int i = 1; i <= kScan; ++i) {
    const double x1 = a + (b - a) * i / kScan;
    const double g1 = g(x1);
    if (g0 == 0.0 && i > 1) roots.push_back(x0);
    if ((g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0)) {
      double lo = x0, hi = x1, glo = g0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

std::vector<double> outer_breaks(const Vec& c, double R, const std::function<double(double)>& phi) {
  const int dim = static_cast<int>(c.size());
  // Break through the center too: a recentred weight is only direction-continuous there.
  std::vector<double> br{-0.5 * kPi, 0.0, 0.5 * kPi};
  auto add = [&](const std::vector<double>& r) { br.insert(br.end(), r.begin(), r.end()); };
  if (dim == 2) {
    add(sign_change_roots([&](double t) { return phi(c[0] + R * std::sin(t)) - (c[1] + R * std::cos(t)); },
                          -0.5 * kPi, 0.5 * kPi));
    add(sign_change_roots([&](double t) { return phi(c[0] + R * std::sin(t)) - (c[1] - R * std::cos(t)); },
                          -0.5 * kPi, 0.5 * kPi));
  } else {
    add(sign_change_roots(
        [&](double t) {
          const double d = phi(c[0] + R * std::sin(t)) - c[dim - 1];
          const double w = R * std::cos(t);
          return d * d - w * w;
        },
        -0.5 * kPi, 0.5 * kPi));
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

struct SplitIntegrand {
  const ScalarField& v;
  const ScalarField& alpha;
  double eval(const Vec& X, bool outside) const {
    const double f = v(X);
    return (outside && alpha) ? alpha(X) * f * f : f * f;
  }
};

/// Chord integral over [lo, hi] in the last coordinate, cut at p (outside below p) and at
/// the center coordinate m0.
double chord(const SplitIntegrand& f, Vec& X, int last, double lo, double hi, double p, double m0,
             const QuadratureRule& g, long& evals) {
  auto piece = [&](double a, double b, bool outside) {
    if (!(b > a)) return 0.0;
    double s = 0.0;
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      X[last] = m + h * g.nodes[i];
      s += g.weights[i] * f.eval(X, outside);
    }
    evals += static_cast<long>(g.nodes.size());
    return h * s;
  };
  auto cut = [&](double a, double b, bool outside) {
    if (m0 > a && m0 < b) return piece(a, m0, outside) + piece(m0, b, outside);
    return piece(a, b, outside);
  };
  if (p <= lo) return cut(lo, hi, false);
  if (p >= hi) return cut(lo, hi, true);
  return cut(lo, p, true) + cut(p, hi, false);
}

double split_fixed(const SplitIntegrand& f, const Vec& c, double R, const std::function<double(double)>& phi,
                   int order, long& evals) {
  const int dim = static_cast<int>(c.size());
  const QuadratureRule& g = gauss_legendre(order);
  const std::vector<double> br = outer_breaks(c, R, phi);
  Vec X(dim);
  double total = 0.0;
  for (size_t b = 0; b + 1 < br.size(); ++b) {
    const double h1 = 0.5 * (br[b + 1] - br[b]), m1 = 0.5 * (br[b + 1] + br[b]);
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      const double t1 = m1 + h1 * g.nodes[i];
      X[0] = c[0] + R * std::sin(t1);
      const double w1 = R * std::cos(t1);
      const double p = phi(X[0]);
      double inner = 0.0;
      if (dim == 2) {
        inner = chord(f, X, 1, c[1] - w1, c[1] + w1, p, c[1], g, evals);
      } else {
        std::vector<double> br2{-0.5 * kPi, 0.0, 0.5 * kPi};
        const double d = std::fabs(p - c[2]);
        if (d < w1) {
          const double a = std::acos(d / w1);
          br2 = {-0.5 * kPi, -a, 0.0, a, 0.5 * kPi};
        }
        for (size_t b2 = 0; b2 + 1 < br2.size(); ++b2) {
          const double h2 = 0.5 * (br2[b2 + 1] - br2[b2]), m2 = 0.5 * (br2[b2 + 1] + br2[b2]);
          if (!(h2 > 0.0)) continue;
          double s2 = 0.0;
          for (size_t j = 0; j < g.nodes.size(); ++j) {
            const double t2 = m2 + h2 * g.nodes[j];
            X[1] = c[1] + w1 * std::sin(t2);
            const double w2 = w1 * std::cos(t2);
            s2 += g.weights[j] * w2 * chord(f, X, 2, c[2] - w2, c[2] + w2, p, c[2], g, evals);
          }
          inner += h2 * s2;
        }
      }
      total += h1 * g.weights[i] * w1 * inner;
    }
  }
  return total;
}

BallMass split_adaptive(const SplitIntegrand& f, const Vec& c, double R, const std::function<double(double)>& phi,
                        double tol) {
  const int dim = static_cast<int>(c.size());
  const int max_order = dim == 2 ? kMaxSplitOrder2 : kMaxSplitOrder3;
  BallMass out;
  int n = 8;
  double prev = split_fixed(f, c, R, phi, n, out.evaluations);
  for (;;) {
    const int next = std::min(2 * n, max_order);
    const double q = split_fixed(f, c, R, phi, next, out.evaluations);
    const double err = std::fabs(q - prev);
    if (err <= tol * std::fabs(q)) {
      out.value = q;
      out.error = err;
      out.rule.split = true;
      out.rule.order = next;
      return out;
    }
    if (next == max_order) {
      std::ostringstream os;
      os << "ball_mass: relative tolerance " << tol << " not reached on the split route, achieved "
         << err / std::max(std::fabs(q), 1e-300);
      throw std::runtime_error(os.str());
    }
    prev = q;
    n = next;
  }
}

void check_ball(const Vec& center, double r) {
  if (center.size() != 2 && center.size() != 3) throw std::invalid_argument("ball_mass: dimension must be 2 or 3");
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("ball_mass: radius must be positive");
}

}  // namespace

BallMass ball_mass(const ScalarField& v, const ScalarField& alpha, const Vec& center, double r,
                   const GraphClip* clip, double rel_tol) {
  check_ball(center, r);
  if (clip) return split_adaptive(SplitIntegrand{v, alpha}, center, r, clip->phi, rel_tol);
  return polar_adaptive(v, alpha, center, r, rel_tol);
}

double ball_mass_with_rule(const ScalarField& v, const ScalarField& alpha, const Vec& center, double r,
                           const GraphClip* clip, const BallRule& rule) {
  check_ball(center, r);
  long evals = 0;
  if (clip) {
    if (!rule.split) throw std::invalid_argument("ball_mass_with_rule: rule does not match the split route");
    return split_fixed(SplitIntegrand{v, alpha}, center, r, clip->phi, rule.order, evals);
  }
  if (rule.split) throw std::invalid_argument("ball_mass_with_rule: rule does not match the polar route");
  return polar_fixed(v, alpha, center, r, rule.levels, evals);
}

ScalarField recentred_alpha(const MatrixField& M, const Vec& center) {
  const Mat M0 = M(center);
  Eigen::SelfAdjointEigenSolver<Mat> es(M0);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
    throw std::domain_error("recentred_alpha: coefficient matrix is not positive definite at the center");
  const Mat S = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
  return [M, center, S](const Vec& X) {
    const Vec Y = S * (X - center);
    const double y2 = Y.squaredNorm();
    if (y2 == 0.0) return 1.0;
    const Mat Mt = S * M(X) * S;
    return Y.dot(Mt * Y) / y2;
  };
}

double ball_exp_integral(int dim, double kappa2, double r) {
  const double u = kappa2 * r * r;
  if (dim == 2) {
    if (std::fabs(u) <= 16.0) {
      // pi r^2 sum_j (u/4)^j / (j! (j+1)!)
      double term = 1.0, sum = 1.0;
      for (int j = 1; j < 60; ++j) {
        term *= 0.25 * u / (static_cast<double>(j) * (j + 1));
        sum += term;
        if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
      }
      return kPi * r * r * sum;
    }
    const double k = std::sqrt(std::fabs(kappa2));
    if (kappa2 < 0.0) return 2.0 * kPi * r * std::cyl_bessel_j(1.0, k * r) / k;
    return 2.0 * kPi * r * std::cyl_bessel_i(1.0, k * r) / k;
  }
  if (dim != 3) throw std::invalid_argument("ball_exp_integral: dimension must be 2 or 3");
  if (std::fabs(u) <= 1.0) {
    // 4 pi r^3 sum_{n>=1} 2n u^{n-1} / (2n+1)!
    double fact = 6.0, pw = 1.0, sum = 0.0;
    for (int n = 1; n < 40; ++n) {
      if (n > 1) fact *= static_cast<double>(2 * n) * (2 * n + 1), pw *= u;
      const double term = 2.0 * n * pw / fact;
      sum += term;
      if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return 4.0 * kPi * r * r * r * sum;
  }
  const double k = std::sqrt(std::fabs(kappa2));
  const double z = k * r;
  if (kappa2 > 0.0) return 4.0 * kPi * (z * std::cosh(z) - std::sinh(z)) / (k * k * k);
  return 4.0 * kPi * (std::sin(z) - z * std::cos(z)) / (k * k * k);
}

double rectangle_ball_mass(const Eigenmode& mode, const Vec& center, double r) {
  const auto* rect = std::get_if<Rectangle>(&mode.domain);
  if (!rect) throw std::invalid_argument("rectangle_ball_mass: rectangle modes only");
  check_ball(center, r);
  const int dim = static_cast<int>(center.size());
  const double a = kPi * mode.index.n / rect->a, b = kPi * mode.index.m / rect->b;
  const double cx = std::cos(2.0 * a * center[0]), cy = std::cos(2.0 * b * center[1]);
  // u^2 = (1 + cos 2ax)(1 + cos 2by) / 4, times exp(2 sqrt(lambda) t) for the lift.
  const double g2 = dim == 3 ? 4.0 * (a * a + b * b) : 0.0;
  const double A2 = 4.0 * a * a, B2 = 4.0 * b * b;
  const double s = ball_exp_integral(dim, g2, r) + cx * ball_exp_integral(dim, g2 - A2, r) +
                   cy * ball_exp_integral(dim, g2 - B2, r) + cx * cy * ball_exp_integral(dim, g2 - A2 - B2, r);
  const double growth = dim == 3 ? std::exp(2.0 * std::sqrt(a * a + b * b) * center[2]) : 1.0;
  return 0.25 * growth * s;
}

}  // namespace nodalab
