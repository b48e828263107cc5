#include "nodalab/reflect.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nodalab/quadrature.hpp"

namespace nodalab {

namespace {

constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMaxIter = 50;

double bump_profile(double r2) { return r2 < 1.0 ? std::exp(1.0 / (r2 - 1.0)) : 0.0; }

double compute_mollifier_constant(int dim) {
  if (dim == 1) {
    auto r = integrate_adaptive([](double x) { return bump_profile(x * x); }, -1.0, 1.0, 1e-14);
    return 1.0 / r.value;
  }
  auto r = integrate_adaptive([](double x) { return 2.0 * std::numbers::pi * x * bump_profile(x * x); }, 0.0, 1.0,
                              1e-14);
  return 1.0 / r.value;
}

// Integral over the second variable of the 2D bump and of its first partial derivative.
void marginal(double t, double c2, double& m, double& dm) {
  const double a2 = 1.0 - t * t;
  if (a2 <= 0.0) {
    m = dm = 0.0;
    return;
  }
  const double a = std::sqrt(a2);
  auto f = [&](double u) { return bump_profile(t * t + u * u); };
  auto g = [&](double u) {
    const double q = t * t + u * u - 1.0;
    return q < 0.0 ? std::exp(1.0 / q) * (-2.0 * t / (q * q)) : 0.0;
  };
  m = c2 * integrate_adaptive(f, -a, a, 1e-14, 1e-300).value;
  dm = c2 * integrate_adaptive(g, -a, a, 1e-14, 1e-300).value;
}

}  // namespace

double mollifier_constant(int dim) {
  if (dim == 1) {
    static const double c1 = compute_mollifier_constant(1);
    return c1;
  }
  if (dim == 2) {
    static const double c2 = compute_mollifier_constant(2);
    return c2;
  }
  throw std::invalid_argument("mollifier: dimension must be 1 or 2");
}

double mollifier(const Vec& x) { return mollifier_constant(static_cast<int>(x.size())) * bump_profile(x.squaredNorm()); }

double mollifier_scaled(double s, const Vec& x) {
  if (!(s > 0.0)) throw std::invalid_argument("mollifier_scaled: s must be positive");
  const Vec y = x / s;
  return mollifier(y) / std::pow(s, static_cast<double>(x.size()));
}

ReflectionChart::ReflectionChart(ChartKind kind, double param, int dim, std::optional<double> delta)
    : kind_(kind), param_(param), dim_(dim), delta_(0.0) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("chart dimension must be 2 or 3");
  if (kind == ChartKind::Arc && !(param > 0.0)) throw std::invalid_argument("arc radius must be positive");
  if (!std::isfinite(param)) throw std::invalid_argument("chart parameter must be finite");
  c_eta_ = nodalab::mollifier_constant(dim - 1);
  constant_normal_ = kind == ChartKind::Flat || kind == ChartKind::Affine;
  build_kernels();
  if (delta) {
    if (!(*delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (2.0 * *delta >= phi_domain_radius()) throw std::invalid_argument("delta too large for the chart");
    delta_ = *delta;
  } else {
    delta_ = auto_delta();
  }
}

ReflectionChart ReflectionChart::parse(const std::string& spec, int dim, std::optional<double> delta) {
  auto param_of = [&](size_t prefix) {
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(spec.substr(prefix), &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad chart parameter in '" + spec + "'");
    }
    if (pos != spec.size() - prefix) throw std::invalid_argument("bad chart parameter in '" + spec + "'");
    return v;
  };
  if (spec == "flat") return ReflectionChart(ChartKind::Flat, 0.0, dim, delta);
  if (spec.rfind("affine:", 0) == 0) return ReflectionChart(ChartKind::Affine, param_of(7), dim, delta);
  if (spec.rfind("parabola:", 0) == 0) return ReflectionChart(ChartKind::Parabola, param_of(9), dim, delta);
  if (spec.rfind("arc:", 0) == 0) return ReflectionChart(ChartKind::Arc, param_of(4), dim, delta);
  throw std::invalid_argument("unknown chart '" + spec + "' (expected flat, affine:c, parabola:c or arc:R)");
}

std::string ReflectionChart::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case ChartKind::Flat: os << "flat"; break;
    case ChartKind::Affine: os << "affine:" << param_; break;
    case ChartKind::Parabola: os << "parabola:" << param_; break;
    case ChartKind::Arc: os << "arc:" << param_; break;
  }
  return os.str();
}

void ReflectionChart::build_kernels() {
  if (constant_normal_) return;
  // Composite GL32 on [-1, 1]; panels doubled until the mass and second moment settle.
  const double c2 = dim_ == 3 ? nodalab::mollifier_constant(2) : 0.0;
  auto kernel = [&](double t, double& k, double& dk) {
    if (dim_ == 2) {
      k = c_eta_ * bump_profile(t * t);
      const double q = t * t - 1.0;
      dk = q < 0.0 ? k * (-2.0 * t / (q * q)) : 0.0;
    } else {
      marginal(t, c2, k, dk);
    }
  };
  double prev_mass = 0.0, prev_moment = 0.0;
  for (int panels = 1; panels <= 64; panels *= 2) {
    QuadratureRule rule = composite_gauss(32, panels, -1.0, 1.0);
    std::vector<double> k(rule.nodes.size()), dk(rule.nodes.size());
    double mass = 0.0, moment = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      kernel(rule.nodes[i], k[i], dk[i]);
      mass += rule.weights[i] * k[i];
      moment += rule.weights[i] * rule.nodes[i] * rule.nodes[i] * k[i];
    }
    const bool settled = panels > 1 && std::fabs(mass - prev_mass) <= 1e-11 && std::fabs(moment - prev_moment) <= 1e-11;
    prev_mass = mass;
    prev_moment = moment;
    if (!settled && panels < 64) continue;
    tau_ = rule.nodes;
    w_eta_.resize(tau_.size());
    w_deta_.resize(tau_.size());
    w_k_.resize(tau_.size());
    for (size_t i = 0; i < tau_.size(); ++i) {
      w_eta_[i] = rule.weights[i] * k[i];
      w_deta_[i] = rule.weights[i] * dk[i];
      // (d-1) eta + tau . grad eta; in d = 3 its marginal is m + tau m'.
      w_k_[i] = rule.weights[i] * (k[i] + tau_[i] * dk[i]);
    }
    return;
  }
}

double ReflectionChart::phi_domain_radius() const {
  return kind_ == ChartKind::Arc ? param_ : std::numeric_limits<double>::infinity();
}

double ReflectionChart::phi(double x) const {
  switch (kind_) {
    case ChartKind::Flat: return 0.0;
    case ChartKind::Affine: return param_ * x;
    case ChartKind::Parabola: return 0.5 * param_ * x * x;
    case ChartKind::Arc: {
      if (std::fabs(x) >= param_) throw std::domain_error("arc chart evaluated outside |x| < R");
      return x * x / (param_ + std::sqrt(param_ * param_ - x * x));
    }
  }
  return 0.0;
}

double ReflectionChart::dphi(double x) const {
  switch (kind_) {
    case ChartKind::Flat: return 0.0;
    case ChartKind::Affine: return param_;
    case ChartKind::Parabola: return param_ * x;
    case ChartKind::Arc: {
      if (std::fabs(x) >= param_) throw std::domain_error("arc chart evaluated outside |x| < R");
      return x / std::sqrt(param_ * param_ - x * x);
    }
  }
  return 0.0;
}

double ReflectionChart::grad_lipschitz() const {
  switch (kind_) {
    case ChartKind::Flat:
    case ChartKind::Affine: return 0.0;
    case ChartKind::Parabola: return std::fabs(param_);
    case ChartKind::Arc: {
      const double x = std::min(2.0 * delta_, 0.999999 * param_);
      const double R2 = param_ * param_;
      return R2 / std::pow(R2 - x * x, 1.5);
    }
  }
  return 0.0;
}

Vec ReflectionChart::embed(const double v[2]) const {
  return dim_ == 2 ? vec2(v[0], v[1]) : vec3(v[0], 0.0, v[1]);
}

Vec ReflectionChart::normal(const Vec& x) const {
  const double g = dphi(x[0]);
  const double inv = 1.0 / std::sqrt(1.0 + g * g);
  const double v[2] = {g * inv, -inv};
  return embed(v);
}

void ReflectionChart::check_support(double x1, double sigma) const {
  if (std::fabs(x1) + sigma >= phi_domain_radius())
    throw std::domain_error("convolution support leaves the chart");
}

ReflectionChart::ConvResult ReflectionChart::convolve(double x1, double sigma) const {
  ConvResult r{};
  if (constant_normal_) {
    const double g = dphi(0.0), inv = 1.0 / std::sqrt(1.0 + g * g);
    r.n[0] = g * inv;
    r.n[1] = -inv;
    return r;
  }
  check_support(x1, sigma);
  double n0 = 0, n1 = 0, d0 = 0, d1 = 0, k0 = 0, k1 = 0;
  for (size_t i = 0; i < tau_.size(); ++i) {
    const double g = dphi(x1 - sigma * tau_[i]);
    const double inv = 1.0 / std::sqrt(1.0 + g * g);
    const double a = g * inv, b = -inv;
    n0 += w_eta_[i] * a;
    n1 += w_eta_[i] * b;
    d0 += w_deta_[i] * a;
    d1 += w_deta_[i] * b;
    k0 += w_k_[i] * a;
    k1 += w_k_[i] * b;
  }
  r.n[0] = n0, r.n[1] = n1, r.dn[0] = d0, r.dn[1] = d1, r.kn[0] = k0, r.kn[1] = k1;
  return r;
}

Vec ReflectionChart::smoothed_normal(const Vec& x, double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("smoothed_normal: s must be positive");
  ConvResult c = convolve(x[0], s);
  return embed(c.n);
}

bool ReflectionChart::in_validity(const Vec& p) const {
  const double tol = delta_ * (1.0 + 1e-9);
  return std::fabs(p[0]) <= tol && std::fabs(p[dim_ - 1]) <= tol;
}

void ReflectionChart::flatten_with_jacobian(const Vec& p, Vec& value, Mat& jac) const {
  const double x1 = p[0], s = p[dim_ - 1], sigma = std::fabs(s);
  const ConvResult c = convolve(x1, sigma);
  const Vec n = embed(c.n), dn = embed(c.dn), kn = embed(c.kn);
  value = p;
  value[dim_ - 1] = phi(x1);
  value -= s * n;
  const double sgn = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
  jac = Mat::Identity(dim_, dim_);
  jac(dim_ - 1, 0) = dphi(x1);
  jac(dim_ - 1, dim_ - 1) = 0.0;
  jac.col(0) -= sgn * dn;
  jac.col(dim_ - 1) = -n + kn;
}

Vec ReflectionChart::flatten(const Vec& p) const {
  if (!in_validity(p)) throw std::domain_error("flatten: point outside the validity box");
  Vec v;
  Mat j;
  flatten_with_jacobian(p, v, j);
  return v;
}

Mat ReflectionChart::jacobian(const Vec& p) const {
  if (!in_validity(p)) throw std::domain_error("jacobian: point outside the validity box");
  Vec v;
  Mat j;
  flatten_with_jacobian(p, v, j);
  return j;
}

Vec ReflectionChart::invert(const Vec& X, int* iterations) const {
  Vec p = X;
  p[dim_ - 1] = X[dim_ - 1] - phi(X[0]);
  Vec val;
  Mat jac;
  flatten_with_jacobian(p, val, jac);
  Vec r = val - X;
  double rn = r.norm();
  int it = 0;
  while (rn > kNewtonTol && it < kNewtonMaxIter) {
    ++it;
    const Vec step = jac.partialPivLu().solve(r);
    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      Vec q = p - t * step;
      Vec qv;
      Mat qj;
      try {
        flatten_with_jacobian(q, qv, qj);
      } catch (const std::domain_error&) {
        continue;
      }
      const Vec qr = qv - X;
      if (qr.norm() < rn) {
        p = q;
        val = qv;
        jac = qj;
        r = qr;
        rn = qr.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (iterations) *iterations = it;
  if (rn > kNewtonTol) throw std::runtime_error("invert: Newton did not converge; point outside the chart image");
  if (!in_validity(p)) throw std::runtime_error("invert: preimage outside the validity box");
  return p;
}

Mat ReflectionChart::coefficient_A(const Vec& p) const {
  if (p[dim_ - 1] < 0.0) throw std::invalid_argument("coefficient_A: requires s >= 0");
  const Mat J = jacobian(p);
  const double det = J.determinant();
  if (!(std::fabs(det) > 1e-300)) throw std::runtime_error("coefficient_A: singular Jacobian");
  const Mat Ji = J.inverse();
  return std::fabs(det) * (Ji * Ji.transpose());
}

Mat ReflectionChart::coefficient_Atilde(const Vec& p) const {
  if (p[dim_ - 1] >= 0.0) return coefficient_A(p);
  Vec q = p;
  q[dim_ - 1] = -p[dim_ - 1];
  Mat A = coefficient_A(q);
  A.row(dim_ - 1) *= -1.0;
  A.col(dim_ - 1) *= -1.0;
  return A;
}

Mat ReflectionChart::coefficient_B_chart(const Vec& p) const {
  if (p[dim_ - 1] >= 0.0) return Mat::Identity(dim_, dim_);
  const Mat J = jacobian(p);
  const double det = J.determinant();
  if (!(std::fabs(det) > 1e-300)) throw std::runtime_error("coefficient_B: singular Jacobian");
  const Mat At = coefficient_Atilde(p);
  return (J * At * J.transpose()) / std::fabs(det);
}

Mat ReflectionChart::coefficient_B(const Vec& X) const {
  if (in_domain(X)) return Mat::Identity(dim_, dim_);
  return coefficient_B_chart(invert(X));
}

Vec ReflectionChart::phi_map(const Vec& X) const {
  if (in_domain(X)) return X;
  Vec p = invert(X);
  p[dim_ - 1] = -p[dim_ - 1];
  return flatten(p);
}

double ReflectionChart::reflect_field(const std::function<double(const Vec&)>& u, const Vec& X) const {
  Vec p = invert(X);
  p[dim_ - 1] = std::fabs(p[dim_ - 1]);
  return u(flatten(p));
}

ReflectionChart::Validity ReflectionChart::sample_validity(double delta, int n) const {
  Validity v{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec p = Vec::Zero(dim_);
      p[0] = -delta + 2.0 * delta * i / (n - 1);
      p[dim_ - 1] = -delta + 2.0 * delta * j / (n - 1);
      Vec val;
      Mat J;
      flatten_with_jacobian(p, val, J);
      const double det = J.determinant();
      v.det_min = std::min(v.det_min, det);
      v.det_max = std::max(v.det_max, det);
      Mat B = Mat::Identity(dim_, dim_);
      if (p[dim_ - 1] < 0.0) {
        Vec q = p;
        q[dim_ - 1] = -p[dim_ - 1];
        Vec qv;
        Mat Jq;
        flatten_with_jacobian(q, qv, Jq);
        const Mat Jqi = Jq.inverse();
        Mat A = std::fabs(Jq.determinant()) * (Jqi * Jqi.transpose());
        A.row(dim_ - 1) *= -1.0;
        A.col(dim_ - 1) *= -1.0;
        B = (J * A * J.transpose()) / std::fabs(det);
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(B);
      v.eig_min = std::min(v.eig_min, es.eigenvalues().minCoeff());
      v.eig_max = std::max(v.eig_max, es.eigenvalues().maxCoeff());
    }
  return v;
}

double ReflectionChart::auto_delta() const {
  for (int k = 0; k <= 30; ++k) {
    const double d = std::ldexp(1.0, -k);
    if (2.0 * d >= phi_domain_radius()) continue;
    const Validity v = sample_validity(d);
    if (v.det_min >= 0.5 && v.det_max <= 1.5) return d;
  }
  throw std::runtime_error("auto delta: no dyadic radius passes the determinant check");
}

CoefficientField coefficient_field_B(const ReflectionChart& chart, int n) {
  CoefficientField cf;
  cf.eval = [&chart](const Vec& X) { return chart.coefficient_B(X); };
  const int d = chart.dim();
  const double delta = chart.delta();
  cf.eig_min = std::numeric_limits<double>::infinity();
  cf.eig_max = -std::numeric_limits<double>::infinity();
  const int n2 = d == 3 ? 3 : 1;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n2; ++k)
      for (int j = 0; j < n; ++j) {
        Vec p = Vec::Zero(d);
        p[0] = -delta + 2.0 * delta * i / (n - 1);
        if (d == 3) p[1] = -delta + delta * k;
        p[d - 1] = -delta + 2.0 * delta * j / (n - 1);
        const Vec X = chart.flatten(p);
        const Mat B = chart.coefficient_B(X);
        cf.max_asymmetry = std::max(cf.max_asymmetry, (B - B.transpose()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Mat> es(B);
        cf.eig_min = std::min(cf.eig_min, es.eigenvalues().minCoeff());
        cf.eig_max = std::max(cf.eig_max, es.eigenvalues().maxCoeff());
        ++cf.samples;
      }
  cf.lambda_bound = std::max(cf.eig_max, 1.0 / cf.eig_min);
  Vec lo = Vec::Constant(d, -0.5 * delta), hi = Vec::Constant(d, 0.5 * delta);
  cf.lipschitz = lipschitz_estimate(cf.eval, lo, hi, 1000, 12345).constant;
  return cf;
}

double Bump::value(const Vec& X) const { return bump_profile((X - center).squaredNorm() / (radius * radius)); }

Vec Bump::gradient(const Vec& X) const {
  const Vec y = X - center;
  const double q = y.squaredNorm() / (radius * radius);
  if (q >= 1.0) return Vec::Zero(X.size());
  const double e = std::exp(1.0 / (q - 1.0));
  return (e * (-1.0 / ((q - 1.0) * (q - 1.0))) * 2.0 / (radius * radius)) * y;
}

double weak_residual(const std::function<Mat(const Vec&)>& coeff, const std::function<double(const Vec&)>& field,
                     const Bump& bump, double h, int order, const std::function<bool(const Vec&)>& in_region) {
  if (!(h > 0.0)) throw std::invalid_argument("weak_residual: h must be positive");
  if (order != 2 && order != 4) throw std::invalid_argument("weak_residual: order must be 2 or 4");
  const int d = static_cast<int>(bump.center.size());
  const int N = static_cast<int>(std::ceil(bump.radius / h));
  const int pad = order / 2;
  const int M = N + pad;              // stencil reach
  const int side = 2 * M + 1;
  std::vector<double> f(static_cast<size_t>(std::pow(side, d)), std::numeric_limits<double>::quiet_NaN());
  auto index = [&](const int* k) {
    size_t idx = 0;
    for (int a = d - 1; a >= 0; --a) idx = idx * side + (k[a] + M);
    return idx;
  };
  auto point = [&](const int* k) {
    Vec X = bump.center;
    for (int a = 0; a < d; ++a) X[a] += h * k[a];
    return X;
  };
  auto value_at = [&](const int* k) -> double {
    double& slot = f[index(k)];
    if (std::isnan(slot)) {
      const Vec X = point(k);
      if (in_region && !in_region(X)) throw std::domain_error("weak_residual: bump support exits the region");
      slot = field(X);
    }
    return slot;
  };
  double total = 0.0;
  int k[3] = {0, 0, 0};
  const int kmax[3] = {N, d > 1 ? N : 0, d > 2 ? N : 0};
  for (k[2] = -kmax[2]; k[2] <= kmax[2]; ++k[2])
    for (k[1] = -kmax[1]; k[1] <= kmax[1]; ++k[1])
      for (k[0] = -kmax[0]; k[0] <= kmax[0]; ++k[0]) {
        const Vec X = point(k);
        const Vec gpsi = bump.gradient(X);
        if (gpsi.squaredNorm() == 0.0) continue;
        Vec grad(d);
        for (int a = 0; a < d; ++a) {
          int kp[3] = {k[0], k[1], k[2]}, km[3] = {k[0], k[1], k[2]};
          kp[a] += 1;
          km[a] -= 1;
          if (order == 2) {
            grad[a] = (value_at(kp) - value_at(km)) / (2.0 * h);
          } else {
            int kpp[3] = {k[0], k[1], k[2]}, kmm[3] = {k[0], k[1], k[2]};
            kpp[a] += 2;
            kmm[a] -= 2;
            grad[a] = (-value_at(kpp) + 8.0 * value_at(kp) - 8.0 * value_at(km) + value_at(kmm)) / (12.0 * h);
          }
        }
        if (in_region && !in_region(X)) throw std::domain_error("weak_residual: bump support exits the region");
        total += (coeff(X) * grad).dot(gpsi);
      }
  return total * std::pow(h, d);
}

LipschitzEstimate lipschitz_estimate(const std::function<Mat(const Vec&)>& M, const Vec& lo, const Vec& hi, int pairs,
                                     std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("lipschitz_estimate: pairs must be positive");
  const int d = static_cast<int>(lo.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double diam = (hi - lo).norm();
  LipschitzEstimate est;
  est.min_separation = std::numeric_limits<double>::infinity();
  long attempts = 0;
  while (est.pairs < pairs) {
    if (++attempts > 100L * pairs) throw std::runtime_error("lipschitz_estimate: too many rejected pairs");
    Vec p(d), u(d);
    for (int a = 0; a < d; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * unif(rng);
    for (int a = 0; a < d; ++a) u[a] = gauss(rng);
    u.normalize();
    const double r = diam * std::pow(10.0, -4.0 + 3.0 * unif(rng));
    const Vec q = p + r * u;
    if (((q - lo).array() < 0.0).any() || ((hi - q).array() < 0.0).any()) continue;
    Mat mp, mq;
    try {
      mp = M(p);
      mq = M(q);
    } catch (const std::exception&) {
      continue;
    }
    est.constant = std::max(est.constant, (mp - mq).norm() / r);
    est.min_separation = std::min(est.min_separation, r);
    est.max_separation = std::max(est.max_separation, r);
    ++est.pairs;
  }
  return est;
}

PhiDistanceReport phi_distance_check(const ReflectionChart& chart, const Vec& X0, double radius, int samples,
                                     std::uint64_t seed) {
  const int d = chart.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  PhiDistanceReport rep;
  long attempts = 0;
  while (rep.samples < samples) {
    if (++attempts > 100L * samples) throw std::runtime_error("phi_distance_check: too many rejected samples");
    Vec u(d);
    for (int a = 0; a < d; ++a) u[a] = gauss(rng);
    u.normalize();
    const Vec X = X0 + radius * std::pow(unif(rng), 1.0 / d) * u;
    if ((X - X0).norm() == 0.0) continue;
    Vec Y;
    try {
      Y = chart.phi_map(X);
    } catch (const std::exception&) {
      continue;
    }
    const double c = (Y - X0).norm() / (X - X0).norm();
    if (!std::isfinite(c)) throw std::runtime_error("phi_distance_check: non-finite ratio");
    rep.c = std::max(rep.c, c);
    ++rep.samples;
  }
  return rep;
}

}  // namespace nodalab
