#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nodalab/lift.hpp"

namespace nodalab {
namespace {

constexpr int kGrid = 4000;
constexpr double kMaxC1 = 8.0;

/// One inequality written as C2 >= a / C1 + b + c * C1.
struct Constraint {
  double a, b, c;
  double required(double C1) const { return a / C1 + b + c * C1; }
};

ConstantFit fit_family(const std::vector<Constraint>& cons) {
  ConstantFit fit;
  fit.constraints = static_cast<int>(cons.size());
  auto need = [&](double C1) {
    double c2 = 0.0;
    for (const Constraint& k : cons) c2 = std::max(c2, k.required(C1));
    return c2;
  };
  for (const Constraint& k : cons)
    if (k.required(1.0) > 1e-9) ++fit.violations_at_identity;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double C1 = std::pow(kMaxC1, static_cast<double>(i) / kGrid);
    const double C2 = need(C1);
    const double norm = std::hypot(C1 - 1.0, C2);
    if (norm < best) {
      best = norm;
      fit.C1 = C1;
      fit.C2 = C2;
    }
  }
  fit.min_slack = std::numeric_limits<double>::infinity();
  for (const Constraint& k : cons) fit.min_slack = std::min(fit.min_slack, fit.C2 - k.required(fit.C1));
  if (cons.empty()) fit.min_slack = 0.0;
  return fit;
}

}  // namespace

FrequencyProfile frequency_profile(const ScalarField& v, const Vec& center, const std::vector<double>& radii,
                                   const ScalarField& alpha, const GraphClip* clip) {
  FrequencyProfile p;
  p.center = center;
  p.radii = radii;
  for (size_t i = 0; i < radii.size(); ++i) {
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("frequency_profile: radii must increase");
    const double H = ball_mass(v, alpha, center, radii[i], clip).value;
    const double H2 = ball_mass(v, alpha, center, 2.0 * radii[i], clip).value;
    p.H.push_back(H);
    p.N.push_back(H > 0.0 ? frequency(v, center, radii[i], alpha, clip) : std::numeric_limits<double>::quiet_NaN());
    p.doubling.push_back(H > 0.0 && H2 > 0.0 ? std::log(H2 / H) : std::numeric_limits<double>::quiet_NaN());
    p.N_double.push_back(H2 > 0.0 ? frequency(v, center, 2.0 * radii[i], alpha, clip)
                                  : std::numeric_limits<double>::quiet_NaN());
  }
  return p;
}

MonotonicityFit fit_monotonicity(const FrequencyProfile& p) {
  const size_t n = p.radii.size();
  if (n < 8) throw std::invalid_argument("fit_monotonicity: at least 8 radii are required");
  if (p.H.size() != n || p.N.size() != n || p.doubling.size() != n || p.N_double.size() != n)
    throw std::invalid_argument("fit_monotonicity: inconsistent profile");
  if (std::all_of(p.H.begin(), p.H.end(), [](double h) { return h == 0.0; }))
    throw std::domain_error("fit_monotonicity: degenerate profile (all ball masses zero)");
  for (size_t i = 0; i < n; ++i)
    if (!(p.H[i] > 0.0) || !std::isfinite(p.N[i]) || !std::isfinite(p.doubling[i]) || !std::isfinite(p.N_double[i]))
      throw std::domain_error("fit_monotonicity: profile has a zero ball mass");

  std::vector<Constraint> freq, comp, growth;
  for (size_t i = 0; i < n; ++i) {
    // N(r)/C1 - C2 <= D(r) and D(r) <= C1 N(2r) + C2.
    comp.push_back({p.N[i], -p.doubling[i], 0.0});
    comp.push_back({0.0, p.doubling[i], -p.N_double[i]});
    for (size_t j = 0; j < n; ++j) {
      if (!(2.0 * p.radii[i] < p.radii[j])) continue;
      freq.push_back({0.0, p.N[i], -p.N[j]});
      const double L = std::log(p.radii[j] / p.radii[i]);
      const double q = std::log(p.H[j] / p.H[i]) / L;
      growth.push_back({p.doubling[i], -q, 0.0});
      growth.push_back({0.0, q, -p.doubling[j]});
    }
  }
  MonotonicityFit fit;
  fit.rho0 = p.radii.back();
  fit.frequency = fit_family(freq);
  fit.comparability = fit_family(comp);
  fit.growth = fit_family(growth);
  return fit;
}

double log_convexity_check(const FrequencyProfile& p) {
  const size_t n = p.radii.size();
  if (n < 5) throw std::invalid_argument("log_convexity_check: at least 5 radii are required");
  std::vector<double> s(n), L(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(p.H[i] > 0.0)) throw std::domain_error("log_convexity_check: zero ball mass");
    s[i] = std::log(p.radii[i]);
    L[i] = std::log(p.H[i]);
  }
  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i + 1 < n; ++i) {
    const double hl = s[i] - s[i - 1], hr = s[i + 1] - s[i];
    const double d2 = 2.0 * ((L[i + 1] - L[i]) / hr - (L[i] - L[i - 1]) / hl) / (hl + hr);
    const double h = 0.5 * (hl + hr);
    worst = std::min(worst, d2 * h * h);
  }
  return worst;
}

}  // namespace nodalab
