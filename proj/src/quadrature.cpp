#include "nodalab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace nodalab {

namespace {

QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0.0L;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1.0L, p1 = x;
      for (int k = 2; k <= n; ++k) {
        long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0L;
      dp = n * (x * p1 - p0) / (x * x - 1.0L);
      long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    long double p0 = 1.0L, p1 = x;
    for (int k = 2; k <= n; ++k) {
      long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0L);
    long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    rule.nodes[i] = static_cast<double>(-x);
    rule.nodes[n - 1 - i] = static_cast<double>(x);
    rule.weights[i] = rule.weights[n - 1 - i] = static_cast<double>(w);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule build_clenshaw_curtis(int level) {
  QuadratureRule rule;
  if (level == 0) {
    rule.nodes = {0.0};
    rule.weights = {2.0};
    return rule;
  }
  const int n = 1 << level;
  rule.nodes.resize(n + 1);
  rule.weights.resize(n + 1);
  const long double pi = std::numbers::pi_v<long double>;
  for (int j = 0; j <= n; ++j) {
    long double theta = pi * j / n;
    rule.nodes[j] = static_cast<double>(-std::cos(theta));
    long double s = 0.0L;
    for (int k = 1; k <= n / 2; ++k) {
      long double b = (k == n / 2) ? 1.0L : 2.0L;
      s += b / (4.0L * k * k - 1.0L) * std::cos(2.0L * k * theta);
    }
    long double c = (j == 0 || j == n) ? 1.0L : 2.0L;
    rule.weights[j] = static_cast<double>(c / n * (1.0L - s));
  }
  rule.nodes[n / 2] = 0.0;
  return rule;
}

template <class Builder>
const QuadratureRule& cached(std::map<int, std::unique_ptr<QuadratureRule>>& cache, std::mutex& m,
                             int key, Builder build) {
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<QuadratureRule>(build(key))).first;
  }
  return *it->second;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1 || n > 512) throw std::invalid_argument("gauss_legendre: n out of range");
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex m;
  return cached(cache, m, n, build_gauss_legendre);
}

const QuadratureRule& clenshaw_curtis(int level) {
  if (level < 0 || level > 14) throw std::invalid_argument("clenshaw_curtis: level out of range");
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex m;
  return cached(cache, m, level, build_clenshaw_curtis);
}

QuadratureRule composite_gauss(int points_per_panel, int panels, double a, double b) {
  if (panels < 1) throw std::invalid_argument("composite_gauss: panels must be positive");
  const QuadratureRule& g = gauss_legendre(points_per_panel);
  QuadratureRule out;
  out.nodes.reserve(static_cast<size_t>(points_per_panel) * panels);
  out.weights.reserve(out.nodes.capacity());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (size_t i = 0; i < g.nodes.size(); ++i) {
      out.nodes.push_back(lo + 0.5 * h * (g.nodes[i] + 1.0));
      out.weights.push_back(0.5 * h * g.weights[i]);
    }
  }
  return out;
}

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol, double abs_tol, int max_intervals) {
  const QuadratureRule& lo = gauss_legendre(10);
  const QuadratureRule& hi = gauss_legendre(21);
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  AdaptiveResult res;
  auto eval = [&](double x0, double x1) {
    const double c = 0.5 * (x0 + x1), h = 0.5 * (x1 - x0);
    double s_lo = 0.0, s_hi = 0.0;
    for (size_t i = 0; i < lo.nodes.size(); ++i) s_lo += lo.weights[i] * f(c + h * lo.nodes[i]);
    for (size_t i = 0; i < hi.nodes.size(); ++i) s_hi += hi.weights[i] * f(c + h * hi.nodes[i]);
    res.evaluations += static_cast<long>(lo.nodes.size() + hi.nodes.size());
    return Piece{x0, x1, s_hi * h, std::fabs(s_hi - s_lo) * h};
  };
  std::priority_queue<Piece> heap;
  heap.push(eval(a, b));
  double total = heap.top().value, err = heap.top().error;
  int count = 1;
  while (err > std::max(abs_tol, rel_tol * std::fabs(total)) && count < max_intervals) {
    Piece p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    Piece l = eval(p.a, m), r = eval(m, p.b);
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
    ++count;
  }
  // Re-sum to remove accumulated cancellation from the running totals.
  double v = 0.0, e = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  res.value = v;
  res.error = e;
  res.converged = e <= std::max(abs_tol, rel_tol * std::fabs(v));
  return res;
}

}  // namespace nodalab
