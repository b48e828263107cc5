#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nodalab/lift.hpp"

namespace nodalab {
namespace {

constexpr double kFrequencyStep = 1e-4;

double positive_mass(double H, const char* who) {
  if (!(H > 0.0)) throw std::domain_error(std::string(who) + ": zero ball mass");
  return H;
}

}  // namespace

double LiftedField::operator()(const Vec& X) const {
  return eval_mode(mode, X[0], X[1]) * std::exp(sqrt_lambda * X[2]);
}

double LiftedField::extended(const Vec& X) const {
  return eval_extended(mode, X[0], X[1]) * std::exp(sqrt_lambda * X[2]);
}

LiftedField lift(const Eigenmode& mode, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("lift: T must be positive");
  LiftedField h;
  h.mode = mode;
  h.T = T;
  h.sqrt_lambda = std::sqrt(mode.lambda);
  return h;
}

double frequency(const ScalarField& v, const Vec& center, double r, const ScalarField& alpha, const GraphClip* clip) {
  const BallMass H = ball_mass(v, alpha, center, r, clip);
  positive_mass(H.value, "frequency");
  const double eps = kFrequencyStep * r;
  const double hp = ball_mass_with_rule(v, alpha, center, r + eps, clip, H.rule);
  const double hm = ball_mass_with_rule(v, alpha, center, r - eps, clip, H.rule);
  return r * (hp - hm) / (2.0 * eps * H.value);
}

double doubling_index(const ScalarField& v, const Vec& center, double r, const ScalarField& alpha,
                      const GraphClip* clip) {
  const double h1 = positive_mass(ball_mass(v, alpha, center, r, clip).value, "doubling_index");
  const double h2 = positive_mass(ball_mass(v, alpha, center, 2.0 * r, clip).value, "doubling_index");
  return std::log(h2 / h1);
}

ChartFrame boundary_frame(const ModelDomain& d, double x, double y, double t) {
  ChartFrame f;
  f.origin = vec3(x, y, t);
  f.axes = Mat::Zero(3, 3);
  f.axes(2, 1) = 1.0;
  double tx = 0.0, ty = 0.0, nx = 0.0, ny = 0.0;
  if (auto r = std::get_if<Rectangle>(&d)) {
    const double dist[4] = {std::fabs(x), std::fabs(r->a - x), std::fabs(y), std::fabs(r->b - y)};
    const int face = static_cast<int>(std::min_element(dist, dist + 4) - dist);
    switch (face) {
      case 0: f.origin[0] = 0.0, nx = 1.0, ty = 1.0; break;
      case 1: f.origin[0] = r->a, nx = -1.0, ty = 1.0; break;
      case 2: f.origin[1] = 0.0, ny = 1.0, tx = 1.0; break;
      default: f.origin[1] = r->b, ny = -1.0, tx = 1.0; break;
    }
  } else {
    const double R = std::get<Disk>(d).R;
    const double rho = std::hypot(x, y);
    if (rho == 0.0) throw std::invalid_argument("boundary_frame: the disk center has no nearest boundary point");
    const double c = x / rho, s = y / rho;
    f.origin[0] = R * c;
    f.origin[1] = R * s;
    nx = -c, ny = -s, tx = -s, ty = c;
  }
  f.axes(0, 0) = tx, f.axes(1, 0) = ty;
  f.axes(0, 2) = nx, f.axes(1, 2) = ny;
  return f;
}

BallMass reflected_ball_mass(const ScalarField& h, const ReflectionChart& chart, const ChartFrame& frame,
                             const Vec& x, double r, double rel_tol) {
  if (x.size() != chart.dim()) throw std::invalid_argument("reflected_ball_mass: point and chart dimensions differ");
  const Vec c = frame.to_local(x);
  auto hg = [&](const Vec& p) { return h(frame.to_global(p)); };
  ScalarField v = [&](const Vec& p) { return chart.in_domain(p) ? hg(p) : chart.reflect_field(hg, p); };
  GraphClip clip{[&chart](double x1) { return chart.phi(x1); }};
  try {
    ScalarField alpha = recentred_alpha([&chart](const Vec& p) { return chart.coefficient_B(p); }, c);
    return ball_mass(v, alpha, c, r, &clip, rel_tol);
  } catch (const std::domain_error&) {
    throw std::domain_error("reflected_ball_mass: ball leaves the chart; reduce r or move the chart");
  } catch (const std::runtime_error& e) {
    if (std::string(e.what()).rfind("ball_mass", 0) == 0) throw;
    throw std::domain_error("reflected_ball_mass: ball leaves the chart; reduce r or move the chart");
  }
}

double boundary_doubling_index(const ScalarField& h, const ReflectionChart& chart, const ChartFrame& frame,
                               const Vec& x, double r) {
  const double h1 = positive_mass(reflected_ball_mass(h, chart, frame, x, r).value, "boundary_doubling_index");
  const double h2 = positive_mass(reflected_ball_mass(h, chart, frame, x, 2.0 * r).value, "boundary_doubling_index");
  return std::log(h2 / h1);
}

ReflectedLift::ReflectedLift(const LiftedField& h) : h_(h) {
  if (auto d = std::get_if<Disk>(&h_.mode.domain)) chart_.emplace(ChartKind::Arc, d->R, 3);
}

double ReflectedLift::mass(const Vec& x, double r) const {
  if (x.size() != 3) throw std::invalid_argument("ReflectedLift: points are (x, y, t)");
  if (!chart_) return rectangle_ball_mass(h_.mode, x, r);
  const double R = std::get<Disk>(h_.mode.domain).R;
  const LiftedField& h = h_;
  ScalarField ext = [&h](const Vec& X) { return h.extended(X); };
  if (std::hypot(x[0], x[1]) + r <= R) return ball_mass(ext, nullptr, x, r).value;
  return reflected_ball_mass(ext, *chart_, boundary_frame(h_.mode.domain, x[0], x[1], x[2]), x, r).value;
}

double ReflectedLift::doubling_index(const Vec& x, double r) const {
  const double h1 = positive_mass(mass(x, r), "ReflectedLift");
  const double h2 = positive_mass(mass(x, 2.0 * r), "ReflectedLift");
  return std::log(h2 / h1);
}

CubeIndex cube_doubling_index(const ReflectedLift& h, const Cube& Q, const CubeSampling& sampling) {
  if (Q.dim() != 3) throw std::invalid_argument("cube_doubling_index: cubes of the slab are three-dimensional");
  if (sampling.density < 1 || sampling.radii < 1 || !(sampling.min_fraction > 0.0 && sampling.min_fraction <= 1.0))
    throw std::invalid_argument("cube_doubling_index: bad sampling");
  const LiftedField& f = h.field();
  const double tol = 1e-12 * feature_size(f.mode.domain);
  const double diam = Q.diameter();
  std::vector<double> radii(sampling.radii);
  for (int j = 0; j < sampling.radii; ++j) {
    const double e = sampling.radii == 1 ? 0.0 : 1.0 - static_cast<double>(j) / (sampling.radii - 1);
    radii[j] = diam * std::pow(sampling.min_fraction, e);
  }
  CubeIndex out;
  out.value = -std::numeric_limits<double>::infinity();
  const int n = sampling.density;
  Vec X(3);
  for (int i = 0; i <= n; ++i) {
    X[0] = Q.center[0] - 0.5 * Q.side + Q.side * i / n;
    for (int j = 0; j <= n; ++j) {
      X[1] = Q.center[1] - 0.5 * Q.side + Q.side * j / n;
      if (!contains(f.mode.domain, X[0], X[1], tol)) continue;
      for (int k = 0; k <= n; ++k) {
        X[2] = Q.center[2] - 0.5 * Q.side + Q.side * k / n;
        if (std::fabs(X[2]) > f.T + tol) continue;
        for (double r : radii) {
          const double v = h.doubling_index(X, r);
          ++out.samples;
          if (v > out.value) {
            out.value = v;
            out.argmax_center = X;
            out.argmax_r = r;
          }
        }
      }
    }
  }
  if (out.samples == 0) throw std::invalid_argument("cube_doubling_index: the cube does not meet the closed domain");
  return out;
}

}  // namespace nodalab
