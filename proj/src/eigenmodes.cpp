#include "nodalab/eigenmodes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nodalab/specfun.hpp"

namespace nodalab {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse number '" + item + "'");
    }
    if (pos != item.size()) throw std::invalid_argument("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

double boundary_tolerance(const ModelDomain& d) { return 1e-9 * feature_size(d); }

}  // namespace

ModelDomain make_rectangle(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("rectangle sides must be positive");
  return Rectangle{a, b};
}

ModelDomain make_disk(double R) {
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("disk radius must be positive");
  return Disk{R};
}

ModelDomain parse_domain(const std::string& spec) {
  if (spec.rfind("rect:", 0) == 0) {
    auto v = parse_numbers(spec.substr(5));
    if (v.size() != 2) throw std::invalid_argument("expected rect:a,b");
    return make_rectangle(v[0], v[1]);
  }
  if (spec.rfind("disk:", 0) == 0) {
    auto v = parse_numbers(spec.substr(5));
    if (v.size() != 1) throw std::invalid_argument("expected disk:R");
    return make_disk(v[0]);
  }
  throw std::invalid_argument("unknown domain '" + spec + "' (expected rect:a,b or disk:R)");
}

std::string describe(const ModelDomain& d) {
  std::ostringstream os;
  os.precision(17);
  if (auto r = std::get_if<Rectangle>(&d)) os << "rect:" << r->a << "," << r->b;
  else os << "disk:" << std::get<Disk>(d).R;
  return os.str();
}

std::array<double, 4> bounding_box(const ModelDomain& d) {
  if (auto r = std::get_if<Rectangle>(&d)) return {0.0, 0.0, r->a, r->b};
  const double R = std::get<Disk>(d).R;
  return {-R, -R, R, R};
}

double feature_size(const ModelDomain& d) {
  if (auto r = std::get_if<Rectangle>(&d)) return std::min(r->a, r->b);
  return std::get<Disk>(d).R;
}

bool contains(const ModelDomain& d, double x, double y, double tol) {
  if (auto r = std::get_if<Rectangle>(&d))
    return x >= -tol && x <= r->a + tol && y >= -tol && y <= r->b + tol;
  const double R = std::get<Disk>(d).R;
  return std::hypot(x, y) <= R + tol;
}

ModeIndex parse_index(const std::string& spec) {
  auto v = parse_numbers(spec);
  if (v.size() < 2 || v.size() > 3) throw std::invalid_argument("expected index n,m[,k]");
  for (double x : v)
    if (x != std::floor(x)) throw std::invalid_argument("mode indices must be integers");
  ModeIndex idx{static_cast<int>(v[0]), static_cast<int>(v[1]), v.size() == 3 ? static_cast<int>(v[2]) : 1};
  return idx;
}

Eigenmode make_eigenmode(const ModelDomain& d, const ModeIndex& idx) {
  Eigenmode mode{d, idx, 0.0, 0.0};
  if (idx.n < 0 || idx.m < 0) throw std::invalid_argument("mode indices must be non-negative");
  if (auto r = std::get_if<Rectangle>(&d)) {
    if (idx.k != 1) throw std::invalid_argument("rectangle modes take no k index");
    mode.lambda = kPi * kPi * idx.n * idx.n / (r->a * r->a) + kPi * kPi * idx.m * idx.m / (r->b * r->b);
    return mode;
  }
  const double R = std::get<Disk>(d).R;
  if (idx.m < 1) throw std::invalid_argument("disk modes need m >= 1");
  if (idx.k != 1 && idx.k != 2) throw std::invalid_argument("disk modes need k in {1, 2}");
  if (idx.n == 0 && idx.k == 2) throw std::invalid_argument("disk mode (0, m, 2) vanishes identically");
  if (idx.n > kMaxBesselOrder) throw std::invalid_argument("disk mode order exceeds 50");
  ZeroTable t = compute_zeros(idx.n, ZeroKind::JPrime, idx.m);
  mode.scaled_zero = t.values.back();
  mode.lambda = mode.scaled_zero * mode.scaled_zero / (R * R);
  return mode;
}

double eval_extended(const Eigenmode& mode, double x, double y) {
  const ModeIndex& ix = mode.index;
  if (auto r = std::get_if<Rectangle>(&mode.domain))
    return std::cos(kPi * ix.n * x / r->a) * std::cos(kPi * ix.m * y / r->b);
  const double R = std::get<Disk>(mode.domain).R;
  const double rho = std::hypot(x, y);
  const double radial = bessel_j(ix.n, mode.scaled_zero * rho / R);
  if (ix.n == 0) return radial;
  const double th = std::atan2(y, x);
  return radial * (ix.k == 1 ? std::cos(ix.n * th) : std::sin(ix.n * th));
}

double eval_mode(const Eigenmode& mode, double x, double y) {
  if (!contains(mode.domain, x, y, boundary_tolerance(mode.domain)))
    throw std::domain_error("eval_mode: point outside the domain");
  return eval_extended(mode, x, y);
}

std::array<double, 2> grad_mode(const Eigenmode& mode, double x, double y) {
  const ModeIndex& ix = mode.index;
  if (auto r = std::get_if<Rectangle>(&mode.domain)) {
    const double px = kPi * ix.n / r->a, py = kPi * ix.m / r->b;
    return {-px * std::sin(px * x) * std::cos(py * y), -py * std::cos(px * x) * std::sin(py * y)};
  }
  const double R = std::get<Disk>(mode.domain).R;
  const double rho = std::hypot(x, y);
  const double kappa = mode.scaled_zero / R;
  const double jr = bessel_j(ix.n, kappa * rho);
  const double djr = kappa * bessel_j_derivative(ix.n, kappa * rho);
  if (rho == 0.0) {
    // Only |n| = 1 has a non-zero gradient at the center: J_1(kr) ~ kr/2.
    if (ix.n != 1) return {0.0, 0.0};
    return ix.k == 1 ? std::array<double, 2>{kappa / 2, 0.0} : std::array<double, 2>{0.0, kappa / 2};
  }
  const double th = std::atan2(y, x);
  double ang = 1.0, dang = 0.0;
  if (ix.n != 0) {
    ang = ix.k == 1 ? std::cos(ix.n * th) : std::sin(ix.n * th);
    dang = ix.k == 1 ? -ix.n * std::sin(ix.n * th) : ix.n * std::cos(ix.n * th);
  }
  const double ur = djr * ang, ut = jr * dang / rho;
  const double c = x / rho, s = y / rho;
  return {ur * c - ut * s, ur * s + ut * c};
}

std::vector<std::array<double, 2>> boundary_samples(const ModelDomain& d, int count) {
  if (count < 1) throw std::invalid_argument("boundary_samples: count must be positive");
  std::vector<std::array<double, 2>> out;
  out.reserve(count);
  if (auto r = std::get_if<Rectangle>(&d)) {
    const double per = 2.0 * (r->a + r->b);
    for (int i = 0; i < count; ++i) {
      double t = (i + 0.5) * per / count;
      if (t < r->a) out.push_back({t, 0.0});
      else if ((t -= r->a) < r->b) out.push_back({r->a, t});
      else if ((t -= r->b) < r->a) out.push_back({r->a - t, r->b});
      else out.push_back({0.0, r->b - (t - r->a)});
    }
    return out;
  }
  const double R = std::get<Disk>(d).R;
  for (int i = 0; i < count; ++i) {
    const double th = 2.0 * kPi * (i + 0.5) / count;
    out.push_back({R * std::cos(th), R * std::sin(th)});
  }
  return out;
}

std::array<double, 2> outward_normal(const ModelDomain& d, double x, double y) {
  if (auto r = std::get_if<Rectangle>(&d)) {
    const double dist[4] = {std::fabs(y), std::fabs(r->a - x), std::fabs(r->b - y), std::fabs(x)};
    const std::array<double, 2> normals[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
    int best = 0;
    for (int i = 1; i < 4; ++i)
      if (dist[i] < dist[best]) best = i;
    return normals[best];
  }
  const double rho = std::hypot(x, y);
  return {x / rho, y / rho};
}

double neumann_residual(const Eigenmode& mode, const std::vector<std::array<double, 2>>& samples,
                        double step) {
  if (!(step > 0.0)) throw std::invalid_argument("neumann_residual: step must be positive");
  const double tol = boundary_tolerance(mode.domain);
  double worst = 0.0;
  for (const auto& p : samples) {
    bool on_boundary = false;
    if (auto r = std::get_if<Rectangle>(&mode.domain)) {
      on_boundary = contains(mode.domain, p[0], p[1], tol) &&
                    (std::fabs(p[0]) <= tol || std::fabs(p[0] - r->a) <= tol || std::fabs(p[1]) <= tol ||
                     std::fabs(p[1] - r->b) <= tol);
    } else {
      on_boundary = std::fabs(std::hypot(p[0], p[1]) - std::get<Disk>(mode.domain).R) <= tol;
    }
    if (!on_boundary) throw std::invalid_argument("neumann_residual: sample is not on the boundary");
    const auto nu = outward_normal(mode.domain, p[0], p[1]);
    const double qx = p[0] - 2.0 * step * nu[0], qy = p[1] - 2.0 * step * nu[1];
    if (!contains(mode.domain, qx, qy, tol))
      throw std::invalid_argument("neumann_residual: stencil leaves the domain");
    const double f0 = eval_extended(mode, p[0], p[1]);
    const double f1 = eval_mode(mode, p[0] - step * nu[0], p[1] - step * nu[1]);
    const double f2 = eval_mode(mode, qx, qy);
    worst = std::max(worst, std::fabs((3.0 * f0 - 4.0 * f1 + f2) / (2.0 * step)));
  }
  return worst;
}

ScalarGrid sample_grid(const Eigenmode& mode, int resolution) {
  if (resolution < 2) throw std::invalid_argument("sample_grid: resolution must be >= 2");
  const auto box = bounding_box(mode.domain);
  ScalarGrid g;
  g.x0 = box[0], g.y0 = box[1], g.x1 = box[2], g.y1 = box[3];
  g.nx = g.ny = resolution;
  const int n = resolution;
  g.values.resize(static_cast<size_t>(n + 1) * (n + 1));
  g.cell_mask.assign(static_cast<size_t>(n) * n, 0);
  if (auto r = std::get_if<Rectangle>(&mode.domain)) {
    std::vector<double> cx(n + 1), cy(n + 1);
    for (int i = 0; i <= n; ++i) cx[i] = std::cos(kPi * mode.index.n * g.x(i) / r->a);
    for (int j = 0; j <= n; ++j) cy[j] = std::cos(kPi * mode.index.m * g.y(j) / r->b);
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) g.values[static_cast<size_t>(j) * (n + 1) + i] = cx[i] * cy[j];
    std::fill(g.cell_mask.begin(), g.cell_mask.end(), 1);
    return g;
  }
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) g.values[static_cast<size_t>(j) * (n + 1) + i] = eval_extended(mode, g.x(i), g.y(j));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double xc = 0.5 * (g.x(i) + g.x(i + 1)), yc = 0.5 * (g.y(j) + g.y(j + 1));
      g.cell_mask[static_cast<size_t>(j) * n + i] = contains(mode.domain, xc, yc) ? 1 : 0;
    }
  return g;
}

}  // namespace nodalab
