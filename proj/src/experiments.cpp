#include "nodalab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "nodalab/parallel.hpp"

namespace nodalab {

std::vector<Vec> cylinder_lattice(const ModelDomain& d, double T, int density) {
  if (density < 1) throw std::invalid_argument("cylinder_lattice: density must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("cylinder_lattice: T must be positive");
  const auto bb = bounding_box(d);
  auto axis = [density](double lo, double hi) {
    const int n = std::max(1, static_cast<int>(std::lround((hi - lo) * density)));
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = i == n ? hi : lo + (hi - lo) * i / n;
    return v;
  };
  const std::vector<double> xs = axis(bb[0], bb[2]), ys = axis(bb[1], bb[3]), ts = axis(-T, T);
  const double tol = 1e-12 * feature_size(d);
  std::vector<Vec> out;
  for (double x : xs)
    for (double y : ys) {
      if (!contains(d, x, y, tol)) continue;
      for (double t : ts) out.push_back(vec3(x, y, t));
    }
  return out;
}

std::vector<SqrtLambdaRow> sqrt_lambda_experiment(const ModelDomain& d, const std::vector<ModeIndex>& modes,
                                                  const SqrtLambdaSpec& spec, int jobs) {
  if (modes.empty()) throw std::invalid_argument("sqrt_lambda_experiment: no modes");
  if (spec.radii.empty()) throw std::invalid_argument("sqrt_lambda_experiment: no radii");
  for (double r : spec.radii)
    if (!(r > 0.0)) throw std::invalid_argument("sqrt_lambda_experiment: radii must be positive");
  std::vector<Eigenmode> eig;
  for (const ModeIndex& idx : modes) {
    eig.push_back(make_eigenmode(d, idx));
    if (!(eig.back().lambda > 0.0)) throw std::invalid_argument("sqrt_lambda_experiment: modes need lambda > 0");
  }
  const std::vector<Vec> centers = cylinder_lattice(d, spec.T, spec.density);
  const size_t nr = spec.radii.size();
  std::vector<SqrtLambdaRow> rows(modes.size());
  for (size_t k = 0; k < modes.size(); ++k) {
    const ReflectedLift h(lift(eig[k], spec.T));
    std::vector<double> values(centers.size() * nr);
    parallel_for(centers.size(), jobs, [&](size_t i) {
      for (size_t j = 0; j < nr; ++j) values[i * nr + j] = h.doubling_index(centers[i], spec.radii[j]);
    });
    SqrtLambdaRow& row = rows[k];
    row.index = modes[k];
    row.lambda = eig[k].lambda;
    row.sqrt_lambda = std::sqrt(row.lambda);
    row.max_ratio = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < values.size(); ++i) {
      const double ratio = values[i] / row.sqrt_lambda;
      if (ratio > row.max_ratio) {
        row.max_ratio = ratio;
        row.argmax_center = centers[i / nr];
        row.argmax_r = spec.radii[i % nr];
      }
    }
    row.samples = static_cast<int>(values.size());
  }
  return rows;
}

double default_small_cube_threshold(int dim) { return 2.0 * dim * std::log(2.0); }

std::string SmallCubeReport::outcome() const {
  if (below_threshold) return "below threshold";
  return halving_found ? "halving sub-cube found" : "no halving sub-cube";
}

SmallCubeReport small_cube_experiment(const ReflectedLift& h, const Cube& Q, int M, std::optional<double> threshold,
                                      const CubeSampling& sampling, std::optional<CubeSampling> sub_sampling,
                                      int jobs) {
  SmallCubeReport rep;
  rep.threshold = threshold.value_or(default_small_cube_threshold(3));
  rep.subcubes = subdivide_boundary_cube(Q, M, h.field().mode.domain);
  rep.parent = cube_doubling_index(h, Q, sampling);
  const CubeSampling sub = sub_sampling.value_or(sampling);
  rep.indices.resize(rep.subcubes.size());
  parallel_for(rep.subcubes.size(), jobs,
               [&](size_t i) { rep.indices[i] = cube_doubling_index(h, rep.subcubes[i], sub); });
  rep.min_index = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < rep.indices.size(); ++i)
    if (rep.indices[i].value < rep.min_index) {
      rep.min_index = rep.indices[i].value;
      rep.argmin = static_cast<int>(i);
    }
  rep.below_threshold = rep.parent.value < rep.threshold;
  rep.halving_found = !rep.below_threshold && rep.min_index <= 0.5 * rep.parent.value;
  return rep;
}

Envelope fit_upper_envelope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("fit_upper_envelope: need matching, non-empty data");
  const size_t n = x.size();
  Envelope e;
  e.points = static_cast<int>(n);
  const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;

  // Upper hull by the monotone chain; optimal lines pass through one of its edges or are flat.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return std::tie(x[i], y[i]) < std::tie(x[j], y[j]); });
  std::vector<size_t> hull;
  for (size_t i : order) {
    while (hull.size() >= 2) {
      const size_t a = hull[hull.size() - 2], b = hull.back();
      const double cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  std::vector<double> slopes{0.0};
  for (size_t k = 1; k < hull.size(); ++k) {
    const double dx = x[hull[k]] - x[hull[k - 1]];
    if (dx > 0.0) {
      const double b = (y[hull[k]] - y[hull[k - 1]]) / dx;
      if (b > 0.0) slopes.push_back(b);
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (double b : slopes) {
    double a = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) a = std::max(a, y[i] - b * x[i]);
    const double height = a + b * xbar;
    if (height < best) best = height, e.slope = b, e.intercept = a;
  }
  for (size_t i = 0; i < n; ++i) {
    const double gap = e.intercept + e.slope * x[i] - y[i];
    e.mean_gap += gap / n;
    e.max_gap = std::max(e.max_gap, gap);
  }

  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) sxx += (x[i] - xbar) * (x[i] - xbar), sxy += (x[i] - xbar) * (y[i] - ybar);
  e.ls_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  e.ls_intercept = ybar - e.ls_slope * xbar;
  double ss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - e.ls_intercept - e.ls_slope * x[i];
    ss += r * r;
    e.ls_shift = std::max(e.ls_shift, r);
  }
  e.ls_rms = std::sqrt(ss / n);
  return e;
}

double length_in_box(const NodalCurveSet& curves, double x0, double y0, double x1, double y1) {
  const double tol = 1e-12 * std::max({1.0, std::fabs(x0), std::fabs(x1), std::fabs(y0), std::fabs(y1)});
  x0 -= tol, y0 -= tol, x1 += tol, y1 += tol;
  // Liang-Barsky clipping of each segment.
  auto clipped = [&](const std::array<double, 2>& p, const std::array<double, 2>& q) {
    const double dx = q[0] - p[0], dy = q[1] - p[1];
    double t0 = 0.0, t1 = 1.0;
    const double P[4] = {-dx, dx, -dy, dy};
    const double D[4] = {p[0] - x0, x1 - p[0], p[1] - y0, y1 - p[1]};
    for (int k = 0; k < 4; ++k) {
      if (P[k] == 0.0) {
        if (D[k] < 0.0) return 0.0;
        continue;
      }
      const double t = D[k] / P[k];
      if (P[k] < 0.0) t0 = std::max(t0, t);
      else t1 = std::min(t1, t);
      if (t0 > t1) return 0.0;
    }
    return (t1 - t0) * std::hypot(dx, dy);
  };
  double total = 0.0;
  for (const Polyline& pl : curves.polylines) {
    const auto& pts = pl.points;
    for (size_t i = 1; i < pts.size(); ++i) total += clipped(pts[i - 1], pts[i]);
    if (pl.closed && pts.size() > 2) total += clipped(pts.back(), pts.front());
  }
  return total;
}

Theorem2Report theorem2_experiment(const ModelDomain& d, const std::vector<ModeIndex>& modes,
                                   const Theorem2Options& opt, int jobs) {
  const Rectangle* rect = std::get_if<Rectangle>(&d);
  if (!rect) throw std::invalid_argument("theorem2_experiment: the slab tiling needs a rectangular base");
  if (modes.empty()) throw std::invalid_argument("theorem2_experiment: no modes");
  if (opt.resolution < 2) throw std::invalid_argument("theorem2_experiment: resolution must be at least 2");
  const CubeTiling tiling = slab_decomposition(*rect, opt.T, opt.side, opt.c, opt.caps_as_interior);
  std::vector<const Cube*> cubes;
  std::vector<bool> is_boundary;
  for (const Cube& q : tiling.boundary) cubes.push_back(&q), is_boundary.push_back(true);
  for (const Cube& q : tiling.interior) cubes.push_back(&q), is_boundary.push_back(false);

  Theorem2Report rep;
  for (const ModeIndex& idx : modes) {
    const Eigenmode mode = make_eigenmode(d, idx);
    const ReflectedLift h(lift(mode, opt.T));
    const NodalCurveSet curves = mode_nodal_curves(mode, opt.resolution);
    std::map<std::array<double, 4>, double> footprint_length;
    std::vector<Theorem2Point> pts(cubes.size());
    for (size_t i = 0; i < cubes.size(); ++i) {
      const Cube& q = *cubes[i];
      const double hs = 0.5 * q.side;
      const std::array<double, 4> key{q.center[0] - hs, q.center[1] - hs, q.center[0] + hs, q.center[1] + hs};
      auto it = footprint_length.find(key);
      if (it == footprint_length.end())
        it = footprint_length.emplace(key, length_in_box(curves, key[0], key[1], key[2], key[3])).first;
      const double height =
          std::max(0.0, std::min(q.center[2] + hs, opt.T) - std::max(q.center[2] - hs, -opt.T));
      Theorem2Point& p = pts[i];
      p.index = idx;
      p.cube = q;
      p.boundary = is_boundary[i];
      p.area = it->second * height;
      p.scaled_area = p.area / (q.side * q.side);
    }
    parallel_for(cubes.size(), jobs,
                 [&](size_t i) { pts[i].n_star = cube_doubling_index(h, *cubes[i], opt.sampling).value; });
    rep.points.insert(rep.points.end(), pts.begin(), pts.end());
  }
  std::vector<double> xs, ys;
  for (const Theorem2Point& p : rep.points) {
    xs.push_back(p.n_star);
    ys.push_back(p.scaled_area);
    rep.mean_area += p.area / rep.points.size();
  }
  rep.envelope = fit_upper_envelope(xs, ys);
  return rep;
}

}  // namespace nodalab
