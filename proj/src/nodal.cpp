#include "nodalab/nodal.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "nodalab/specfun.hpp"

namespace nodalab {

namespace {

using Point = std::array<double, 2>;

struct Vertex {
  std::int64_t key;
  Point p;
};

struct Segment {
  Vertex a, b;
};

double dist(const Point& p, const Point& q) { return std::hypot(p[0] - q[0], p[1] - q[1]); }

class Contourer {
 public:
  Contourer(const ScalarGrid& g, const ModelDomain* clip) : g_(g), clip_disk_(nullptr) {
    if (clip) clip_disk_ = std::get_if<Disk>(clip);
    next_clip_key_ = -1;
  }

  std::vector<Segment> run() {
    std::vector<Segment> segs;
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i)
        if (g_.cell(i, j)) cell(i, j, segs);
    return segs;
  }

 private:
  std::int64_t node_key(int i, int j) const { return 3 * (static_cast<std::int64_t>(j) * (g_.nx + 1) + i); }

  // Crossing on the edge from node (i0,j0) to its right (dir 0) or upper (dir 1) neighbour.
  Vertex crossing(int i0, int j0, int dir) const {
    const int i1 = i0 + (dir == 0), j1 = j0 + (dir == 1);
    const double va = g_.at(i0, j0), vb = g_.at(i1, j1);
    const double t = va / (va - vb);
    if (t == 0.0) return {node_key(i0, j0), {g_.x(i0), g_.y(j0)}};
    if (t == 1.0) return {node_key(i1, j1), {g_.x(i1), g_.y(j1)}};
    Point p = dir == 0 ? Point{g_.x(i0) + t * (g_.x(i1) - g_.x(i0)), g_.y(j0)}
                       : Point{g_.x(i0), g_.y(j0) + t * (g_.y(j1) - g_.y(j0))};
    return {node_key(i0, j0) + 1 + dir, p};
  }

  void emit(Vertex a, Vertex b, std::vector<Segment>& out) {
    if (a.key == b.key) return;
    if (clip_disk_ && !clip(a, b)) return;
    if (dist(a.p, b.p) <= 0.0) return;
    out.push_back({a, b});
  }

  // Clips the segment to the closed disk; clipped endpoints get fresh keys.
  bool clip(Vertex& a, Vertex& b) {
    const double R = clip_disk_->R;
    const bool ina = std::hypot(a.p[0], a.p[1]) <= R, inb = std::hypot(b.p[0], b.p[1]) <= R;
    if (ina && inb) return true;
    const double dx = b.p[0] - a.p[0], dy = b.p[1] - a.p[1];
    const double A = dx * dx + dy * dy, B = 2 * (a.p[0] * dx + a.p[1] * dy),
                 Cc = a.p[0] * a.p[0] + a.p[1] * a.p[1] - R * R;
    const double disc = B * B - 4 * A * Cc;
    if (disc <= 0.0) return false;
    const double sq = std::sqrt(disc);
    double t0 = (-B - sq) / (2 * A), t1 = (-B + sq) / (2 * A);
    t0 = std::max(t0, 0.0);
    t1 = std::min(t1, 1.0);
    if (t0 >= t1) return false;
    auto on_circle = [&](double t) {
      Point p{a.p[0] + t * dx, a.p[1] + t * dy};
      const double r = std::hypot(p[0], p[1]);
      if (r > R) p = {p[0] * R / r, p[1] * R / r};
      return p;
    };
    Vertex na = a, nb = b;
    if (!ina) na = {next_clip_key_--, on_circle(t0)};
    if (!inb) nb = {next_clip_key_--, on_circle(t1)};
    a = na;
    b = nb;
    return true;
  }

  void cell(int i, int j, std::vector<Segment>& out) {
    const double v00 = g_.at(i, j), v10 = g_.at(i + 1, j), v11 = g_.at(i + 1, j + 1), v01 = g_.at(i, j + 1);
    const bool s00 = v00 >= 0, s10 = v10 >= 0, s11 = v11 >= 0, s01 = v01 >= 0;
    const int code = s00 | (s10 << 1) | (s11 << 2) | (s01 << 3);
    if (code == 0 || code == 15) return;
    auto bottom = [&] { return crossing(i, j, 0); };
    auto right = [&] { return crossing(i + 1, j, 1); };
    auto top = [&] { return crossing(i, j + 1, 0); };
    auto left = [&] { return crossing(i, j, 1); };
    if (code == 5 || code == 10) {
      const bool center = 0.25 * (v00 + v10 + v11 + v01) >= 0;
      if (center == s00) {
        // Corners 00 and 11 connect through the center; isolate 10 and 01.
        emit(bottom(), right(), out);
        emit(left(), top(), out);
      } else {
        emit(left(), bottom(), out);
        emit(right(), top(), out);
      }
      return;
    }
    std::vector<Vertex> pts;
    if (s00 != s10) pts.push_back(bottom());
    if (s10 != s11) pts.push_back(right());
    if (s01 != s11) pts.push_back(top());
    if (s00 != s01) pts.push_back(left());
    if (pts.size() == 2) emit(pts[0], pts[1], out);
  }

  const ScalarGrid& g_;
  const Disk* clip_disk_;
  std::int64_t next_clip_key_;
};

std::vector<Polyline> chain(const std::vector<Segment>& segs) {
  std::unordered_map<std::int64_t, std::vector<int>> adj;
  adj.reserve(segs.size() * 2);
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    adj[segs[s].a.key].push_back(s);
    adj[segs[s].b.key].push_back(s);
  }
  std::vector<char> used(segs.size(), 0);
  std::vector<Polyline> out;

  auto next_unused = [&](std::int64_t key) -> int {
    for (int s : adj[key])
      if (!used[s]) return s;
    return -1;
  };
  auto walk = [&](int first, std::int64_t start_key) {
    Polyline pl;
    std::int64_t key = start_key;
    const Segment& s0 = segs[first];
    pl.points.push_back(s0.a.key == key ? s0.a.p : s0.b.p);
    int s = first;
    while (s >= 0) {
      used[s] = 1;
      const Segment& sg = segs[s];
      const Vertex& nxt = sg.a.key == key ? sg.b : sg.a;
      key = nxt.key;
      if (key == start_key) {
        pl.closed = true;
        break;
      }
      pl.points.push_back(nxt.p);
      s = next_unused(key);
    }
    out.push_back(std::move(pl));
  };

  // Open chains start at odd-degree vertices, in segment order for determinism.
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    for (const Vertex* v : {&segs[s].a, &segs[s].b}) {
      if (used[s]) break;
      if (adj[v->key].size() % 2 == 1) {
        int first = next_unused(v->key);
        if (first >= 0) walk(first, v->key);
      }
    }
  }
  for (int s = 0; s < static_cast<int>(segs.size()); ++s)
    if (!used[s]) walk(s, segs[s].a.key);
  return out;
}

}  // namespace

double Polyline::length() const {
  double L = 0.0;
  for (size_t i = 1; i < points.size(); ++i) L += dist(points[i - 1], points[i]);
  if (closed && points.size() > 1) L += dist(points.back(), points.front());
  return L;
}

int NodalCurveSet::closed_count() const {
  int c = 0;
  for (const auto& p : polylines) c += p.closed;
  return c;
}

double nodal_length_analytic(const Eigenmode& mode) {
  if (auto r = std::get_if<Rectangle>(&mode.domain)) return mode.index.n * r->b + mode.index.m * r->a;
  if (mode.index.n != 0 || mode.index.k != 1)
    throw std::invalid_argument("nodal_length_analytic: no closed form implemented for disk modes with n != 0");
  const double R = std::get<Disk>(mode.domain).R;
  const ZeroTable j0 = compute_zeros(0, ZeroKind::J, mode.index.m);
  const ZeroTable j1 = compute_zeros(1, ZeroKind::J, mode.index.m);
  double sum = 0.0;
  for (double z : j0.values) sum += z;
  return 2.0 * std::numbers::pi * R * sum / j1.values.back();
}

NodalCurveSet extract_nodal_curves(const ScalarGrid& grid, const ModelDomain* clip) {
  Contourer c(grid, clip);
  NodalCurveSet set;
  set.polylines = chain(c.run());
  for (const auto& p : set.polylines) set.total_length += p.length();
  return set;
}

NodalCurveSet mode_nodal_curves(const Eigenmode& mode, int resolution) {
  ScalarGrid g = sample_grid(mode, resolution);
  return extract_nodal_curves(g, &mode.domain);
}

double bound_constant(const ModelDomain& d) {
  if (auto r = std::get_if<Rectangle>(&d)) return r->a * r->b * std::sqrt(2.0) / std::numbers::pi;
  const double R = std::get<Disk>(d).R;
  return 2.0 * std::sqrt(17.0 / 16.0) * std::numbers::pi * R * R;
}

BoundReport verify_bound(const Eigenmode& mode, int resolution) {
  if (!(mode.lambda > 0.0)) throw std::invalid_argument("verify_bound: constant mode has lambda = 0");
  BoundReport rep;
  rep.index = mode.index;
  rep.length = nodal_length_analytic(mode);
  rep.lambda = mode.lambda;
  rep.C = bound_constant(mode.domain);
  if (auto r = std::get_if<Rectangle>(&mode.domain)) {
    // C sqrt(lambda) = sqrt(2 (n^2 b^2 + m^2 a^2)) with the pi factors cancelled.
    const double nb = mode.index.n * r->b, ma = mode.index.m * r->a;
    rep.c_sqrt_lambda = std::sqrt(2.0 * (nb * nb + ma * ma));
  } else {
    const double R = std::get<Disk>(mode.domain).R;
    rep.c_sqrt_lambda = 2.0 * std::sqrt(17.0 / 16.0) * std::numbers::pi * R * mode.scaled_zero;
  }
  rep.ratio = rep.length / rep.c_sqrt_lambda;
  rep.length_numeric = resolution > 0 ? mode_nodal_curves(mode, resolution).total_length
                                      : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

}  // namespace nodalab
