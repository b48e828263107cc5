#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "nodalab/tiling.hpp"

namespace nodalab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxDepth = 16;

struct Box {
  double x0, y0, x1, y1;
  double side() const { return x1 - x0; }
};

Box box_of(const Cube& q) {
  const double h = 0.5 * q.side;
  return {q.center[0] - h, q.center[1] - h, q.center[0] + h, q.center[1] + h};
}

Cube cube2(double x, double y, double side, BoundaryShape shape, int normal = -1) {
  Cube q;
  q.center = vec2(x, y);
  q.side = side;
  q.shape = shape;
  q.normal_axis = normal;
  return q;
}

bool interiors_meet(const Cube& a, const Cube& b, double tol) {
  for (int i = 0; i < a.dim(); ++i)
    if (std::fabs(a.center[i] - b.center[i]) >= 0.5 * (a.side + b.side) - tol) return false;
  return true;
}

/// True if the closed box is inside the union of `boxes` from index `start` on, ignoring
/// slivers thinner than `tol` left by rounding between abutting boxes.
bool covered(const Box& c, const std::vector<Box>& boxes, size_t start, double tol) {
  if (!(c.x1 - c.x0 > tol) || !(c.y1 - c.y0 > tol)) return true;
  for (size_t i = start; i < boxes.size(); ++i) {
    const Box& b = boxes[i];
    if (b.x0 >= c.x1 || b.x1 <= c.x0 || b.y0 >= c.y1 || b.y1 <= c.y0) continue;
    if (b.x0 <= c.x0 && b.x1 >= c.x1 && b.y0 <= c.y0 && b.y1 >= c.y1) return true;
    const double ix0 = std::max(c.x0, b.x0), ix1 = std::min(c.x1, b.x1);
    const Box pieces[4] = {{c.x0, c.y0, ix0, c.y1},
                           {ix1, c.y0, c.x1, c.y1},
                           {ix0, c.y0, ix1, std::max(c.y0, b.y0)},
                           {ix0, std::min(c.y1, b.y1), ix1, c.y1}};
    for (const Box& p : pieces)
      if (!covered(p, boxes, i + 1, tol)) return false;
    return true;
  }
  return false;
}

struct Region2 {
  std::function<bool(const Box&)> outside;      // no interior overlap with the closed domain
  std::function<bool(const Box&)> inside;       // box inside the closed domain
  std::function<double(const Box&)> clearance;  // distance from an inside box to the boundary
};

Region2 region_of(const ModelDomain& d) {
  if (auto r = std::get_if<Rectangle>(&d)) {
    const double a = r->a, b = r->b;
    return {[a, b](const Box& q) { return q.x1 <= 0.0 || q.x0 >= a || q.y1 <= 0.0 || q.y0 >= b; },
            [a, b](const Box& q) { return q.x0 >= 0.0 && q.x1 <= a && q.y0 >= 0.0 && q.y1 <= b; },
            [a, b](const Box& q) { return std::min({q.x0, a - q.x1, q.y0, b - q.y1}); }};
  }
  const double R = std::get<Disk>(d).R;
  auto far = [](const Box& q) {
    return std::hypot(std::max(std::fabs(q.x0), std::fabs(q.x1)), std::max(std::fabs(q.y0), std::fabs(q.y1)));
  };
  auto near = [](const Box& q) {
    const double dx = q.x0 > 0.0 ? q.x0 : (q.x1 < 0.0 ? -q.x1 : 0.0);
    const double dy = q.y0 > 0.0 ? q.y0 : (q.y1 < 0.0 ? -q.y1 : 0.0);
    return std::hypot(dx, dy);
  };
  return {[R, near](const Box& q) { return near(q) >= R; }, [R, far](const Box& q) { return far(q) <= R; },
          [R, far](const Box& q) { return R - far(q); }};
}

void check_side(const ModelDomain& d, double s, double c) {
  if (!(s > 0.0) || !(s < feature_size(d))) throw std::invalid_argument("cube_decomposition: s must be below the feature size");
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("cube_decomposition: c must lie in (0, 1]");
}

int divisions(double length, double s, const char* who) {
  const double q = length / s;
  const long n = std::lround(q);
  if (n < 1 || std::fabs(q - n) > 1e-9 * std::max(1.0, q))
    throw std::invalid_argument(std::string(who) + ": s must divide every side");
  return static_cast<int>(n);
}

std::vector<Cube> rectangle_boundary(const Rectangle& r, double s) {
  const int nx = divisions(r.a, s, "cube_decomposition"), ny = divisions(r.b, s, "cube_decomposition");
  auto X = [&](int i) { return i == nx ? r.a : i * s; };
  auto Y = [&](int j) { return j == ny ? r.b : j * s; };
  std::vector<Cube> out;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const bool ex = i == 0 || i == nx, ey = j == 0 || j == ny;
      if (!ex && !ey) continue;
      if (ex && ey)
        out.push_back(cube2(X(i), Y(j), s, BoundaryShape::Corner));
      else
        out.push_back(cube2(X(i), Y(j), s, BoundaryShape::Edge, ex ? 0 : 1));
    }
  return out;
}

std::vector<Cube> disk_boundary(double R, double s) {
  const double xa = R / std::sqrt(2.0);
  const double span = 2.0 * xa - s;
  if (!(span > 0.0)) throw std::invalid_argument("cube_decomposition: s too large for the disk");
  const int n = static_cast<int>(std::ceil(span / s - 1e-12));
  const double st = span / n;
  std::vector<Cube> out;
  for (int k = 0; k < 4; ++k) {
    const double th = 0.25 * kPi + 0.5 * kPi * k;
    out.push_back(cube2(R * std::cos(th), R * std::sin(th), s, BoundaryShape::Anchor));
  }
  for (int j = 0; j < n; ++j) {
    const double u = -xa + 0.5 * s + (j + 0.5) * st;
    const double w = std::sqrt(R * R - u * u);
    out.push_back(cube2(w, u, st, BoundaryShape::StackY));
    out.push_back(cube2(-w, u, st, BoundaryShape::StackY));
    out.push_back(cube2(u, w, st, BoundaryShape::StackX));
    out.push_back(cube2(u, -w, st, BoundaryShape::StackX));
  }
  for (size_t i = 0; i < out.size(); ++i)
    for (size_t j = i + 1; j < out.size(); ++j)
      if (interiors_meet(out[i], out[j], 1e-12 * s))
        throw std::invalid_argument("cube_decomposition: s too large for disjoint boundary cubes on the disk");
  return out;
}

void fill_cell(const Box& cell, int depth, double c, double tol, const Region2& reg, const std::vector<Box>& bbox,
               std::vector<Cube>& out) {
  if (reg.outside(cell)) return;
  if (covered(cell, bbox, 0, tol)) return;
  if (reg.inside(cell) && reg.clearance(cell) >= c * cell.side()) {
    out.push_back(cube2(0.5 * (cell.x0 + cell.x1), 0.5 * (cell.y0 + cell.y1), cell.side(), BoundaryShape::None));
    return;
  }
  if (depth == kMaxDepth) throw std::runtime_error("cube_decomposition: interior fill did not close (unachievable c for this s)");
  const double mx = 0.5 * (cell.x0 + cell.x1), my = 0.5 * (cell.y0 + cell.y1);
  fill_cell({cell.x0, cell.y0, mx, my}, depth + 1, c, tol, reg, bbox, out);
  fill_cell({mx, cell.y0, cell.x1, my}, depth + 1, c, tol, reg, bbox, out);
  fill_cell({cell.x0, my, mx, cell.y1}, depth + 1, c, tol, reg, bbox, out);
  fill_cell({mx, my, cell.x1, cell.y1}, depth + 1, c, tol, reg, bbox, out);
}

double lateral_clearance(const Rectangle& r, const Cube& q) {
  const double h = 0.5 * q.side;
  return std::min({q.center[0] - h, r.a - q.center[0] - h, q.center[1] - h, r.b - q.center[1] - h});
}

double slab_clearance(const CubeTiling& t, const Cube& q) {
  const Rectangle& r = std::get<Rectangle>(t.domain);
  double d = lateral_clearance(r, q);
  if (!t.caps_as_interior) {
    const double h = 0.5 * q.side;
    d = std::min({d, q.center[2] - h + t.T, t.T - q.center[2] - h});
  }
  return d;
}

double interior_clearance(const CubeTiling& t, const Cube& q) {
  if (t.dim == 3) return q.shape == BoundaryShape::Cap ? lateral_clearance(std::get<Rectangle>(t.domain), q)
                                                        : slab_clearance(t, q);
  return region_of(t.domain).clearance(box_of(q));
}

void refine_slab(const CubeTiling& t, const Cube& q, int depth, std::vector<Cube>& out) {
  if (interior_clearance(t, q) >= t.c * q.side) {
    out.push_back(q);
    return;
  }
  if (depth == kMaxDepth) throw std::runtime_error("slab_decomposition: interior fill did not close");
  const double h = 0.25 * q.side;
  for (int k = 0; k < 8; ++k) {
    Cube ch = q;
    ch.side = 0.5 * q.side;
    for (int a = 0; a < 3; ++a) ch.center[a] += ((k >> a) & 1) ? h : -h;
    refine_slab(t, ch, depth + 1, out);
  }
}

double boundary_offset(const CubeTiling& t, const Vec& x) {
  if (t.dim == 2) return distance_to_boundary(t.domain, x[0], x[1]);
  const Rectangle& r = std::get<Rectangle>(t.domain);
  return std::min({std::fabs(x[0]), std::fabs(r.a - x[0]), std::fabs(x[1]), std::fabs(r.b - x[1]),
                   std::fabs(x[2] + t.T), std::fabs(t.T - x[2])});
}

}  // namespace

std::string to_string(BoundaryShape s) {
  switch (s) {
    case BoundaryShape::None: return "interior";
    case BoundaryShape::Edge: return "edge";
    case BoundaryShape::Corner: return "corner";
    case BoundaryShape::Ridge: return "ridge";
    case BoundaryShape::Anchor: return "anchor";
    case BoundaryShape::StackX: return "stack_x";
    case BoundaryShape::StackY: return "stack_y";
    case BoundaryShape::Cap: return "cap";
  }
  return "unknown";
}

double Cube::diameter() const { return side * std::sqrt(static_cast<double>(dim())); }

bool Cube::contains(const Vec& X, double tol) const {
  for (int i = 0; i < dim(); ++i)
    if (std::fabs(X[i] - center[i]) > 0.5 * side + tol) return false;
  return true;
}

std::vector<std::array<double, 2>> boundary_ball_cover(const ModelDomain& d, double r0) {
  if (!(r0 > 0.0) || !(r0 < feature_size(d)))
    throw std::invalid_argument("boundary_ball_cover: r0 must be positive and below the feature size");
  std::vector<std::array<double, 2>> out;
  if (auto r = std::get_if<Rectangle>(&d)) {
    const double P = 2.0 * (r->a + r->b);
    const int n = static_cast<int>(std::ceil(P / (0.5 * r0) - 1e-12));
    for (int k = 0; k < n; ++k) {
      double u = P * k / n;
      if (u < r->a) {
        out.push_back({u, 0.0});
      } else if ((u -= r->a) < r->b) {
        out.push_back({r->a, u});
      } else if ((u -= r->b) < r->a) {
        out.push_back({r->a - u, r->b});
      } else {
        out.push_back({0.0, r->b - (u - r->a)});
      }
    }
    return out;
  }
  const double R = std::get<Disk>(d).R;
  const int n = static_cast<int>(std::ceil(2.0 * kPi * R / (0.5 * r0) - 1e-12));
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    out.push_back({R * std::cos(th), R * std::sin(th)});
  }
  return out;
}

double distance_to_boundary(const ModelDomain& d, double x, double y) {
  if (auto r = std::get_if<Rectangle>(&d)) {
    if (x >= 0.0 && x <= r->a && y >= 0.0 && y <= r->b) return std::min({x, r->a - x, y, r->b - y});
    const double dx = x < 0.0 ? -x : (x > r->a ? x - r->a : 0.0);
    const double dy = y < 0.0 ? -y : (y > r->b ? y - r->b : 0.0);
    return std::hypot(dx, dy);
  }
  return std::fabs(std::hypot(x, y) - std::get<Disk>(d).R);
}

CubeTiling cube_decomposition(const ModelDomain& d, double s, double c) {
  check_side(d, s, c);
  CubeTiling t;
  t.domain = d;
  t.dim = 2;
  t.side = s;
  t.c = c;
  t.boundary = std::holds_alternative<Rectangle>(d) ? rectangle_boundary(std::get<Rectangle>(d), s)
                                                    : disk_boundary(std::get<Disk>(d).R, s);
  std::vector<Box> bbox;
  for (const Cube& q : t.boundary) bbox.push_back(box_of(q));
  const Region2 reg = region_of(d);
  const auto bb = bounding_box(d);
  const int i0 = static_cast<int>(std::floor(bb[0] / s)), i1 = static_cast<int>(std::ceil(bb[2] / s));
  const int j0 = static_cast<int>(std::floor(bb[1] / s)), j1 = static_cast<int>(std::ceil(bb[3] / s));
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const double cx = i * s, cy = j * s;
      std::vector<Box> local;
      const Box cell{cx - 0.5 * s, cy - 0.5 * s, cx + 0.5 * s, cy + 0.5 * s};
      for (const Box& b : bbox)
        if (!(b.x0 >= cell.x1 || b.x1 <= cell.x0 || b.y0 >= cell.y1 || b.y1 <= cell.y0)) local.push_back(b);
      fill_cell(cell, 0, c, 1e-12 * s, reg, local, t.interior);
    }
  return t;
}

CubeTiling slab_decomposition(const Rectangle& r, double T, double s, double c, bool caps_as_interior) {
  if (!(T > 0.0)) throw std::invalid_argument("slab_decomposition: T must be positive");
  check_side(ModelDomain(r), s, c);
  const int nx = divisions(r.a, s, "slab_decomposition"), ny = divisions(r.b, s, "slab_decomposition");
  const int nt = divisions(2.0 * T, s, "slab_decomposition");
  CubeTiling t;
  t.domain = r;
  t.dim = 3;
  t.T = T;
  t.side = s;
  t.c = c;
  t.caps_as_interior = caps_as_interior;
  auto X = [&](int i) { return i == nx ? r.a : i * s; };
  auto Y = [&](int j) { return j == ny ? r.b : j * s; };
  auto Z = [&](int k) { return k == nt ? T : (2 * k == nt ? 0.0 : -T + k * s); };
  for (int k = 0; k <= nt; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const int lat = (i == 0 || i == nx) + (j == 0 || j == ny);
        const bool cap = k == 0 || k == nt;
        Cube q;
        q.center = vec3(X(i), Y(j), Z(k));
        q.side = s;
        if (lat == 0 && !cap) {
          q.shape = BoundaryShape::None;
          refine_slab(t, q, 0, t.interior);
          continue;
        }
        if (lat == 0) {
          q.shape = BoundaryShape::Cap;
          q.normal_axis = 2;
          if (caps_as_interior)
            refine_slab(t, q, 0, t.interior);
          else
            t.boundary.push_back(q);
          continue;
        }
        if (lat == 1 && !cap) {
          q.shape = BoundaryShape::Edge;
          q.normal_axis = (i == 0 || i == nx) ? 0 : 1;
        } else {
          q.shape = BoundaryShape::Ridge;
        }
        t.boundary.push_back(q);
      }
  return t;
}

std::vector<Cube> subdivide_boundary_cube(const Cube& Q, int M, const ModelDomain& d) {
  if (M < 0 || M > 8) throw std::invalid_argument("subdivide_boundary_cube: M must lie in [0, 8]");
  if (Q.shape == BoundaryShape::None) throw std::invalid_argument("subdivide_boundary_cube: Q does not meet the boundary");
  if (Q.shape == BoundaryShape::Ridge)
    throw std::invalid_argument("subdivide_boundary_cube: edges and corners of the slab are not supported");
  const int n = 1 << M;
  const double s = Q.side, sub = s / n;
  std::vector<Cube> out;
  if (Q.dim() == 3) {
    if (Q.shape != BoundaryShape::Edge && Q.shape != BoundaryShape::Cap)
      throw std::invalid_argument("subdivide_boundary_cube: unsupported cube");
    int ax[2], m = 0;
    for (int a = 0; a < 3; ++a)
      if (a != Q.normal_axis) ax[m++] = a;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Cube q = Q;
        q.side = sub;
        q.center[ax[0]] = Q.center[ax[0]] - 0.5 * s + (i + 0.5) * sub;
        q.center[ax[1]] = Q.center[ax[1]] - 0.5 * s + (j + 0.5) * sub;
        out.push_back(q);
      }
    return out;
  }
  const double cx = Q.center[0], cy = Q.center[1];
  switch (Q.shape) {
    case BoundaryShape::Edge: {
      const int t = 1 - Q.normal_axis;
      for (int i = 0; i < n; ++i) {
        Cube q = Q;
        q.side = sub;
        q.center[t] = Q.center[t] - 0.5 * s + (i + 0.5) * sub;
        out.push_back(q);
      }
      return out;
    }
    case BoundaryShape::Corner: {
      const Rectangle& r = std::get<Rectangle>(d);
      const double dx = cx < 0.5 * r.a ? 1.0 : -1.0, dy = cy < 0.5 * r.b ? 1.0 : -1.0;
      out.push_back(cube2(cx, cy, sub, BoundaryShape::Corner));
      for (int k = 1; k <= n / 2; ++k) {
        out.push_back(cube2(cx + dx * k * sub, cy, sub, BoundaryShape::Edge, 1));
        out.push_back(cube2(cx, cy + dy * k * sub, sub, BoundaryShape::Edge, 0));
      }
      return out;
    }
    case BoundaryShape::StackX:
    case BoundaryShape::StackY: {
      const double R = std::get<Disk>(d).R;
      const bool along_x = Q.shape == BoundaryShape::StackX;
      const double sign = along_x ? (cy < 0.0 ? -1.0 : 1.0) : (cx < 0.0 ? -1.0 : 1.0);
      for (int i = 0; i < n; ++i) {
        const double u = (along_x ? cx : cy) - 0.5 * s + (i + 0.5) * sub;
        const double w = sign * std::sqrt(R * R - u * u);
        out.push_back(along_x ? cube2(u, w, sub, Q.shape) : cube2(w, u, sub, Q.shape));
      }
      return out;
    }
    case BoundaryShape::Anchor: {
      const double R = std::get<Disk>(d).R;
      const double sx = cx < 0.0 ? -1.0 : 1.0, sy = cy < 0.0 ? -1.0 : 1.0;
      out.push_back(cube2(cx, cy, sub, BoundaryShape::Anchor));
      for (int k = 1; k <= n / 2; ++k) {
        const double x = cx - sx * k * sub;
        out.push_back(cube2(x, sy * std::sqrt(R * R - x * x), sub, BoundaryShape::StackX));
        const double y = cy - sy * k * sub;
        out.push_back(cube2(sx * std::sqrt(R * R - y * y), y, sub, BoundaryShape::StackY));
      }
      return out;
    }
    default:
      throw std::invalid_argument("subdivide_boundary_cube: unsupported cube");
  }
}

TilingCheck check_tiling(const CubeTiling& t, int samples, std::uint64_t seed) {
  TilingCheck chk;
  const double tol = 1e-12 * t.side;
  for (size_t i = 0; i < t.boundary.size(); ++i) {
    chk.max_center_offset = std::max(chk.max_center_offset, boundary_offset(t, t.boundary[i].center));
    for (size_t j = i + 1; j < t.boundary.size(); ++j)
      if (interiors_meet(t.boundary[i], t.boundary[j], tol)) ++chk.overlapping_pairs;
  }
  chk.min_distance_ratio = std::numeric_limits<double>::infinity();
  for (const Cube& q : t.interior) {
    const double ratio = interior_clearance(t, q) / q.side;
    chk.min_distance_ratio = std::min(chk.min_distance_ratio, ratio);
    if (ratio < t.c - 1e-12) ++chk.distance_violations;
  }

  // Bucket every cube by the lattice cells its closed box touches.
  const int dim = t.dim;
  const double h = t.side;
  auto key = [](long i, long j, long k) {
    return (static_cast<std::uint64_t>(i + (1 << 20)) << 42) | (static_cast<std::uint64_t>(j + (1 << 20)) << 21) |
           static_cast<std::uint64_t>(k + (1 << 20));
  };
  std::unordered_map<std::uint64_t, std::vector<const Cube*>> buckets;
  auto add = [&](const Cube& q) {
    long lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      lo[a] = static_cast<long>(std::floor((q.center[a] - 0.5 * q.side) / h)) - 1;
      hi[a] = static_cast<long>(std::floor((q.center[a] + 0.5 * q.side) / h)) + 1;
    }
    for (long i = lo[0]; i <= hi[0]; ++i)
      for (long j = lo[1]; j <= hi[1]; ++j)
        for (long k = lo[2]; k <= hi[2]; ++k) buckets[key(i, j, k)].push_back(&q);
  };
  for (const Cube& q : t.boundary) add(q);
  for (const Cube& q : t.interior) add(q);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto bb = bounding_box(t.domain);
  Vec X(dim);
  while (chk.samples < samples) {
    X[0] = bb[0] + (bb[2] - bb[0]) * U(rng);
    X[1] = bb[1] + (bb[3] - bb[1]) * U(rng);
    if (dim == 3) X[2] = -t.T + 2.0 * t.T * U(rng);
    if (!contains(t.domain, X[0], X[1])) continue;
    ++chk.samples;
    long idx[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a) idx[a] = static_cast<long>(std::floor(X[a] / h));
    bool hit = false;
    auto it = buckets.find(key(idx[0], idx[1], idx[2]));
    if (it != buckets.end())
      for (const Cube* q : it->second)
        if (q->contains(X, tol)) {
          hit = true;
          break;
        }
    if (!hit) ++chk.misses;
  }
  return chk;
}

}  // namespace nodalab
