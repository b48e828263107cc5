#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nodalab/tiling.hpp"

namespace nodalab {
namespace {

constexpr double kPi = std::numbers::pi;

// Distance to the boundary written independently of the library.
double oracle_distance(const ModelDomain& d, double x, double y) {
  if (auto r = std::get_if<Rectangle>(&d)) return std::min({x, r->a - x, y, r->b - y});
  return std::get<Disk>(d).R - std::hypot(x, y);
}

// Smallest distance from the closed cube footprint to the boundary, for cubes inside the domain.
double oracle_clearance(const ModelDomain& d, const Cube& q) {
  const double h = 0.5 * q.side;
  double best = 1e300;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) best = std::min(best, oracle_distance(d, q.center[0] + sx * h, q.center[1] + sy * h));
  return best;
}

bool interiors_overlap(const Cube& a, const Cube& b) {
  for (int i = 0; i < a.dim(); ++i)
    if (std::fabs(a.center[i] - b.center[i]) >= 0.5 * (a.side + b.side) - 1e-12) return false;
  return true;
}

std::vector<ModelDomain> domains() { return {make_rectangle(1.0, 1.0), make_rectangle(1.0, 2.0), make_disk(1.0)}; }

TEST(BallCover, UnitCircle) {
  const ModelDomain d = make_disk(1.0);
  const auto c = boundary_ball_cover(d, 0.1);
  EXPECT_GE(c.size(), static_cast<size_t>(std::ceil(2 * kPi / 0.1) / 2));
  for (int i = 0; i < 10000; ++i) {
    const double th = 2 * kPi * (i + 0.5) / 10000;
    double best = 1e300;
    for (const auto& p : c) best = std::min(best, std::hypot(std::cos(th) - p[0], std::sin(th) - p[1]));
    ASSERT_LE(best, 0.1);
  }
  for (const auto& p : c) EXPECT_NEAR(std::hypot(p[0], p[1]), 1.0, 1e-12);
}

TEST(BallCover, SquarePerimeter) {
  const auto c = boundary_ball_cover(make_rectangle(1.0, 1.0), 0.5);
  EXPECT_LE(c.size(), 16u);
  for (int i = 0; i < 4000; ++i) {
    const double u = 4.0 * i / 4000;
    double x, y;
    if (u < 1) x = u, y = 0;
    else if (u < 2) x = 1, y = u - 1;
    else if (u < 3) x = 3 - u, y = 1;
    else x = 0, y = 4 - u;
    double best = 1e300;
    for (const auto& p : c) best = std::min(best, std::hypot(x - p[0], y - p[1]));
    ASSERT_LE(best, 0.5);
  }
  EXPECT_THROW(boundary_ball_cover(make_rectangle(1.0, 1.0), 1.0), std::invalid_argument);
  EXPECT_THROW(boundary_ball_cover(make_disk(1.0), 0.0), std::invalid_argument);
}

TEST(CubeDecomposition, UnitSquareEighth) {
  const ModelDomain d = make_rectangle(1.0, 1.0);
  const CubeTiling t = cube_decomposition(d, 0.125);
  EXPECT_EQ(t.boundary.size(), 32u);
  int corners = 0;
  for (const Cube& q : t.boundary) {
    EXPECT_NEAR(std::fabs(oracle_distance(d, q.center[0], q.center[1])), 0.0, 1e-15);
    EXPECT_EQ(q.side, 0.125);
    corners += q.shape == BoundaryShape::Corner;
  }
  EXPECT_EQ(corners, 4);
  for (size_t i = 0; i < t.boundary.size(); ++i)
    for (size_t j = i + 1; j < t.boundary.size(); ++j) EXPECT_FALSE(interiors_overlap(t.boundary[i], t.boundary[j]));
  for (const Cube& q : t.interior) EXPECT_GE(oracle_clearance(d, q), t.c * q.side - 1e-15);
  const TilingCheck chk = check_tiling(t, 100000, 1);
  EXPECT_EQ(chk.misses, 0);
  EXPECT_EQ(chk.samples, 100000);
}

TEST(CubeDecomposition, InvariantsOnAllModelDomains) {
  for (const ModelDomain& d : domains())
    for (double s : {0.25, 0.125, 0.0625}) {
      const CubeTiling t = cube_decomposition(d, s);
      const TilingCheck chk = check_tiling(t, 100000, 7);
      EXPECT_EQ(chk.overlapping_pairs, 0) << describe(d) << " " << s;
      EXPECT_LE(chk.max_center_offset, 1e-9);
      EXPECT_EQ(chk.distance_violations, 0);
      EXPECT_GE(chk.min_distance_ratio, t.c - 1e-12);
      EXPECT_EQ(chk.misses, 0) << describe(d) << " " << s;
      // Independent recomputation of disjointness, centers and clearance.
      for (size_t i = 0; i < t.boundary.size(); ++i) {
        EXPECT_LE(std::fabs(oracle_distance(d, t.boundary[i].center[0], t.boundary[i].center[1])), 1e-9);
        EXPECT_LE(t.boundary[i].side, s + 1e-15);
        for (size_t j = i + 1; j < t.boundary.size(); ++j)
          ASSERT_FALSE(interiors_overlap(t.boundary[i], t.boundary[j]));
      }
      for (const Cube& q : t.interior) ASSERT_GE(oracle_clearance(d, q), t.c * q.side - 1e-12);
    }
}

TEST(CubeDecomposition, ChecksCatchBrokenTilings) {
  CubeTiling t = cube_decomposition(make_rectangle(1.0, 1.0), 0.25);
  CubeTiling holes = t;
  holes.interior.clear();
  EXPECT_GT(check_tiling(holes, 10000, 1).misses, 0);
  CubeTiling close = t;
  close.interior.front().side *= 4.0;
  EXPECT_GT(check_tiling(close, 1000, 1).distance_violations, 0);
  CubeTiling overlap = t;
  overlap.boundary.push_back(overlap.boundary.front());
  EXPECT_GT(check_tiling(overlap, 1000, 1).overlapping_pairs, 0);
}

TEST(CubeDecomposition, RejectsBadParameters) {
  EXPECT_THROW(cube_decomposition(make_rectangle(1.0, 1.0), 0.3), std::invalid_argument);
  EXPECT_THROW(cube_decomposition(make_rectangle(1.0, 1.0), 1.0), std::invalid_argument);
  EXPECT_THROW(cube_decomposition(make_rectangle(1.0, 1.0), 0.25, 0.0), std::invalid_argument);
  EXPECT_THROW(cube_decomposition(make_rectangle(1.0, 1.0), 0.25, 1.5), std::invalid_argument);
  EXPECT_THROW(cube_decomposition(make_disk(1.0), 1.5), std::invalid_argument);
}

TEST(CubeDecomposition, Deterministic) {
  for (const ModelDomain& d : domains()) {
    const CubeTiling a = cube_decomposition(d, 0.125), b = cube_decomposition(d, 0.125);
    ASSERT_EQ(a.boundary.size(), b.boundary.size());
    ASSERT_EQ(a.interior.size(), b.interior.size());
    for (size_t i = 0; i < a.interior.size(); ++i) {
      EXPECT_EQ(a.interior[i].center, b.interior[i].center);
      EXPECT_EQ(a.interior[i].side, b.interior[i].side);
    }
  }
}

TEST(CubeDecomposition, FullSafetyFactorOnTheDisk) {
  const CubeTiling t = cube_decomposition(make_disk(1.0), 0.125, 1.0);
  const TilingCheck chk = check_tiling(t, 100000, 3);
  EXPECT_EQ(chk.distance_violations, 0);
  EXPECT_EQ(chk.misses, 0);
}

TEST(Slab, InvariantsAndCapFlag) {
  const Rectangle r{1.0, 1.0};
  const CubeTiling with = slab_decomposition(r, 1.0, 0.25, 0.5, true);
  const CubeTiling without = slab_decomposition(r, 1.0, 0.25, 0.5, false);
  EXPECT_EQ(with.dim, 3);
  EXPECT_EQ(with.boundary.size() + with.interior.size(), without.boundary.size() + without.interior.size());
  int caps = 0;
  for (const Cube& q : with.interior) caps += q.shape == BoundaryShape::Cap;
  EXPECT_GT(caps, 0);
  int caps_b = 0;
  for (const Cube& q : without.boundary) caps_b += q.shape == BoundaryShape::Cap;
  EXPECT_EQ(caps, caps_b);
  for (const CubeTiling* t : {&with, &without}) {
    const TilingCheck chk = check_tiling(*t, 20000, 5);
    EXPECT_EQ(chk.overlapping_pairs, 0);
    EXPECT_EQ(chk.distance_violations, 0);
    EXPECT_EQ(chk.misses, 0);
    EXPECT_LE(chk.max_center_offset, 1e-12);
  }
  EXPECT_THROW(slab_decomposition(r, 0.0, 0.25), std::invalid_argument);
  EXPECT_THROW(slab_decomposition(r, 1.0, 0.3), std::invalid_argument);
}

TEST(Subdivide, FlatEdgeRow) {
  const ModelDomain d = make_rectangle(1.0, 1.0);
  const CubeTiling t = cube_decomposition(d, 0.25);
  const Cube* edge = nullptr;
  for (const Cube& q : t.boundary)
    if (q.shape == BoundaryShape::Edge && q.normal_axis == 1 && q.center[1] == 0.0) edge = &q;
  ASSERT_NE(edge, nullptr);
  const auto sub = subdivide_boundary_cube(*edge, 2, d);
  ASSERT_EQ(sub.size(), 4u);
  for (const Cube& q : sub) {
    EXPECT_EQ(q.side, 0.0625);
    EXPECT_EQ(q.center[1], 0.0);
    EXPECT_TRUE(edge->contains(q.center, 1e-15));
  }
  for (size_t i = 0; i < sub.size(); ++i)
    for (size_t j = i + 1; j < sub.size(); ++j) EXPECT_FALSE(interiors_overlap(sub[i], sub[j]));
}

TEST(Subdivide, CornerCountAndCoverage) {
  const ModelDomain d = make_rectangle(1.0, 1.0);
  const CubeTiling t = cube_decomposition(d, 0.25);
  for (const Cube& Q : t.boundary) {
    if (Q.shape != BoundaryShape::Corner) continue;
    const auto sub = subdivide_boundary_cube(Q, 3, d);
    EXPECT_EQ(sub.size(), 9u);
    for (const Cube& q : sub) EXPECT_NEAR(oracle_distance(d, q.center[0], q.center[1]), 0.0, 1e-15);
  }
}

TEST(Subdivide, CircleArcCountsAndCoverage) {
  const ModelDomain d = make_disk(1.0);
  const CubeTiling t = cube_decomposition(d, 0.25);
  for (int M = 2; M <= 5; ++M)
    for (const Cube& Q : t.boundary) {
      const auto sub = subdivide_boundary_cube(Q, M, d);
      const double n = static_cast<double>(sub.size());
      EXPECT_GE(n, std::pow(2.0, M));
      EXPECT_LE(n, std::pow(2.0, M) * std::sqrt(2.0));
      for (const Cube& q : sub) {
        EXPECT_NEAR(std::hypot(q.center[0], q.center[1]), 1.0, 1e-9);
        EXPECT_NEAR(q.side, Q.side / std::pow(2.0, M), 1e-15);
      }
      for (size_t i = 0; i < sub.size(); ++i)
        for (size_t j = i + 1; j < sub.size(); ++j) ASSERT_FALSE(interiors_overlap(sub[i], sub[j]));
      // Coverage of the arc inside Q at 1000 samples.
      int hits = 0, inside = 0;
      for (int k = 0; k < 1000 * 8; ++k) {
        const double th = 2 * kPi * (k + 0.5) / 8000;
        const Vec X = vec2(std::cos(th), std::sin(th));
        if (!Q.contains(X)) continue;
        ++inside;
        hits += std::any_of(sub.begin(), sub.end(), [&](const Cube& q) { return q.contains(X, 1e-12); });
      }
      EXPECT_GT(inside, 0);
      EXPECT_EQ(hits, inside);
    }
}

TEST(Subdivide, SlabFaceGridAndErrors) {
  const Rectangle r{1.0, 1.0};
  const CubeTiling t = slab_decomposition(r, 1.0, 0.25, 0.5, false);
  int faces = 0;
  for (const Cube& Q : t.boundary) {
    if (Q.shape == BoundaryShape::Edge || Q.shape == BoundaryShape::Cap) {
      EXPECT_EQ(subdivide_boundary_cube(Q, 2, r).size(), 16u);
      ++faces;
    } else if (Q.shape == BoundaryShape::Ridge) {
      EXPECT_THROW(subdivide_boundary_cube(Q, 2, r), std::invalid_argument);
    }
  }
  EXPECT_GT(faces, 0);
  const CubeTiling t2 = cube_decomposition(make_rectangle(1.0, 1.0), 0.25);
  EXPECT_THROW(subdivide_boundary_cube(t2.interior.front(), 2, make_rectangle(1.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(subdivide_boundary_cube(t2.boundary.front(), 9, make_rectangle(1.0, 1.0)), std::invalid_argument);
}

TEST(Distance, MatchesOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), y = u(rng);
    EXPECT_NEAR(distance_to_boundary(make_rectangle(1.0, 1.0), x, y), oracle_distance(make_rectangle(1.0, 1.0), x, y),
                1e-15);
    const double px = 2 * x - 1, py = 2 * y - 1;
    EXPECT_NEAR(distance_to_boundary(make_disk(1.0), px, py), std::fabs(oracle_distance(make_disk(1.0), px, py)), 1e-15);
  }
}

}  // namespace
}  // namespace nodalab
