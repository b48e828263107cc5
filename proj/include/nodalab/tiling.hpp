#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nodalab/eigenmodes.hpp"
#include "nodalab/linalg.hpp"

namespace nodalab {

/// Geometry of the boundary piece inside a cube; drives subdivision.
enum class BoundaryShape {
  None,    ///< interior cube
  Edge,    ///< straight side of a rectangle (2D) or a lateral face of the slab box (3D), away from corners
  Corner,  ///< rectangle corner (2D)
  Ridge,   ///< edge or corner of the 3D box
  Anchor,  ///< disk cube centered at 45 + 90k degrees
  StackX,  ///< disk cube in a stack stepping in x (the arc is a graph over x)
  StackY,  ///< disk cube in a stack stepping in y
  Cap      ///< centered on the top or bottom face of the slab only
};

std::string to_string(BoundaryShape s);

/// Closed axis-aligned cube [center - side/2, center + side/2]^d.
struct Cube {
  Vec center;
  double side = 0.0;
  BoundaryShape shape = BoundaryShape::None;
  int normal_axis = -1;  ///< Edge and Cap: coordinate axis normal to the face

  int dim() const { return static_cast<int>(center.size()); }
  double diameter() const;
  bool contains(const Vec& X, double tol = 0.0) const;
};

struct CubeTiling {
  ModelDomain domain;
  int dim = 2;
  double T = 0.0;  ///< slab half-height when dim = 3
  double side = 0.0;
  double c = 0.5;
  bool caps_as_interior = false;
  std::vector<Cube> boundary;
  std::vector<Cube> interior;  ///< includes Cap cubes when caps_as_interior is set
};

/// Centers on the boundary, equally spaced by at most r0/2 in arc length.
/// Throws std::invalid_argument unless 0 < r0 < feature_size(d).
std::vector<std::array<double, 2>> boundary_ball_cover(const ModelDomain& d, double r0);

/// Distance from (x, y) to the boundary curve.
double distance_to_boundary(const ModelDomain& d, double x, double y);

/// Boundary cubes along the boundary followed by a dyadic interior fill whose cubes keep
/// distance >= c * side from the boundary. Rectangles need s to divide both sides; disk
/// stacks use equal cubes of side <= s between four diagonal anchors of side s.
/// Throws std::invalid_argument for bad s or c and std::runtime_error if the fill does not close.
CubeTiling cube_decomposition(const ModelDomain& d, double s, double c = 0.5);

/// Tiling of the box [0,a] x [0,b] x [-T,T] by the lattice s Z^3 anchored at (0,0,-T).
/// Cubes centered on the box boundary are boundary cubes; with `caps_as_interior`, cubes that
/// touch only the top or bottom face are moved to the interior list with shape Cap.
CubeTiling slab_decomposition(const Rectangle& r, double T, double s, double c = 0.5, bool caps_as_interior = true);

/// Sub-cubes of side 2^-M s centered on the boundary and covering the boundary inside Q.
/// Edges give 2^{M(d-1)} cubes, rectangle corners and disk anchors a center cube plus two
/// stacks (2^M + 1). Throws std::invalid_argument for Ridge and interior cubes or M outside [0, 8].
std::vector<Cube> subdivide_boundary_cube(const Cube& Q, int M, const ModelDomain& d);

struct TilingCheck {
  int overlapping_pairs = 0;       ///< boundary cube pairs with intersecting interiors
  double max_center_offset = 0.0;  ///< distance of boundary-cube centers from the boundary
  int distance_violations = 0;     ///< interior cubes closer than c * side to the boundary
  double min_distance_ratio = 0.0;  ///< min over interior cubes of distance / side
  int samples = 0;
  int misses = 0;  ///< Monte Carlo points of the closed domain in no cube
};

/// Checks all tiling invariants; `samples` uniform points (seeded) test coverage.
TilingCheck check_tiling(const CubeTiling& t, int samples, std::uint64_t seed);

}  // namespace nodalab
