#pragma once

#include <array>
#include <vector>

#include "nodalab/eigenmodes.hpp"

namespace nodalab {

struct Polyline {
  std::vector<std::array<double, 2>> points;
  bool closed = false;  ///< closed chains do not repeat the first vertex

  double length() const;
};

struct NodalCurveSet {
  std::vector<Polyline> polylines;
  double total_length = 0.0;

  int closed_count() const;
};

/// Closed-form nodal length of a rectangle mode, or of a radial disk mode (n = 0, k = 1).
/// Throws std::invalid_argument for other disk modes.
double nodal_length_analytic(const Eigenmode& mode);

/// Marching squares on masked cells. Values >= 0 count as positive; crossings are linear
/// along cell edges; saddles are split by the sign of the cell-center average. When `clip`
/// is a disk, segments are clipped to it so every vertex lies in the closed domain.
NodalCurveSet extract_nodal_curves(const ScalarGrid& grid, const ModelDomain* clip = nullptr);

/// Extracts the nodal set of a mode from `sample_grid(mode, resolution)`.
NodalCurveSet mode_nodal_curves(const Eigenmode& mode, int resolution);

struct BoundReport {
  ModeIndex index;
  double length = 0.0;          ///< closed form
  double length_numeric = 0.0;  ///< marching squares, NaN when not requested
  double lambda = 0.0;
  double C = 0.0;
  double c_sqrt_lambda = 0.0;
  double ratio = 0.0;  ///< length / (C sqrt(lambda))
};

/// Bound constant C of the model domain: ab sqrt(2)/pi or 2 sqrt(17/16) pi R^2.
double bound_constant(const ModelDomain& d);

/// Fills a BoundReport. `resolution` > 0 also computes the numeric length.
/// Throws std::invalid_argument for lambda = 0 and for modes without a closed form.
BoundReport verify_bound(const Eigenmode& mode, int resolution = 0);

}  // namespace nodalab
