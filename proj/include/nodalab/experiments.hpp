#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nodalab/eigenmodes.hpp"
#include "nodalab/lift.hpp"
#include "nodalab/nodal.hpp"
#include "nodalab/tiling.hpp"

namespace nodalab {

struct SqrtLambdaSpec {
  int density = 8;  ///< lattice intervals per unit length of each axis of the closed cylinder
  std::vector<double> radii{0.05, 0.1, 0.2};
  double T = 1.0;
};

struct SqrtLambdaRow {
  ModeIndex index;
  double lambda = 0.0;
  double sqrt_lambda = 0.0;
  double max_ratio = 0.0;  ///< max of N*(y, r) / sqrt(lambda) over the samples
  Vec argmax_center;
  double argmax_r = 0.0;
  int samples = 0;
};

/// Sample centers of the closed cylinder: a lattice of step 1/density on each axis of the
/// bounding box times [-T, T], endpoints included, kept if the base point is in the domain.
std::vector<Vec> cylinder_lattice(const ModelDomain& d, double T, int density);

/// For each mode (lambda > 0) the largest N*(y, r) / sqrt(lambda) over the cylinder lattice and
/// the radius list. Throws std::invalid_argument for lambda = 0 or an empty mode list.
std::vector<SqrtLambdaRow> sqrt_lambda_experiment(const ModelDomain& d, const std::vector<ModeIndex>& modes,
                                                  const SqrtLambdaSpec& spec = {}, int jobs = 1);

/// 2 * dim * log 2: twice the index of a constant field.
double default_small_cube_threshold(int dim);

struct SmallCubeReport {
  CubeIndex parent;               ///< N*(Q)
  std::vector<Cube> subcubes;
  std::vector<CubeIndex> indices;  ///< N*(q) per sub-cube
  int argmin = -1;
  double min_index = 0.0;
  double threshold = 0.0;
  bool below_threshold = false;  ///< N*(Q) < threshold: the halving question is not posed
  bool halving_found = false;    ///< min N*(q) <= N*(Q) / 2
  std::string outcome() const;   ///< "halving sub-cube found", "no halving sub-cube", "below threshold"
};

/// N*(Q) and N*(q) for the 2^M subdivision of the boundary cube Q. `sub_sampling` defaults to
/// `sampling`. A missing threshold uses default_small_cube_threshold(3).
SmallCubeReport small_cube_experiment(const ReflectedLift& h, const Cube& Q, int M,
                                      std::optional<double> threshold = std::nullopt,
                                      const CubeSampling& sampling = {},
                                      std::optional<CubeSampling> sub_sampling = std::nullopt, int jobs = 1);

/// Area of the nodal surface inside one cube of the slab.
struct Theorem2Point {
  ModeIndex index;
  Cube cube;
  bool boundary = false;
  double area = 0.0;         ///< nodal length in the footprint times the height inside [-T, T]
  double scaled_area = 0.0;  ///< area / side^2
  double n_star = 0.0;       ///< sampled N*(Q)
};

/// Line y = intercept + slope x above every point, with slope >= 0, minimizing the summed gap.
struct Envelope {
  double slope = 0.0;
  double intercept = 0.0;
  double mean_gap = 0.0;  ///< mean of envelope minus value
  double max_gap = 0.0;
  double ls_slope = 0.0;  ///< ordinary least squares, for comparison
  double ls_intercept = 0.0;
  double ls_rms = 0.0;
  double ls_shift = 0.0;  ///< largest residual above the least-squares line: shifting by it gives an envelope
  int points = 0;
};

Envelope fit_upper_envelope(const std::vector<double>& x, const std::vector<double>& y);

struct Theorem2Options {
  double side = 0.25;
  double c = 0.5;
  double T = 1.0;
  bool caps_as_interior = true;
  int resolution = 1024;  ///< marching-squares cells per axis of the base domain
  CubeSampling sampling;
};

struct Theorem2Report {
  std::vector<Theorem2Point> points;
  Envelope envelope;
  double mean_area = 0.0;
};

/// Scatter of per-cube nodal area against N*(Q) over the slab tiling of a rectangle, for every
/// mode, and the upper envelope of scaled_area against n_star. Throws std::invalid_argument for
/// disks.
Theorem2Report theorem2_experiment(const ModelDomain& d, const std::vector<ModeIndex>& modes,
                                   const Theorem2Options& opt = {}, int jobs = 1);

/// Length of the polylines inside the closed box [x0, x1] x [y0, y1].
double length_in_box(const NodalCurveSet& curves, double x0, double y0, double x1, double y1);

}  // namespace nodalab
