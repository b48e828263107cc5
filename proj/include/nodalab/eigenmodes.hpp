#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace nodalab {

struct Rectangle {
  double a = 1.0;
  double b = 1.0;
};

struct Disk {
  double R = 1.0;
};

/// Rectangle [0,a] x [0,b] or the disk of radius R centered at the origin.
using ModelDomain = std::variant<Rectangle, Disk>;

/// Validates dimensions and returns the domain; throws std::invalid_argument otherwise.
ModelDomain make_rectangle(double a, double b);
ModelDomain make_disk(double R);

/// Parses "rect:a,b" or "disk:R".
ModelDomain parse_domain(const std::string& spec);
std::string describe(const ModelDomain& d);

/// Axis-aligned bounding box {xmin, ymin, xmax, ymax}.
std::array<double, 4> bounding_box(const ModelDomain& d);

/// Characteristic length (shortest side, or radius).
double feature_size(const ModelDomain& d);

/// True if (x, y) lies in the closed domain enlarged by `tol`.
bool contains(const ModelDomain& d, double x, double y, double tol = 0.0);

struct ModeIndex {
  int n = 0;
  int m = 0;
  int k = 1;  ///< disk only: 1 selects cos(n theta), 2 selects sin(n theta)
};

/// Parses "n,m" or "n,m,k".
ModeIndex parse_index(const std::string& spec);

/// Closed-form Neumann eigenpair of the Laplacian.
struct Eigenmode {
  ModelDomain domain;
  ModeIndex index;
  double lambda = 0.0;
  double scaled_zero = 0.0;  ///< disk: j~_{nm}, the m-th positive zero of J_n'
};

/// Rejects negative indices, disk m < 1, disk k outside {1,2} and the disk mode (0, m, 2).
Eigenmode make_eigenmode(const ModelDomain& d, const ModeIndex& idx);

/// Eigenfunction value; throws std::domain_error outside the closed domain.
double eval_mode(const Eigenmode& mode, double x, double y);

/// The same closed-form expression evaluated at any point of the plane.
double eval_extended(const Eigenmode& mode, double x, double y);

/// Analytic gradient of the closed form.
std::array<double, 2> grad_mode(const Eigenmode& mode, double x, double y);

/// `count` points spread along the boundary (corners are avoided on rectangles).
std::vector<std::array<double, 2>> boundary_samples(const ModelDomain& d, int count);

/// Outward unit normal at a boundary point (nearest face for a rectangle).
std::array<double, 2> outward_normal(const ModelDomain& d, double x, double y);

/// Maximum |du/dnu| over the samples using the one-sided second-order stencil
/// (3u(p) - 4u(p - h nu) + u(p - 2h nu)) / (2h). Throws std::invalid_argument if a sample
/// is not on the boundary or the stencil leaves the domain.
double neumann_residual(const Eigenmode& mode, const std::vector<std::array<double, 2>>& samples,
                        double step);

/// Tensor grid over a bounding box: `nx` x `ny` cells, (nx+1) x (ny+1) nodes, row-major by y.
struct ScalarGrid {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  int nx = 0, ny = 0;
  std::vector<double> values;         ///< node values, index j * (nx + 1) + i
  std::vector<std::uint8_t> cell_mask;  ///< 1 if the cell center is in the domain, index j * nx + i

  double x(int i) const { return x0 + (static_cast<double>(i) * (x1 - x0)) / nx; }
  double y(int j) const { return y0 + (static_cast<double>(j) * (y1 - y0)) / ny; }
  double at(int i, int j) const { return values[static_cast<size_t>(j) * (nx + 1) + i]; }
  std::uint8_t cell(int i, int j) const { return cell_mask[static_cast<size_t>(j) * nx + i]; }
};

/// Samples the mode on a grid with `resolution` cells per axis over the bounding box.
/// Nodes outside the disk carry the extended closed form; masking is by cell center.
ScalarGrid sample_grid(const Eigenmode& mode, int resolution);

/// Builds a grid from an arbitrary field with all cells masked.
template <class F>
ScalarGrid sample_field(F&& f, double x0, double y0, double x1, double y1, int nx, int ny) {
  ScalarGrid g;
  g.x0 = x0, g.y0 = y0, g.x1 = x1, g.y1 = y1, g.nx = nx, g.ny = ny;
  g.values.resize(static_cast<size_t>(nx + 1) * (ny + 1));
  g.cell_mask.assign(static_cast<size_t>(nx) * ny, 1);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) g.values[static_cast<size_t>(j) * (nx + 1) + i] = f(g.x(i), g.y(j));
  return g;
}

}  // namespace nodalab
