#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sparsefield/errors.hpp"

namespace sparsefield {

// Rectangular full-sensing arrangement: nx sensor positions along x, ny
// along y. Sensor tags are 1-based and row-major over the grid:
// tag = (ix)*ny + iy + 1, so tag 1 sits at (x[0], y[0]), tag 2 at
// (x[0], y[1]), and so on.
struct Grid2D {
  int nx = 0;
  int ny = 0;
  std::vector<double> x_coords;
  std::vector<double> y_coords;

  // Uniform spacing over [0,width] x [0,length] with sensors at cell centers.
  static Grid2D uniform(int nx, int ny, double width, double length);

  int sensor_count() const { return nx * ny; }
  void validate() const;
};

struct SensorLayout {
  int n_full = 0;
  std::vector<int> tags;  // 1-based tag numbers of the sparse subset
  Grid2D grid;

  static SensorLayout full(const Grid2D& grid);
  static SensorLayout sparse(const Grid2D& grid, std::vector<int> tags);

  int sparse_count() const { return static_cast<int>(tags.size()); }
  void validate() const;
};

// Sensors x time measurement matrix. Column k holds the snapshot taken at
// t0 + k*dt.
struct SnapshotMatrix {
  Eigen::MatrixXd data;
  double dt = 1.0;
  double t0 = 0.0;

  int sensors() const { return static_cast<int>(data.rows()); }
  int snapshots() const { return static_cast<int>(data.cols()); }
  double time_at(int col) const { return t0 + dt * col; }
};

// Binary selector M with M(i, tags[i]-1) = 1, so that M * T_full picks the
// sparse rows in tag order.
Eigen::MatrixXd build_mapping_matrix(const SensorLayout& layout);

// Row selection: output row i equals full row tags[i]. dt/t0 preserved.
SnapshotMatrix sample_sensors(const SnapshotMatrix& full,
                              const SensorLayout& layout);

// Row-major reshape of one basis column onto the sensor grid:
// out(ix, iy) = zeta[ix*ny + iy].
Eigen::MatrixXd reshape_sbf_column(const Eigen::VectorXd& zeta,
                                   const Grid2D& grid);
// Exact inverse of reshape_sbf_column.
Eigen::VectorXd flatten_sbf_matrix(const Eigen::MatrixXd& sbf,
                                   const Grid2D& grid);

// Bilinear interpolation of a grid of values with cell-center coordinates.
// Queries are clamped to the coordinate hull.
double bilinear_sample(const Eigen::MatrixXd& values,
                       const std::vector<double>& x_coords,
                       const std::vector<double>& y_coords, double x,
                       double y);

}  // namespace sparsefield
