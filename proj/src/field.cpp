#include "sparsefield/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace sparsefield {

Grid2D Grid2D::uniform(int nx, int ny, double width, double length) {
  if (width <= 0.0 || length <= 0.0)
    throw ConfigError("grid dimensions must be positive");
  Grid2D g;
  g.nx = nx;
  g.ny = ny;
  g.x_coords.resize(nx);
  g.y_coords.resize(ny);
  for (int i = 0; i < nx; ++i) g.x_coords[i] = (i + 0.5) * width / nx;
  for (int j = 0; j < ny; ++j) g.y_coords[j] = (j + 0.5) * length / ny;
  g.validate();
  return g;
}

void Grid2D::validate() const {
  if (nx < 4 || ny < 4)
    throw ConfigError("grid must have at least 4 sensors per direction, got " +
                      std::to_string(nx) + "x" + std::to_string(ny));
  if (static_cast<int>(x_coords.size()) != nx ||
      static_cast<int>(y_coords.size()) != ny)
    throw ConfigError("grid coordinate count does not match nx/ny");
  for (int i = 1; i < nx; ++i)
    if (!(x_coords[i] > x_coords[i - 1]))
      throw ConfigError("grid x coordinates must be strictly increasing");
  for (int j = 1; j < ny; ++j)
    if (!(y_coords[j] > y_coords[j - 1]))
      throw ConfigError("grid y coordinates must be strictly increasing");
}

SensorLayout SensorLayout::full(const Grid2D& grid) {
  SensorLayout layout;
  layout.grid = grid;
  layout.n_full = grid.sensor_count();
  layout.tags.resize(layout.n_full);
  std::iota(layout.tags.begin(), layout.tags.end(), 1);
  layout.validate();
  return layout;
}

SensorLayout SensorLayout::sparse(const Grid2D& grid, std::vector<int> tags) {
  SensorLayout layout;
  layout.grid = grid;
  layout.n_full = grid.sensor_count();
  layout.tags = std::move(tags);
  layout.validate();
  return layout;
}

void SensorLayout::validate() const {
  grid.validate();
  if (n_full != grid.sensor_count())
    throw ConfigError("layout n_full does not match grid size");
  if (tags.empty()) throw ConfigError("sensor tag list is empty");
  std::set<int> seen;
  for (int t : tags) {
    if (t < 1 || t > n_full)
      throw ConfigError("sensor tag " + std::to_string(t) +
                        " outside [1, " + std::to_string(n_full) + "]");
    if (!seen.insert(t).second)
      throw ConfigError("duplicate sensor tag " + std::to_string(t));
  }
}

Eigen::MatrixXd build_mapping_matrix(const SensorLayout& layout) {
  layout.validate();
  Eigen::MatrixXd m =
      Eigen::MatrixXd::Zero(layout.sparse_count(), layout.n_full);
  for (int i = 0; i < layout.sparse_count(); ++i)
    m(i, layout.tags[i] - 1) = 1.0;
  return m;
}

SnapshotMatrix sample_sensors(const SnapshotMatrix& full,
                              const SensorLayout& layout) {
  layout.validate();
  if (full.sensors() != layout.n_full)
    throw DimensionError("snapshot matrix has " +
                         std::to_string(full.sensors()) + " rows, layout has " +
                         std::to_string(layout.n_full) + " sensors");
  SnapshotMatrix sparse;
  sparse.dt = full.dt;
  sparse.t0 = full.t0;
  sparse.data.resize(layout.sparse_count(), full.snapshots());
  for (int i = 0; i < layout.sparse_count(); ++i)
    sparse.data.row(i) = full.data.row(layout.tags[i] - 1);
  return sparse;
}

Eigen::MatrixXd reshape_sbf_column(const Eigen::VectorXd& zeta,
                                   const Grid2D& grid) {
  grid.validate();
  if (zeta.size() != grid.sensor_count())
    throw DimensionError("basis column length " + std::to_string(zeta.size()) +
                         " does not match grid size " +
                         std::to_string(grid.sensor_count()));
  Eigen::MatrixXd out(grid.nx, grid.ny);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) out(i, j) = zeta(i * grid.ny + j);
  return out;
}

Eigen::VectorXd flatten_sbf_matrix(const Eigen::MatrixXd& sbf,
                                   const Grid2D& grid) {
  grid.validate();
  if (sbf.rows() != grid.nx || sbf.cols() != grid.ny)
    throw DimensionError("basis matrix shape does not match grid");
  Eigen::VectorXd out(grid.sensor_count());
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) out(i * grid.ny + j) = sbf(i, j);
  return out;
}

namespace {

// index of the cell whose [c[k], c[k+1]] interval contains x (clamped)
int lower_cell(const std::vector<double>& coords, double x) {
  if (x <= coords.front()) return 0;
  if (x >= coords.back()) return static_cast<int>(coords.size()) - 2;
  auto it = std::upper_bound(coords.begin(), coords.end(), x);
  int k = static_cast<int>(it - coords.begin()) - 1;
  return std::min(k, static_cast<int>(coords.size()) - 2);
}

}  // namespace

double bilinear_sample(const Eigen::MatrixXd& values,
                       const std::vector<double>& x_coords,
                       const std::vector<double>& y_coords, double x,
                       double y) {
  if (values.rows() != static_cast<Eigen::Index>(x_coords.size()) ||
      values.cols() != static_cast<Eigen::Index>(y_coords.size()))
    throw DimensionError("value grid does not match coordinate axes");
  if (x_coords.size() < 2 || y_coords.size() < 2)
    throw DimensionError("bilinear interpolation needs at least a 2x2 grid");

  const int i = lower_cell(x_coords, x);
  const int j = lower_cell(y_coords, y);
  const double tx = std::clamp(
      (x - x_coords[i]) / (x_coords[i + 1] - x_coords[i]), 0.0, 1.0);
  const double ty = std::clamp(
      (y - y_coords[j]) / (y_coords[j + 1] - y_coords[j]), 0.0, 1.0);
  const double v00 = values(i, j), v10 = values(i + 1, j);
  const double v01 = values(i, j + 1), v11 = values(i + 1, j + 1);
  return (1 - tx) * ((1 - ty) * v00 + ty * v01) +
         tx * ((1 - ty) * v10 + ty * v11);
}

}  // namespace sparsefield
