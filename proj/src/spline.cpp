#include "sparsefield/spline.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sparsefield/kernels.hpp"

namespace sparsefield {

KnotVector knot_vector(int n_points) {
  if (n_points < 4)
    throw ConfigError("cubic spline needs at least 4 control points, got " +
                      std::to_string(n_points));
  KnotVector kv;
  kv.n_points = n_points;
  kv.knots.assign(n_points + 4, 0.0);
  const int spans = n_points - 3;
  for (int k = 1; k <= n_points - 4; ++k)
    kv.knots[3 + k] = static_cast<double>(k) / spans;
  for (int i = n_points; i < n_points + 4; ++i) kv.knots[i] = 1.0;
  return kv;
}

namespace {

inline double basis_degree0(int j, double u, const KnotVector& kv) {
  // closed on the last non-empty interval so the basis sums to 1 at u = 1
  if (u >= 1.0) return (kv[j] < 1.0 && kv[j + 1] >= 1.0) ? 1.0 : 0.0;
  return (kv[j] <= u && u < kv[j + 1]) ? 1.0 : 0.0;
}

}  // namespace

double bspline_basis(int j, int degree, double u, const KnotVector& kv) {
  if (j < 0 || j + degree + 1 >= kv.size())
    throw DimensionError("basis index out of range");
  if (degree == 0) return basis_degree0(j, u, kv);
  double value = 0.0;
  const double d1 = kv[j + degree] - kv[j];
  if (d1 > 0.0)
    value += (u - kv[j]) / d1 * bspline_basis(j, degree - 1, u, kv);
  const double d2 = kv[j + degree + 1] - kv[j + 1];
  if (d2 > 0.0)
    value += (kv[j + degree + 1] - u) / d2 *
             bspline_basis(j + 1, degree - 1, u, kv);
  return value;
}

Eigen::VectorXd cubic_basis_row(double u, const KnotVector& kv) {
  Eigen::VectorXd row(kv.n_points);
  for (int j = 0; j < kv.n_points; ++j) row(j) = bspline_basis(j, 3, u, kv);
  return row;
}

double spline_coordinate(double u, const std::vector<double>& coords,
                         const KnotVector& kv) {
  double x = 0.0;
  for (int j = 0; j < kv.n_points; ++j)
    x += bspline_basis(j, 3, u, kv) * coords[j];
  return x;
}

double invert_parameter(double x, const std::vector<double>& coords,
                        const KnotVector& kv) {
  if (static_cast<int>(coords.size()) != kv.n_points)
    throw DimensionError("coordinate count does not match knot vector");
  const double lo_x = coords.front(), hi_x = coords.back();
  const double range = hi_x - lo_x;
  const double slack = 1e-12 * range;
  if (x < lo_x - slack || x > hi_x + slack)
    throw DomainError("coordinate " + std::to_string(x) + " outside [" +
                      std::to_string(lo_x) + ", " + std::to_string(hi_x) +
                      "]");
  if (x <= lo_x) return 0.0;
  if (x >= hi_x) return 1.0;

  double lo = 0.0, hi = 1.0;
  // ~60 halvings reach machine resolution on [0,1]
  for (int it = 0; it < 80 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (spline_coordinate(mid, coords, kv) < x)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double SplineSurface::value_param(double u, double w) const {
  const Eigen::VectorXd bu = cubic_basis_row(u, knots_u);
  const Eigen::VectorXd bw = cubic_basis_row(w, knots_w);
  return bu.dot(control * bw);
}

double SplineSurface::value_at(double x, double y) const {
  const double u = invert_parameter(x, x_coords, knots_u);
  const double w = invert_parameter(y, y_coords, knots_w);
  return value_param(u, w);
}

SplineSurfaceSet build_continuous_sbfs(const SbfBasis& basis_full,
                                       const Grid2D& grid) {
  grid.validate();
  if (basis_full.modes.rows() != grid.sensor_count())
    throw DimensionError("basis has " +
                         std::to_string(basis_full.modes.rows()) +
                         " rows, grid has " +
                         std::to_string(grid.sensor_count()) + " sensors");
  const KnotVector ku = knot_vector(grid.nx);
  const KnotVector kw = knot_vector(grid.ny);
  SplineSurfaceSet set;
  set.surfaces.reserve(basis_full.order);
  for (int i = 0; i < basis_full.order; ++i) {
    SplineSurface s;
    s.control = reshape_sbf_column(basis_full.modes.col(i), grid);
    s.knots_u = ku;
    s.knots_w = kw;
    s.x_coords = grid.x_coords;
    s.y_coords = grid.y_coords;
    set.surfaces.push_back(std::move(s));
  }
  return set;
}

Eigen::MatrixXd basis_matrix(const std::vector<double>& params,
                             const KnotVector& kv) {
  Eigen::MatrixXd b(params.size(), kv.n_points);
  for (std::size_t i = 0; i < params.size(); ++i)
    b.row(i) = cubic_basis_row(params[i], kv).transpose();
  return b;
}

namespace {

void check_full_column_rank(const Eigen::MatrixXd& b, const char* axis) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma(sigma.size() - 1) <= 1e-12 * sigma(0))
    throw NumericalError(std::string("rank-deficient design matrix along ") +
                         axis + " (samples too coarse or degenerate)");
}

}  // namespace

Eigen::MatrixXd least_squares_projection(const Eigen::MatrixXd& samples,
                                         const std::vector<double>& us,
                                         const std::vector<double>& ws,
                                         const KnotVector& ku,
                                         const KnotVector& kw) {
  if (samples.rows() != static_cast<Eigen::Index>(us.size()) ||
      samples.cols() != static_cast<Eigen::Index>(ws.size()))
    throw DimensionError("sample grid does not match parameter vectors");
  if (static_cast<int>(us.size()) < 4 * (ku.n_points - 3) ||
      static_cast<int>(ws.size()) < 4 * (kw.n_points - 3))
    throw ConfigError("sample grid must resolve each knot span at least 4x");

  const Eigen::MatrixXd bu = basis_matrix(us, ku);
  const Eigen::MatrixXd bw = basis_matrix(ws, kw);
  check_full_column_rank(bu, "u");
  check_full_column_rank(bw, "w");

  // separable least squares: solve along u, then along w
  const Eigen::MatrixXd g = bu.colPivHouseholderQr().solve(samples);
  return bw.colPivHouseholderQr().solve(g.transpose()).transpose();
}

SurfaceSetRenderer::SurfaceSetRenderer(const SplineSurfaceSet& set,
                                       std::vector<double> xs,
                                       std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (set.surfaces.empty())
    throw DimensionError("renderer needs at least one surface");
  const SplineSurface& first = set.surfaces.front();
  Eigen::MatrixXd bu(xs_.size(), first.knots_u.n_points);
  Eigen::MatrixXd bw(ys_.size(), first.knots_w.n_points);
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    const double u = invert_parameter(xs_[i], first.x_coords, first.knots_u);
    bu.row(i) = cubic_basis_row(u, first.knots_u).transpose();
  }
  for (std::size_t j = 0; j < ys_.size(); ++j) {
    const double w = invert_parameter(ys_[j], first.y_coords, first.knots_w);
    bw.row(j) = cubic_basis_row(w, first.knots_w).transpose();
  }
  mode_grids_.reserve(set.surfaces.size());
  for (const SplineSurface& s : set.surfaces)
    mode_grids_.push_back(bu * s.control * bw.transpose());
}

Eigen::MatrixXd SurfaceSetRenderer::render(const Eigen::VectorXd& a) const {
  if (a.size() != static_cast<Eigen::Index>(mode_grids_.size()))
    throw DimensionError("coefficient count does not match surface count");
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(xs_.size(), ys_.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    kernels::axpy(a(i), mode_grids_[i].data(), out.data(), out.size());
  return out;
}

}  // namespace sparsefield
