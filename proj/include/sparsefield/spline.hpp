#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sparsefield/separation.hpp"

namespace sparsefield {

// Clamped quasi-uniform cubic knot vector: four zeros, uniformly spaced
// interior knots k/(n_points-3), four ones. Length n_points + 4.
struct KnotVector {
  std::vector<double> knots;
  int n_points = 0;

  int size() const { return static_cast<int>(knots.size()); }
  double operator[](int i) const { return knots[i]; }
};

KnotVector knot_vector(int n_points);

// Cox-de Boor recursion, 0-based basis index j in [0, n_points). 0/0 terms
// are zero; at u = 1 the last non-empty interval is closed so the basis
// still sums to one at the right endpoint.
double bspline_basis(int j, int degree, double u, const KnotVector& kv);

// All n_points cubic basis values at u.
Eigen::VectorXd cubic_basis_row(double u, const KnotVector& kv);

// x(u) = sum_j V_{j,3}(u) * coords[j]; strictly increasing for strictly
// increasing coords.
double spline_coordinate(double u, const std::vector<double>& coords,
                         const KnotVector& kv);

// Invert x(u) = x by bisection. Throws DomainError outside the coordinate
// hull. The bisection runs to machine-level parameter resolution, well
// inside the 1e-10 relative residual contract.
double invert_parameter(double x, const std::vector<double>& coords,
                        const KnotVector& kv);

// Tensor-product clamped cubic surface over physical coordinates. Control
// values are the reshaped discrete SBF; the surface approximates (not
// interpolates) interior control values and interpolates the four corners.
struct SplineSurface {
  Eigen::MatrixXd control;  // nx x ny
  KnotVector knots_u, knots_w;
  std::vector<double> x_coords, y_coords;

  double value_param(double u, double w) const;
  // Inverts both physical coordinates, then evaluates. No extrapolation.
  double value_at(double x, double y) const;
};

struct SplineSurfaceSet {
  std::vector<SplineSurface> surfaces;

  int order() const { return static_cast<int>(surfaces.size()); }
};

// One continuous surface per retained mode, control net = reshaped mode.
SplineSurfaceSet build_continuous_sbfs(const SbfBasis& basis_full,
                                       const Grid2D& grid);

// Least-squares control values for samples F(us_i, ws_j) on a fine parameter
// grid; the residual is orthogonal to every tensor basis function (the
// numerical form of the least-squares approximation property).
Eigen::MatrixXd least_squares_projection(const Eigen::MatrixXd& samples,
                                         const std::vector<double>& us,
                                         const std::vector<double>& ws,
                                         const KnotVector& ku,
                                         const KnotVector& kw);

// Basis-value matrix: rows = parameters, cols = basis functions.
Eigen::MatrixXd basis_matrix(const std::vector<double>& params,
                             const KnotVector& kv);

// Precomputes per-mode value grids on a fixed evaluation grid (each physical
// coordinate is inverted once per axis), then renders fields as weighted
// mode sums.
class SurfaceSetRenderer {
 public:
  SurfaceSetRenderer(const SplineSurfaceSet& set, std::vector<double> xs,
                     std::vector<double> ys);

  // sum_i a(i) * mode_grid(i)
  Eigen::MatrixXd render(const Eigen::VectorXd& a) const;
  const Eigen::MatrixXd& mode_grid(int i) const { return mode_grids_[i]; }
  int order() const { return static_cast<int>(mode_grids_.size()); }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  std::vector<Eigen::MatrixXd> mode_grids_;
  std::vector<double> xs_, ys_;
};

}  // namespace sparsefield
