#include "sparsefield/separation.hpp"

#include <cmath>
#include <string>

namespace sparsefield {

int select_order(const Eigen::VectorXd& energies, double threshold) {
  if (energies.size() == 0) throw ConfigError("empty energy spectrum");
  if (!(threshold > 0.0) || threshold > 1.0)
    throw ConfigError("energy threshold must lie in (0, 1]");
  double total = 0.0;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    const double e = energies(i);
    if (!std::isfinite(e) || e < 0.0)
      throw ConfigError("energies must be finite and non-negative");
    if (i > 0 && e > energies(i - 1))
      throw ConfigError("energies must be non-increasing");
    total += e;
  }
  if (total <= 0.0)
    throw NumericalError("degenerate data: all energies are zero");
  double cum = 0.0;
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    cum += energies(i);
    if (cum / total >= threshold) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(energies.size());
}

Separation separate(const SnapshotMatrix& snapshots, double energy_threshold) {
  const Eigen::MatrixXd& data = snapshots.data;
  if (data.cols() < 2)
    throw ConfigError("insufficient data: need at least 2 snapshots, got " +
                      std::to_string(data.cols()));
  if (!data.allFinite())
    throw ConfigError("snapshot matrix contains non-finite entries");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(data,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("SVD failed to converge");

  const Eigen::VectorXd sigma = svd.singularValues();
  Eigen::VectorXd energies = sigma.array().square();
  const int order = select_order(energies, energy_threshold);

  Eigen::MatrixXd modes = svd.matrixU().leftCols(order);
  Eigen::MatrixXd a = sigma.head(order).asDiagonal() *
                      svd.matrixV().leftCols(order).transpose();

  // deterministic sign: largest-|entry| of each mode positive
  for (int k = 0; k < order; ++k) {
    Eigen::Index imax = 0;
    modes.col(k).cwiseAbs().maxCoeff(&imax);
    if (modes(imax, k) < 0.0) {
      modes.col(k) = -modes.col(k);
      a.row(k) = -a.row(k);
    }
  }

  Separation result;
  result.basis.modes = std::move(modes);
  result.basis.energies = std::move(energies);
  result.basis.order = order;
  result.coeffs.a = std::move(a);
  result.coeffs.dt = snapshots.dt;
  result.coeffs.t0 = snapshots.t0;
  return result;
}

SnapshotMatrix reconstruct(const SbfBasis& basis,
                           const TemporalCoefficients& coeffs) {
  if (basis.order != coeffs.a.rows())
    throw DimensionError("basis order " + std::to_string(basis.order) +
                         " does not match coefficient rows " +
                         std::to_string(coeffs.a.rows()));
  SnapshotMatrix out;
  out.data = basis.modes * coeffs.a;
  out.dt = coeffs.dt;
  out.t0 = coeffs.t0;
  return out;
}

TemporalCoefficients project_coefficients(const SbfBasis& basis,
                                          const SnapshotMatrix& snapshots) {
  if (basis.modes.rows() != snapshots.data.rows())
    throw DimensionError("basis has " + std::to_string(basis.modes.rows()) +
                         " rows, snapshots have " +
                         std::to_string(snapshots.data.rows()));
  TemporalCoefficients out;
  out.a = basis.modes.transpose() * snapshots.data;
  out.dt = snapshots.dt;
  out.t0 = snapshots.t0;
  return out;
}

}  // namespace sparsefield
