#include "sparsefield/completion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sparsefield {

Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double rcond) {
  if (m.size() == 0) throw DimensionError("pseudo-inverse of an empty matrix");
  if (!m.allFinite())
    throw ConfigError("pseudo-inverse input contains non-finite entries");
  if (rcond < 0.0) {
    rcond = static_cast<double>(std::max(m.rows(), m.cols())) *
            std::numeric_limits<double>::epsilon();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? rcond * sigma(0) : 0.0;
  Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff && sigma(i) > 0.0) inv_sigma(i) = 1.0 / sigma(i);
  return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
}

CompletionOperator build_completion(const SbfBasis& basis_sparse,
                                    const SbfBasis& basis_full,
                                    const Eigen::MatrixXd& mapping,
                                    double rcond) {
  if (mapping.rows() != basis_sparse.modes.rows())
    throw DimensionError("mapping has " + std::to_string(mapping.rows()) +
                         " rows, sparse basis has " +
                         std::to_string(basis_sparse.modes.rows()));
  if (mapping.cols() != basis_full.modes.rows())
    throw DimensionError("mapping has " + std::to_string(mapping.cols()) +
                         " columns, full basis has " +
                         std::to_string(basis_full.modes.rows()) + " rows");

  const Eigen::MatrixXd inner =
      basis_sparse.modes.transpose() * mapping * basis_full.modes;

  CompletionOperator op;
  op.recovery = pinv(inner, rcond);
  op.basis_sparse = basis_sparse;
  op.basis_full = basis_full;
  op.mapping = mapping;
  op.rcond = rcond;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(inner);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const Eigen::Index rank_dim = std::min(inner.rows(), inner.cols());
  const double smin = sigma(rank_dim - 1);
  op.condition = smin > 0.0 ? sigma(0) / smin
                            : std::numeric_limits<double>::max();
  return op;
}

TemporalCoefficients recover_full_coefficients(
    const CompletionOperator& op, const TemporalCoefficients& a_sparse) {
  if (a_sparse.a.rows() != op.recovery.cols())
    throw DimensionError("sparse coefficients have " +
                         std::to_string(a_sparse.a.rows()) +
                         " rows, recovery expects " +
                         std::to_string(op.recovery.cols()));
  TemporalCoefficients out;
  out.a = op.recovery * a_sparse.a;
  out.dt = a_sparse.dt;
  out.t0 = a_sparse.t0;
  return out;
}

Eigen::VectorXd complete_snapshot(const CompletionOperator& op,
                                  const Eigen::VectorXd& t_sparse) {
  if (t_sparse.size() != op.basis_sparse.modes.rows())
    throw DimensionError("sparse snapshot length " +
                         std::to_string(t_sparse.size()) +
                         " does not match sparse basis rows " +
                         std::to_string(op.basis_sparse.modes.rows()));
  return op.basis_full.modes *
         (op.recovery * (op.basis_sparse.modes.transpose() * t_sparse));
}

}  // namespace sparsefield
