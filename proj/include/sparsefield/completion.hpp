#pragma once

#include <Eigen/Dense>

#include "sparsefield/separation.hpp"

namespace sparsefield {

// Moore-Penrose pseudo-inverse via SVD. Singular values below
// rcond * sigma_max are treated as zero; rcond < 0 selects the default
// max(rows, cols) * machine epsilon.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double rcond = -1.0);

// Recovery operator for full temporal coefficients from sparse ones:
// recovery = pinv(Phi_s^T * M * Phi_f).
struct CompletionOperator {
  Eigen::MatrixXd recovery;  // n_full x n_sparse
  SbfBasis basis_sparse;
  SbfBasis basis_full;
  Eigen::MatrixXd mapping;  // N_s x N_f binary selector
  // Condition number of the inner matrix; a placement-quality diagnostic.
  // Rank-deficient inner matrices report std::numeric_limits<double>::max().
  double condition = 0.0;
  double rcond = -1.0;
};

CompletionOperator build_completion(const SbfBasis& basis_sparse,
                                    const SbfBasis& basis_full,
                                    const Eigen::MatrixXd& mapping,
                                    double rcond = -1.0);

// a_full = recovery * a_sparse, column-wise.
TemporalCoefficients recover_full_coefficients(
    const CompletionOperator& op, const TemporalCoefficients& a_sparse);

// Virtual-sensor estimate of a full snapshot from a sparse one:
// Phi_f * recovery * Phi_s^T * t_sparse.
Eigen::VectorXd complete_snapshot(const CompletionOperator& op,
                                  const Eigen::VectorXd& t_sparse);

}  // namespace sparsefield
