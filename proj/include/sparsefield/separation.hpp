#pragma once

#include <Eigen/Dense>

#include "sparsefield/field.hpp"

namespace sparsefield {

// Orthonormal spatial basis from space-time separation. `energies` keeps the
// full spectrum of squared singular values (length min(N,L), descending);
// `modes` keeps only the first `order` columns.
struct SbfBasis {
  Eigen::MatrixXd modes;
  Eigen::VectorXd energies;
  int order = 0;
};

struct TemporalCoefficients {
  Eigen::MatrixXd a;  // order x snapshots
  double dt = 1.0;
  double t0 = 0.0;
};

struct Separation {
  SbfBasis basis;
  TemporalCoefficients coeffs;
};

// Smallest n whose cumulative energy fraction reaches the threshold.
int select_order(const Eigen::VectorXd& energies, double threshold);

// Thin SVD of the raw snapshot matrix (no mean-centering): modes from U,
// coefficients = S_n * V_n^T. Each mode column is flipped so its
// largest-magnitude entry is positive; the matching coefficient row is
// flipped too, keeping modes * a invariant.
Separation separate(const SnapshotMatrix& snapshots, double energy_threshold);

SnapshotMatrix reconstruct(const SbfBasis& basis,
                           const TemporalCoefficients& coeffs);

// a = modes^T * data (valid because the columns are orthonormal).
TemporalCoefficients project_coefficients(const SbfBasis& basis,
                                          const SnapshotMatrix& snapshots);

}  // namespace sparsefield
