#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "sparsefield/completion.hpp"
#include "sparsefield/spline.hpp"
#include "sparsefield/temporal.hpp"

namespace sparsefield {

// Everything the online stage needs: sparse layout, both bases, the
// coefficient-completion operator, the continuous surfaces and the temporal
// model.
struct SpatioTemporalModel {
  SensorLayout layout;  // sparse layout over the full grid
  SbfBasis basis_sparse;
  SbfBasis basis_full;
  CompletionOperator completion;
  SplineSurfaceSet surfaces;
  LstmModel temporal;
  int order = 0;  // = basis_full.order

  void validate() const;
};

struct FitReport {
  int n_sparse = 0;
  int n_full = 0;
  double condition = 0.0;
  double final_train_loss = 0.0;
  double final_val_loss = 0.0;
  int epochs_run = 0;
  Eigen::VectorXd energies_sparse;
  Eigen::VectorXd energies_full;
};

// Offline stage: sample the sparse rows, separate both matrices, build the
// completion operator and the continuous surfaces, recover full coefficients
// for every training snapshot through the completion path (the same route
// the online stage uses), and train the temporal model on them.
// `temporal_override` skips the training and reuses an existing temporal
// model (fast approximate sweeps).
SpatioTemporalModel fit_offline(const SnapshotMatrix& full_snapshots,
                                const SensorLayout& layout,
                                const Eigen::MatrixXd& inputs,
                                double energy_threshold,
                                const TrainConfig& train_cfg,
                                FitReport* report = nullptr,
                                const LstmModel* temporal_override = nullptr);

// Continuous field for a fixed coefficient vector: (x,y) -> sum psi_i * a_i.
struct FieldFunction {
  std::shared_ptr<const SplineSurfaceSet> surfaces;
  Eigen::VectorXd coefficients;

  double operator()(double x, double y) const;
};

FieldFunction synthesize(std::shared_ptr<const SplineSurfaceSet> surfaces,
                         Eigen::VectorXd coefficients);

struct PredictState {
  LstmState lstm;
};

struct FieldPrediction {
  FieldFunction field;
  Eigen::VectorXd a_hat;
};

// One online step: t_sparse is the latest sparse measurement, u_now the
// current system input. Projects, completes, advances the temporal model and
// returns the continuous field for the next instant.
FieldPrediction predict_field(const SpatioTemporalModel& model,
                              const Eigen::VectorXd& t_sparse,
                              const Eigen::VectorXd& u_now,
                              PredictState& state);

// ---- error metrics ----

// Elementwise |predicted - truth|.
Eigen::MatrixXd stae(const Eigen::MatrixXd& predicted,
                     const Eigen::MatrixXd& truth);

// Area-weighted mean of a STAE grid; the overload without areas assumes
// uniform cells.
double snae(const Eigen::MatrixXd& stae_grid);
double snae(const Eigen::MatrixXd& stae_grid, const Eigen::MatrixXd& areas);

// Space-time RMSE over a set of STAE grids. Snapshots are equispaced, so the
// time-step factor of the continuous formula cancels and the discretization
// is sqrt(mean over snapshots and cells of STAE^2).
double rmse(const std::vector<Eigen::MatrixXd>& stae_grids);
double rmse(const std::vector<Eigen::MatrixXd>& stae_grids,
            const Eigen::MatrixXd& areas);

// ---- streaming evaluation ----

struct TruthProvider {
  const std::vector<Eigen::MatrixXd>* frames = nullptr;  // one per snapshot
  const std::vector<double>* x_coords = nullptr;
  const std::vector<double>* y_coords = nullptr;
};

struct EvaluationOptions {
  // Midpoint-rule evaluation grid over the sensor hull (the spline domain).
  int eval_nx = 48;
  int eval_ny = 64;
  bool teacher_forced = true;  // false: free-running rollout
  // Debug path: feed the projection of the measured full snapshot as the
  // predicted coefficients; the remaining error is the spatial part alone.
  bool inject_truth_coefficients = false;
  // 1-based snapshot indices whose prediction/STAE grids should be kept.
  std::vector<int> keep_frames;
};

struct EvaluationResult {
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  std::vector<int> snapshot_index;  // 1-based, first predicted snapshot is 2
  std::vector<double> snapshot_time;
  std::vector<double> snae_series;
  std::vector<int> kept_index;
  std::vector<Eigen::MatrixXd> kept_prediction;
  std::vector<Eigen::MatrixXd> kept_stae;
  std::vector<double> eval_x, eval_y;
  double truth_min = 0.0, truth_max = 0.0;  // over the evaluation grid
};

// Teacher-forced (or rollout) one-step streaming over the whole dataset.
// Snapshots 1..train_count are scored as training, the rest as testing.
EvaluationResult evaluate_stream(const SpatioTemporalModel& model,
                                 const SnapshotMatrix& full_snapshots,
                                 const Eigen::MatrixXd& inputs,
                                 const TruthProvider& truth, int train_count,
                                 const EvaluationOptions& options);

}  // namespace sparsefield
