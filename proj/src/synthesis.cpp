#include "sparsefield/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sparsefield/kernels.hpp"

namespace sparsefield {

void SpatioTemporalModel::validate() const {
  layout.validate();
  if (surfaces.order() != order || basis_full.order != order)
    throw DimensionError("surface count does not match model order");
  if (completion.recovery.rows() != basis_full.order ||
      completion.recovery.cols() != basis_sparse.order)
    throw DimensionError("completion operator does not match the bases");
  if (temporal.out_dim != order)
    throw DimensionError("temporal model output does not match model order");
}

SpatioTemporalModel fit_offline(const SnapshotMatrix& full_snapshots,
                                const SensorLayout& layout,
                                const Eigen::MatrixXd& inputs,
                                double energy_threshold,
                                const TrainConfig& train_cfg,
                                FitReport* report,
                                const LstmModel* temporal_override) {
  layout.validate();
  if (full_snapshots.sensors() != layout.n_full)
    throw DimensionError("snapshot rows do not match the layout");
  if (inputs.cols() != full_snapshots.snapshots())
    throw DimensionError("input columns (" + std::to_string(inputs.cols()) +
                         ") not aligned with snapshots (" +
                         std::to_string(full_snapshots.snapshots()) + ")");

  const SnapshotMatrix sparse_snapshots = sample_sensors(full_snapshots, layout);

  Separation sep_sparse = separate(sparse_snapshots, energy_threshold);
  Separation sep_full = separate(full_snapshots, energy_threshold);

  const Eigen::MatrixXd mapping = build_mapping_matrix(layout);
  CompletionOperator completion =
      build_completion(sep_sparse.basis, sep_full.basis, mapping);

  SplineSurfaceSet surfaces =
      build_continuous_sbfs(sep_full.basis, layout.grid);

  // Recover the full coefficients through the same path the online stage
  // uses, then learn their one-step dynamics.
  TemporalCoefficients a_full =
      recover_full_coefficients(completion, sep_sparse.coeffs);

  const int l1 = full_snapshots.snapshots();
  TrainingSeries series;
  series.inputs.resize(sep_full.basis.order + inputs.rows(), l1 - 1);
  series.targets.resize(sep_full.basis.order, l1 - 1);
  for (int t = 1; t < l1; ++t) {
    series.inputs.col(t - 1) << a_full.a.col(t - 1),
        inputs.col(train_cfg.current_input ? t : t - 1);
    series.targets.col(t - 1) = a_full.a.col(t);
  }

  SpatioTemporalModel model;
  model.layout = layout;
  model.basis_sparse = std::move(sep_sparse.basis);
  model.basis_full = sep_full.basis;
  model.completion = std::move(completion);
  model.surfaces = std::move(surfaces);
  model.order = sep_full.basis.order;

  TrainReport train_report;
  if (temporal_override) {
    if (temporal_override->out_dim != model.order ||
        temporal_override->in_dim != model.order + inputs.rows())
      throw DimensionError("temporal override does not match model order");
    model.temporal = *temporal_override;
  } else {
    model.temporal = train_lstm({series}, train_cfg, &train_report);
  }

  if (report) {
    report->n_sparse = model.basis_sparse.order;
    report->n_full = model.order;
    report->condition = model.completion.condition;
    report->final_train_loss = train_report.final_train_loss;
    report->final_val_loss = train_report.final_val_loss;
    report->epochs_run = train_report.epochs_run;
    report->energies_sparse = model.basis_sparse.energies;
    report->energies_full = model.basis_full.energies;
  }
  model.validate();
  return model;
}

double FieldFunction::operator()(double x, double y) const {
  double value = 0.0;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i)
    value += coefficients(i) * surfaces->surfaces[i].value_at(x, y);
  return value;
}

FieldFunction synthesize(std::shared_ptr<const SplineSurfaceSet> surfaces,
                         Eigen::VectorXd coefficients) {
  if (!surfaces) throw ConfigError("null surface set");
  if (surfaces->order() != coefficients.size())
    throw DimensionError("coefficient count does not match surface count");
  FieldFunction f;
  f.surfaces = std::move(surfaces);
  f.coefficients = std::move(coefficients);
  return f;
}

FieldPrediction predict_field(const SpatioTemporalModel& model,
                              const Eigen::VectorXd& t_sparse,
                              const Eigen::VectorXd& u_now,
                              PredictState& state) {
  if (t_sparse.size() != model.basis_sparse.modes.rows())
    throw DimensionError("sparse measurement length does not match layout");
  const Eigen::VectorXd a_sparse =
      model.basis_sparse.modes.transpose() * t_sparse;
  const Eigen::VectorXd a_full = model.completion.recovery * a_sparse;
  PredictResult step = predict_step(model.temporal, a_full, u_now, state.lstm);
  state.lstm = std::move(step.state);

  FieldPrediction out;
  out.a_hat = step.a_hat;
  out.field = synthesize(
      std::make_shared<SplineSurfaceSet>(model.surfaces), step.a_hat);
  return out;
}

Eigen::MatrixXd stae(const Eigen::MatrixXd& predicted,
                     const Eigen::MatrixXd& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
    throw DimensionError("STAE grids have different shapes");
  return (predicted - truth).cwiseAbs();
}

double snae(const Eigen::MatrixXd& stae_grid) {
  if (stae_grid.size() == 0) throw DimensionError("empty STAE grid");
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(stae_grid.rows(),
                                                     stae_grid.cols());
  return kernels::sum_abs_diff(stae_grid.data(), zero.data(),
                               stae_grid.size()) /
         static_cast<double>(stae_grid.size());
}

double snae(const Eigen::MatrixXd& stae_grid, const Eigen::MatrixXd& areas) {
  if (stae_grid.rows() != areas.rows() || stae_grid.cols() != areas.cols())
    throw DimensionError("cell-area grid does not match the STAE grid");
  if (stae_grid.size() == 0) throw DimensionError("empty STAE grid");
  const double total = kernels::sum(areas.data(), areas.size());
  if (!(total > 0.0)) throw ConfigError("total cell area must be positive");
  return kernels::dot(stae_grid.data(), areas.data(), stae_grid.size()) /
         total;
}

double rmse(const std::vector<Eigen::MatrixXd>& stae_grids) {
  if (stae_grids.empty()) throw DimensionError("empty snapshot set");
  double acc = 0.0;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(stae_grids[0].rows(),
                                                     stae_grids[0].cols());
  for (const Eigen::MatrixXd& g : stae_grids) {
    if (g.rows() != zero.rows() || g.cols() != zero.cols())
      throw DimensionError("STAE grids have inconsistent shapes");
    acc += kernels::sum_sq_diff(g.data(), zero.data(), g.size()) /
           static_cast<double>(g.size());
  }
  return std::sqrt(acc / static_cast<double>(stae_grids.size()));
}

double rmse(const std::vector<Eigen::MatrixXd>& stae_grids,
            const Eigen::MatrixXd& areas) {
  if (stae_grids.empty()) throw DimensionError("empty snapshot set");
  const double total = kernels::sum(areas.data(), areas.size());
  if (!(total > 0.0)) throw ConfigError("total cell area must be positive");
  double acc = 0.0;
  for (const Eigen::MatrixXd& g : stae_grids) {
    if (g.rows() != areas.rows() || g.cols() != areas.cols())
      throw DimensionError("STAE grid does not match the cell areas");
    const Eigen::MatrixXd sq = g.cwiseProduct(g);
    acc += kernels::dot(sq.data(), areas.data(), sq.size()) / total;
  }
  return std::sqrt(acc / static_cast<double>(stae_grids.size()));
}

namespace {

std::vector<double> midpoints(double lo, double hi, int n) {
  std::vector<double> pts(n);
  const double h = (hi - lo) / n;
  for (int i = 0; i < n; ++i) pts[i] = lo + (i + 0.5) * h;
  return pts;
}

// Precomputed bilinear interpolation from the truth grid onto the
// evaluation grid.
struct GridInterp {
  std::vector<int> ix, iy;
  std::vector<double> fx, fy;

  GridInterp(const std::vector<double>& coords_x,
             const std::vector<double>& coords_y,
             const std::vector<double>& xs, const std::vector<double>& ys) {
    build(coords_x, xs, ix, fx);
    build(coords_y, ys, iy, fy);
  }

  static void build(const std::vector<double>& coords,
                    const std::vector<double>& qs, std::vector<int>& idx,
                    std::vector<double>& frac) {
    idx.resize(qs.size());
    frac.resize(qs.size());
    for (std::size_t k = 0; k < qs.size(); ++k) {
      const double q = qs[k];
      int i = 0;
      if (q <= coords.front())
        i = 0;
      else if (q >= coords.back())
        i = static_cast<int>(coords.size()) - 2;
      else {
        while (coords[i + 1] < q) ++i;
      }
      idx[k] = i;
      frac[k] = std::clamp((q - coords[i]) / (coords[i + 1] - coords[i]), 0.0,
                           1.0);
    }
  }

  void sample(const Eigen::MatrixXd& frame, Eigen::MatrixXd& out) const {
    for (std::size_t j = 0; j < iy.size(); ++j) {
      for (std::size_t i = 0; i < ix.size(); ++i) {
        const int a = ix[i], b = iy[j];
        const double tx = fx[i], ty = fy[j];
        out(i, j) = (1 - tx) * ((1 - ty) * frame(a, b) +
                                ty * frame(a, b + 1)) +
                    tx * ((1 - ty) * frame(a + 1, b) +
                          ty * frame(a + 1, b + 1));
      }
    }
  }
};

}  // namespace

EvaluationResult evaluate_stream(const SpatioTemporalModel& model,
                                 const SnapshotMatrix& full_snapshots,
                                 const Eigen::MatrixXd& inputs,
                                 const TruthProvider& truth, int train_count,
                                 const EvaluationOptions& options) {
  model.validate();
  if (!truth.frames || !truth.x_coords || !truth.y_coords)
    throw ConfigError("truth frames are required for evaluation");
  const int l_total = full_snapshots.snapshots();
  if (static_cast<int>(truth.frames->size()) != l_total)
    throw DimensionError("truth frame count does not match snapshots");
  if (inputs.cols() != l_total)
    throw DimensionError("input columns do not match snapshots");
  if (train_count < 1 || train_count >= l_total)
    throw ConfigError("training split must leave at least one snapshot on "
                      "each side");
  if (options.eval_nx < 2 || options.eval_ny < 2)
    throw ConfigError("evaluation grid too small");

  const SnapshotMatrix sparse = sample_sensors(full_snapshots, model.layout);
  const Grid2D& grid = model.layout.grid;

  EvaluationResult result;
  result.eval_x = midpoints(grid.x_coords.front(), grid.x_coords.back(),
                            options.eval_nx);
  result.eval_y = midpoints(grid.y_coords.front(), grid.y_coords.back(),
                            options.eval_ny);

  const SurfaceSetRenderer renderer(model.surfaces, result.eval_x,
                                    result.eval_y);
  const GridInterp interp(*truth.x_coords, *truth.y_coords, result.eval_x,
                          result.eval_y);

  Eigen::MatrixXd truth_grid(options.eval_nx, options.eval_ny);
  PredictState state{LstmState::zero(model.temporal.hidden)};
  Eigen::VectorXd a_prev_hat;  // rollout carries its own coefficients

  double train_acc = 0.0, test_acc = 0.0;
  long train_n = 0, test_n = 0;
  result.truth_min = std::numeric_limits<double>::infinity();
  result.truth_max = -std::numeric_limits<double>::infinity();

  // first prediction targets snapshot 2 (needs one prior measurement)
  for (int t = 1; t < l_total; ++t) {
    Eigen::VectorXd a_hat;
    if (options.inject_truth_coefficients) {
      a_hat = model.basis_full.modes.transpose() * full_snapshots.data.col(t);
    } else if (options.teacher_forced || t == 1) {
      const Eigen::VectorXd a_sparse =
          model.basis_sparse.modes.transpose() * sparse.data.col(t - 1);
      const Eigen::VectorXd a_full = model.completion.recovery * a_sparse;
      PredictResult step =
          predict_step(model.temporal, a_full, inputs.col(t), state.lstm);
      state.lstm = std::move(step.state);
      a_hat = std::move(step.a_hat);
    } else {
      PredictResult step =
          predict_step(model.temporal, a_prev_hat, inputs.col(t), state.lstm);
      state.lstm = std::move(step.state);
      a_hat = std::move(step.a_hat);
    }
    a_prev_hat = a_hat;

    const Eigen::MatrixXd predicted = renderer.render(a_hat);
    interp.sample((*truth.frames)[t], truth_grid);
    result.truth_min = std::min(result.truth_min, truth_grid.minCoeff());
    result.truth_max = std::max(result.truth_max, truth_grid.maxCoeff());

    const double cells = static_cast<double>(predicted.size());
    const double abs_sum = kernels::sum_abs_diff(
        predicted.data(), truth_grid.data(), predicted.size());
    const double sq_sum = kernels::sum_sq_diff(
        predicted.data(), truth_grid.data(), predicted.size());

    const int snapshot_1based = t + 1;
    result.snapshot_index.push_back(snapshot_1based);
    result.snapshot_time.push_back(full_snapshots.time_at(t));
    result.snae_series.push_back(abs_sum / cells);
    if (snapshot_1based <= train_count) {
      train_acc += sq_sum / cells;
      ++train_n;
    } else {
      test_acc += sq_sum / cells;
      ++test_n;
    }
    for (int keep : options.keep_frames) {
      if (keep == snapshot_1based) {
        result.kept_index.push_back(snapshot_1based);
        result.kept_prediction.push_back(predicted);
        result.kept_stae.push_back(stae(predicted, truth_grid));
      }
    }
  }

  result.train_rmse = train_n > 0 ? std::sqrt(train_acc / train_n) : 0.0;
  result.test_rmse = test_n > 0 ? std::sqrt(test_acc / test_n) : 0.0;
  return result;
}

}  // namespace sparsefield
