#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sparsefield/errors.hpp"

namespace sparsefield {

struct TrainConfig {
  int epochs = 500;
  double learning_rate = 1e-3;
  int bptt_window = 50;  // truncated-BPTT window length
  int batch_size = 1;    // windows per Adam step
  std::uint64_t seed = 1;
  double validation_fraction = 0.2;
  int patience = 50;      // early-stop patience, in epochs
  int hidden_dim = 32;
  // true: feature vector is [a(t-1), u(t)]; false uses u(t-1) instead.
  bool current_input = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // generalization controls: L2 penalty on the weights and Gaussian jitter
  // (in scaled units) added to the training inputs each pass
  double weight_decay = 0.0;
  double input_jitter = 0.0;

  void validate() const;
};

// Per-dimension standardization. Dimensions with (near) zero spread keep a
// unit scale so apply/invert stay exact inverses.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  static Scaler fit(const Eigen::MatrixXd& columns);
  static Scaler identity(int dim);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& m) const;
};

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;

  static LstmState zero(int hidden_dim);
};

// Single-layer LSTM with a linear read-out. Parameters are packed into one
// vector; the gate blocks stack as [forget; input; output; candidate].
struct LstmModel {
  int in_dim = 0;
  int hidden = 0;
  int out_dim = 0;
  Eigen::VectorXd theta;
  Scaler input_scaler;
  Scaler target_scaler;
  TrainConfig config;

  static int parameter_count(int in_dim, int hidden, int out_dim);

  Eigen::Map<const Eigen::MatrixXd> w_input() const;      // 4H x in
  Eigen::Map<const Eigen::MatrixXd> w_recurrent() const;  // 4H x H
  Eigen::Map<const Eigen::VectorXd> gate_bias() const;    // 4H
  Eigen::Map<const Eigen::MatrixXd> w_readout() const;    // out x H
  Eigen::Map<const Eigen::VectorXd> readout_bias() const; // out
};

struct LstmStepResult {
  LstmState state;
  Eigen::VectorXd output;  // de-scaled prediction
};

// One gated update on a raw (unscaled) feature vector; the prediction is
// returned in original units.
LstmStepResult lstm_step(const LstmModel& model, const Eigen::VectorXd& d,
                         const LstmState& state);

// One contiguous series of feature columns and target columns.
struct TrainingSeries {
  Eigen::MatrixXd inputs;   // in_dim x T
  Eigen::MatrixXd targets;  // out_dim x T
};

struct TrainReport {
  double final_train_loss = 0.0;
  double final_val_loss = 0.0;
  int epochs_run = 0;
};

// Truncated BPTT + Adam on the mean squared one-step error (in scaled
// units). Deterministic for a fixed config.
LstmModel train_lstm(const std::vector<TrainingSeries>& series,
                     const TrainConfig& cfg, TrainReport* report = nullptr);

struct PredictResult {
  Eigen::VectorXd a_hat;
  LstmState state;
};

// Online one-step prediction: d = [a_prev, u_now] (or u at the configured
// lag), carried recurrent state.
PredictResult predict_step(const LstmModel& model,
                           const Eigen::VectorXd& a_prev,
                           const Eigen::VectorXd& u_now,
                           const LstmState& state);

// Central finite differences (step 1e-5) against the analytic BPTT
// gradients over every parameter; returns the max relative error.
// corrupt_flat_index >= 0 negates that analytic gradient entry first
// (negative-control hook for the self-test).
double gradient_check(const LstmModel& model, const TrainingSeries& series,
                      int corrupt_flat_index = -1);

// Linear one-step baseline: ordinary least squares from lagged outputs and
// inputs (plus intercept) to the next output.
struct ArBaseline {
  int out_dim = 0;
  int in_dim = 0;  // exogenous input dimension
  int lag_output = 1;
  int lag_input = 1;
  bool current_input = true;
  Eigen::MatrixXd coef;  // out x (out*lag_output + in*lag_input + 1)

  // lagged_outputs columns: [a(t-1), ..., a(t-lag_output)]; lagged_inputs
  // columns likewise, most recent first.
  Eigen::VectorXd predict(const Eigen::MatrixXd& lagged_outputs,
                          const Eigen::MatrixXd& lagged_inputs) const;
};

ArBaseline fit_ar_baseline(const std::vector<TrainingSeries>& series,
                           int lag_output, int lag_input,
                           bool current_input = true);

}  // namespace sparsefield
