#include "sparsefield/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace sparsefield {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Packed parameter layout. Gate blocks stack rows as
// [forget; input; output; candidate].
struct Layout {
  int in, hidden, out;
  int wx_off, wh_off, b_off, wy_off, by_off, total;

  Layout(int in_dim, int hidden_dim, int out_dim)
      : in(in_dim), hidden(hidden_dim), out(out_dim) {
    const int gates = 4 * hidden;
    wx_off = 0;
    wh_off = wx_off + gates * in;
    b_off = wh_off + gates * hidden;
    wy_off = b_off + gates;
    by_off = wy_off + out * hidden;
    total = by_off + out;
  }

  Eigen::Map<const Eigen::MatrixXd> wx(const Eigen::VectorXd& t) const {
    return {t.data() + wx_off, 4 * hidden, in};
  }
  Eigen::Map<const Eigen::MatrixXd> wh(const Eigen::VectorXd& t) const {
    return {t.data() + wh_off, 4 * hidden, hidden};
  }
  Eigen::Map<const Eigen::VectorXd> b(const Eigen::VectorXd& t) const {
    return {t.data() + b_off, 4 * hidden};
  }
  Eigen::Map<const Eigen::MatrixXd> wy(const Eigen::VectorXd& t) const {
    return {t.data() + wy_off, out, hidden};
  }
  Eigen::Map<const Eigen::VectorXd> by(const Eigen::VectorXd& t) const {
    return {t.data() + by_off, out};
  }

  Eigen::Map<Eigen::MatrixXd> wx(Eigen::VectorXd& t) const {
    return {t.data() + wx_off, 4 * hidden, in};
  }
  Eigen::Map<Eigen::MatrixXd> wh(Eigen::VectorXd& t) const {
    return {t.data() + wh_off, 4 * hidden, hidden};
  }
  Eigen::Map<Eigen::VectorXd> b(Eigen::VectorXd& t) const {
    return {t.data() + b_off, 4 * hidden};
  }
  Eigen::Map<Eigen::MatrixXd> wy(Eigen::VectorXd& t) const {
    return {t.data() + wy_off, out, hidden};
  }
  Eigen::Map<Eigen::VectorXd> by(Eigen::VectorXd& t) const {
    return {t.data() + by_off, out};
  }
};

// Per-window activation storage, reused across windows.
struct Workspace {
  Eigen::MatrixXd f, i, o, g, c, tc, h;  // hidden x T
  Eigen::MatrixXd err;                   // out x T

  void resize(int hidden, int out, int t) {
    f.resize(hidden, t);
    i.resize(hidden, t);
    o.resize(hidden, t);
    g.resize(hidden, t);
    c.resize(hidden, t);
    tc.resize(hidden, t);
    h.resize(hidden, t);
    err.resize(out, t);
  }
};

// Forward pass over columns [t0, t1) of scaled inputs/targets, zero initial
// state. Returns the sum of squared errors.
double forward_window(const Layout& L, const Eigen::VectorXd& theta,
                      const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                      int t0, int t1, Workspace& ws) {
  const int steps = t1 - t0;
  ws.resize(L.hidden, L.out, steps);
  const auto wx = L.wx(theta);
  const auto wh = L.wh(theta);
  const auto b = L.b(theta);
  const auto wy = L.wy(theta);
  const auto by = L.by(theta);
  const int h = L.hidden;

  Eigen::VectorXd z(4 * h);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
  double sse = 0.0;
  for (int t = 0; t < steps; ++t) {
    z.noalias() = wx * x.col(t0 + t);
    z.noalias() += wh * h_prev;
    z += b;
    for (int k = 0; k < h; ++k) {
      ws.f(k, t) = sigmoid(z(k));
      ws.i(k, t) = sigmoid(z(h + k));
      ws.o(k, t) = sigmoid(z(2 * h + k));
      ws.g(k, t) = std::tanh(z(3 * h + k));
    }
    ws.c.col(t) = ws.f.col(t).cwiseProduct(c_prev) +
                  ws.i.col(t).cwiseProduct(ws.g.col(t));
    ws.tc.col(t) = ws.c.col(t).array().tanh();
    ws.h.col(t) = ws.o.col(t).cwiseProduct(ws.tc.col(t));
    ws.err.col(t).noalias() = wy * ws.h.col(t);
    ws.err.col(t) += by - y.col(t0 + t);
    sse += ws.err.col(t).squaredNorm();
    h_prev = ws.h.col(t);
    c_prev = ws.c.col(t);
  }
  return sse;
}

// Accumulates d(SSE)/d(theta) for one window into grad.
void backward_window(const Layout& L, const Eigen::VectorXd& theta,
                     const Eigen::MatrixXd& x, int t0, int t1,
                     const Workspace& ws, Eigen::VectorXd& grad) {
  const int steps = t1 - t0;
  const int h = L.hidden;
  const auto wh = L.wh(theta);
  const auto wy = L.wy(theta);
  auto g_wx = L.wx(grad);
  auto g_wh = L.wh(grad);
  auto g_b = L.b(grad);
  auto g_wy = L.wy(grad);
  auto g_by = L.by(grad);

  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dy(L.out), dh(h), dc(h), dz(4 * h);
  const Eigen::VectorXd zero_h = Eigen::VectorXd::Zero(h);

  for (int t = steps - 1; t >= 0; --t) {
    dy = 2.0 * ws.err.col(t);
    g_wy.noalias() += dy * ws.h.col(t).transpose();
    g_by += dy;
    dh.noalias() = wy.transpose() * dy;
    dh += dh_next;

    const auto f = ws.f.col(t);
    const auto i = ws.i.col(t);
    const auto o = ws.o.col(t);
    const auto g = ws.g.col(t);
    const auto tc = ws.tc.col(t);
    Eigen::Map<const Eigen::VectorXd> c_prev(
        t > 0 ? ws.c.col(t - 1).data() : zero_h.data(), h);
    Eigen::Map<const Eigen::VectorXd> h_prev(
        t > 0 ? ws.h.col(t - 1).data() : zero_h.data(), h);

    dc = dh.cwiseProduct(o).cwiseProduct(
             (1.0 - tc.array().square()).matrix()) +
         dc_next;
    dz.segment(0, h) = dc.cwiseProduct(c_prev)
                           .cwiseProduct(f)
                           .cwiseProduct((1.0 - f.array()).matrix());
    dz.segment(h, h) = dc.cwiseProduct(g).cwiseProduct(i).cwiseProduct(
        (1.0 - i.array()).matrix());
    dz.segment(2 * h, h) = dh.cwiseProduct(tc).cwiseProduct(o).cwiseProduct(
        (1.0 - o.array()).matrix());
    dz.segment(3 * h, h) =
        dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());

    g_wx.noalias() += dz * x.col(t0 + t).transpose();
    g_wh.noalias() += dz * h_prev.transpose();
    g_b += dz;
    dh_next.noalias() = wh.transpose() * dz;
    dc_next = dc.cwiseProduct(f);
  }
}

struct Window {
  int series;
  int t0;
  int t1;
  int steps() const { return t1 - t0; }
};

void check_series(const std::vector<TrainingSeries>& series) {
  if (series.empty()) throw ConfigError("no training series");
  const Eigen::Index in_dim = series.front().inputs.rows();
  const Eigen::Index out_dim = series.front().targets.rows();
  for (const TrainingSeries& s : series) {
    if (s.inputs.rows() != in_dim || s.targets.rows() != out_dim)
      throw DimensionError("training series have inconsistent dimensions");
    if (s.inputs.cols() != s.targets.cols())
      throw DimensionError("inputs and targets have different lengths");
    if (s.inputs.cols() < 2)
      throw ConfigError("each training series needs at least 2 steps");
    if (!s.inputs.allFinite() || !s.targets.allFinite())
      throw ConfigError("training series contain non-finite values");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1 || bptt_window < 1 || batch_size < 1 || hidden_dim < 1 ||
      patience < 1)
    throw ConfigError("training config counts must be positive");
  if (!(learning_rate > 0.0))
    throw ConfigError("learning rate must be positive");
  if (validation_fraction < 0.0 || validation_fraction > 0.5)
    throw ConfigError("validation fraction must lie in [0, 0.5]");
}

Scaler Scaler::fit(const Eigen::MatrixXd& columns) {
  if (columns.cols() < 1) throw ConfigError("scaler needs at least 1 sample");
  Scaler s;
  s.mean = columns.rowwise().mean();
  Eigen::VectorXd var =
      (columns.colwise() - s.mean).array().square().rowwise().sum() /
      static_cast<double>(columns.cols());
  s.stddev = var.array().sqrt();
  for (Eigen::Index i = 0; i < s.stddev.size(); ++i)
    if (s.stddev(i) < 1e-12) s.stddev(i) = 1.0;
  return s;
}

Scaler Scaler::identity(int dim) {
  Scaler s;
  s.mean = Eigen::VectorXd::Zero(dim);
  s.stddev = Eigen::VectorXd::Ones(dim);
  return s;
}

Eigen::VectorXd Scaler::apply(const Eigen::VectorXd& v) const {
  return (v - mean).cwiseQuotient(stddev);
}

Eigen::VectorXd Scaler::invert(const Eigen::VectorXd& v) const {
  return v.cwiseProduct(stddev) + mean;
}

Eigen::MatrixXd Scaler::apply_columns(const Eigen::MatrixXd& m) const {
  return (m.colwise() - mean).array().colwise() / stddev.array();
}

LstmState LstmState::zero(int hidden_dim) {
  LstmState s;
  s.h = Eigen::VectorXd::Zero(hidden_dim);
  s.c = Eigen::VectorXd::Zero(hidden_dim);
  return s;
}

int LstmModel::parameter_count(int in_dim, int hidden, int out_dim) {
  return Layout(in_dim, hidden, out_dim).total;
}

Eigen::Map<const Eigen::MatrixXd> LstmModel::w_input() const {
  return Layout(in_dim, hidden, out_dim).wx(theta);
}
Eigen::Map<const Eigen::MatrixXd> LstmModel::w_recurrent() const {
  return Layout(in_dim, hidden, out_dim).wh(theta);
}
Eigen::Map<const Eigen::VectorXd> LstmModel::gate_bias() const {
  return Layout(in_dim, hidden, out_dim).b(theta);
}
Eigen::Map<const Eigen::MatrixXd> LstmModel::w_readout() const {
  return Layout(in_dim, hidden, out_dim).wy(theta);
}
Eigen::Map<const Eigen::VectorXd> LstmModel::readout_bias() const {
  return Layout(in_dim, hidden, out_dim).by(theta);
}

LstmStepResult lstm_step(const LstmModel& model, const Eigen::VectorXd& d,
                         const LstmState& state) {
  if (d.size() != model.in_dim)
    throw DimensionError("feature vector length " + std::to_string(d.size()) +
                         " does not match model input dim " +
                         std::to_string(model.in_dim));
  if (state.h.size() != model.hidden || state.c.size() != model.hidden)
    throw DimensionError("recurrent state does not match hidden dim");
  if (!d.allFinite() || !state.h.allFinite() || !state.c.allFinite() ||
      !model.theta.allFinite())
    throw NumericalError("non-finite input or parameters in lstm_step");

  const Layout L(model.in_dim, model.hidden, model.out_dim);
  const Eigen::VectorXd x = model.input_scaler.apply(d);
  Eigen::VectorXd z = L.wx(model.theta) * x +
                      L.wh(model.theta) * state.h + L.b(model.theta);
  const int h = model.hidden;
  LstmStepResult out;
  out.state.c.resize(h);
  out.state.h.resize(h);
  for (int k = 0; k < h; ++k) {
    const double f = sigmoid(z(k));
    const double i = sigmoid(z(h + k));
    const double o = sigmoid(z(2 * h + k));
    const double g = std::tanh(z(3 * h + k));
    out.state.c(k) = f * state.c(k) + i * g;
    out.state.h(k) = o * std::tanh(out.state.c(k));
  }
  out.output = model.target_scaler.invert(L.wy(model.theta) * out.state.h +
                                          L.by(model.theta));
  return out;
}

LstmModel train_lstm(const std::vector<TrainingSeries>& series,
                     const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  check_series(series);
  const int in_dim = static_cast<int>(series.front().inputs.rows());
  const int out_dim = static_cast<int>(series.front().targets.rows());

  Eigen::Index total_cols = 0;
  for (const TrainingSeries& s : series) total_cols += s.inputs.cols();
  Eigen::MatrixXd all_in(in_dim, total_cols), all_tg(out_dim, total_cols);
  Eigen::Index at = 0;
  for (const TrainingSeries& s : series) {
    all_in.middleCols(at, s.inputs.cols()) = s.inputs;
    all_tg.middleCols(at, s.targets.cols()) = s.targets;
    at += s.inputs.cols();
  }
  const Scaler in_scaler = Scaler::fit(all_in);
  const Scaler tg_scaler = Scaler::fit(all_tg);

  std::vector<Eigen::MatrixXd> xs, ys;
  xs.reserve(series.size());
  ys.reserve(series.size());
  for (const TrainingSeries& s : series) {
    xs.push_back(in_scaler.apply_columns(s.inputs));
    ys.push_back(tg_scaler.apply_columns(s.targets));
  }

  std::vector<Window> train_wins, val_wins;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const int t_total = static_cast<int>(series[s].inputs.cols());
    std::vector<Window> wins;
    for (int t0 = 0; t0 < t_total; t0 += cfg.bptt_window)
      wins.push_back({static_cast<int>(s), t0,
                      std::min(t0 + cfg.bptt_window, t_total)});
    int n_val = static_cast<int>(
        std::ceil(cfg.validation_fraction * static_cast<double>(wins.size())));
    n_val = std::min(n_val, static_cast<int>(wins.size()) - 1);
    if (n_val < 0) n_val = 0;
    for (std::size_t w = 0; w < wins.size(); ++w) {
      if (static_cast<int>(w) + n_val >= static_cast<int>(wins.size()))
        val_wins.push_back(wins[w]);
      else
        train_wins.push_back(wins[w]);
    }
  }
  long train_steps = 0, val_steps = 0;
  for (const Window& w : train_wins) train_steps += w.steps();
  for (const Window& w : val_wins) val_steps += w.steps();

  const Layout L(in_dim, cfg.hidden_dim, out_dim);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(L.total);
  {
    std::mt19937_64 rng(cfg.seed);
    const double k = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
    std::uniform_real_distribution<double> unif(-k, k);
    auto wx = L.wx(theta);
    for (Eigen::Index c = 0; c < wx.cols(); ++c)
      for (Eigen::Index r = 0; r < wx.rows(); ++r) wx(r, c) = unif(rng);
    auto wh = L.wh(theta);
    for (Eigen::Index c = 0; c < wh.cols(); ++c)
      for (Eigen::Index r = 0; r < wh.rows(); ++r) wh(r, c) = unif(rng);
    auto wy = L.wy(theta);
    for (Eigen::Index c = 0; c < wy.cols(); ++c)
      for (Eigen::Index r = 0; r < wy.rows(); ++r) wy(r, c) = unif(rng);
    // forget-gate bias starts at 1 so early gradients pass through
    L.b(theta).segment(0, cfg.hidden_dim).setConstant(1.0);
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(L.total);
  Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(L.total);
  Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(L.total);
  long adam_t = 0;

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::mt19937_64 jitter_rng(cfg.seed ^ 0x7f4a7c159e3779b9ull);
  std::normal_distribution<double> jitter(0.0, 1.0);
  Workspace ws;
  Eigen::MatrixXd xbuf, ybuf;

  auto loss_over = [&](const std::vector<Window>& wins, long steps) {
    if (wins.empty() || steps == 0)
      return std::numeric_limits<double>::quiet_NaN();
    double sse = 0.0;
    for (const Window& w : wins)
      sse += forward_window(L, theta, xs[w.series], ys[w.series], w.t0, w.t1,
                            ws);
    return sse / (static_cast<double>(steps) * out_dim);
  };

  const bool has_val = !val_wins.empty() && cfg.validation_fraction > 0.0;
  Eigen::VectorXd best_theta = theta;
  double best_val = std::numeric_limits<double>::infinity();
  double train_loss = std::numeric_limits<double>::quiet_NaN();
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  int bad_epochs = 0;
  int epochs_run = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    epochs_run = epoch;
    std::shuffle(train_wins.begin(), train_wins.end(), shuffle_rng);
    double epoch_sse = 0.0;
    for (std::size_t begin = 0; begin < train_wins.size();
         begin += cfg.batch_size) {
      const std::size_t end =
          std::min(begin + cfg.batch_size, train_wins.size());
      grad.setZero();
      long batch_steps = 0;
      for (std::size_t wi = begin; wi < end; ++wi) {
        const Window& w = train_wins[wi];
        if (cfg.input_jitter > 0.0) {
          xbuf = xs[w.series].middleCols(w.t0, w.steps());
          ybuf = ys[w.series].middleCols(w.t0, w.steps());
          for (Eigen::Index c = 0; c < xbuf.cols(); ++c)
            for (Eigen::Index r = 0; r < xbuf.rows(); ++r)
              xbuf(r, c) += cfg.input_jitter * jitter(jitter_rng);
          epoch_sse += forward_window(L, theta, xbuf, ybuf, 0, w.steps(), ws);
          backward_window(L, theta, xbuf, 0, w.steps(), ws, grad);
        } else {
          epoch_sse += forward_window(L, theta, xs[w.series], ys[w.series],
                                      w.t0, w.t1, ws);
          backward_window(L, theta, xs[w.series], w.t0, w.t1, ws, grad);
        }
        batch_steps += w.steps();
      }
      grad /= static_cast<double>(batch_steps) * out_dim;
      if (cfg.weight_decay > 0.0) grad += cfg.weight_decay * theta;
      ++adam_t;
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, adam_t);
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, adam_t);
      adam_m = cfg.adam_beta1 * adam_m + (1.0 - cfg.adam_beta1) * grad;
      adam_v = cfg.adam_beta2 * adam_v +
               (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
      theta -= (cfg.learning_rate * (adam_m / bc1).array() /
                ((adam_v / bc2).array().sqrt() + cfg.adam_eps))
                   .matrix();
    }
    train_loss = epoch_sse / (static_cast<double>(train_steps) * out_dim);
    if (!std::isfinite(train_loss))
      throw NumericalError("LSTM training diverged (loss became non-finite "
                           "at epoch " +
                           std::to_string(epoch) + ")");
    if (has_val) {
      val_loss = loss_over(val_wins, val_steps);
      if (!std::isfinite(val_loss))
        throw NumericalError("LSTM validation loss became non-finite at "
                             "epoch " +
                             std::to_string(epoch));
      if (val_loss < best_val) {
        best_val = val_loss;
        best_theta = theta;
        bad_epochs = 0;
      } else if (++bad_epochs > cfg.patience) {
        break;
      }
    }
  }

  if (has_val) {
    theta = best_theta;
    val_loss = best_val;
  }

  if (report) {
    report->final_train_loss = loss_over(train_wins, train_steps);
    report->final_val_loss =
        has_val ? val_loss : report->final_train_loss;
    report->epochs_run = epochs_run;
  }

  LstmModel model;
  model.in_dim = in_dim;
  model.hidden = cfg.hidden_dim;
  model.out_dim = out_dim;
  model.theta = std::move(theta);
  model.input_scaler = in_scaler;
  model.target_scaler = tg_scaler;
  model.config = cfg;
  return model;
}

PredictResult predict_step(const LstmModel& model,
                           const Eigen::VectorXd& a_prev,
                           const Eigen::VectorXd& u_now,
                           const LstmState& state) {
  if (a_prev.size() + u_now.size() != model.in_dim)
    throw DimensionError("coefficient+input length does not match model "
                         "input dim");
  Eigen::VectorXd d(model.in_dim);
  d << a_prev, u_now;
  LstmStepResult step = lstm_step(model, d, state);
  PredictResult out;
  out.a_hat = std::move(step.output);
  out.state = std::move(step.state);
  return out;
}

double gradient_check(const LstmModel& model, const TrainingSeries& series,
                      int corrupt_flat_index) {
  const Layout L(model.in_dim, model.hidden, model.out_dim);
  const Eigen::MatrixXd x = model.input_scaler.apply_columns(series.inputs);
  const Eigen::MatrixXd y = model.target_scaler.apply_columns(series.targets);
  const int t_total = static_cast<int>(x.cols());

  Workspace ws;
  Eigen::VectorXd theta = model.theta;
  forward_window(L, theta, x, y, 0, t_total, ws);
  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(L.total);
  backward_window(L, theta, x, 0, t_total, ws, analytic);
  if (corrupt_flat_index >= 0 && corrupt_flat_index < L.total)
    analytic(corrupt_flat_index) = -analytic(corrupt_flat_index);

  const double step = 1e-5;
  double max_rel = 0.0;
  for (int p = 0; p < L.total; ++p) {
    const double saved = theta(p);
    theta(p) = saved + step;
    const double plus = forward_window(L, theta, x, y, 0, t_total, ws);
    theta(p) = saved - step;
    const double minus = forward_window(L, theta, x, y, 0, t_total, ws);
    theta(p) = saved;
    const double numeric = (plus - minus) / (2.0 * step);
    const double denom =
        std::max({std::fabs(numeric), std::fabs(analytic(p)), 1e-8});
    max_rel = std::max(max_rel, std::fabs(numeric - analytic(p)) / denom);
  }
  return max_rel;
}

Eigen::VectorXd ArBaseline::predict(const Eigen::MatrixXd& lagged_outputs,
                                    const Eigen::MatrixXd& lagged_inputs) const {
  if (lagged_outputs.rows() != out_dim || lagged_outputs.cols() != lag_output)
    throw DimensionError("lagged outputs have wrong shape");
  if (lagged_inputs.rows() != in_dim || lagged_inputs.cols() != lag_input)
    throw DimensionError("lagged inputs have wrong shape");
  Eigen::VectorXd z(coef.cols());
  Eigen::Index at = 0;
  for (int j = 0; j < lag_output; ++j, at += out_dim)
    z.segment(at, out_dim) = lagged_outputs.col(j);
  for (int j = 0; j < lag_input; ++j, at += in_dim)
    z.segment(at, in_dim) = lagged_inputs.col(j);
  z(at) = 1.0;
  return coef * z;
}

ArBaseline fit_ar_baseline(const std::vector<TrainingSeries>& series,
                           int lag_output, int lag_input,
                           bool current_input) {
  check_series(series);
  if (lag_output < 1 || lag_input < 0)
    throw ConfigError("AR baseline lags must be positive");
  const int out_dim = static_cast<int>(series.front().targets.rows());
  const int in_dim = static_cast<int>(series.front().inputs.rows());
  const int p = out_dim * lag_output + in_dim * lag_input + 1;

  long rows = 0;
  const int input_shift = current_input ? 0 : 1;
  const int t_min = std::max(lag_output, lag_input - 1 + input_shift);
  for (const TrainingSeries& s : series)
    rows += std::max<long>(0, s.targets.cols() - t_min);
  if (rows < p)
    throw NumericalError("not enough samples for the AR regression");

  Eigen::MatrixXd z(rows, p);
  Eigen::MatrixXd y(rows, out_dim);
  long r = 0;
  for (const TrainingSeries& s : series) {
    const int t_total = static_cast<int>(s.targets.cols());
    for (int t = t_min; t < t_total; ++t, ++r) {
      Eigen::Index at = 0;
      for (int j = 1; j <= lag_output; ++j, at += out_dim)
        z.block(r, at, 1, out_dim) = s.targets.col(t - j).transpose();
      for (int j = 0; j < lag_input; ++j, at += in_dim)
        z.block(r, at, 1, in_dim) =
            s.inputs.col(t - input_shift - j).transpose();
      z(r, at) = 1.0;
      y.row(r) = s.targets.col(t).transpose();
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  if (qr.rank() < p)
    throw NumericalError("singular AR regression (rank " +
                         std::to_string(qr.rank()) + " < " +
                         std::to_string(p) + ")");
  ArBaseline model;
  model.out_dim = out_dim;
  model.in_dim = in_dim;
  model.lag_output = lag_output;
  model.lag_input = lag_input;
  model.current_input = current_input;
  model.coef = qr.solve(y).transpose();
  return model;
}

}  // namespace sparsefield
