// sparsefield command-line interface: dataset generation, offline training,
// online evaluation and the sensor-count / sensing-scheme sweeps.

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <thread>

#include "sparsefield/io.hpp"
#include "sparsefield/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sparsefield;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_tags(const std::vector<int>& tags) {
  std::string out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(tags[i]);
  }
  return out;
}

std::vector<int> parse_tag_list(const std::string& text) {
  std::vector<int> tags;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      tags.push_back(std::stoi(token));
    } catch (const std::exception&) {
      throw ConfigError("bad sensor tag '" + token + "' in --sensors");
    }
  }
  if (tags.empty()) throw ConfigError("--sensors list is empty");
  for (std::size_t i = 0; i < tags.size(); ++i)
    for (std::size_t j = i + 1; j < tags.size(); ++j)
      if (tags[i] == tags[j])
        throw ConfigError("duplicate sensor tag " + std::to_string(tags[i]));
  return tags;
}

// Per-scheme seed so a sweep row and a standalone rerun of the same tags use
// identical training randomness.
std::uint64_t mix_seed(std::uint64_t seed, const std::vector<int>& tags) {
  std::uint64_t h = seed ^ 0x51f15eedULL;
  for (int t : tags) h = h * 1000003ULL + static_cast<std::uint64_t>(t);
  return h;
}

struct TrainOpts {
  double threshold = 0.99;
  std::uint64_t seed = 1;
  int epochs = 500;
  int hidden = 32;
  int window = 50;
  int batch = 8;
  double val_fraction = 0.2;
  int patience = 50;
  double rcond = -1.0;
  int train_count = 0;  // 0: first half of the snapshots

  TrainConfig config(std::uint64_t effective_seed) const {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.hidden_dim = hidden;
    cfg.bptt_window = window;
    cfg.batch_size = batch;
    cfg.validation_fraction = val_fraction;
    cfg.patience = patience;
    cfg.seed = effective_seed;
    return cfg;
  }
};

void add_train_options(CLI::App* cmd, TrainOpts& opts) {
  cmd->add_option("--threshold", opts.threshold,
                  "energy-ratio threshold for order selection")
      ->envname("SPARSEFIELD_THRESHOLD");
  cmd->add_option("--seed", opts.seed, "training seed")
      ->envname("SPARSEFIELD_SEED");
  cmd->add_option("--epochs", opts.epochs, "max training epochs")
      ->envname("SPARSEFIELD_EPOCHS");
  cmd->add_option("--hidden", opts.hidden, "LSTM hidden width")
      ->envname("SPARSEFIELD_HIDDEN");
  cmd->add_option("--window", opts.window, "truncated-BPTT window");
  cmd->add_option("--batch", opts.batch, "windows per Adam step");
  cmd->add_option("--val-fraction", opts.val_fraction,
                  "validation fraction for early stopping");
  cmd->add_option("--patience", opts.patience, "early-stop patience");
  cmd->add_option("--rcond", opts.rcond,
                  "pseudo-inverse cutoff (negative: automatic)");
  cmd->add_option("--train-count", opts.train_count,
                  "snapshots in the training split (0: first half)");
}

int resolve_train_count(const Dataset& ds, const TrainOpts& opts) {
  const int l_total = ds.snapshots.snapshots();
  int l1 = opts.train_count > 0 ? opts.train_count : l_total / 2;
  if (l1 < 2 || l1 >= l_total)
    throw ConfigError("training split must leave data on both sides");
  return l1;
}

SnapshotMatrix head_snapshots(const SnapshotMatrix& m, int count) {
  SnapshotMatrix out;
  out.data = m.data.leftCols(count);
  out.dt = m.dt;
  out.t0 = m.t0;
  return out;
}

struct TrainedModel {
  SpatioTemporalModel model;
  FitReport report;
};

TrainedModel train_on_dataset(const Dataset& ds, const std::vector<int>& tags,
                              const TrainOpts& opts,
                              const LstmModel* override_temporal = nullptr) {
  const SensorLayout layout = SensorLayout::sparse(ds.layout.grid, tags);
  const int l1 = resolve_train_count(ds, opts);
  const SnapshotMatrix train_split = head_snapshots(ds.snapshots, l1);
  const Eigen::MatrixXd train_inputs = ds.inputs.leftCols(l1);

  TrainedModel out;
  const TrainConfig cfg = opts.config(mix_seed(opts.seed, tags));
  out.model = fit_offline(train_split, layout, train_inputs, opts.threshold,
                          cfg, &out.report, override_temporal);
  return out;
}

TruthProvider truth_of(const Dataset& ds) {
  if (!ds.has_truth)
    throw ConfigError("dataset has no truth frames; evaluation needs a "
                      "dataset saved with truth");
  TruthProvider t;
  t.frames = &ds.truth;
  t.x_coords = &ds.x_fine;
  t.y_coords = &ds.y_fine;
  return t;
}

void write_json_atomic(const std::string& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

// ---- simulate ----

struct SimulateOpts {
  std::string out;
  HeatSimConfig cfg;
  bool no_truth = false;
  std::string profile_text;
};

void run_simulate(const SimulateOpts& opts) {
  HeatSimConfig cfg = opts.cfg;
  if (!opts.profile_text.empty()) {
    cfg.profile.clear();
    std::stringstream ss(opts.profile_text);
    std::string token;
    while (std::getline(ss, token, ',')) {
      const auto colon = token.find(':');
      if (colon == std::string::npos)
        throw ConfigError("bad --profile entry '" + token +
                          "', expected amps:seconds");
      cfg.profile.push_back(
          {std::stod(token.substr(0, colon)), std::stod(token.substr(colon + 1))});
    }
  }
  const SimulationResult sim = simulate(cfg);
  save_dataset(opts.out, sim, !opts.no_truth);

  double lo = sim.truth.front().minCoeff(), hi = sim.truth.front().maxCoeff();
  for (const Eigen::MatrixXd& f : sim.truth) {
    lo = std::min(lo, f.minCoeff());
    hi = std::max(hi, f.maxCoeff());
  }
  std::cout << "dataset: " << opts.out << "\n"
            << "snapshots: " << sim.sensor_readings.snapshots() << " ("
            << sim.layout.n_full << " sensors)\n"
            << "field range: [" << lo << ", " << hi << "] degC\n";
}

// ---- train ----

struct TrainCmdOpts {
  std::string dataset, out, sensors;
  TrainOpts train;
};

void save_basis_files(const std::string& prefix, const SbfBasis& basis) {
  write_matrix_csv(prefix + ".csv", basis.modes);
  json meta;
  meta["order"] = basis.order;
  json energies = json::array();
  for (Eigen::Index i = 0; i < basis.energies.size(); ++i)
    energies.push_back(basis.energies(i));
  meta["energies"] = std::move(energies);
  write_json_atomic(prefix + ".json", meta);
}

json report_to_json(const FitReport& r, const std::vector<int>& tags,
                    const TrainOpts& opts) {
  json j;
  j["s_tag"] = tags;
  j["threshold"] = opts.threshold;
  j["seed"] = opts.seed;
  j["n_s"] = r.n_sparse;
  j["n_f"] = r.n_full;
  j["condition_number"] = r.condition;
  j["final_train_loss"] = r.final_train_loss;
  j["final_val_loss"] = r.final_val_loss;
  j["epochs_run"] = r.epochs_run;
  json es = json::array(), ef = json::array();
  for (Eigen::Index i = 0; i < r.energies_sparse.size(); ++i)
    es.push_back(r.energies_sparse(i));
  for (Eigen::Index i = 0; i < r.energies_full.size(); ++i)
    ef.push_back(r.energies_full(i));
  j["energies_sparse"] = std::move(es);
  j["energies_full"] = std::move(ef);
  return j;
}

void run_train(const TrainCmdOpts& opts) {
  const std::vector<int> tags = parse_tag_list(opts.sensors);
  const Dataset ds = load_dataset(opts.dataset);
  const TrainedModel trained = train_on_dataset(ds, tags, opts.train);

  fs::create_directories(opts.out);
  const fs::path out(opts.out);
  save_model((out / "model.json").string(), trained.model);
  write_json_atomic((out / "report.json").string(),
                    report_to_json(trained.report, tags, opts.train));
  save_basis_files((out / "sbf_sparse").string(), trained.model.basis_sparse);
  save_basis_files((out / "sbf_full").string(), trained.model.basis_full);

  std::cout << "model: " << (out / "model.json").string() << "\n"
            << "orders: n_s=" << trained.report.n_sparse
            << " n_f=" << trained.report.n_full
            << " cond=" << trained.report.condition << "\n";
}

// ---- evaluate ----

struct EvaluateOpts {
  std::string dataset, model, out, mode = "teacher", timestamps, baseline;
  bool inject_truth = false;
  int eval_nx = 48, eval_ny = 64;
  TrainOpts train;  // used by --baseline full-kl
};

std::vector<int> resolve_timestamps(const std::string& text,
                                    const SnapshotMatrix& snapshots) {
  std::vector<int> frames;
  if (text.empty()) return frames;
  const int l_total = snapshots.snapshots();
  const double t_first = snapshots.time_at(1);
  const double t_last = snapshots.time_at(l_total - 1);
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    double t = 0;
    try {
      t = std::stod(token);
    } catch (const std::exception&) {
      throw ConfigError("bad --timestamps entry '" + token + "'");
    }
    const double k_real = (t - snapshots.t0) / snapshots.dt + 1.0;
    const int k = static_cast<int>(std::llround(k_real));
    if (std::fabs(k_real - k) > 1e-6 || k < 2 || k > l_total)
      throw ConfigError("timestamp " + token + " outside the dataset; valid " +
                        "range [" + fmt17(t_first) + ", " + fmt17(t_last) +
                        "] in steps of " + fmt17(snapshots.dt));
    frames.push_back(k);
  }
  return frames;
}

// Conventional full-sensing pipeline: discrete basis + temporal model, no
// surfaces, scored at the sensor locations only.
json run_full_kl_baseline(const Dataset& ds, const TrainOpts& opts) {
  const int l1 = resolve_train_count(ds, opts);
  const int l_total = ds.snapshots.snapshots();
  const SnapshotMatrix train_split = head_snapshots(ds.snapshots, l1);

  Separation sep = separate(train_split, opts.threshold);
  TrainingSeries series;
  const int n = sep.basis.order;
  series.inputs.resize(n + ds.inputs.rows(), l1 - 1);
  series.targets.resize(n, l1 - 1);
  for (int t = 1; t < l1; ++t) {
    series.inputs.col(t - 1) << sep.coeffs.a.col(t - 1), ds.inputs.col(t);
    series.targets.col(t - 1) = sep.coeffs.a.col(t);
  }
  TrainConfig cfg = opts.config(mix_seed(opts.seed, {0}));
  LstmModel temporal = train_lstm({series}, cfg);

  // truth at the sensor coordinates
  const Grid2D& grid = ds.layout.grid;
  Eigen::MatrixXd truth_at_sensors(ds.layout.n_full, l_total);
  for (int t = 0; t < l_total; ++t)
    for (int s = 0; s < ds.layout.n_full; ++s)
      truth_at_sensors(s, t) =
          bilinear_sample(ds.truth[t], ds.x_fine, ds.y_fine,
                          grid.x_coords[s / grid.ny],
                          grid.y_coords[s % grid.ny]);

  LstmState state = LstmState::zero(temporal.hidden);
  double train_acc = 0, test_acc = 0;
  long train_n = 0, test_n = 0;
  for (int t = 1; t < l_total; ++t) {
    const Eigen::VectorXd a_prev =
        sep.basis.modes.transpose() * ds.snapshots.data.col(t - 1);
    PredictResult step = predict_step(temporal, a_prev, ds.inputs.col(t), state);
    state = std::move(step.state);
    const Eigen::VectorXd predicted = sep.basis.modes * step.a_hat;
    const double mse =
        (predicted - truth_at_sensors.col(t)).squaredNorm() / predicted.size();
    if (t + 1 <= l1) {
      train_acc += mse;
      ++train_n;
    } else {
      test_acc += mse;
      ++test_n;
    }
  }
  json j;
  j["kind"] = "full-kl";
  j["n"] = n;
  j["train_rmse"] = std::sqrt(train_acc / train_n);
  j["test_rmse"] = std::sqrt(test_acc / test_n);
  j["note"] = "discrete basis at sensor locations; no full-space prediction";
  return j;
}

void run_evaluate(const EvaluateOpts& opts) {
  const Dataset ds = load_dataset(opts.dataset);
  const TruthProvider truth = truth_of(ds);
  const int l1 = resolve_train_count(ds, opts.train);
  fs::create_directories(opts.out);
  const fs::path out(opts.out);

  if (!opts.baseline.empty()) {
    if (opts.baseline != "full-kl")
      throw ConfigError("unknown baseline '" + opts.baseline + "'");
    json summary;
    summary["baseline"] = run_full_kl_baseline(ds, opts.train);
    summary["train_count"] = l1;
    write_json_atomic((out / "summary.json").string(), summary);
    std::cout << "baseline full-kl: test_rmse="
              << summary["baseline"]["test_rmse"].get<double>() << "\n";
    return;
  }

  if (opts.model.empty())
    throw ConfigError("--model is required unless --baseline is given");
  const SpatioTemporalModel model = load_model(opts.model);

  EvaluationOptions eval;
  eval.eval_nx = opts.eval_nx;
  eval.eval_ny = opts.eval_ny;
  if (opts.mode == "teacher")
    eval.teacher_forced = true;
  else if (opts.mode == "rollout")
    eval.teacher_forced = false;
  else
    throw ConfigError("--mode must be teacher or rollout");
  eval.inject_truth_coefficients = opts.inject_truth;
  eval.keep_frames = resolve_timestamps(opts.timestamps, ds.snapshots);

  const EvaluationResult r =
      evaluate_stream(model, ds.snapshots, ds.inputs, truth, l1, eval);

  // SNAE curve
  std::string snae_csv = "time,snae\n";
  for (std::size_t i = 0; i < r.snae_series.size(); ++i)
    snae_csv += fmt17(r.snapshot_time[i]) + "," + fmt17(r.snae_series[i]) +
                "\n";
  write_text_atomic((out / "snae.csv").string(), snae_csv);

  // requested frames
  for (std::size_t i = 0; i < r.kept_index.size(); ++i) {
    const double t =
        ds.snapshots.time_at(r.kept_index[i] - 1);
    std::ostringstream tag;
    tag << "t" << t << "s";
    emit_heatmap(r.kept_prediction[i],
                 (out / ("pred_" + tag.str())).string());
    emit_heatmap(r.kept_stae[i], (out / ("stae_" + tag.str())).string());
  }

  json summary;
  summary["train_rmse"] = r.train_rmse;
  summary["test_rmse"] = r.test_rmse;
  summary["n_s"] = model.basis_sparse.order;
  summary["n_f"] = model.order;
  summary["condition_number"] = model.completion.condition;
  summary["mode"] = opts.mode;
  summary["train_count"] = l1;
  summary["eval_nx"] = opts.eval_nx;
  summary["eval_ny"] = opts.eval_ny;
  summary["dynamic_range"] = r.truth_max - r.truth_min;
  if (opts.inject_truth) {
    summary["truncation_rmse"] = r.test_rmse;
    summary["note"] = "truth coefficients injected; errors are spatial only";
  }
  write_json_atomic((out / "summary.json").string(), summary);

  std::cout << "train_rmse=" << r.train_rmse << " test_rmse=" << r.test_rmse
            << " range=" << (r.truth_max - r.truth_min) << "\n";
}

// ---- sweeps ----

struct SweepOpts {
  std::string dataset, out;
  TrainOpts train;
  int jobs = 0;
  bool reuse_temporal = false;
  int anchor = 0;  // sweep-scheme only; 0 selects the highest-variance sensor
  int eval_nx = 48, eval_ny = 64;
};

struct SweepRow {
  std::vector<int> tags;
  double train_rmse = 0, test_rmse = 0, condition = 0;
  int n_s = 0, n_f = 0;
};

LstmModel train_shared_temporal(const Dataset& ds, const TrainOpts& opts) {
  const int l1 = resolve_train_count(ds, opts);
  Separation sep = separate(head_snapshots(ds.snapshots, l1), opts.threshold);
  TrainingSeries series;
  const int n = sep.basis.order;
  series.inputs.resize(n + ds.inputs.rows(), l1 - 1);
  series.targets.resize(n, l1 - 1);
  for (int t = 1; t < l1; ++t) {
    series.inputs.col(t - 1) << sep.coeffs.a.col(t - 1), ds.inputs.col(t);
    series.targets.col(t - 1) = sep.coeffs.a.col(t);
  }
  return train_lstm({series}, opts.config(opts.seed));
}

std::vector<SweepRow> run_sweep(const Dataset& ds,
                                const std::vector<std::vector<int>>& schemes,
                                const SweepOpts& opts) {
  const int l1 = resolve_train_count(ds, opts.train);
  const TruthProvider truth = truth_of(ds);

  LstmModel shared;
  const LstmModel* override_ptr = nullptr;
  if (opts.reuse_temporal) {
    shared = train_shared_temporal(ds, opts.train);
    override_ptr = &shared;
  }

  std::vector<SweepRow> rows(schemes.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_jobs =
      opts.jobs > 0 ? static_cast<unsigned>(opts.jobs)
                    : std::min<unsigned>(hw, schemes.size());

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= schemes.size()) return;
      const TrainedModel trained =
          train_on_dataset(ds, schemes[i], opts.train, override_ptr);
      EvaluationOptions eval;
      eval.eval_nx = opts.eval_nx;
      eval.eval_ny = opts.eval_ny;
      const EvaluationResult r = evaluate_stream(
          trained.model, ds.snapshots, ds.inputs, truth, l1, eval);
      rows[i] = {schemes[i], r.train_rmse, r.test_rmse,
                 trained.report.condition, trained.report.n_sparse,
                 trained.report.n_full};
    }
  };

  std::vector<std::thread> pool;
  for (unsigned j = 1; j < n_jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool with_flag) {
  std::string csv = with_flag
                        ? "scheme,s_tag,train_rmse,test_rmse,condition,"
                          "flagged\n"
                        : "sensors,s_tag,train_rmse,test_rmse,condition\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    csv += with_flag ? std::to_string(i + 1)
                     : std::to_string(r.tags.size());
    csv += "," + fmt_tags(r.tags) + "," + fmt17(r.train_rmse) + "," +
           fmt17(r.test_rmse) + "," + fmt17(r.condition);
    if (with_flag) csv += r.condition > 1e6 ? ",1" : ",0";
    csv += "\n";
  }
  return csv;
}

void run_sweep_count(const SweepOpts& opts) {
  const Dataset ds = load_dataset(opts.dataset);
  std::vector<std::vector<int>> schemes;
  for (int k = 1; k <= ds.layout.n_full; ++k) {
    std::vector<int> tags(k);
    std::iota(tags.begin(), tags.end(), 1);
    schemes.push_back(std::move(tags));
  }
  const std::vector<SweepRow> rows = run_sweep(ds, schemes, opts);

  fs::create_directories(opts.out);
  write_text_atomic((fs::path(opts.out) / "sweep_count.csv").string(),
                    sweep_csv(rows, false));
  std::cout << "sweep-count: " << rows.size() << " rows -> " << opts.out
            << "/sweep_count.csv\n";
}

int pick_anchor(const Dataset& ds, const TrainOpts& opts) {
  const int l1 = resolve_train_count(ds, opts);
  const Eigen::MatrixXd train = ds.snapshots.data.leftCols(l1);
  const Eigen::VectorXd mean = train.rowwise().mean();
  Eigen::Index best = 0;
  (train.colwise() - mean).rowwise().squaredNorm().maxCoeff(&best);
  return static_cast<int>(best) + 1;
}

void run_sweep_scheme(const SweepOpts& opts) {
  const Dataset ds = load_dataset(opts.dataset);
  const int anchor =
      opts.anchor > 0 ? opts.anchor : pick_anchor(ds, opts.train);
  if (anchor < 1 || anchor > ds.layout.n_full)
    throw ConfigError("anchor sensor outside the layout");

  std::vector<std::vector<int>> schemes;
  for (int partner = 1; partner <= ds.layout.n_full; ++partner)
    if (partner != anchor) schemes.push_back({anchor, partner});
  const std::vector<SweepRow> rows = run_sweep(ds, schemes, opts);

  std::size_t winner = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].test_rmse < rows[winner].test_rmse) winner = i;

  fs::create_directories(opts.out);
  write_text_atomic((fs::path(opts.out) / "sweep_scheme.csv").string(),
                    sweep_csv(rows, true));

  json report;
  report["anchor"] = anchor;
  report["schemes"] = rows.size();
  report["winner_scheme"] = winner + 1;
  report["winner_s_tag"] = rows[winner].tags;
  report["winner_train_rmse"] = rows[winner].train_rmse;
  report["winner_test_rmse"] = rows[winner].test_rmse;
  json flagged = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].condition > 1e6) flagged.push_back(i + 1);
  report["flagged_schemes"] = std::move(flagged);
  write_json_atomic((fs::path(opts.out) / "report.json").string(), report);

  std::cout << "sweep-scheme: winner s_tag=[" << fmt_tags(rows[winner].tags)
            << "] test_rmse=" << rows[winner].test_rmse << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparsefield: full-field prediction from sparse sensors"};
  app.require_subcommand(1);

  SimulateOpts sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "generate a dataset");
  c_sim->add_option("--out", sim.out, "output dataset directory")
      ->required()
      ->envname("SPARSEFIELD_OUT");
  c_sim->add_option("--seed", sim.cfg.seed, "noise seed")
      ->envname("SPARSEFIELD_SEED");
  c_sim->add_option("--duration", sim.cfg.duration, "simulated seconds");
  c_sim->add_option("--noise-std", sim.cfg.noise_std, "sensor noise (degC)");
  c_sim->add_option("--dt", sim.cfg.dt, "solver step (s)");
  c_sim->add_option("--snapshot-dt", sim.cfg.snapshot_dt, "sampling step (s)");
  c_sim->add_option("--nx", sim.cfg.nx, "fine-grid cells along x");
  c_sim->add_option("--ny", sim.cfg.ny, "fine-grid cells along y");
  c_sim->add_option("--source-gain", sim.cfg.source_gain,
                    "heating gain (degC/s per A^2)");
  c_sim->add_option("--source-radius", sim.cfg.source_radius,
                    "hot-spot radius (m)");
  c_sim->add_option("--profile", sim.profile_text,
                    "current ladder, amps:seconds[,amps:seconds...]");
  c_sim->add_flag("--no-truth", sim.no_truth, "skip fine-grid truth frames");
  c_sim->callback([&] { run_simulate(sim); });

  TrainCmdOpts train;
  CLI::App* c_train = app.add_subcommand("train", "fit the offline model");
  c_train->add_option("--dataset", train.dataset, "dataset directory")
      ->required()
      ->envname("SPARSEFIELD_DATASET");
  c_train->add_option("--out", train.out, "output directory")
      ->required()
      ->envname("SPARSEFIELD_OUT");
  c_train->add_option("--sensors", train.sensors,
                      "online sensor tags, e.g. 3,11")
      ->required()
      ->envname("SPARSEFIELD_SENSORS");
  add_train_options(c_train, train.train);
  c_train->callback([&] { run_train(train); });

  EvaluateOpts ev;
  CLI::App* c_eval = app.add_subcommand("evaluate", "stream the test split");
  c_eval->add_option("--dataset", ev.dataset, "dataset directory")
      ->required()
      ->envname("SPARSEFIELD_DATASET");
  c_eval->add_option("--model", ev.model, "model.json from train");
  c_eval->add_option("--out", ev.out, "output directory")
      ->required()
      ->envname("SPARSEFIELD_OUT");
  c_eval->add_option("--mode", ev.mode, "teacher | rollout")
      ->envname("SPARSEFIELD_MODE");
  c_eval->add_option("--timestamps", ev.timestamps,
                     "comma-separated seconds for STAE heatmaps")
      ->envname("SPARSEFIELD_TIMESTAMPS");
  c_eval->add_option("--baseline", ev.baseline,
                     "run a comparison baseline (full-kl)")
      ->envname("SPARSEFIELD_BASELINE");
  c_eval->add_flag("--inject-truth-coeffs", ev.inject_truth,
                   "debug: use truth coefficients, isolating spatial error");
  c_eval->add_option("--eval-nx", ev.eval_nx, "evaluation grid cells along x");
  c_eval->add_option("--eval-ny", ev.eval_ny, "evaluation grid cells along y");
  add_train_options(c_eval, ev.train);
  c_eval->callback([&] { run_evaluate(ev); });

  SweepOpts sc;
  CLI::App* c_count = app.add_subcommand(
      "sweep-count", "train/evaluate with 1..N leading sensors");
  c_count->add_option("--dataset", sc.dataset, "dataset directory")
      ->required()
      ->envname("SPARSEFIELD_DATASET");
  c_count->add_option("--out", sc.out, "output directory")
      ->required()
      ->envname("SPARSEFIELD_OUT");
  c_count->add_option("--jobs", sc.jobs, "parallel workers (0: auto)");
  c_count->add_flag("--reuse-temporal", sc.reuse_temporal,
                    "approximate sweep reusing one temporal model");
  c_count->add_option("--eval-nx", sc.eval_nx, "evaluation grid cells along x");
  c_count->add_option("--eval-ny", sc.eval_ny, "evaluation grid cells along y");
  add_train_options(c_count, sc.train);
  c_count->callback([&] { run_sweep_count(sc); });

  SweepOpts ss;
  CLI::App* c_scheme = app.add_subcommand(
      "sweep-scheme", "rank two-sensor schemes: fixed anchor + rover");
  c_scheme->add_option("--dataset", ss.dataset, "dataset directory")
      ->required()
      ->envname("SPARSEFIELD_DATASET");
  c_scheme->add_option("--out", ss.out, "output directory")
      ->required()
      ->envname("SPARSEFIELD_OUT");
  c_scheme->add_option("--anchor", ss.anchor,
                       "anchor tag (0: highest-variance training sensor)");
  c_scheme->add_option("--jobs", ss.jobs, "parallel workers (0: auto)");
  c_scheme->add_flag("--reuse-temporal", ss.reuse_temporal,
                     "approximate sweep reusing one temporal model");
  c_scheme->add_option("--eval-nx", ss.eval_nx,
                       "evaluation grid cells along x");
  c_scheme->add_option("--eval-ny", ss.eval_ny,
                       "evaluation grid cells along y");
  add_train_options(c_scheme, ss.train);
  c_scheme->callback([&] { run_sweep_scheme(ss); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
