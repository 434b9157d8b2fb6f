// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
//
// usage: acceptance [path-to-cli] [scratch-dir]
// The CLI path and scratch directory are needed by the scheme-sweep
// criterion, which exercises the real command-line surface.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sparsefield/io.hpp"

using namespace sparsefield;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_failures = 0;

struct Criterion {
  std::string name;
  double limit_seconds;  // 0: no stated runtime bound
  std::vector<std::string> notes;
  bool ok = true;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      notes.push_back("FAILED: " + what);
    }
  }
  void info(const std::string& what) { notes.push_back(what); }
};

void run_criterion(const std::string& name, double limit_seconds,
                   const std::function<void(Criterion&)>& body) {
  Criterion c{name, limit_seconds, {}};
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.notes.push_back(std::string("exception: ") + e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (limit_seconds > 0 && seconds > limit_seconds) {
    c.ok = false;
    c.notes.push_back("runtime " + std::to_string(seconds) + " s exceeds " +
                      std::to_string(limit_seconds) + " s");
  }
  std::printf("[%s] %s (%.1f s)\n", c.ok ? "PASS" : "FAIL", name.c_str(),
              seconds);
  for (const std::string& note : c.notes)
    std::printf("       %s\n", note.c_str());
  std::fflush(stdout);
  if (!c.ok) ++g_failures;
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = gauss(rng);
  return m;
}

// ---------- criterion bodies ----------

void separation_suite(Criterion& c) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    SnapshotMatrix snaps;
    snaps.data = random_matrix(16, 100, rng);
    const Separation sep = separate(snaps, 1.0);

    const Eigen::MatrixXd gram = sep.basis.modes.transpose() * sep.basis.modes;
    const double ortho =
        (gram - Eigen::MatrixXd::Identity(sep.basis.order, sep.basis.order))
            .cwiseAbs()
            .maxCoeff();
    c.expect(ortho <= 1e-10, "orthonormality defect " + std::to_string(ortho));

    // rank-n truncation error^2 equals the energy tail, relative 1e-8
    for (int n = 1; n <= 16; n += 5) {
      const Eigen::MatrixXd rec = sep.basis.modes.leftCols(n) *
                                  sep.coeffs.a.topRows(n);
      const double err2 = (rec - snaps.data).squaredNorm();
      const double tail = sep.basis.energies.tail(16 - n).sum();
      const double rel = std::fabs(err2 - tail) /
                         std::max(1.0, sep.basis.energies.sum());
      c.expect(rel <= 1e-8, "truncation/tail mismatch " + std::to_string(rel));
    }

    const SnapshotMatrix rec = reconstruct(sep.basis, sep.coeffs);
    const double frob = (rec.data - snaps.data).norm();
    c.expect(frob <= 1e-8,
             "threshold-1.0 round-trip error " + std::to_string(frob));
  }
}

void completion_suite(Criterion& c) {
  std::mt19937_64 rng(202);

  // full-sensing identity
  {
    SnapshotMatrix snaps;
    snaps.data = random_matrix(16, 60, rng);
    const Separation sep = separate(snaps, 1.0);
    const CompletionOperator op = build_completion(
        sep.basis, sep.basis, Eigen::MatrixXd::Identity(16, 16));
    TemporalCoefficients rec = recover_full_coefficients(op, sep.coeffs);
    const double diff = (rec.a - sep.coeffs.a).cwiseAbs().maxCoeff();
    c.expect(diff <= 1e-12, "M=I identity defect " + std::to_string(diff));
  }

  // in-span exact recovery with a full-column-rank inner matrix
  {
    Eigen::VectorXd mode1 = Eigen::VectorXd::Ones(16);
    Eigen::VectorXd mode2(16);
    for (int i = 0; i < 16; ++i) mode2(i) = std::sin(0.4 * i) + 0.15 * i;
    SnapshotMatrix snaps;
    snaps.data.resize(16, 80);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    for (int t = 0; t < 80; ++t)
      snaps.data.col(t) = unif(rng) * mode1 + unif(rng) * mode2;
    const Separation sep_full = separate(snaps, 0.9999999);
    c.expect(sep_full.basis.order == 2, "synthetic data should have order 2");

    const Grid2D grid = Grid2D::uniform(4, 4, 1.0, 1.0);
    const SensorLayout layout = SensorLayout::sparse(grid, {3, 11});
    const SnapshotMatrix sparse = sample_sensors(snaps, layout);
    const Separation sep_sparse = separate(sparse, 0.9999999);
    const CompletionOperator op = build_completion(
        sep_sparse.basis, sep_full.basis, build_mapping_matrix(layout));

    const Eigen::VectorXd a_true(Eigen::Vector2d(0.8, -1.1));
    const Eigen::VectorXd t_full = sep_full.basis.modes * a_true;
    const Eigen::VectorXd completed =
        complete_snapshot(op, build_mapping_matrix(layout) * t_full);
    const double diff = (completed - t_full).cwiseAbs().maxCoeff();
    c.expect(diff <= 1e-8, "in-span recovery defect " + std::to_string(diff));
  }

  // Penrose conditions
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = random_matrix(4, 6, rng);
    const Eigen::MatrixXd x = pinv(a);
    const Eigen::MatrixXd ax = a * x, xa = x * a;
    double defect = (a * xa - a).cwiseAbs().maxCoeff();
    defect = std::max(defect, (x * ax - x).cwiseAbs().maxCoeff());
    defect = std::max(defect, (ax - ax.transpose()).cwiseAbs().maxCoeff());
    defect = std::max(defect, (xa - xa.transpose()).cwiseAbs().maxCoeff());
    c.expect(defect <= 1e-9, "Penrose defect " + std::to_string(defect));
  }
}

void spline_suite(Criterion& c) {
  // knot vectors
  {
    const KnotVector k4 = knot_vector(4);
    const std::vector<double> expect4{0, 0, 0, 0, 1, 1, 1, 1};
    c.expect(k4.knots == expect4, "knot_vector(4) mismatch");
    const KnotVector k7 = knot_vector(7);
    const std::vector<double> expect7{0,    0,   0,    0, 0.25, 0.5,
                                      0.75, 1, 1,    1, 1};
    c.expect(k7.knots == expect7, "knot_vector(7) mismatch");
  }

  // partition of unity at 1000 random parameters
  {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const KnotVector kv = knot_vector(6);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double u = trial == 0 ? 1.0 : unif(rng);
      double s = 0.0;
      for (int j = 0; j < 6; ++j) s += bspline_basis(j, 3, u, kv);
      worst = std::max(worst, std::fabs(s - 1.0));
    }
    c.expect(worst <= 1e-12,
             "partition-of-unity defect " + std::to_string(worst));
  }

  // C2 continuity across interior knots, finite differences with step 1e-4
  {
    std::mt19937_64 rng(304);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd control(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) control(i, j) = unif(rng);
    SplineSurface s;
    s.control = control;
    s.knots_u = knot_vector(6);
    s.knots_w = knot_vector(6);

    const double h = 1e-4;
    auto d1l = [&](auto&& f, double x) {
      return (11 * f(x) - 18 * f(x - h) + 9 * f(x - 2 * h) - 2 * f(x - 3 * h)) /
             (6 * h);
    };
    auto d1r = [&](auto&& f, double x) {
      return (-11 * f(x) + 18 * f(x + h) - 9 * f(x + 2 * h) +
              2 * f(x + 3 * h)) /
             (6 * h);
    };
    auto d2l = [&](auto&& f, double x) {
      return (2 * f(x) - 5 * f(x - h) + 4 * f(x - 2 * h) - f(x - 3 * h)) /
             (h * h);
    };
    auto d2r = [&](auto&& f, double x) {
      return (2 * f(x) - 5 * f(x + h) + 4 * f(x + 2 * h) - f(x + 3 * h)) /
             (h * h);
    };
    double worst1 = 0.0, worst2 = 0.0;
    for (double w : {0.2, 0.5, 0.8}) {
      auto fu = [&](double u) { return s.value_param(u, w); };
      for (int k = 4; k < s.knots_u.size() - 4; ++k) {
        const double u0 = s.knots_u[k];
        worst1 = std::max(worst1, std::fabs(d1l(fu, u0) - d1r(fu, u0)));
        worst2 = std::max(worst2, std::fabs(d2l(fu, u0) - d2r(fu, u0)));
      }
      auto fw = [&](double ww) { return s.value_param(w, ww); };
      for (int k = 4; k < s.knots_w.size() - 4; ++k) {
        const double w0 = s.knots_w[k];
        worst1 = std::max(worst1, std::fabs(d1l(fw, w0) - d1r(fw, w0)));
        worst2 = std::max(worst2, std::fabs(d2l(fw, w0) - d2r(fw, w0)));
      }
    }
    c.expect(worst1 <= 1e-6, "C1 jump " + std::to_string(worst1));
    c.expect(worst2 <= 1e-6, "C2 jump " + std::to_string(worst2));
  }

  // local modification: no change outside the perturbed tensor support
  {
    std::mt19937_64 rng(305);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd control(7, 7);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) control(i, j) = unif(rng);
    SplineSurface base;
    base.control = control;
    base.knots_u = knot_vector(7);
    base.knots_w = knot_vector(7);
    SplineSurface moved = base;
    moved.control(3, 2) += 5.0;
    const double u_lo = base.knots_u[3], u_hi = base.knots_u[7];
    const double w_lo = base.knots_w[2], w_hi = base.knots_w[6];
    std::uniform_real_distribution<double> par(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 600; ++trial) {
      const double u = par(rng), w = par(rng);
      if (u > u_lo && u < u_hi && w > w_lo && w < w_hi) continue;
      worst = std::max(worst, std::fabs(moved.value_param(u, w) -
                                        base.value_param(u, w)));
    }
    c.expect(worst <= 1e-14, "support leakage " + std::to_string(worst));
  }

  // residual orthogonality on the sin*sin target
  {
    const KnotVector ku = knot_vector(4), kw = knot_vector(4);
    std::vector<double> us(41), ws(41);
    for (int i = 0; i < 41; ++i) us[i] = ws[i] = i / 40.0;
    Eigen::MatrixXd target(41, 41);
    for (int i = 0; i < 41; ++i)
      for (int j = 0; j < 41; ++j)
        target(i, j) = std::sin(M_PI * us[i]) * std::sin(M_PI * ws[j]);
    const Eigen::MatrixXd fit =
        least_squares_projection(target, us, ws, ku, kw);
    const Eigen::MatrixXd bu = basis_matrix(us, ku);
    const Eigen::MatrixXd bw = basis_matrix(ws, kw);
    const Eigen::MatrixXd resid = bu * fit * bw.transpose() - target;
    const Eigen::MatrixXd inner = bu.transpose() * resid * bw;
    double worst = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const double basis_norm = (bu.col(a) * bw.col(b).transpose()).norm();
        worst = std::max(worst,
                         std::fabs(inner(a, b)) / (resid.norm() * basis_norm));
      }
    c.expect(worst <= 1e-8, "residual orthogonality " + std::to_string(worst));
  }
}

void temporal_suite(Criterion& c) {
  // BPTT gradient check on 10 random small networks
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    LstmModel m;
    m.in_dim = 3;
    m.hidden = 6;
    m.out_dim = 2;
    m.theta.resize(LstmModel::parameter_count(3, 6, 2));
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (Eigen::Index i = 0; i < m.theta.size(); ++i) m.theta(i) = unif(rng);
    m.input_scaler = Scaler::identity(3);
    m.target_scaler = Scaler::identity(2);
    TrainingSeries s;
    s.inputs = random_matrix(3, 15, rng);
    s.targets = random_matrix(2, 15, rng);
    worst = std::max(worst, gradient_check(m, s));
  }
  c.expect(worst <= 1e-4, "max gradient error " + std::to_string(worst));
  c.info("max BPTT gradient relative error: " + std::to_string(worst));

  // linear system: one-step validation RMSE under 2% of the signal std
  {
    std::mt19937_64 lin_rng(405);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int steps = 500;
    Eigen::VectorXd a(steps + 1), u(steps + 1);
    a(0) = 0;
    u(0) = 0;
    for (int t = 1; t <= steps; ++t) {
      u(t) = unif(lin_rng);
      a(t) = 0.9 * a(t - 1) + 0.1 * u(t);
    }
    TrainingSeries s;
    s.inputs.resize(2, steps);
    s.targets.resize(1, steps);
    for (int t = 1; t <= steps; ++t) {
      s.inputs.col(t - 1) << a(t - 1), u(t);
      s.targets(0, t - 1) = a(t);
    }
    TrainConfig cfg;
    cfg.epochs = 500;
    cfg.hidden_dim = 8;
    cfg.bptt_window = 25;
    cfg.validation_fraction = 0.2;
    cfg.patience = 80;
    cfg.seed = 9;
    const LstmModel m = train_lstm({s}, cfg);
    LstmState state = LstmState::zero(cfg.hidden_dim);
    for (int t = 0; t < 400; ++t)
      state = lstm_step(m, s.inputs.col(t), state).state;
    double sse = 0.0;
    for (int t = 400; t < steps; ++t) {
      const LstmStepResult r = lstm_step(m, s.inputs.col(t), state);
      state = r.state;
      sse += std::pow(r.output(0) - s.targets(0, t), 2);
    }
    const double rmse_val = std::sqrt(sse / 100.0);
    const double sd = std::sqrt(
        (s.targets.row(0).array() - s.targets.row(0).mean()).square().mean());
    c.expect(rmse_val <= 0.02 * sd,
             "validation RMSE " + std::to_string(rmse_val) + " vs 2% of std " +
                 std::to_string(0.02 * sd));
    c.info("linear-system validation RMSE/std: " +
           std::to_string(rmse_val / sd));
  }

  // deterministic retrain
  {
    std::mt19937_64 det_rng(406);
    TrainingSeries s;
    s.inputs = random_matrix(2, 120, det_rng);
    s.targets = random_matrix(1, 120, det_rng);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.hidden_dim = 6;
    cfg.seed = 31;
    const LstmModel m1 = train_lstm({s}, cfg);
    const LstmModel m2 = train_lstm({s}, cfg);
    c.expect(m1.theta == m2.theta, "retrain parameters differ");
  }
}

struct PipelineArtifacts {
  SimulationResult sim;
  int l1 = 0;
};

PipelineArtifacts make_default_dataset() {
  PipelineArtifacts art;
  HeatSimConfig cfg;  // the defaults are the acceptance configuration
  art.sim = simulate(cfg);
  art.l1 = art.sim.sensor_readings.snapshots() / 2;
  return art;
}

TrainConfig sweep_train_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.hidden_dim = 16;
  cfg.seed = seed;
  return cfg;
}

std::uint64_t mix_seed(std::uint64_t seed, const std::vector<int>& tags) {
  std::uint64_t h = seed ^ 0x51f15eedULL;
  for (int t : tags) h = h * 1000003ULL + static_cast<std::uint64_t>(t);
  return h;
}

struct SchemeResult {
  std::vector<int> tags;
  double train_rmse = 0, test_rmse = 0;
};

SchemeResult run_scheme(const PipelineArtifacts& art,
                        const std::vector<int>& tags, const TrainConfig& base,
                        double threshold = 0.99) {
  SnapshotMatrix train;
  train.data = art.sim.sensor_readings.data.leftCols(art.l1);
  train.dt = art.sim.sensor_readings.dt;
  train.t0 = art.sim.sensor_readings.t0;
  TrainConfig cfg = base;
  cfg.seed = mix_seed(base.seed, tags);
  const SensorLayout layout = SensorLayout::sparse(art.sim.layout.grid, tags);
  const SpatioTemporalModel model =
      fit_offline(train, layout, art.sim.inputs.leftCols(art.l1), threshold,
                  cfg);
  TruthProvider truth{&art.sim.truth, &art.sim.x_fine, &art.sim.y_fine};
  EvaluationOptions opts;
  const EvaluationResult r = evaluate_stream(
      model, art.sim.sensor_readings, art.sim.inputs, truth, art.l1, opts);
  return {tags, r.train_rmse, r.test_rmse};
}

void end_to_end(Criterion& c, const PipelineArtifacts& art) {
  // dynamic range of the truth over the evaluation grid
  TruthProvider truth{&art.sim.truth, &art.sim.x_fine, &art.sim.y_fine};

  // scheme selection: anchor = highest-variance training sensor, then the
  // best partner by testing RMSE (moderate epochs for the selection pass)
  const Eigen::MatrixXd train_data =
      art.sim.sensor_readings.data.leftCols(art.l1);
  const Eigen::VectorXd mean = train_data.rowwise().mean();
  Eigen::Index anchor0 = 0;
  (train_data.colwise() - mean).rowwise().squaredNorm().maxCoeff(&anchor0);
  const int anchor = static_cast<int>(anchor0) + 1;
  c.info("anchor sensor: " + std::to_string(anchor));

  const TrainConfig selection = sweep_train_config(1);
  SchemeResult best;
  best.test_rmse = std::numeric_limits<double>::infinity();
  for (int partner = 1; partner <= 16; ++partner) {
    if (partner == anchor) continue;
    const SchemeResult r = run_scheme(art, {anchor, partner}, selection);
    if (r.test_rmse < best.test_rmse) best = r;
  }
  c.info("selected scheme: [" + std::to_string(best.tags[0]) + "," +
         std::to_string(best.tags[1]) + "]");

  // final model at full training strength on the selected scheme
  TrainConfig final_cfg;
  final_cfg.seed = mix_seed(1, best.tags);
  SnapshotMatrix train;
  train.data = art.sim.sensor_readings.data.leftCols(art.l1);
  train.dt = art.sim.sensor_readings.dt;
  train.t0 = art.sim.sensor_readings.t0;
  const SensorLayout layout =
      SensorLayout::sparse(art.sim.layout.grid, best.tags);
  FitReport report;
  const SpatioTemporalModel model =
      fit_offline(train, layout, art.sim.inputs.leftCols(art.l1), 0.99,
                  final_cfg, &report);
  EvaluationOptions opts;
  const EvaluationResult r = evaluate_stream(
      model, art.sim.sensor_readings, art.sim.inputs, truth, art.l1, opts);

  const double range = r.truth_max - r.truth_min;
  c.info("field dynamic range: " + std::to_string(range) + " degC");
  c.info("orders: n_s=" + std::to_string(report.n_sparse) +
         " n_f=" + std::to_string(report.n_full));
  c.info("train_rmse=" + std::to_string(r.train_rmse) +
         " test_rmse=" + std::to_string(r.test_rmse) + " (2% of range = " +
         std::to_string(0.02 * range) + ")");
  c.expect(range >= 5.0, "dynamic range below 5 degC");
  c.expect(r.test_rmse <= 0.02 * range,
           "testing RMSE above 2% of the dynamic range");
  c.expect(r.train_rmse <= 1.5 * r.test_rmse,
           "training RMSE above 1.5x testing RMSE");
}

void ordering(Criterion& c, const PipelineArtifacts& art) {
  const TrainConfig cfg = sweep_train_config(1);
  std::vector<SchemeResult> rows;
  for (int k = 1; k <= 16; ++k) {
    std::vector<int> tags(k);
    std::iota(tags.begin(), tags.end(), 1);
    rows.push_back(run_scheme(art, tags, cfg));
  }
  c.info("1-sensor test RMSE: " + std::to_string(rows[0].test_rmse));
  c.info("2-sensor test RMSE: " + std::to_string(rows[1].test_rmse));
  c.expect(rows[0].test_rmse >= 5.0 * rows[1].test_rmse,
           "k=1 testing RMSE is not 5x the k=2 one");

  // training-RMSE trend 2..16: non-increasing within a 20% band
  double running_min = rows[1].train_rmse;
  bool trend_ok = true;
  for (int k = 3; k <= 16; ++k) {
    const double v = rows[k - 1].train_rmse;
    if (v > 1.2 * running_min) {
      trend_ok = false;
      c.info("trend violation at k=" + std::to_string(k) + ": " +
             std::to_string(v) + " vs running min " +
             std::to_string(running_min));
    }
    running_min = std::min(running_min, v);
  }
  c.expect(trend_ok, "training RMSE trend leaves the 20% band");
}

std::string run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == 0 ? "" : ("exit " + std::to_string(rc) + ": " + cmd);
}

void scheme_sweep(Criterion& c, const std::string& cli,
                  const std::string& scratch) {
  // reduced dataset keeps the 15 trainings quick while exercising the real
  // CLI surface end to end
  fs::create_directories(scratch);
  const std::string ds = scratch + "/dataset";
  const std::string sweep_out = scratch + "/sweep";
  const std::string solo_out = scratch + "/solo";
  const std::string train_args =
      " --epochs 60 --hidden 8 --threshold 0.99 --seed 5 --train-count 300";

  std::string err = run_cli(
      cli, "simulate --out " + ds + " --duration 600 --seed 3");
  c.expect(err.empty(), "simulate failed: " + err);
  if (!err.empty()) return;

  err = run_cli(cli, "sweep-scheme --dataset " + ds + " --out " + sweep_out +
                         train_args);
  c.expect(err.empty(), "sweep-scheme failed: " + err);
  if (!err.empty()) return;

  // one row per candidate partner
  std::ifstream csv(sweep_out + "/sweep_scheme.csv");
  c.expect(csv.good(), "sweep_scheme.csv missing");
  std::string line;
  std::getline(csv, line);  // header
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  c.expect(rows == 15, "expected 15 scheme rows, got " + std::to_string(rows));

  json report;
  std::ifstream(sweep_out + "/report.json") >> report;
  const std::vector<int> winner =
      report["winner_s_tag"].get<std::vector<int>>();
  const double sweep_rmse = report["winner_test_rmse"].get<double>();
  c.info("winner s_tag: [" + std::to_string(winner[0]) + "," +
         std::to_string(winner[1]) + "] test_rmse=" +
         std::to_string(sweep_rmse));

  // the winner must be the row-wise argmin
  {
    std::ifstream csv2(sweep_out + "/sweep_scheme.csv");
    std::getline(csv2, line);
    double min_rmse = std::numeric_limits<double>::infinity();
    while (std::getline(csv2, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      for (int col = 0; col < 4; ++col) std::getline(ss, cell, ',');
      min_rmse = std::min(min_rmse, std::stod(cell));
    }
    c.expect(min_rmse == sweep_rmse,
             "winner test RMSE is not the sweep minimum");
  }

  // rerunning the winner standalone reproduces the RMSE bit for bit
  const std::string tags =
      std::to_string(winner[0]) + "," + std::to_string(winner[1]);
  err = run_cli(cli, "train --dataset " + ds + " --out " + solo_out +
                         " --sensors " + tags + train_args);
  c.expect(err.empty(), "standalone train failed: " + err);
  if (!err.empty()) return;
  err = run_cli(cli, "evaluate --dataset " + ds + " --model " + solo_out +
                         "/model.json --out " + solo_out + "/eval" +
                         train_args);
  c.expect(err.empty(), "standalone evaluate failed: " + err);
  if (!err.empty()) return;

  json summary;
  std::ifstream(solo_out + "/eval/summary.json") >> summary;
  const double solo_rmse = summary["test_rmse"].get<double>();
  c.expect(solo_rmse == sweep_rmse,
           "standalone rerun RMSE " + std::to_string(solo_rmse) +
               " != sweep RMSE " + std::to_string(sweep_rmse));
}

void metrics_oracles(Criterion& c) {
  c.expect(snae(Eigen::MatrixXd::Constant(5, 5, 0.75)) == 0.75,
           "constant SNAE");
  Eigen::MatrixXd two_cells(1, 2), areas(1, 2);
  two_cells << 0.0, 4.0;
  areas << 1.0, 3.0;
  c.expect(std::fabs(snae(two_cells, areas) - 3.0) <= 1e-15,
           "weighted-mean SNAE");
  const Eigen::MatrixXd konst = Eigen::MatrixXd::Constant(3, 3, 2.0);
  c.expect(rmse({konst, konst}) == 2.0, "constant RMSE");
  Eigen::MatrixXd cells(1, 2);
  cells << 3.0, 4.0;
  c.expect(std::fabs(rmse({cells}) - std::sqrt(12.5)) <= 1e-15,
           "sqrt(12.5) two-cell RMSE");
  c.expect(rmse({Eigen::MatrixXd::Zero(2, 2)}) == 0.0, "zero RMSE");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::string scratch =
      argc > 2 ? argv[2] : (fs::temp_directory_path() /
                            "sparsefield_acceptance").string();

  std::printf("[NOTE] paper RMSE tables derive from a proprietary battery "
              "experiment; property-based\n");
  std::printf("       acceptance below substitutes for them, plus the scaled "
              "simulator analogue.\n");

  run_criterion("separation suite", 5.0, separation_suite);
  run_criterion("completion suite", 5.0, completion_suite);
  run_criterion("spline suite", 30.0, spline_suite);
  run_criterion("temporal suite", 180.0, temporal_suite);

  PipelineArtifacts art;
  run_criterion("simulator dataset (shared by the pipeline criteria)", 0.0,
                [&](Criterion& c) {
                  art = make_default_dataset();
                  c.info(std::to_string(art.sim.sensor_readings.snapshots()) +
                         " snapshots, split at " + std::to_string(art.l1));
                });
  run_criterion("end-to-end sparse prediction", 600.0,
                [&](Criterion& c) { end_to_end(c, art); });
  run_criterion("sensor-count ordering", 0.0,
                [&](Criterion& c) { ordering(c, art); });
  if (!cli.empty()) {
    run_criterion("scheme sweep via the CLI", 0.0, [&](Criterion& c) {
      scheme_sweep(c, cli, scratch);
    });
  } else {
    std::printf("[SKIP] scheme sweep via the CLI (no CLI path given)\n");
    ++g_failures;
  }
  run_criterion("metric oracles", 0.0, metrics_oracles);

  std::printf("%s (%d failure%s)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              g_failures, g_failures == 1 ? "" : "s");
  return g_failures == 0 ? 0 : 1;
}
