#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sparsefield/simulator.hpp"

using namespace sparsefield;

namespace {

HeatSimConfig small_config() {
  HeatSimConfig cfg;
  cfg.nx = 24;
  cfg.ny = 32;
  cfg.duration = 30.0;
  cfg.snapshot_dt = 1.0;
  cfg.dt = 0.25;
  cfg.noise_std = 0.0;
  return cfg;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("ladder current basics") {
  const std::vector<double> one = ladder_current({{10.0, 100.0}}, 1.0);
  REQUIRE(one.size() == 100);
  for (double v : one) CHECK(v == 10.0);

  const std::vector<double> two =
      ladder_current({{10.0, 50.0}, {20.0, 50.0}}, 1.0);
  REQUIRE(two.size() == 100);
  CHECK(two[49] == 10.0);
  CHECK(two[50] == 20.0);

  // total duration within one sample of the sum of durations
  const std::vector<double> odd =
      ladder_current({{5.0, 12.3}, {7.0, 8.9}}, 0.7);
  CHECK(std::llabs(static_cast<long long>(odd.size()) -
                   std::llround((12.3 + 8.9) / 0.7)) <= 1);

  CHECK_THROWS_AS(ladder_current({}, 1.0), ConfigError);
  CHECK_THROWS_AS(ladder_current({{1.0, -3.0}}, 1.0), ConfigError);
}

TEST_CASE("stability guard rejects oversized steps") {
  HeatSimConfig cfg = small_config();
  cfg.dt = 10.0 * cfg.stability_limit();
  CHECK_THROWS_AS(simulate(cfg), ConfigError);
}

TEST_CASE("zero current stays at ambient") {
  HeatSimConfig cfg = small_config();
  cfg.profile = {{0.0, 30.0}};
  const SimulationResult sim = simulate(cfg);
  for (const Eigen::MatrixXd& frame : sim.truth) {
    CHECK(frame.minCoeff() == doctest::Approx(cfg.ambient).epsilon(1e-12));
    CHECK(frame.maxCoeff() == doctest::Approx(cfg.ambient).epsilon(1e-12));
  }
}

TEST_CASE("pure relaxation decays monotonically toward ambient") {
  HeatSimConfig cfg = small_config();
  cfg.profile = {{0.0, 30.0}};
  cfg.initial =
      Eigen::MatrixXd::Constant(cfg.nx, cfg.ny, cfg.ambient + 10.0);
  const SimulationResult sim = simulate(cfg);
  double prev = std::numeric_limits<double>::infinity();
  for (const Eigen::MatrixXd& frame : sim.truth) {
    const double dist = (frame.array() - cfg.ambient).abs().maxCoeff();
    CHECK(dist <= prev + 1e-12);
    CHECK((frame.array() >= cfg.ambient - 1e-12).all());
    prev = dist;
  }
  CHECK(prev < 10.0);
}

TEST_CASE("steady state peaks at a centered source") {
  HeatSimConfig cfg = small_config();
  cfg.source_x = 0.5 * cfg.width;
  cfg.source_y = 0.5 * cfg.length;
  cfg.duration = 600.0;
  cfg.profile = {{15.0, 600.0}};
  const SimulationResult sim = simulate(cfg);
  const Eigen::MatrixXd& last = sim.truth.back();
  Eigen::Index imax = 0, jmax = 0;
  last.maxCoeff(&imax, &jmax);
  const double dx = cfg.width / cfg.nx;
  const double dy = cfg.length / cfg.ny;
  CHECK(std::fabs(sim.x_fine[imax] - cfg.source_x) <= dx);
  CHECK(std::fabs(sim.y_fine[jmax] - cfg.source_y) <= dy);
}

TEST_CASE("centerline symmetry is preserved") {
  HeatSimConfig cfg = small_config();
  cfg.source_x = 0.5 * cfg.width;  // on the x centerline
  cfg.duration = 40.0;
  cfg.profile = {{18.0, 40.0}};
  const SimulationResult sim = simulate(cfg);
  for (const Eigen::MatrixXd& frame : sim.truth) {
    for (int j = 0; j < cfg.ny; ++j)
      for (int i = 0; i < cfg.nx / 2; ++i)
        CHECK(std::fabs(frame(i, j) - frame(cfg.nx - 1 - i, j)) <= 1e-9);
  }
}

TEST_CASE("maximum principle with a rough initial field") {
  // no source; every update is a convex combination of neighbours and the
  // ambient value, so values stay inside the initial hull (ambient included)
  HeatSimConfig cfg = small_config();
  cfg.profile = {{0.0, 30.0}};
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unif(0.0, 50.0);
  cfg.initial.resize(cfg.nx, cfg.ny);
  for (int j = 0; j < cfg.ny; ++j)
    for (int i = 0; i < cfg.nx; ++i) cfg.initial(i, j) = unif(rng);
  const double lo = std::min(cfg.initial.minCoeff(), cfg.ambient);
  const double hi = std::max(cfg.initial.maxCoeff(), cfg.ambient);
  const SimulationResult sim = simulate(cfg);
  for (const Eigen::MatrixXd& frame : sim.truth) {
    CHECK(frame.maxCoeff() <= hi + 1e-9);
    CHECK(frame.minCoeff() >= lo - 1e-9);
  }
}

TEST_CASE("discrete energy budget closes") {
  // with zero-flux walls the diffusion term moves no net heat, so between
  // consecutive snapshots: mean(T_new) - mean(T_old) =
  //   dt * (gain * I^2 * mean(q) - h * (mean(T) - ambient)) summed per step.
  // Check the one-step version on a very coarse run.
  HeatSimConfig cfg = small_config();
  cfg.snapshot_dt = cfg.dt;  // one solver step per snapshot
  cfg.duration = 5.0;
  cfg.profile = {{12.0, 5.0}};
  const SimulationResult sim = simulate(cfg);

  Eigen::MatrixXd q(cfg.nx, cfg.ny);
  for (int j = 0; j < cfg.ny; ++j)
    for (int i = 0; i < cfg.nx; ++i) {
      const double rx = sim.x_fine[i] - cfg.source_x;
      const double ry = sim.y_fine[j] - cfg.source_y;
      q(i, j) = std::exp(-(rx * rx + ry * ry) /
                         (2 * cfg.source_radius * cfg.source_radius));
    }

  Eigen::MatrixXd prev = Eigen::MatrixXd::Constant(cfg.nx, cfg.ny, cfg.ambient);
  for (std::size_t k = 0; k < sim.truth.size(); ++k) {
    const double injected = cfg.source_gain * 144.0 * q.mean();
    const double convected = cfg.convection * (prev.mean() - cfg.ambient);
    const double expected = cfg.dt * (injected - convected);
    const double actual = sim.truth[k].mean() - prev.mean();
    CHECK(actual == doctest::Approx(expected).epsilon(0.01));
    prev = sim.truth[k];
  }
}

TEST_CASE("same seed reproduces the readings bit for bit") {
  HeatSimConfig cfg = small_config();
  cfg.noise_std = 0.05;
  cfg.seed = 77;
  const SimulationResult a = simulate(cfg);
  const SimulationResult b = simulate(cfg);
  CHECK(a.sensor_readings.data == b.sensor_readings.data);
  CHECK(a.inputs == b.inputs);
}

TEST_CASE("noise-free readings equal the interpolated truth") {
  HeatSimConfig cfg = small_config();
  cfg.profile = {{14.0, 30.0}};
  const SimulationResult sim = simulate(cfg);
  const Grid2D& grid = sim.layout.grid;
  for (int k = 0; k < sim.sensor_readings.snapshots(); k += 7) {
    for (int s = 0; s < 16; ++s) {
      const double expect = bilinear_sample(
          sim.truth[k], sim.x_fine, sim.y_fine,
          grid.x_coords[s / 4], grid.y_coords[s % 4]);
      CHECK(sim.sensor_readings.data(s, k) == expect);
    }
  }
}

TEST_CASE("snapshot bookkeeping matches the configuration") {
  HeatSimConfig cfg = small_config();
  const SimulationResult sim = simulate(cfg);
  CHECK(sim.sensor_readings.snapshots() == 30);
  CHECK(sim.sensor_readings.t0 == 1.0);
  CHECK(sim.sensor_readings.dt == 1.0);
  CHECK(sim.snapshot_times.front() == 1.0);
  CHECK(sim.snapshot_times.back() == 30.0);
  CHECK(sim.inputs.cols() == 30);
  CHECK(sim.inputs(1, 0) == sim.inputs(0, 0) * sim.inputs(0, 0));
}

}  // TEST_SUITE
