#include "sparsefield/simulator.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sparsefield/kernels.hpp"

namespace sparsefield {

std::vector<CurrentStep> HeatSimConfig::default_profile() {
  return {{8.0, 400.0}, {20.0, 400.0}, {12.0, 400.0},
          {18.0, 400.0}, {10.0, 400.0}};
}

double HeatSimConfig::stability_limit() const {
  const double dx = width / nx;
  const double dy = length / ny;
  return dx * dx * dy * dy / (2.0 * diffusivity * (dx * dx + dy * dy));
}

void HeatSimConfig::validate() const {
  if (width <= 0 || length <= 0 || diffusivity <= 0 || convection <= 0 ||
      source_radius <= 0 || source_gain <= 0 || nx < 2 || ny < 2 || dt <= 0 ||
      duration <= 0 || snapshot_dt <= 0 || noise_std < 0)
    throw ConfigError("simulator parameters must be positive");
  if (sensor_nx < 4 || sensor_ny < 4)
    throw ConfigError("sensor grid must be at least 4x4");
  if (dt > stability_limit())
    throw ConfigError("explicit scheme unstable: dt=" + std::to_string(dt) +
                      " exceeds the stability limit " +
                      std::to_string(stability_limit()));
  const double steps = snapshot_dt / dt;
  if (std::fabs(steps - std::round(steps)) > 1e-9)
    throw ConfigError("snapshot_dt must be an integer multiple of dt");
  if (initial.size() > 0) {
    if (initial.rows() != nx || initial.cols() != ny)
      throw ConfigError("initial field must match the fine grid");
    if (!initial.allFinite())
      throw ConfigError("initial field must be finite");
  }
}

std::vector<double> ladder_current(const std::vector<CurrentStep>& levels,
                                   double dt) {
  if (levels.empty()) throw ConfigError("empty current profile");
  double total = 0.0;
  for (const CurrentStep& s : levels) {
    if (s.seconds <= 0.0)
      throw ConfigError("current step durations must be positive");
    total += s.seconds;
  }
  const auto n = static_cast<std::size_t>(std::llround(total / dt));
  std::vector<double> series(n);
  std::size_t level = 0;
  double level_end = levels[0].seconds;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (k + 0.5) * dt;
    while (t >= level_end && level + 1 < levels.size())
      level_end += levels[++level].seconds;
    series[k] = levels[level].amps;
  }
  return series;
}

namespace {

double current_at(const std::vector<CurrentStep>& levels, double t) {
  double end = 0.0;
  for (const CurrentStep& s : levels) {
    end += s.seconds;
    if (t < end) return s.amps;
  }
  return levels.back().amps;
}

}  // namespace

SimulationResult simulate(const HeatSimConfig& cfg_in) {
  HeatSimConfig cfg = cfg_in;
  if (cfg.profile.empty()) cfg.profile = HeatSimConfig::default_profile();
  cfg.validate();

  const int nx = cfg.nx, ny = cfg.ny;
  const double dx = cfg.width / nx;
  const double dy = cfg.length / ny;

  SimulationResult result;
  result.x_fine.resize(nx);
  result.y_fine.resize(ny);
  for (int i = 0; i < nx; ++i) result.x_fine[i] = (i + 0.5) * dx;
  for (int j = 0; j < ny; ++j) result.y_fine[j] = (j + 0.5) * dy;

  // Gaussian heating footprint, peak 1 at the source center
  Eigen::MatrixXd q(nx, ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double rx = result.x_fine[i] - cfg.source_x;
      const double ry = result.y_fine[j] - cfg.source_y;
      q(i, j) = std::exp(-(rx * rx + ry * ry) /
                         (2.0 * cfg.source_radius * cfg.source_radius));
    }
  }

  const double cx = cfg.dt * cfg.diffusivity / (dx * dx);
  const double cy = cfg.dt * cfg.diffusivity / (dy * dy);
  kernels::StencilCoefs coefs;
  coefs.c_x = cx;
  coefs.c_y = cy;
  coefs.c_center = 1.0 - 2.0 * cx - 2.0 * cy - cfg.dt * cfg.convection;
  coefs.c_const = cfg.dt * cfg.convection * cfg.ambient;
  coefs.c_source = 0.0;  // set per step from the current level

  Eigen::MatrixXd temp = cfg.initial.size() > 0
                             ? cfg.initial
                             : Eigen::MatrixXd::Constant(nx, ny, cfg.ambient);
  Eigen::MatrixXd next(nx, ny);

  const int steps_per_snapshot =
      static_cast<int>(std::llround(cfg.snapshot_dt / cfg.dt));
  const int n_snapshots =
      static_cast<int>(std::llround(cfg.duration / cfg.snapshot_dt));
  const long total_steps = static_cast<long>(steps_per_snapshot) * n_snapshots;

  const Grid2D sensor_grid =
      Grid2D::uniform(cfg.sensor_nx, cfg.sensor_ny, cfg.width, cfg.length);
  result.layout = SensorLayout::full(sensor_grid);
  const int n_sensors = sensor_grid.sensor_count();

  result.truth.reserve(n_snapshots);
  result.snapshot_times.reserve(n_snapshots);
  result.sensor_readings.data.resize(n_sensors, n_snapshots);
  result.sensor_readings.dt = cfg.snapshot_dt;
  result.sensor_readings.t0 = cfg.snapshot_dt;
  result.inputs.resize(2, n_snapshots);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  // one column of the field per stencil call: x runs contiguously down a
  // column, y neighbours are the adjacent columns (mirrored at the walls)
  auto advance_one_step = [&](double amps) {
    coefs.c_source = cfg.dt * cfg.source_gain * amps * amps;
    for (int j = 0; j < ny; ++j) {
      const double* cen = temp.col(j).data();
      const double* up = temp.col(j > 0 ? j - 1 : j).data();
      const double* dn = temp.col(j + 1 < ny ? j + 1 : j).data();
      const double* src = q.col(j).data();
      double* out = next.col(j).data();
      // zero-flux walls along x: the ghost neighbour equals the wall cell
      out[0] = coefs.c_center * cen[0] + coefs.c_x * (cen[0] + cen[1]) +
               coefs.c_y * (up[0] + dn[0]) + coefs.c_source * src[0] +
               coefs.c_const;
      const int last = nx - 1;
      out[last] = coefs.c_center * cen[last] +
                  coefs.c_x * (cen[last - 1] + cen[last]) +
                  coefs.c_y * (up[last] + dn[last]) +
                  coefs.c_source * src[last] + coefs.c_const;
      if (nx > 2)
        kernels::stencil_row(up + 1, cen + 1, dn + 1, src + 1, out + 1,
                             nx - 2, coefs);
    }
    temp.swap(next);
  };

  int snapshot = 0;
  for (long step = 1; step <= total_steps; ++step) {
    const double t_mid = (step - 0.5) * cfg.dt;
    advance_one_step(current_at(cfg.profile, t_mid));
    if (step % steps_per_snapshot == 0) {
      const double t = step * cfg.dt;
      result.truth.push_back(temp);
      result.snapshot_times.push_back(t);
      for (int s = 0; s < n_sensors; ++s) {
        const int ix = s / sensor_grid.ny;
        const int iy = s % sensor_grid.ny;
        double value =
            bilinear_sample(temp, result.x_fine, result.y_fine,
                            sensor_grid.x_coords[ix], sensor_grid.y_coords[iy]);
        if (cfg.noise_std > 0.0) value += cfg.noise_std * noise(rng);
        result.sensor_readings.data(s, snapshot) = value;
      }
      // current over the interval ending at this snapshot
      const double amps =
          current_at(cfg.profile, t - 0.5 * cfg.snapshot_dt);
      result.inputs(0, snapshot) = amps;
      result.inputs(1, snapshot) = amps * amps;
      ++snapshot;
    }
  }
  return result;
}

}  // namespace sparsefield
