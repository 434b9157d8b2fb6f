#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sparsefield/field.hpp"

namespace sparsefield {

struct CurrentStep {
  double amps = 0.0;
  double seconds = 0.0;
};

// Synthetic ground truth: explicit finite differences for
//   dT/dt = kappa * lap(T) + gain * q(x,y) * I(t)^2 - h * (T - ambient)
// on a plate with zero-flux boundaries. q is a Gaussian bump near one short
// edge standing in for the hot terminal.
struct HeatSimConfig {
  double width = 0.150;    // m, x extent
  double length = 0.200;   // m, y extent
  double ambient = 25.0;   // degC
  double diffusivity = 1e-5;  // m^2/s
  double convection = 5e-3;   // 1/s
  double source_x = 0.5 * 0.150;
  double source_y = 0.8 * 0.200;
  double source_radius = 0.05;   // m
  double source_gain = 5e-4;     // degC/s per A^2 at the bump peak
  int nx = 60;
  int ny = 80;
  double dt = 0.1;          // s, solver step
  double duration = 2000.0;  // s
  double snapshot_dt = 1.0;  // s, sampling interval of the dataset
  std::vector<CurrentStep> profile;  // empty selects default_profile()
  double noise_std = 0.05;  // degC, sensor noise
  std::uint64_t seed = 1;
  int sensor_nx = 4;
  int sensor_ny = 4;
  Eigen::MatrixXd initial;  // nx x ny start field; empty: uniform ambient

  static std::vector<CurrentStep> default_profile();
  double stability_limit() const;
  void validate() const;
};

struct SimulationResult {
  std::vector<Eigen::MatrixXd> truth;  // one nx x ny frame per snapshot
  std::vector<double> snapshot_times;
  std::vector<double> x_fine, y_fine;  // fine-grid cell centers
  SnapshotMatrix sensor_readings;      // N_f x L, noise included
  Eigen::MatrixXd inputs;              // 2 x L: [I(t); I(t)^2]
  SensorLayout layout;                 // full-sensing layout
};

// Piecewise-constant current sampled at dt (midpoint of each interval).
std::vector<double> ladder_current(const std::vector<CurrentStep>& levels,
                                   double dt);

SimulationResult simulate(const HeatSimConfig& cfg);

}  // namespace sparsefield
