#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sparsefield/simulator.hpp"
#include "sparsefield/synthesis.hpp"

namespace sparsefield {

// On-disk dataset layout (schema 1):
//   manifest.json      file names, dt/t0, truth-grid coordinates, provenance
//   snapshots.csv      header row = timestamps, one row per sensor
//   inputs.csv         same shape for the system inputs
//   layout.json        sensor grid and tag list
//   truth/frame_%06d.csv   optional fine-grid truth, one file per snapshot
struct Dataset {
  SnapshotMatrix snapshots;
  Eigen::MatrixXd inputs;
  SensorLayout layout;
  bool has_truth = false;
  std::vector<Eigen::MatrixXd> truth;
  std::vector<double> x_fine, y_fine;
};

void save_dataset(const std::string& dir, const SimulationResult& sim,
                  bool with_truth = true);
Dataset load_dataset(const std::string& dir);

void save_model(const std::string& path, const SpatioTemporalModel& model);
SpatioTemporalModel load_model(const std::string& path);

// Writes <prefix>.csv and <prefix>.pgm (ASCII P2, min->0, max->255,
// min/max recorded in the comment line; a constant grid maps to all zeros).
void emit_heatmap(const Eigen::MatrixXd& values, const std::string& prefix);

// CSV helpers (17 significant digits, exact round-trip).
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<double>* header = nullptr);
Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                std::vector<double>* header = nullptr);

// Whole-file atomic write (temp file + rename).
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace sparsefield
