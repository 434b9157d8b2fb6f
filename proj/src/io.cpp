#include "sparsefield/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace sparsefield {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_row(std::string& out, const double* values, Eigen::Index n) {
  char buf[40];
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out.push_back(',');
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    out += buf;
  }
  out.push_back('\n');
}

const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw SchemaError(where + ": expected a 2-d numeric array");
  const Eigen::Index rows = j.size();
  const Eigen::Index cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols)
      throw SchemaError(where + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array())
    throw SchemaError(where + ": expected a numeric array");
  Eigen::VectorXd v(j.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

std::vector<double> dvec_from_json(const json& j, const std::string& where) {
  if (!j.is_array())
    throw SchemaError(where + ": expected a numeric array");
  std::vector<double> v(j.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json layout_to_json(const SensorLayout& layout) {
  json grid;
  grid["nx"] = layout.grid.nx;
  grid["ny"] = layout.grid.ny;
  grid["x_coords"] = layout.grid.x_coords;
  grid["y_coords"] = layout.grid.y_coords;
  json out;
  out["n_full"] = layout.n_full;
  out["tags"] = layout.tags;
  out["grid"] = std::move(grid);
  return out;
}

SensorLayout layout_from_json(const json& j, const std::string& where) {
  const json& jg = require(j, "grid", where);
  Grid2D grid;
  grid.nx = require(jg, "nx", where).get<int>();
  grid.ny = require(jg, "ny", where).get<int>();
  grid.x_coords = dvec_from_json(require(jg, "x_coords", where), where);
  grid.y_coords = dvec_from_json(require(jg, "y_coords", where), where);
  SensorLayout layout;
  layout.grid = std::move(grid);
  layout.n_full = require(j, "n_full", where).get<int>();
  layout.tags = require(j, "tags", where).get<std::vector<int>>();
  layout.validate();
  return layout;
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void check_schema(const json& j, const char* kind, const std::string& where) {
  const int version = require(j, "schema_version", where).get<int>();
  if (version != kSchemaVersion)
    throw SchemaError(where + ": unsupported schema version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  const std::string k = require(j, "kind", where).get<std::string>();
  if (k != kind)
    throw SchemaError(where + ": kind '" + k + "' is not '" + kind + "'");
}

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.csv", index);
  return buf;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path);
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<double>* header) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 20 + 64);
  if (header) append_row(out, header->data(), header->size());
  std::vector<double> row(m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    append_row(out, row.data(), row.size());
  }
  write_text_atomic(path, out);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                std::vector<double>* header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> values;
    std::size_t start = 0;
    int col = 0;
    while (start <= line.size()) {
      ++col;
      std::size_t comma = line.find(',', start);
      const std::string token =
          line.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        values.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(path + ": bad number at row " +
                         std::to_string(line_no) + ", column " +
                         std::to_string(col));
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(path + ": empty file");

  std::size_t first_data = 0;
  if (header) {
    *header = rows[0];
    first_data = 1;
    if (rows.size() == 1) throw ParseError(path + ": header but no data rows");
  }
  const std::size_t cols = rows[first_data].size();
  Eigen::MatrixXd m(rows.size() - first_data, cols);
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      throw ParseError(path + ": row " + std::to_string(r + 1) + " has " +
                       std::to_string(rows[r].size()) + " columns, expected " +
                       std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c)
      m(r - first_data, c) = rows[r][c];
  }
  return m;
}

void save_dataset(const std::string& dir, const SimulationResult& sim,
                  bool with_truth) {
  fs::create_directories(dir);
  const fs::path base(dir);

  std::vector<double> times(sim.sensor_readings.snapshots());
  for (int k = 0; k < sim.sensor_readings.snapshots(); ++k)
    times[k] = sim.sensor_readings.time_at(k);

  write_matrix_csv((base / "snapshots.csv").string(),
                   sim.sensor_readings.data, &times);
  write_matrix_csv((base / "inputs.csv").string(), sim.inputs, &times);
  write_text_atomic((base / "layout.json").string(),
                    layout_to_json(sim.layout).dump(2) + "\n");

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["kind"] = "sparsefield-dataset";
  manifest["dt"] = sim.sensor_readings.dt;
  manifest["t0"] = sim.sensor_readings.t0;
  manifest["files"] = {{"snapshots", "snapshots.csv"},
                       {"inputs", "inputs.csv"},
                       {"layout", "layout.json"}};
  manifest["provenance"] = "sparsefield simulate";

  if (with_truth) {
    fs::create_directories(base / "truth");
    for (std::size_t k = 0; k < sim.truth.size(); ++k)
      write_matrix_csv((base / "truth" / frame_name(static_cast<int>(k) + 1))
                           .string(),
                       sim.truth[k]);
    json truth;
    truth["dir"] = "truth";
    truth["count"] = sim.truth.size();
    truth["x_coords"] = sim.x_fine;
    truth["y_coords"] = sim.y_fine;
    manifest["truth"] = std::move(truth);
  }

  write_text_atomic((base / "manifest.json").string(),
                    manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir) {
  const fs::path base(dir);
  const std::string manifest_path = (base / "manifest.json").string();
  const json manifest = parse_json_file(manifest_path);
  check_schema(manifest, "sparsefield-dataset", manifest_path);

  const json& files = require(manifest, "files", manifest_path);

  Dataset ds;
  ds.snapshots.dt = require(manifest, "dt", manifest_path).get<double>();
  ds.snapshots.t0 = require(manifest, "t0", manifest_path).get<double>();

  std::vector<double> header;
  ds.snapshots.data = read_matrix_csv(
      (base / require(files, "snapshots", manifest_path).get<std::string>())
          .string(),
      &header);
  ds.inputs = read_matrix_csv(
      (base / require(files, "inputs", manifest_path).get<std::string>())
          .string(),
      &header);
  const std::string layout_path =
      (base / require(files, "layout", manifest_path).get<std::string>())
          .string();
  ds.layout = layout_from_json(parse_json_file(layout_path), layout_path);

  if (ds.inputs.cols() != ds.snapshots.data.cols())
    throw SchemaError(dir + ": inputs and snapshots disagree on length");
  if (ds.snapshots.data.rows() != ds.layout.n_full)
    throw SchemaError(dir + ": snapshot rows do not match the layout");

  if (manifest.contains("truth")) {
    const json& jt = manifest["truth"];
    ds.has_truth = true;
    ds.x_fine = dvec_from_json(require(jt, "x_coords", manifest_path),
                               manifest_path);
    ds.y_fine = dvec_from_json(require(jt, "y_coords", manifest_path),
                               manifest_path);
    const int count = require(jt, "count", manifest_path).get<int>();
    if (count != ds.snapshots.data.cols())
      throw SchemaError(dir + ": truth frame count does not match snapshots");
    const fs::path truth_dir =
        base / require(jt, "dir", manifest_path).get<std::string>();
    ds.truth.reserve(count);
    for (int k = 1; k <= count; ++k) {
      Eigen::MatrixXd frame =
          read_matrix_csv((truth_dir / frame_name(k)).string());
      if (frame.rows() != static_cast<Eigen::Index>(ds.x_fine.size()) ||
          frame.cols() != static_cast<Eigen::Index>(ds.y_fine.size()))
        throw SchemaError(dir + ": truth frame " + std::to_string(k) +
                          " has the wrong shape");
      ds.truth.push_back(std::move(frame));
    }
  }
  return ds;
}

namespace {

json scaler_to_json(const Scaler& s) {
  json out;
  out["mean"] = vector_to_json(s.mean);
  out["stddev"] = vector_to_json(s.stddev);
  return out;
}

Scaler scaler_from_json(const json& j, const std::string& where) {
  Scaler s;
  s.mean = vector_from_json(require(j, "mean", where), where + ".mean");
  s.stddev = vector_from_json(require(j, "stddev", where), where + ".stddev");
  if (s.mean.size() != s.stddev.size())
    throw SchemaError(where + ": mean/stddev length mismatch");
  return s;
}

json train_config_to_json(const TrainConfig& c) {
  json out;
  out["epochs"] = c.epochs;
  out["learning_rate"] = c.learning_rate;
  out["bptt_window"] = c.bptt_window;
  out["batch_size"] = c.batch_size;
  out["seed"] = c.seed;
  out["validation_fraction"] = c.validation_fraction;
  out["patience"] = c.patience;
  out["hidden_dim"] = c.hidden_dim;
  out["current_input"] = c.current_input;
  return out;
}

TrainConfig train_config_from_json(const json& j, const std::string& where) {
  TrainConfig c;
  c.epochs = require(j, "epochs", where).get<int>();
  c.learning_rate = require(j, "learning_rate", where).get<double>();
  c.bptt_window = require(j, "bptt_window", where).get<int>();
  c.batch_size = require(j, "batch_size", where).get<int>();
  c.seed = require(j, "seed", where).get<std::uint64_t>();
  c.validation_fraction =
      require(j, "validation_fraction", where).get<double>();
  c.patience = require(j, "patience", where).get<int>();
  c.hidden_dim = require(j, "hidden_dim", where).get<int>();
  c.current_input = require(j, "current_input", where).get<bool>();
  return c;
}

json basis_to_json(const SbfBasis& b) {
  json out;
  out["order"] = b.order;
  out["modes"] = matrix_to_json(b.modes);
  out["energies"] = vector_to_json(b.energies);
  return out;
}

SbfBasis basis_from_json(const json& j, const std::string& where) {
  SbfBasis b;
  b.order = require(j, "order", where).get<int>();
  b.modes = matrix_from_json(require(j, "modes", where), where + ".modes");
  b.energies =
      vector_from_json(require(j, "energies", where), where + ".energies");
  if (b.modes.cols() != b.order)
    throw SchemaError(where + ".modes has " + std::to_string(b.modes.cols()) +
                      " columns, expected order " + std::to_string(b.order));
  return b;
}

}  // namespace

void save_model(const std::string& path, const SpatioTemporalModel& model) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "sparsefield-model";
  j["order"] = model.order;
  j["layout"] = layout_to_json(model.layout);
  j["basis_sparse"] = basis_to_json(model.basis_sparse);
  j["basis_full"] = basis_to_json(model.basis_full);

  json completion;
  completion["recovery"] = matrix_to_json(model.completion.recovery);
  completion["condition"] = model.completion.condition;
  completion["rcond"] = model.completion.rcond;
  j["completion"] = std::move(completion);

  json surfaces;
  if (model.surfaces.order() > 0) {
    const SplineSurface& first = model.surfaces.surfaces.front();
    surfaces["knots_u"] = first.knots_u.knots;
    surfaces["knots_w"] = first.knots_w.knots;
    surfaces["x_coords"] = first.x_coords;
    surfaces["y_coords"] = first.y_coords;
    json nets = json::array();
    for (const SplineSurface& s : model.surfaces.surfaces)
      nets.push_back(matrix_to_json(s.control));
    surfaces["control"] = std::move(nets);
  }
  j["surfaces"] = std::move(surfaces);

  json lstm;
  lstm["in_dim"] = model.temporal.in_dim;
  lstm["hidden"] = model.temporal.hidden;
  lstm["out_dim"] = model.temporal.out_dim;
  lstm["theta"] = vector_to_json(model.temporal.theta);
  lstm["input_scaler"] = scaler_to_json(model.temporal.input_scaler);
  lstm["target_scaler"] = scaler_to_json(model.temporal.target_scaler);
  lstm["config"] = train_config_to_json(model.temporal.config);
  j["lstm"] = std::move(lstm);

  write_text_atomic(path, j.dump() + "\n");
}

SpatioTemporalModel load_model(const std::string& path) {
  const json j = parse_json_file(path);
  check_schema(j, "sparsefield-model", path);

  SpatioTemporalModel model;
  model.order = require(j, "order", path).get<int>();
  model.layout = layout_from_json(require(j, "layout", path), path);
  model.basis_sparse =
      basis_from_json(require(j, "basis_sparse", path), path + ": basis_sparse");
  model.basis_full =
      basis_from_json(require(j, "basis_full", path), path + ": basis_full");

  const json& jc = require(j, "completion", path);
  model.completion.recovery = matrix_from_json(
      require(jc, "recovery", path), path + ": completion.recovery");
  model.completion.condition = require(jc, "condition", path).get<double>();
  model.completion.rcond = require(jc, "rcond", path).get<double>();
  model.completion.basis_sparse = model.basis_sparse;
  model.completion.basis_full = model.basis_full;
  model.completion.mapping = build_mapping_matrix(model.layout);

  const json& js = require(j, "surfaces", path);
  KnotVector ku, kw;
  ku.knots = dvec_from_json(require(js, "knots_u", path), path);
  kw.knots = dvec_from_json(require(js, "knots_w", path), path);
  ku.n_points = static_cast<int>(ku.knots.size()) - 4;
  kw.n_points = static_cast<int>(kw.knots.size()) - 4;
  const std::vector<double> sx =
      dvec_from_json(require(js, "x_coords", path), path);
  const std::vector<double> sy =
      dvec_from_json(require(js, "y_coords", path), path);
  const json& nets = require(js, "control", path);
  for (std::size_t i = 0; i < nets.size(); ++i) {
    SplineSurface s;
    s.control = matrix_from_json(
        nets[i], path + ": surfaces.control[" + std::to_string(i) + "]");
    if (s.control.rows() != ku.n_points || s.control.cols() != kw.n_points)
      throw SchemaError(path + ": surfaces.control[" + std::to_string(i) +
                        "] does not match the knot vectors");
    s.knots_u = ku;
    s.knots_w = kw;
    s.x_coords = sx;
    s.y_coords = sy;
    model.surfaces.surfaces.push_back(std::move(s));
  }

  const json& jl = require(j, "lstm", path);
  LstmModel& lstm = model.temporal;
  lstm.in_dim = require(jl, "in_dim", path).get<int>();
  lstm.hidden = require(jl, "hidden", path).get<int>();
  lstm.out_dim = require(jl, "out_dim", path).get<int>();
  lstm.theta = vector_from_json(require(jl, "theta", path), path + ": lstm.theta");
  const int expected =
      LstmModel::parameter_count(lstm.in_dim, lstm.hidden, lstm.out_dim);
  if (lstm.theta.size() != expected)
    throw SchemaError(path + ": lstm.theta has length " +
                      std::to_string(lstm.theta.size()) + ", expected " +
                      std::to_string(expected));
  lstm.input_scaler = scaler_from_json(require(jl, "input_scaler", path),
                                       path + ": lstm.input_scaler");
  lstm.target_scaler = scaler_from_json(require(jl, "target_scaler", path),
                                        path + ": lstm.target_scaler");
  if (lstm.input_scaler.mean.size() != lstm.in_dim)
    throw SchemaError(path + ": lstm.input_scaler does not match in_dim");
  if (lstm.target_scaler.mean.size() != lstm.out_dim)
    throw SchemaError(path + ": lstm.target_scaler does not match out_dim");
  lstm.config = train_config_from_json(require(jl, "config", path),
                                       path + ": lstm.config");

  model.validate();
  return model;
}

void emit_heatmap(const Eigen::MatrixXd& values, const std::string& prefix) {
  if (values.size() == 0) throw DimensionError("empty heatmap grid");
  if (!values.allFinite())
    throw ConfigError("heatmap values must be finite");
  write_matrix_csv(prefix + ".csv", values);

  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi - lo;

  std::string pgm;
  pgm += "P2\n";
  pgm += "# min=" + fmt17(lo) + " max=" + fmt17(hi) + "\n";
  pgm += std::to_string(values.cols()) + " " + std::to_string(values.rows()) +
         "\n255\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const int pixel =
          span > 0.0 ? static_cast<int>(
                           std::llround((values(r, c) - lo) / span * 255.0))
                     : 0;
      if (c) pgm.push_back(' ');
      pgm += std::to_string(pixel);
    }
    pgm.push_back('\n');
  }
  write_text_atomic(prefix + ".pgm", pgm);
}

}  // namespace sparsefield
