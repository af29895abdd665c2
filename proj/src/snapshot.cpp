#include "hesskit/snapshot.hpp"

#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "hesskit/numerics.hpp"

namespace hesskit {

using Json = nlohmann::ordered_json;

Snapshot capture(const Network& net, const std::vector<Vector>& gradients,
                 const std::vector<LocalHessian>& hessians, const MetricReport& metrics,
                 long iteration, const SnapshotMeta& meta) {
  const std::size_t n_blocks = net.blocks.size();
  if (gradients.size() != n_blocks || hessians.size() != n_blocks) {
    throw std::invalid_argument("capture: gradients/hessians misaligned with blocks");
  }

  Snapshot snap;
  snap.run_id = meta.run_id;
  snap.variant = meta.variant;
  snap.dataset = meta.dataset;
  snap.iteration = iteration;
  snap.scores = metrics;

  for (std::size_t i = 0; i < n_blocks; ++i) {
    const FunctionalBlock& block = net.blocks[i];
    const Index p = block.param_count();
    const Index wn = block.weights.size();
    if (gradients[i].size() != p) {
      throw std::invalid_argument("capture: gradient size mismatch at block " + std::to_string(i));
    }
    if (hessians[i].matrix.rows() != p || hessians[i].matrix.cols() != p) {
      throw std::invalid_argument("capture: hessian size mismatch at block " + std::to_string(i));
    }

    LayerRecord rec;
    const Vector theta = block.flatten_parameters();
    rec.weights = theta.head(wn);
    rec.bias = block.bias;
    rec.gradient = gradients[i].head(wn);
    rec.bias_gradient = gradients[i].tail(block.bias.size());

    rec.weights_spectral = series_summary(rec.weights);
    rec.gradient_spectral = series_summary(rec.gradient);
    rec.bias_spectral = series_summary(rec.bias);
    rec.bias_gradient_spectral = series_summary(rec.bias_gradient);

    const HessianSpectrum spectrum = hessian_spectrum(hessians[i]);
    rec.hessian_eigens = spectrum.eigenvalues;
    rec.hessian_rank = spectrum.rank;
    rec.hessian_condition = spectrum.condition;
    rec.hessian_condition_infinite = spectrum.condition_infinite;

    // summary over the raw matrix entries, row-major
    Vector entries(hessians[i].matrix.size());
    Index pos = 0;
    for (Index r = 0; r < p; ++r) {
      for (Index c = 0; c < p; ++c) entries[pos++] = hessians[i].matrix(r, c);
    }
    rec.hessian_spectral = series_summary(entries);
    rec.hessian_eigens_spectral = series_summary(rec.hessian_eigens);

    rec.hessian_stored = p <= meta.hessian_store_cap;
    if (rec.hessian_stored) rec.hessian = hessians[i].matrix;

    snap.layers.push_back(std::move(rec));
  }
  return snap;
}

namespace {

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const Json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  Index i = 0;
  for (const auto& x : arr) v[i++] = x.get<double>();
  return v;
}

Json summary_to_json(const SpectralSummary& s) {
  Json j;
  j["mean"] = s.mean;
  j["std"] = s.std;
  j["min"] = s.min;
  j["max"] = s.max;
  j["histogram"] = Json{{"bin_edges", vector_to_json(s.histogram.bin_edges)},
                        {"counts", s.histogram.counts}};
  j["welch"] = vector_to_json(s.welch);
  j["welch_window"] = s.welch_window;
  Json peaks = Json::array();
  for (const auto& p : s.top_peaks) {
    peaks.push_back(Json{{"bin", p.bin}, {"frequency", p.frequency}, {"power", p.power}});
  }
  j["top_peaks"] = peaks;
  return j;
}

SpectralSummary summary_from_json(const Json& j) {
  SpectralSummary s;
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.min = j.at("min").get<double>();
  s.max = j.at("max").get<double>();
  s.histogram.bin_edges = vector_from_json(j.at("histogram").at("bin_edges"));
  s.histogram.counts = j.at("histogram").at("counts").get<std::vector<std::uint64_t>>();
  s.welch = vector_from_json(j.at("welch"));
  s.welch_window = j.at("welch_window").get<std::size_t>();
  for (const auto& pj : j.at("top_peaks")) {
    Peak p;
    p.bin = pj.at("bin").get<Index>();
    p.frequency = pj.at("frequency").get<double>();
    p.power = pj.at("power").get<double>();
    s.top_peaks.push_back(p);
  }
  return s;
}

Json layer_to_json(const LayerRecord& rec) {
  Json j;
  j["weights"] = vector_to_json(rec.weights);
  j["weights_spectral"] = summary_to_json(rec.weights_spectral);
  j["gradient"] = vector_to_json(rec.gradient);
  j["gradient_spectral"] = summary_to_json(rec.gradient_spectral);
  j["bias"] = vector_to_json(rec.bias);
  j["bias_spectral"] = summary_to_json(rec.bias_spectral);
  j["bias_gradient"] = vector_to_json(rec.bias_gradient);
  j["bias_gradient_spectral"] = summary_to_json(rec.bias_gradient_spectral);
  if (rec.hessian_stored) {
    Json rows = Json::array();
    for (Index r = 0; r < rec.hessian.rows(); ++r) {
      Json row = Json::array();
      for (Index c = 0; c < rec.hessian.cols(); ++c) row.push_back(rec.hessian(r, c));
      rows.push_back(std::move(row));
    }
    j["hessian"] = std::move(rows);
  }
  j["hessian_spectral"] = summary_to_json(rec.hessian_spectral);
  j["hessian_eigens"] = vector_to_json(rec.hessian_eigens);
  j["hessian_eigens_spectral"] = summary_to_json(rec.hessian_eigens_spectral);
  j["hessian_rank"] = rec.hessian_rank;
  if (rec.hessian_condition_infinite) j["hessian_condition"] = "infinite";
  else j["hessian_condition"] = rec.hessian_condition;
  return j;
}

LayerRecord layer_from_json(const Json& j) {
  LayerRecord rec;
  rec.weights = vector_from_json(j.at("weights"));
  rec.weights_spectral = summary_from_json(j.at("weights_spectral"));
  rec.gradient = vector_from_json(j.at("gradient"));
  rec.gradient_spectral = summary_from_json(j.at("gradient_spectral"));
  rec.bias = vector_from_json(j.at("bias"));
  rec.bias_spectral = summary_from_json(j.at("bias_spectral"));
  rec.bias_gradient = vector_from_json(j.at("bias_gradient"));
  rec.bias_gradient_spectral = summary_from_json(j.at("bias_gradient_spectral"));
  if (j.contains("hessian")) {
    rec.hessian_stored = true;
    const auto& rows = j.at("hessian");
    const Index p = static_cast<Index>(rows.size());
    rec.hessian = Matrix(p, p);
    Index r = 0;
    for (const auto& row : rows) {
      Index c = 0;
      for (const auto& x : row) rec.hessian(r, c++) = x.get<double>();
      ++r;
    }
  }
  rec.hessian_spectral = summary_from_json(j.at("hessian_spectral"));
  rec.hessian_eigens = vector_from_json(j.at("hessian_eigens"));
  rec.hessian_eigens_spectral = summary_from_json(j.at("hessian_eigens_spectral"));
  rec.hessian_rank = j.at("hessian_rank").get<std::size_t>();
  if (j.at("hessian_condition").is_string()) {
    rec.hessian_condition_infinite = true;
    rec.hessian_condition = 0.0;
  } else {
    rec.hessian_condition = j.at("hessian_condition").get<double>();
  }
  return rec;
}

Json scores_to_json(const MetricReport& m) {
  Json j;
  if (m.task == Task::Classification) {
    j["Accuracy"] = m.accuracy;
    j["Precision"] = m.precision;
    j["Recall"] = m.recall;
    j["F1"] = m.f1;
    j["AUC"] = m.auc;
  } else {
    j["R2"] = m.r2;
    j["MAE"] = m.mae;
    j["RMSE"] = m.rmse;
  }
  j["train_loss"] = m.train_loss;
  return j;
}

MetricReport scores_from_json(const Json& j) {
  MetricReport m;
  if (j.contains("Accuracy")) {
    m.task = Task::Classification;
    m.accuracy = j.at("Accuracy").get<double>();
    m.precision = j.at("Precision").get<double>();
    m.recall = j.at("Recall").get<double>();
    m.f1 = j.at("F1").get<double>();
    m.auc = j.at("AUC").get<double>();
  } else {
    m.task = Task::Regression;
    m.r2 = j.at("R2").get<double>();
    m.mae = j.at("MAE").get<double>();
    m.rmse = j.at("RMSE").get<double>();
  }
  m.train_loss = j.at("train_loss").get<double>();
  return m;
}

Json snapshot_to_json(const Snapshot& snap) {
  Json j;
  j["run_id"] = snap.run_id;
  j["variant"] = snap.variant;
  j["dataset"] = snap.dataset;
  j["iteration"] = snap.iteration;
  for (std::size_t i = 0; i < snap.layers.size(); ++i) {
    j["layer." + std::to_string(i)] = layer_to_json(snap.layers[i]);
  }
  j["scores"] = scores_to_json(snap.scores);
  return j;
}

Snapshot snapshot_from_json(const Json& j) {
  Snapshot snap;
  snap.run_id = j.at("run_id").get<std::string>();
  snap.variant = j.at("variant").get<std::string>();
  snap.dataset = j.at("dataset").get<std::string>();
  snap.iteration = j.at("iteration").get<long>();
  for (std::size_t i = 0;; ++i) {
    const std::string key = "layer." + std::to_string(i);
    if (!j.contains(key)) break;
    snap.layers.push_back(layer_from_json(j.at(key)));
  }
  if (snap.layers.empty()) {
    throw std::runtime_error("snapshot has no layer records");
  }
  snap.scores = scores_from_json(j.at("scores"));
  return snap;
}

Json header_json() {
  return Json{{"schema", kSnapshotSchemaName}, {"schema_version", kSnapshotSchemaVersion}};
}

}  // namespace

void write_stream(const std::vector<Snapshot>& snapshots, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_stream: cannot open " + path);
  out << header_json().dump() << "\n";
  for (const auto& snap : snapshots) out << snapshot_to_json(snap).dump() << "\n";
  if (!out) throw std::runtime_error("write_stream: write failed for " + path);
}

std::vector<Snapshot> read_stream(const std::string& path, bool skip_malformed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_stream: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_stream: missing header line in " + path);
  }
  Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      header.value("schema", "") != kSnapshotSchemaName) {
    throw std::runtime_error("read_stream: not a snapshot stream: " + path);
  }
  if (header.value("schema_version", "") != kSnapshotSchemaVersion) {
    throw std::runtime_error("read_stream: schema-version mismatch in " + path);
  }

  std::vector<Snapshot> snapshots;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      snapshots.push_back(snapshot_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      if (skip_malformed) {
        std::cerr << path << ":" << line_no << ": skipping malformed snapshot: " << e.what()
                  << "\n";
      } else {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": malformed snapshot: " + e.what());
      }
    }
  }
  return snapshots;
}

namespace {

void check_summary(const Json& j, std::size_t series_len, long line, const std::string& field,
                   std::vector<Violation>& out) {
  auto bad = [&](const std::string& msg) { out.push_back({line, field, msg}); };
  for (const char* key : {"mean", "std", "min", "max"}) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      bad(std::string("missing or non-numeric ") + key);
      return;
    }
  }
  const double mean = j.at("mean").get<double>();
  const double mn = j.at("min").get<double>();
  const double mx = j.at("max").get<double>();
  if (!(mn <= mean && mean <= mx)) bad("min <= mean <= max violated");
  if (j.at("std").get<double>() < 0.0) bad("negative std");

  if (!j.contains("histogram") || !j.at("histogram").is_object()) {
    bad("missing histogram");
    return;
  }
  const auto& h = j.at("histogram");
  if (!h.contains("bin_edges") || !h.at("bin_edges").is_array() || h.at("bin_edges").size() != 65) {
    bad("histogram.bin_edges must have 65 entries");
  }
  if (!h.contains("counts") || !h.at("counts").is_array() || h.at("counts").size() != 64) {
    bad("histogram.counts must have 64 entries");
  } else {
    std::uint64_t total = 0;
    for (const auto& c : h.at("counts")) {
      if (!c.is_number_unsigned()) {
        bad("histogram count not an unsigned integer");
        return;
      }
      total += c.get<std::uint64_t>();
    }
    if (total != series_len) bad("histogram counts do not sum to series length");
  }

  if (!j.contains("welch") || !j.at("welch").is_array()) bad("missing welch PSD");
  if (!j.contains("welch_window") || !j.at("welch_window").is_number_unsigned()) {
    bad("missing welch_window");
  }
  if (!j.contains("top_peaks") || !j.at("top_peaks").is_array() || j.at("top_peaks").size() > 5) {
    bad("top_peaks must be an array of at most 5");
  } else {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& p : j.at("top_peaks")) {
      if (!p.is_object() || !p.contains("bin") || !p.contains("frequency") || !p.contains("power")) {
        bad("top_peaks entry missing bin/frequency/power");
        break;
      }
      const double power = p.at("power").get<double>();
      if (power > prev) {
        bad("top_peaks not sorted by descending power");
        break;
      }
      prev = power;
    }
  }
}

void check_layer(const Json& j, long line, const std::string& prefix,
                 std::vector<Violation>& out) {
  auto bad = [&](const std::string& field, const std::string& msg) {
    out.push_back({line, prefix + "." + field, msg});
  };

  for (const char* key : {"weights", "gradient", "bias", "bias_gradient", "hessian_eigens"}) {
    if (!j.contains(key) || !j.at(key).is_array()) {
      bad(key, "missing or not an array");
      return;
    }
    for (const auto& x : j.at(key)) {
      if (!x.is_number()) {
        bad(key, "non-numeric entry");
        return;
      }
    }
  }
  const std::size_t wn = j.at("weights").size();
  const std::size_t bn = j.at("bias").size();
  const std::size_t p = wn + bn;
  if (j.at("gradient").size() != wn) bad("gradient", "length differs from weights");
  if (j.at("bias_gradient").size() != bn) bad("bias_gradient", "length differs from bias");
  if (j.at("hessian_eigens").size() != p) {
    bad("hessian_eigens", "length differs from parameter count");
  }

  for (const char* key : {"weights_spectral", "gradient_spectral", "bias_spectral",
                          "bias_gradient_spectral", "hessian_spectral",
                          "hessian_eigens_spectral"}) {
    if (!j.contains(key) || !j.at(key).is_object()) {
      bad(key, "missing spectral summary");
      return;
    }
  }
  check_summary(j.at("weights_spectral"), wn, line, prefix + ".weights_spectral", out);
  check_summary(j.at("gradient_spectral"), wn, line, prefix + ".gradient_spectral", out);
  check_summary(j.at("bias_spectral"), bn, line, prefix + ".bias_spectral", out);
  check_summary(j.at("bias_gradient_spectral"), bn, line, prefix + ".bias_gradient_spectral", out);
  check_summary(j.at("hessian_spectral"), p * p, line, prefix + ".hessian_spectral", out);
  check_summary(j.at("hessian_eigens_spectral"), p, line, prefix + ".hessian_eigens_spectral", out);

  if (j.contains("hessian")) {
    const auto& rows = j.at("hessian");
    if (!rows.is_array() || rows.size() != p) {
      bad("hessian", "must be a p x p array");
    } else {
      for (const auto& row : rows) {
        if (!row.is_array() || row.size() != p) {
          bad("hessian", "row length differs from p");
          break;
        }
      }
    }
  }

  if (!j.contains("hessian_rank") || !j.at("hessian_rank").is_number_unsigned()) {
    bad("hessian_rank", "missing or not an unsigned integer");
  } else {
    const std::size_t rank = j.at("hessian_rank").get<std::size_t>();
    if (rank > p) bad("hessian_rank", "exceeds dimension");
    const Vector eigens = vector_from_json(j.at("hessian_eigens"));
    if (spectrum_rank(eigens) != rank) {
      bad("hessian_rank", "inconsistent with eigenvalues under the rank tolerance rule");
    }
  }

  if (!j.contains("hessian_condition")) {
    bad("hessian_condition", "missing");
  } else {
    const auto& c = j.at("hessian_condition");
    if (c.is_string()) {
      if (c.get<std::string>() != "infinite") bad("hessian_condition", "unknown flag value");
    } else if (!c.is_number()) {
      bad("hessian_condition", "must be a number or \"infinite\"");
    } else if (c.get<double>() < 1.0) {
      bad("hessian_condition", "finite condition must be >= 1");
    }
  }
}

}  // namespace

std::vector<Violation> validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("validate: cannot open " + path);

  std::vector<Violation> out;
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) {
    out.push_back({1, "header", "empty file, missing schema header"});
    return out;
  }
  ++line_no;
  Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      header.value("schema", "") != kSnapshotSchemaName) {
    out.push_back({1, "header", "missing or wrong schema header"});
    return out;
  }
  if (header.value("schema_version", "") != kSnapshotSchemaVersion) {
    out.push_back({1, "header.schema_version", "schema-version mismatch"});
    return out;
  }

  bool have_prev_iteration = false;
  long prev_iteration = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      out.push_back({line_no, "", "malformed JSON line"});
      continue;
    }

    for (const char* key : {"run_id", "variant", "dataset"}) {
      if (!j.contains(key) || !j.at(key).is_string()) {
        out.push_back({line_no, key, "missing or not a string"});
      }
    }
    if (j.contains("variant") && j.at("variant").is_string()) {
      const std::string v = j.at("variant").get<std::string>();
      if (v != "no" && v != "sure" && v != "huge") {
        out.push_back({line_no, "variant", "must be one of no/sure/huge"});
      }
    }
    if (!j.contains("iteration") || !j.at("iteration").is_number_integer()) {
      out.push_back({line_no, "iteration", "missing or not an integer"});
    } else {
      const long it = j.at("iteration").get<long>();
      if (have_prev_iteration && it <= prev_iteration) {
        out.push_back({line_no, "iteration", "not strictly increasing within the stream"});
      }
      prev_iteration = it;
      have_prev_iteration = true;
    }

    std::size_t n_layers = 0;
    while (j.contains("layer." + std::to_string(n_layers))) ++n_layers;
    if (n_layers == 0) {
      out.push_back({line_no, "layer.0", "no layer records"});
    }
    for (std::size_t i = 0; i < n_layers; ++i) {
      const std::string key = "layer." + std::to_string(i);
      if (!j.at(key).is_object()) {
        out.push_back({line_no, key, "not an object"});
        continue;
      }
      check_layer(j.at(key), line_no, key, out);
    }

    if (!j.contains("scores") || !j.at("scores").is_object()) {
      out.push_back({line_no, "scores", "missing scores object"});
    } else {
      const auto& s = j.at("scores");
      const bool classification = s.contains("Accuracy");
      const std::vector<const char*> wanted =
          classification ? std::vector<const char*>{"Accuracy", "Precision", "Recall",
                                                    "F1", "AUC", "train_loss"}
                         : std::vector<const char*>{"R2", "MAE", "RMSE", "train_loss"};
      for (const char* key : wanted) {
        if (!s.contains(key) || !s.at(key).is_number()) {
          out.push_back({line_no, std::string("scores.") + key, "missing or non-numeric"});
        }
      }
    }
  }
  return out;
}

}  // namespace hesskit
