#include "hesskit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "hesskit/format.hpp"

namespace hesskit {

using Json = nlohmann::ordered_json;

namespace {

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + value + "'");
  }
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

}  // namespace

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
  if (key == "dataset.name") dataset.name = value;
  else if (key == "dataset.n") dataset.n = parse_long(key, value);
  else if (key == "dataset.noise") dataset.params.noise = parse_double(key, value);
  else if (key == "dataset.classes") dataset.params.n_classes = static_cast<int>(parse_long(key, value));
  else if (key == "dataset.features") dataset.params.n_features = static_cast<int>(parse_long(key, value));
  else if (key == "dataset.informative") dataset.params.n_informative = static_cast<int>(parse_long(key, value));
  else if (key == "dataset.class_sep") dataset.params.class_sep = parse_double(key, value);
  else if (key == "dataset.cluster_std") dataset.params.cluster_std = parse_double(key, value);
  else if (key == "dataset.factor") dataset.params.factor = parse_double(key, value);
  else if (key == "train.variants") {
    variants.clear();
    for (const auto& name : split_commas(value)) variants.push_back(variant_from_name(name));
    if (variants.empty()) throw std::invalid_argument("config: train.variants is empty");
  } else if (key == "train.hidden_widths") {
    hidden_widths.clear();
    for (const auto& w : split_commas(value)) hidden_widths.push_back(parse_long(key, w));
  } else if (key == "train.activation") hidden_activation = activation_from_name(value);
  else if (key == "train.output_activation") output_activation = activation_from_name(value);
  else if (key == "train.optimizer") optimizer = optimizer_from_name(value);
  else if (key == "train.lr") learning_rate = parse_double(key, value);
  else if (key == "train.loss") {
    if (value != "auto") loss_from_name(value);  // validate
    loss = value;
  } else if (key == "train.iterations") iterations = parse_long(key, value);
  else if (key == "train.checkpoint_every") checkpoint_every = parse_long(key, value);
  else if (key == "train.init_scale") init_scale = parse_double(key, value);
  else if (key == "train.hessian_store_cap") hessian_store_cap = parse_long(key, value);
  else if (key == "train.parallel") parallel = static_cast<int>(parse_long(key, value));
  else if (key == "train.run_label") run_label = value;
  else if (key == "output.dir") outdir = value;
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_long(key, value));
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: " + path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return entries;
}

std::string run_id_for(const ExperimentConfig& cfg, Variant v) {
  std::string id = cfg.dataset.name + "_" + variant_name(v);
  if (!cfg.run_label.empty()) id += "_" + cfg.run_label;
  id += "_s" + std::to_string(cfg.seed);
  return id;
}

int cmd_generate(const GenerateArgs& args) {
  Dataset ds;
  try {
    ds = generate(args.dataset.name, args.dataset.n, args.dataset.params, args.seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::string path = args.out_path;
  if (path.empty()) {
    std::filesystem::create_directories(args.outdir);
    path = args.outdir + "/" + args.dataset.name + ".csv";
  }
  try {
    write_csv(ds, path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  std::cout << path << " (" << ds.size() << " rows)\n";
  return kExitOk;
}

namespace {

LossKind resolve_loss(const ExperimentConfig& cfg, const Dataset& ds, bool& conflict) {
  conflict = false;
  const LossKind task_loss =
      ds.task == Task::Classification ? LossKind::CrossEntropy : LossKind::MSE;
  if (cfg.loss == "auto") return task_loss;
  const LossKind asked = loss_from_name(cfg.loss);
  if (asked != task_loss) conflict = true;
  return asked;
}

void print_metric_row(std::ostream& os, const TrainRunOutput& run) {
  os << std::left << std::setw(28) << run.run_id << std::setw(7) << run.variant
     << std::setw(10) << run.parameter_count;
  if (run.aborted) {
    os << "aborted: " << run.abort_reason;
  } else if (run.final_train.task == Task::Classification) {
    os << "acc=" << run.final_train.accuracy << " f1=" << run.final_train.f1
       << " auc=" << run.final_train.auc << " loss=" << run.final_train.train_loss
       << " (test acc=" << run.final_test.accuracy << ")";
  } else {
    os << "r2=" << run.final_train.r2 << " mae=" << run.final_train.mae
       << " rmse=" << run.final_train.rmse << " loss=" << run.final_train.train_loss
       << " (test r2=" << run.final_test.r2 << ")";
  }
  os << "\n";
}

}  // namespace

int cmd_train(const ExperimentConfig& cfg, std::vector<TrainRunOutput>* outputs) {
  Dataset ds;
  try {
    ds = generate(cfg.dataset.name, cfg.dataset.n, cfg.dataset.params, cfg.seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  bool conflict = false;
  LossKind loss;
  try {
    loss = resolve_loss(cfg, ds, conflict);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (conflict) {
    std::cerr << "error: loss '" << cfg.loss << "' conflicts with " << cfg.dataset.name
              << " (" << (ds.task == Task::Classification ? "classification" : "regression")
              << ")\n";
    return kExitUsage;
  }
  if (cfg.variants.empty() || cfg.iterations < 1 || cfg.checkpoint_every < 1 ||
      cfg.init_scale <= 0.0 || cfg.parallel < 1) {
    std::cerr << "error: invalid training configuration\n";
    return kExitUsage;
  }
  std::filesystem::create_directories(cfg.outdir);

  OptimizerHyperparams hp = OptimizerHyperparams::defaults_for(cfg.optimizer);
  if (cfg.learning_rate > 0.0) hp.learning_rate = cfg.learning_rate;

  std::vector<TrainRunOutput> runs(cfg.variants.size());
  auto run_one = [&](std::size_t i) {
    const Variant v = cfg.variants[i];
    TrainConfig tc;
    tc.hidden_widths = cfg.hidden_widths;
    tc.hidden_activation = cfg.hidden_activation;
    tc.output_activation = cfg.output_activation;
    tc.variant = v;
    tc.optimizer = hp;
    tc.loss = loss;
    tc.iterations = cfg.iterations;
    tc.checkpoint_every = cfg.checkpoint_every;
    tc.seed = cfg.seed;
    tc.init_scale_multiplier = cfg.init_scale;
    tc.hessian_store_cap = cfg.hessian_store_cap;
    tc.run_id = run_id_for(cfg, v);
    tc.dataset_name = cfg.dataset.name;

    TrainRunOutput& out = runs[i];
    out.run_id = tc.run_id;
    out.variant = variant_name(v);
    const TrainResult result = train(tc, ds);
    out.aborted = result.aborted;
    out.abort_reason = result.abort_reason;
    out.parameter_count = result.parameter_count;
    out.final_train = result.final_train_metrics;
    out.final_test = result.final_test_metrics;
    out.stream_path = cfg.outdir + "/" + tc.run_id +
                      (result.aborted ? ".snapshots.partial.jsonl" : ".snapshots.jsonl");
    write_stream(result.snapshots, out.stream_path);
  };

  try {
    if (cfg.parallel <= 1) {
      for (std::size_t i = 0; i < runs.size(); ++i) run_one(i);
    } else {
      std::vector<std::thread> workers;
      std::size_t next = 0;
      while (next < runs.size()) {
        workers.clear();
        for (int j = 0; j < cfg.parallel && next < runs.size(); ++j, ++next) {
          workers.emplace_back(run_one, next);
        }
        for (auto& t : workers) t.join();
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTraining;
  }

  bool any_aborted = false;
  std::cout << std::left << std::setw(28) << "run" << std::setw(7) << "variant"
            << std::setw(10) << "params" << "final metrics\n";
  for (const auto& run : runs) {
    print_metric_row(std::cout, run);
    if (run.aborted) {
      any_aborted = true;
      std::cerr << "warning: partial stream preserved at " << run.stream_path << "\n";
    }
  }
  if (outputs) *outputs = runs;
  return any_aborted ? kExitTraining : kExitOk;
}

namespace {

void write_correlation_csv(const CorrelationMatrix& cm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "feature";
  for (const auto& l : cm.labels) out << "," << l;
  out << "\n";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    out << cm.labels[i];
    for (std::size_t j = 0; j < cm.labels.size(); ++j) {
      out << ",";
      if (cm.defined[i][j]) out << format_double(cm.values(static_cast<Index>(i), static_cast<Index>(j)));
      else out << "undefined";
    }
    out << "\n";
  }
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int cmd_analyze(const AnalyzeArgs& args, AnalyzeOutput* output) {
  if (args.streams.empty()) {
    std::cerr << "error: no stream files given\n";
    return kExitUsage;
  }
  for (const auto& path : args.streams) {
    std::vector<Violation> violations;
    try {
      violations = validate(path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitData;
    }
    if (!violations.empty()) {
      for (const auto& v : violations) {
        std::cerr << path << ":" << v.line << ": " << v.field << ": " << v.message << "\n";
      }
      return kExitData;
    }
  }

  std::filesystem::create_directories(args.outdir);
  AnalyzeOutput result;

  std::vector<std::vector<Snapshot>> streams;
  try {
    for (const auto& path : args.streams) streams.push_back(read_stream(path));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }

  std::vector<std::string> column_labels;
  std::vector<ScoreStats> stats_columns;
  try {
    for (const auto& stream : streams) {
      const std::string run_id = stream.front().run_id;
      const std::string variant = stream.front().variant;
      result.run_ids.push_back(run_id);

      const FeatureGroups features = extract_features(stream);

      const std::string corr_path = args.outdir + "/" + run_id + ".correlation.csv";
      write_correlation_csv(correlation_matrix(features), corr_path);
      result.artifacts.push_back(corr_path);

      Index non_const_a = 0, non_const_b = 0;
      for (Index j = 0; j < features.a.cols(); ++j) {
        if ((features.a.col(j).array() - features.a.col(j).mean()).square().sum() > 0.0) ++non_const_a;
      }
      for (Index j = 0; j < features.b.cols(); ++j) {
        if ((features.b.col(j).array() - features.b.col(j).mean()).square().sum() > 0.0) ++non_const_b;
      }
      const Index k = std::min(args.cca_pairs, std::min(non_const_a, non_const_b));
      if (k < 1) throw std::runtime_error(run_id + ": all feature columns constant, CCA impossible");
      if (k < args.cca_pairs) {
        std::cerr << "notice: " << run_id << ": reducing CCA pairs to " << k << "\n";
      }
      const CcaResult cca_result = cca(features, k);
      for (const auto& name : cca_result.dropped_a) {
        std::cerr << "notice: " << run_id << ": dropped constant metric column " << name << "\n";
      }
      for (const auto& name : cca_result.dropped_b) {
        std::cerr << "notice: " << run_id << ": dropped constant feature column " << name << "\n";
      }

      Json cca_json;
      cca_json["run_id"] = run_id;
      Json corr = Json::array();
      for (Index i = 0; i < cca_result.correlations.size(); ++i) corr.push_back(cca_result.correlations[i]);
      cca_json["correlations"] = corr;
      cca_json["a_names"] = features.a_names;
      cca_json["b_names"] = features.b_names;
      cca_json["x_weights"] = matrix_to_json(cca_result.x_weights);
      cca_json["y_weights"] = matrix_to_json(cca_result.y_weights);
      cca_json["scores_x"] = matrix_to_json(cca_result.scores_x);
      cca_json["scores_y"] = matrix_to_json(cca_result.scores_y);
      cca_json["dropped_a"] = cca_result.dropped_a;
      cca_json["dropped_b"] = cca_result.dropped_b;
      Json keys = Json::array();
      for (const auto& key : features.sample_keys) {
        keys.push_back(Json{{"run_id", key.run_id}, {"iteration", key.iteration}});
      }
      cca_json["sample_keys"] = keys;
      const std::string cca_path = args.outdir + "/" + run_id + ".cca.json";
      std::ofstream(cca_path) << cca_json.dump(2) << "\n";
      result.artifacts.push_back(cca_path);
      result.correlations.push_back(cca_result.correlations);

      const bool dup = std::find(column_labels.begin(), column_labels.end(), variant) !=
                       column_labels.end();
      column_labels.push_back(dup ? run_id : variant);
      stats_columns.push_back(score_stats(cca_score_series(cca_result)));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }

  const std::string stats_path = args.outdir + "/" + args.tag + ".score_stats.csv";
  {
    std::ofstream out(stats_path);
    out << "statistic";
    for (const auto& l : column_labels) out << "," << l;
    out << "\n";
    const char* row_names[] = {"max", "avg", "median", "min", "std"};
    for (int r = 0; r < 5; ++r) {
      out << row_names[r];
      for (const auto& s : stats_columns) {
        const double v = r == 0 ? s.max : r == 1 ? s.avg : r == 2 ? s.median : r == 3 ? s.min : s.std;
        out << "," << format_double(v);
      }
      out << "\n";
    }
  }
  result.artifacts.push_back(stats_path);

  if (streams.size() >= 2) {
    try {
      const std::vector<PcaPoint> points = pca_architectures(streams);
      const std::string pca_path = args.outdir + "/" + args.tag + ".pca.csv";
      std::ofstream out(pca_path);
      out << "run_id,iteration,variant,pc1,pc2\n";
      for (const auto& p : points) {
        out << p.key.run_id << "," << p.key.iteration << "," << p.variant << ","
            << format_double(p.pc1) << "," << format_double(p.pc2) << "\n";
      }
      result.artifacts.push_back(pca_path);
      result.silhouette = silhouette_by_variant(points);
      result.silhouette_defined = true;
      std::cout << "pca silhouette by variant: " << result.silhouette << "\n";
    } catch (const std::exception& e) {
      std::cerr << "notice: PCA artifact skipped: " << e.what() << "\n";
    }
  } else {
    std::cerr << "notice: PCA artifact skipped (needs >= 2 variants)\n";
  }

  Json summary;
  summary["tag"] = args.tag;
  summary["runs"] = Json::array();
  for (std::size_t i = 0; i < result.run_ids.size(); ++i) {
    Json run;
    run["run_id"] = result.run_ids[i];
    Json corr = Json::array();
    for (Index j = 0; j < result.correlations[i].size(); ++j) corr.push_back(result.correlations[i][j]);
    run["cca_correlations"] = corr;
    summary["runs"].push_back(run);
  }
  if (result.silhouette_defined) summary["pca_silhouette"] = result.silhouette;
  else summary["pca_silhouette"] = nullptr;
  const std::string summary_path = args.outdir + "/" + args.tag + ".analysis_summary.json";
  std::ofstream(summary_path) << summary.dump(2) << "\n";
  result.artifacts.push_back(summary_path);

  for (const auto& a : result.artifacts) std::cout << a << "\n";
  if (output) *output = result;
  return kExitOk;
}

namespace {

Json flag_to_json(const FlagEvidence& f) {
  return Json{{"fired", f.fired}, {"value", f.value}, {"threshold", f.threshold}};
}

}  // namespace

int cmd_diagnose(const DiagnoseArgs& args, DiagnosticsReport* out) {
  std::vector<Violation> violations;
  try {
    violations = validate(args.stream);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  if (!violations.empty()) {
    for (const auto& v : violations) {
      std::cerr << args.stream << ":" << v.line << ": " << v.field << ": " << v.message << "\n";
    }
    return kExitData;
  }

  std::vector<Snapshot> stream;
  DiagnosticsReport report;
  try {
    stream = read_stream(args.stream);
    if (stream.empty()) {
      std::cerr << "error: " << args.stream << ": stream has no snapshots\n";
      return kExitData;
    }
    report = diagnose(stream);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }

  std::cout << "diagnostics for " << report.run_id << " (iteration " << report.iteration << ")\n";
  std::cout << std::left << std::setw(7) << "layer" << std::setw(12) << "near_zero"
            << std::setw(12) << "max|eig|" << std::setw(11) << "symmetry"
            << std::setw(12) << "rank_frac" << "flags\n";
  for (const auto& l : report.layers) {
    std::ostringstream flags;
    if (l.overparameterized_near_zero.fired) flags << "near_zero ";
    if (l.low_expressivity.fired) flags << "low_expressivity ";
    if (l.saddle_suspect.fired) flags << "saddle ";
    if (l.ill_conditioned.fired) flags << "ill_conditioned ";
    if (l.low_rank_redundancy.fired) flags << "low_rank ";
    std::cout << std::left << std::setw(7) << l.layer << std::setw(12)
              << l.overparameterized_near_zero.value << std::setw(12) << l.low_expressivity.value
              << std::setw(11) << l.saddle_suspect.value << std::setw(12)
              << l.low_rank_redundancy.value << (flags.str().empty() ? "-" : flags.str()) << "\n";
  }
  for (const auto& r : report.recommendations) std::cout << "  " << r << "\n";

  Json j;
  j["run_id"] = report.run_id;
  j["iteration"] = report.iteration;
  j["layers"] = Json::array();
  for (const auto& l : report.layers) {
    Json lj;
    lj["layer"] = l.layer;
    lj["overparameterized_near_zero"] = flag_to_json(l.overparameterized_near_zero);
    lj["low_expressivity"] = flag_to_json(l.low_expressivity);
    lj["saddle_suspect"] = flag_to_json(l.saddle_suspect);
    lj["ill_conditioned"] = flag_to_json(l.ill_conditioned);
    lj["low_rank_redundancy"] = flag_to_json(l.low_rank_redundancy);
    j["layers"].push_back(lj);
  }
  Json sim = Json::array();
  for (const auto& s : report.adjacent_similarity) {
    sim.push_back(s.defined ? Json(s.value) : Json("undefined"));
  }
  j["adjacent_similarity"] = sim;
  j["network"] = Json{{"overparameterized_near_zero", report.net_overparameterized_near_zero},
                      {"low_expressivity", report.net_low_expressivity},
                      {"saddle_suspect", report.net_saddle_suspect},
                      {"ill_conditioned", report.net_ill_conditioned},
                      {"low_rank_redundancy", report.net_low_rank_redundancy}};
  j["recommendations"] = report.recommendations;

  std::filesystem::create_directories(args.outdir);
  const std::string path = args.outdir + "/" + report.run_id + ".diagnostics.json";
  std::ofstream(path) << j.dump(2) << "\n";
  std::cout << path << "\n";
  if (out) *out = report;
  return kExitOk;
}

int cmd_validate(const std::string& stream_path) {
  std::vector<Violation> violations;
  try {
    violations = validate(stream_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  if (violations.empty()) {
    std::cout << stream_path << ": OK (0 violations)\n";
    return kExitOk;
  }
  for (const auto& v : violations) {
    std::cout << stream_path << ":" << v.line << ": " << v.field << ": " << v.message << "\n";
  }
  std::cout << violations.size() << " violation(s)\n";
  return kExitData;
}

}  // namespace hesskit
