#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hesskit/analysis.hpp"
#include "hesskit/datasets.hpp"
#include "hesskit/training.hpp"

namespace hesskit {

// Exit-code contract shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitTraining = 3;
inline constexpr int kExitData = 4;

struct DatasetSpec {
  std::string name = "blobs";
  long n = 512;
  DatasetParams params;
};

/// Everything one experiment run needs; built from the config file (flat
/// key=value with section prefixes) and then overridden by flags.
struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<Variant> variants = {Variant::No, Variant::Sure, Variant::Huge};
  std::vector<Index> hidden_widths;  // empty = per-variant presets
  ActivationKind hidden_activation = ActivationKind::Tanh;
  ActivationKind output_activation = ActivationKind::Identity;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = -1.0;  // < 0 = the optimizer's default
  std::string loss = "auto";    // auto | mse | cross_entropy
  long iterations = 300;
  long checkpoint_every = 20;
  double init_scale = 1.0;
  Index hessian_store_cap = kDefaultHessianStoreCap;
  int parallel = 1;
  std::uint64_t seed = 0;
  std::string outdir = ".";
  std::string run_label;  // optional run_id suffix, e.g. "control"

  /// Applies one config-file entry; throws on unknown keys or bad values.
  void apply(const std::string& key, const std::string& value);
};

/// Reads a flat key=value file ('#' comments, blank lines ignored).
std::map<std::string, std::string> load_config_file(const std::string& path);

struct GenerateArgs {
  DatasetSpec dataset;
  std::uint64_t seed = 0;
  std::string out_path;  // default <name>.csv in outdir
  std::string outdir = ".";
};

struct TrainRunOutput {
  std::string run_id;
  std::string variant;
  std::string stream_path;
  bool aborted = false;
  std::string abort_reason;
  Index parameter_count = 0;
  MetricReport final_train;
  MetricReport final_test;
};

struct AnalyzeArgs {
  std::vector<std::string> streams;
  std::string outdir = ".";
  std::string tag = "analysis";
  Index cca_pairs = 2;
};

struct AnalyzeOutput {
  std::vector<std::string> artifacts;
  bool silhouette_defined = false;
  double silhouette = 0.0;
  std::vector<std::string> run_ids;
  std::vector<Vector> correlations;  // per stream
};

struct DiagnoseArgs {
  std::string stream;
  std::string outdir = ".";
};

int cmd_generate(const GenerateArgs& args);
int cmd_train(const ExperimentConfig& cfg, std::vector<TrainRunOutput>* outputs = nullptr);
int cmd_analyze(const AnalyzeArgs& args, AnalyzeOutput* output = nullptr);
int cmd_diagnose(const DiagnoseArgs& args, DiagnosticsReport* report = nullptr);
int cmd_validate(const std::string& stream_path);

std::string run_id_for(const ExperimentConfig& cfg, Variant v);

}  // namespace hesskit
