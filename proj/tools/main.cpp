#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hesskit/cli.hpp"
#include "hesskit/experiments.hpp"

namespace {

std::string default_outdir() {
  const char* env = std::getenv("HESSKIT_OUTDIR");
  return env && *env ? env : ".";
}

void add_dataset_options(CLI::App* cmd, hesskit::DatasetSpec& spec, const char* name_flag) {
  cmd->add_option(name_flag, spec.name, "generator name (see `generate --help`)");
  cmd->add_option("--n", spec.n, "sample count");
  cmd->add_option("--noise", spec.params.noise, "noise level");
  cmd->add_option("--classes", spec.params.n_classes, "class count (blobs/classification)");
  cmd->add_option("--features", spec.params.n_features, "feature count");
  cmd->add_option("--informative", spec.params.n_informative, "informative feature count");
  cmd->add_option("--class-sep", spec.params.class_sep, "class separation");
  cmd->add_option("--cluster-std", spec.params.cluster_std, "blob cluster std");
  cmd->add_option("--factor", spec.params.factor, "circles inner/outer radius ratio");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layer-wise Hessian toolkit: train small MLPs, record local Hessian "
               "snapshots, analyze their spectra"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string outdir = default_outdir();
  std::string config_path;
  app.add_option("--seed", seed, "root seed; every stream of randomness derives from it")
      ->capture_default_str();
  app.add_option("--outdir", outdir, "output directory (env HESSKIT_OUTDIR)")
      ->capture_default_str();
  app.add_option("--config", config_path, "flat key=value config file (flags win)");
  app.fallthrough();

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset as CSV");
  hesskit::GenerateArgs gen_args;
  add_dataset_options(gen, gen_args.dataset, "--name");
  gen->add_option("--out", gen_args.out_path, "output CSV path");

  // train
  auto* train = app.add_subcommand("train", "train the variants and write snapshot streams");
  hesskit::ExperimentConfig train_cfg;
  hesskit::DatasetSpec train_ds;
  add_dataset_options(train, train_ds, "--dataset");
  std::vector<std::string> variant_names;
  std::vector<long> hidden_widths;
  std::string activation, output_activation, optimizer, loss;
  double lr = -1.0, init_scale = 1.0;
  long iterations = 0, checkpoint_every = 0, store_cap = 0;
  int parallel = 0;
  std::string run_label;
  train->add_option("--variant", variant_names, "variant(s) to train: no, sure, huge");
  train->add_option("--hidden", hidden_widths, "hidden widths override (e.g. --hidden 8 6)");
  train->add_option("--activation", activation, "hidden activation: identity|relu|sigmoid|tanh");
  train->add_option("--output-activation", output_activation, "output activation");
  train->add_option("--optimizer", optimizer, "sgd|adam|rmsprop");
  train->add_option("--lr", lr, "learning rate (optimizer default when omitted)");
  train->add_option("--loss", loss, "auto|cross_entropy|mse");
  train->add_option("--iterations", iterations, "training iterations");
  train->add_option("--checkpoint-every", checkpoint_every, "snapshot period");
  train->add_option("--init-scale", init_scale, "weight init scale multiplier");
  train->add_option("--hessian-store-cap", store_cap, "store raw Hessians up to this size");
  train->add_option("--parallel", parallel, "train variants in this many worker threads");
  train->add_option("--run-label", run_label, "extra run_id label");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "statistical analysis of snapshot streams");
  hesskit::AnalyzeArgs analyze_args;
  analyze->add_option("--stream", analyze_args.streams, "snapshot stream file(s)")->required();
  analyze->add_option("--tag", analyze_args.tag, "combined-artifact name tag")
      ->capture_default_str();
  analyze->add_option("--cca-pairs", analyze_args.cca_pairs, "canonical pairs")
      ->capture_default_str();

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "rule-based architecture diagnostics");
  hesskit::DiagnoseArgs diag_args;
  diagnose->add_option("--stream", diag_args.stream, "snapshot stream file")->required();

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "schema-check a snapshot stream");
  std::string validate_path;
  validate_cmd->add_option("--stream", validate_path, "snapshot stream file")->required();

  // preset
  auto* preset = app.add_subcommand("preset", "run a canned experiment");
  std::string preset_name;
  std::string names;
  for (const auto& n : hesskit::preset_names()) names += n + " ";
  preset->add_option("name", preset_name, "one of: " + names)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hesskit::kExitUsage;
  }

  try {
    if (*gen) {
      gen_args.seed = seed;
      gen_args.outdir = outdir;
      return hesskit::cmd_generate(gen_args);
    }

    if (*train) {
      if (!config_path.empty()) {
        for (const auto& [key, value] : hesskit::load_config_file(config_path)) {
          train_cfg.apply(key, value);
        }
      }
      // flags override the config file
      if (train->count("--dataset")) train_cfg.dataset.name = train_ds.name;
      if (train->count("--n")) train_cfg.dataset.n = train_ds.n;
      if (train->count("--noise")) train_cfg.dataset.params.noise = train_ds.params.noise;
      if (train->count("--classes")) train_cfg.dataset.params.n_classes = train_ds.params.n_classes;
      if (train->count("--features")) train_cfg.dataset.params.n_features = train_ds.params.n_features;
      if (train->count("--informative")) {
        train_cfg.dataset.params.n_informative = train_ds.params.n_informative;
      }
      if (train->count("--class-sep")) train_cfg.dataset.params.class_sep = train_ds.params.class_sep;
      if (train->count("--cluster-std")) {
        train_cfg.dataset.params.cluster_std = train_ds.params.cluster_std;
      }
      if (train->count("--factor")) train_cfg.dataset.params.factor = train_ds.params.factor;
      if (train->count("--variant")) {
        train_cfg.variants.clear();
        for (const auto& v : variant_names) train_cfg.variants.push_back(hesskit::variant_from_name(v));
      }
      if (train->count("--hidden")) {
        train_cfg.hidden_widths.assign(hidden_widths.begin(), hidden_widths.end());
      }
      if (train->count("--activation")) {
        train_cfg.hidden_activation = hesskit::activation_from_name(activation);
      }
      if (train->count("--output-activation")) {
        train_cfg.output_activation = hesskit::activation_from_name(output_activation);
      }
      if (train->count("--optimizer")) train_cfg.optimizer = hesskit::optimizer_from_name(optimizer);
      if (train->count("--lr")) train_cfg.learning_rate = lr;
      if (train->count("--loss")) {
        if (loss != "auto") hesskit::loss_from_name(loss);  // validate
        train_cfg.loss = loss;
      }
      if (train->count("--iterations")) train_cfg.iterations = iterations;
      if (train->count("--checkpoint-every")) train_cfg.checkpoint_every = checkpoint_every;
      if (train->count("--init-scale")) train_cfg.init_scale = init_scale;
      if (train->count("--hessian-store-cap")) train_cfg.hessian_store_cap = store_cap;
      if (train->count("--parallel")) train_cfg.parallel = parallel;
      if (train->count("--run-label")) train_cfg.run_label = run_label;
      if (app.count("--seed")) train_cfg.seed = seed;
      if (app.count("--outdir") || train_cfg.outdir == ".") train_cfg.outdir = outdir;
      return hesskit::cmd_train(train_cfg);
    }

    if (*analyze) {
      analyze_args.outdir = outdir;
      return hesskit::cmd_analyze(analyze_args);
    }

    if (*diagnose) {
      diag_args.outdir = outdir;
      return hesskit::cmd_diagnose(diag_args);
    }

    if (*validate_cmd) return hesskit::cmd_validate(validate_path);

    if (*preset) return hesskit::cmd_preset(preset_name, outdir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hesskit::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hesskit::kExitData;
  }
  return hesskit::kExitUsage;
}
