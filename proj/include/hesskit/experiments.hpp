#pragma once

#include <string>
#include <vector>

namespace hesskit {

struct PresetCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct PresetResult {
  std::string name;
  bool passed = false;  // every check passed and every command exited 0
  int exit_code = 0;    // first non-zero command exit code, if any
  std::vector<PresetCheck> checks;
  std::vector<std::string> artifacts;
};

/// Canned experiments with frozen seeds reproducing the directional claims
/// at desk scale: saturation, variants_blobs, variants_moons,
/// regression_friedman.
const std::vector<std::string>& preset_names();

PresetResult run_preset(const std::string& name, const std::string& outdir);

/// Runs a preset, prints its checks and writes summary.json / summary.txt
/// under <outdir>/preset_<name>/. Exit 0 when everything passed, 1 on a
/// failed predicate, otherwise the propagated command exit code.
int cmd_preset(const std::string& name, const std::string& outdir);

}  // namespace hesskit
