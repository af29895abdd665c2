#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hesskit/datasets.hpp"
#include "hesskit/metrics.hpp"
#include "hesskit/network.hpp"
#include "hesskit/snapshot.hpp"

namespace hesskit {

enum class LossKind { CrossEntropy, MSE };
enum class OptimizerKind { SGD, Adam, RMSProp };
enum class Variant { No, Sure, Huge };

const char* loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);
const char* optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name);
const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Hidden-layer widths of the three parameterization scales. Sized so the
/// largest per-layer parameter count stays within dense-eigendecomposition
/// reach while keeping params(no) < params(sure) < params(huge).
std::vector<Index> variant_hidden_widths(Variant v);

struct OptimizerHyperparams {
  OptimizerKind kind = OptimizerKind::SGD;
  double learning_rate = 0.05;
  double beta1 = 0.9;    // Adam
  double beta2 = 0.999;  // Adam
  double decay = 0.9;    // RMSProp accumulator
  double epsilon = 1e-8;

  static OptimizerHyperparams defaults_for(OptimizerKind kind);
};

struct OptimizerState {
  std::vector<Vector> m;  // first moment / RMSProp accumulator
  std::vector<Vector> v;  // Adam second moment
  long step = 0;
};

struct LossEval {
  double loss = 0.0;
  Matrix grad;  // d(loss)/d(predictions), same shape as predictions
};

/// MSE over a prediction matrix (samples x outputs); loss is the mean
/// squared error over all entries.
LossEval loss_eval(LossKind kind, const Matrix& predictions, const Matrix& targets);

/// Cross-entropy over logits (samples x classes) with internal softmax;
/// loss is the mean over samples.
LossEval loss_eval(LossKind kind, const Matrix& logits, const std::vector<int>& classes);

struct BackpropResult {
  std::vector<Vector> gradients;  // per block, flattening order
  double loss = 0.0;
  Matrix predictions;  // network outputs (logits for classification)
};

BackpropResult backprop(const Network& net, const Matrix& x, const Matrix& targets,
                        LossKind kind);
BackpropResult backprop(const Network& net, const Matrix& x, const std::vector<int>& classes,
                        LossKind kind);

/// One optimizer update over per-block flat parameter vectors. The state
/// must have been value-initialized (empty buffers are set up on first
/// use). Throws on non-finite gradients.
void optimizer_step(std::vector<Vector>& params, const std::vector<Vector>& grads,
                    const OptimizerHyperparams& hp, OptimizerState& state);

struct TrainConfig {
  std::vector<Index> hidden_widths;  // architecture; empty = from variant
  ActivationKind hidden_activation = ActivationKind::Tanh;
  ActivationKind output_activation = ActivationKind::Identity;
  Variant variant = Variant::Sure;
  OptimizerHyperparams optimizer;
  LossKind loss = LossKind::CrossEntropy;
  long iterations = 300;
  long checkpoint_every = 20;
  std::uint64_t seed = 0;
  double init_scale_multiplier = 1.0;
  Index hessian_store_cap = kDefaultHessianStoreCap;
  std::string run_id;
  std::string dataset_name;

  void validate_against(const Dataset& ds) const;
};

struct TrainResult {
  std::vector<Snapshot> snapshots;
  bool aborted = false;
  std::string abort_reason;
  MetricReport final_train_metrics;
  MetricReport final_test_metrics;
  Index parameter_count = 0;
};

/// Full-batch training with the Appendix-A snapshot schedule: an
/// iteration-0 baseline, every multiple of checkpoint_every, and the final
/// iteration. Deterministic given the seed. On a non-finite loss or
/// gradient the run aborts, keeping the snapshots taken so far.
TrainResult train(const TrainConfig& cfg, const Dataset& dataset);

}  // namespace hesskit
