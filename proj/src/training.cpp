#include "hesskit/training.hpp"

#include <cmath>
#include <stdexcept>

#include "hesskit/numerics.hpp"

namespace hesskit {

const char* loss_name(LossKind kind) {
  return kind == LossKind::CrossEntropy ? "cross_entropy" : "mse";
}

LossKind loss_from_name(const std::string& name) {
  if (name == "cross_entropy") return LossKind::CrossEntropy;
  if (name == "mse") return LossKind::MSE;
  throw std::invalid_argument("unknown loss: " + name);
}

const char* optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::SGD: return "sgd";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::RMSProp: return "rmsprop";
  }
  return "unknown";
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "sgd") return OptimizerKind::SGD;
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "rmsprop") return OptimizerKind::RMSProp;
  throw std::invalid_argument("unknown optimizer: " + name);
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::No: return "no";
    case Variant::Sure: return "sure";
    case Variant::Huge: return "huge";
  }
  return "unknown";
}

Variant variant_from_name(const std::string& name) {
  if (name == "no") return Variant::No;
  if (name == "sure") return Variant::Sure;
  if (name == "huge") return Variant::Huge;
  throw std::invalid_argument("unknown variant: " + name);
}

std::vector<Index> variant_hidden_widths(Variant v) {
  switch (v) {
    case Variant::No: return {4};
    case Variant::Sure: return {32, 16};
    case Variant::Huge: return {48, 32, 24};
  }
  return {};
}

OptimizerHyperparams OptimizerHyperparams::defaults_for(OptimizerKind kind) {
  OptimizerHyperparams hp;
  hp.kind = kind;
  switch (kind) {
    case OptimizerKind::SGD: hp.learning_rate = 0.05; break;
    case OptimizerKind::Adam: hp.learning_rate = 0.001; break;
    case OptimizerKind::RMSProp: hp.learning_rate = 0.001; break;
  }
  return hp;
}

LossEval loss_eval(LossKind kind, const Matrix& predictions, const Matrix& targets) {
  if (kind != LossKind::MSE) {
    throw std::invalid_argument("loss_eval: matrix targets require MSE");
  }
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw std::invalid_argument("loss_eval: shape mismatch");
  }
  const double count = static_cast<double>(predictions.size());
  const Matrix diff = predictions - targets;
  LossEval out;
  out.loss = diff.squaredNorm() / count;
  out.grad = 2.0 * diff / count;
  return out;
}

LossEval loss_eval(LossKind kind, const Matrix& logits, const std::vector<int>& classes) {
  if (kind != LossKind::CrossEntropy) {
    throw std::invalid_argument("loss_eval: class targets require cross entropy");
  }
  const Index n = logits.rows();
  const Index c = logits.cols();
  if (classes.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("loss_eval: shape mismatch");
  }
  LossEval out;
  out.grad = Matrix(n, c);
  out.loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    const int t = classes[static_cast<std::size_t>(i)];
    if (t < 0 || t >= c) {
      throw std::invalid_argument("loss_eval: class index out of range");
    }
    const double m = logits.row(i).maxCoeff();
    double z = 0.0;
    for (Index k = 0; k < c; ++k) z += std::exp(logits(i, k) - m);
    out.loss += (std::log(z) + m - logits(i, t)) * inv_n;
    for (Index k = 0; k < c; ++k) {
      out.grad(i, k) = (std::exp(logits(i, k) - m) / z) * inv_n;
    }
    out.grad(i, t) -= inv_n;
  }
  return out;
}

namespace {

struct BatchTrace {
  std::vector<Matrix> inputs;          // z per block, samples x d_i
  std::vector<Matrix> preactivations;  // u per block, samples x q_i
  Matrix output;
};

Matrix activation_matrix(ActivationKind kind, const Matrix& u, int order) {
  Matrix out(u.rows(), u.cols());
  for (Index i = 0; i < u.rows(); ++i) {
    for (Index j = 0; j < u.cols(); ++j) out(i, j) = activation_eval(kind, u(i, j), order);
  }
  return out;
}

BatchTrace batch_forward(const Network& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) {
    throw std::invalid_argument("batch_forward: input dimension mismatch");
  }
  BatchTrace trace;
  Matrix z = x;
  for (const auto& block : net.blocks) {
    trace.inputs.push_back(z);
    Matrix u = z * block.weights.transpose();
    u.rowwise() += block.bias.transpose();
    trace.preactivations.push_back(u);
    z = activation_matrix(block.activation, u, 0);
  }
  trace.output = z;
  return trace;
}

BackpropResult backprop_common(const Network& net, const BatchTrace& trace, const LossEval& le) {
  BackpropResult out;
  out.loss = le.loss;
  out.predictions = trace.output;
  out.gradients.resize(net.blocks.size());

  Matrix upstream = le.grad;  // d(loss)/d(y_i)
  for (std::size_t bi = net.blocks.size(); bi-- > 0;) {
    const FunctionalBlock& block = net.blocks[bi];
    const Matrix a1 = activation_matrix(block.activation, trace.preactivations[bi], 1);
    const Matrix du = upstream.cwiseProduct(a1);  // d(loss)/d(u_i)
    const Matrix grad_w = du.transpose() * trace.inputs[bi];
    const Vector grad_b = du.colwise().sum().transpose();

    Vector flat(block.param_count());
    Index pos = 0;
    for (Index j = 0; j < grad_w.rows(); ++j) {
      for (Index k = 0; k < grad_w.cols(); ++k) flat[pos++] = grad_w(j, k);
    }
    flat.tail(grad_b.size()) = grad_b;
    out.gradients[bi] = std::move(flat);

    if (bi > 0) upstream = du * block.weights;
  }
  return out;
}

}  // namespace

BackpropResult backprop(const Network& net, const Matrix& x, const Matrix& targets,
                        LossKind kind) {
  const BatchTrace trace = batch_forward(net, x);
  return backprop_common(net, trace, loss_eval(kind, trace.output, targets));
}

BackpropResult backprop(const Network& net, const Matrix& x, const std::vector<int>& classes,
                        LossKind kind) {
  const BatchTrace trace = batch_forward(net, x);
  return backprop_common(net, trace, loss_eval(kind, trace.output, classes));
}

void optimizer_step(std::vector<Vector>& params, const std::vector<Vector>& grads,
                    const OptimizerHyperparams& hp, OptimizerState& state) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("optimizer_step: params/grads mismatch");
  }
  for (const auto& g : grads) {
    if (!all_finite(g)) {
      throw std::runtime_error("optimizer_step: non-finite gradient");
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) state.m.push_back(Vector::Zero(p.size()));
    for (const auto& p : params) state.v.push_back(Vector::Zero(p.size()));
  }
  state.step += 1;
  const double eta = hp.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Vector& theta = params[i];
    const Vector& g = grads[i];
    switch (hp.kind) {
      case OptimizerKind::SGD:
        theta -= eta * g;
        break;
      case OptimizerKind::Adam: {
        Vector& m = state.m[i];
        Vector& v = state.v[i];
        m = hp.beta1 * m + (1.0 - hp.beta1) * g;
        v = hp.beta2 * v + (1.0 - hp.beta2) * g.cwiseProduct(g);
        const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
        const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
        const Vector m_hat = m / bc1;
        const Vector v_hat = v / bc2;
        theta -= eta * m_hat.cwiseQuotient(v_hat.cwiseSqrt() +
                                           Vector::Constant(theta.size(), hp.epsilon));
        break;
      }
      case OptimizerKind::RMSProp: {
        Vector& v = state.m[i];  // single accumulator
        v = hp.decay * v + (1.0 - hp.decay) * g.cwiseProduct(g);
        theta -= eta * g.cwiseQuotient(v.cwiseSqrt() + Vector::Constant(theta.size(), hp.epsilon));
        break;
      }
    }
  }
}

void TrainConfig::validate_against(const Dataset& ds) const {
  if (iterations < 1) throw std::invalid_argument("train: iterations must be >= 1");
  if (checkpoint_every < 1) throw std::invalid_argument("train: checkpoint_every must be >= 1");
  if (init_scale_multiplier <= 0.0) {
    throw std::invalid_argument("train: init_scale_multiplier must be > 0");
  }
  const bool classification = ds.task == Task::Classification;
  if (classification != (loss == LossKind::CrossEntropy)) {
    throw std::invalid_argument(
        "train: loss/task mismatch (cross entropy iff classification)");
  }
}

namespace {

MetricReport evaluate_metrics(const Dataset& ds, const Matrix& predictions, double loss_value) {
  MetricReport report;
  if (ds.task == Task::Classification) {
    // softmax of logits -> per-class probabilities
    Matrix probs(predictions.rows(), predictions.cols());
    for (Index i = 0; i < predictions.rows(); ++i) {
      const double m = predictions.row(i).maxCoeff();
      double z = 0.0;
      for (Index k = 0; k < predictions.cols(); ++k) z += std::exp(predictions(i, k) - m);
      for (Index k = 0; k < predictions.cols(); ++k) {
        probs(i, k) = std::exp(predictions(i, k) - m) / z;
      }
    }
    report = classification_metrics(ds.classes, probs);
  } else {
    report = regression_metrics(ds.targets, predictions.col(0));
  }
  report.train_loss = loss_value;
  return report;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& dataset) {
  cfg.validate_against(dataset);

  const Dataset standardized = standardize(dataset);
  const TrainTestSplit split = split_80_20(standardized, cfg.seed);
  const Dataset& tr = split.train;

  const std::vector<Index> widths =
      cfg.hidden_widths.empty() ? variant_hidden_widths(cfg.variant) : cfg.hidden_widths;
  const Index out_dim = dataset.task == Task::Classification ? dataset.n_classes : 1;

  Rng init_rng(derive_seed(cfg.seed, std::string("train.") + variant_name(cfg.variant)));
  Network net = make_mlp(tr.feature_dim(), widths, out_dim, cfg.hidden_activation,
                         cfg.output_activation, cfg.init_scale_multiplier, init_rng);

  // Fixed Hessian probe: first sample of the standardized training split.
  const Vector probe = tr.features.row(0).transpose();

  Matrix mse_targets;
  if (dataset.task == Task::Regression) {
    mse_targets = Matrix(tr.targets.size(), 1);
    mse_targets.col(0) = tr.targets;
  }

  auto run_backprop = [&]() {
    return dataset.task == Task::Classification
               ? backprop(net, tr.features, tr.classes, cfg.loss)
               : backprop(net, tr.features, mse_targets, cfg.loss);
  };

  TrainResult result;
  result.parameter_count = net.param_count();
  SnapshotMeta meta{cfg.run_id, variant_name(cfg.variant), dataset.name, cfg.hessian_store_cap};

  auto take_snapshot = [&](long iteration, const BackpropResult& bp) {
    const MetricReport metrics = evaluate_metrics(tr, bp.predictions, bp.loss);
    const std::vector<LocalHessian> hessians = all_local_hessians(net, probe);
    result.snapshots.push_back(capture(net, bp.gradients, hessians, metrics, iteration, meta));
    result.final_train_metrics = metrics;
  };

  OptimizerState state;
  std::vector<Vector> params;
  for (const auto& b : net.blocks) params.push_back(b.flatten_parameters());

  BackpropResult bp = run_backprop();
  if (!std::isfinite(bp.loss)) {
    result.aborted = true;
    result.abort_reason = "non-finite loss at initialization";
    return result;
  }
  take_snapshot(0, bp);

  for (long t = 1; t <= cfg.iterations; ++t) {
    try {
      optimizer_step(params, bp.gradients, cfg.optimizer, state);
    } catch (const std::runtime_error& e) {
      result.aborted = true;
      result.abort_reason = std::string(e.what()) + " at iteration " + std::to_string(t);
      return result;
    }
    for (std::size_t i = 0; i < net.blocks.size(); ++i) net.blocks[i].set_parameters(params[i]);

    bp = run_backprop();
    if (!std::isfinite(bp.loss)) {
      result.aborted = true;
      result.abort_reason = "non-finite loss at iteration " + std::to_string(t);
      return result;
    }
    if (t % cfg.checkpoint_every == 0 || t == cfg.iterations) take_snapshot(t, bp);
  }

  const BatchTrace test_trace = batch_forward(net, split.test.features);
  double test_loss;
  if (dataset.task == Task::Classification) {
    test_loss = loss_eval(cfg.loss, test_trace.output, split.test.classes).loss;
  } else {
    Matrix test_targets(split.test.targets.size(), 1);
    test_targets.col(0) = split.test.targets;
    test_loss = loss_eval(cfg.loss, test_trace.output, test_targets).loss;
  }
  result.final_test_metrics = evaluate_metrics(split.test, test_trace.output, test_loss);
  return result;
}

}  // namespace hesskit
