#include "hesskit/network.hpp"

#include <cmath>
#include <stdexcept>

namespace hesskit {

const char* activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Identity: return "identity";
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
  }
  return "unknown";
}

ActivationKind activation_from_name(const std::string& name) {
  if (name == "identity") return ActivationKind::Identity;
  if (name == "relu") return ActivationKind::ReLU;
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  if (name == "tanh") return ActivationKind::Tanh;
  throw std::invalid_argument("unknown activation: " + name);
}

double activation_eval(ActivationKind kind, double u, int order) {
  switch (kind) {
    case ActivationKind::Identity:
      return order == 0 ? u : (order == 1 ? 1.0 : 0.0);
    case ActivationKind::ReLU:
      if (order == 0) return u > 0.0 ? u : 0.0;
      if (order == 1) return u > 0.0 ? 1.0 : 0.0;
      return 0.0;
    case ActivationKind::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-u));
      if (order == 0) return s;
      const double s1 = s * (1.0 - s);
      if (order == 1) return s1;
      return s1 * (1.0 - 2.0 * s);
    }
    case ActivationKind::Tanh: {
      const double t = std::tanh(u);
      if (order == 0) return t;
      const double sech2 = 1.0 - t * t;
      if (order == 1) return sech2;
      return -2.0 * t * sech2;
    }
  }
  throw std::invalid_argument("activation_eval: bad kind");
}

Vector activation_eval(ActivationKind kind, const Vector& u, int order) {
  if (order < 0 || order > 2) {
    throw std::invalid_argument("activation_eval: order must be 0, 1 or 2");
  }
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) out[i] = activation_eval(kind, u[i], order);
  return out;
}

Vector FunctionalBlock::flatten_parameters() const {
  Vector theta(param_count());
  Index pos = 0;
  for (Index j = 0; j < weights.rows(); ++j) {
    for (Index k = 0; k < weights.cols(); ++k) theta[pos++] = weights(j, k);
  }
  for (Index j = 0; j < bias.size(); ++j) theta[pos++] = bias[j];
  return theta;
}

void FunctionalBlock::set_parameters(const Vector& theta) {
  if (theta.size() != param_count()) {
    throw std::invalid_argument("set_parameters: size mismatch");
  }
  Index pos = 0;
  for (Index j = 0; j < weights.rows(); ++j) {
    for (Index k = 0; k < weights.cols(); ++k) weights(j, k) = theta[pos++];
  }
  for (Index j = 0; j < bias.size(); ++j) bias[j] = theta[pos++];
}

Index Network::param_count() const {
  Index total = 0;
  for (const auto& b : blocks) total += b.param_count();
  return total;
}

void Network::check_chain() const {
  if (blocks.empty()) throw std::invalid_argument("network has no blocks");
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) {
    if (blocks[i].output_dim() != blocks[i + 1].input_dim()) {
      throw std::invalid_argument("network dimension chain broken between blocks " +
                                  std::to_string(i) + " and " + std::to_string(i + 1));
    }
  }
}

ForwardTrace forward(const Network& net, const Vector& x) {
  net.check_chain();
  if (x.size() != net.input_dim()) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  ForwardTrace trace;
  trace.inputs.reserve(net.blocks.size());
  trace.preactivations.reserve(net.blocks.size());
  trace.outputs.reserve(net.blocks.size());
  Vector z = x;
  for (const auto& block : net.blocks) {
    trace.inputs.push_back(z);
    Vector u = block.weights * z + block.bias;
    Vector y = activation_eval(block.activation, u, 0);
    trace.preactivations.push_back(u);
    trace.outputs.push_back(y);
    z = std::move(y);
  }
  trace.output = trace.outputs.back();
  return trace;
}

double scalar_function(const FunctionalBlock& block, const Vector& z) {
  if (z.size() != block.input_dim()) {
    throw std::invalid_argument("scalar_function: input dimension mismatch");
  }
  const Vector u = block.weights * z + block.bias;
  return activation_eval(block.activation, u, 0).sum();
}

Vector block_gradient(const FunctionalBlock& block, const Vector& z) {
  if (z.size() != block.input_dim()) {
    throw std::invalid_argument("block_gradient: input dimension mismatch");
  }
  const Vector u = block.weights * z + block.bias;
  const Vector a1 = activation_eval(block.activation, u, 1);
  const Index q = block.output_dim();
  const Index d = block.input_dim();
  Vector g(block.param_count());
  for (Index j = 0; j < q; ++j) {
    for (Index k = 0; k < d; ++k) g[j * d + k] = a1[j] * z[k];
  }
  g.tail(q) = a1;
  return g;
}

Network make_mlp(Index input_dim, const std::vector<Index>& hidden_widths,
                 Index output_dim, ActivationKind hidden_activation,
                 ActivationKind output_activation, double init_scale, Rng& rng) {
  std::vector<Index> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden_widths.begin(), hidden_widths.end());
  dims.push_back(output_dim);

  Network net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const Index d = dims[i];
    const Index q = dims[i + 1];
    FunctionalBlock block;
    block.weights = Matrix(q, d);
    block.bias = Vector::Zero(q);
    block.activation = (i + 2 == dims.size()) ? output_activation : hidden_activation;
    block.layer_index = i;
    const double a = std::sqrt(6.0 / static_cast<double>(d + q)) * init_scale;
    for (Index r = 0; r < q; ++r) {
      for (Index c = 0; c < d; ++c) block.weights(r, c) = rng.uniform(-a, a);
    }
    net.blocks.push_back(std::move(block));
  }
  net.check_chain();
  return net;
}

}  // namespace hesskit
