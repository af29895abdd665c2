#pragma once

#include <string>
#include <vector>

#include "hesskit/rng.hpp"
#include "hesskit/types.hpp"

namespace hesskit {

enum class ActivationKind { Identity, ReLU, Sigmoid, Tanh };

const char* activation_name(ActivationKind kind);
ActivationKind activation_from_name(const std::string& name);

/// Elementwise activation value (order 0), first derivative (1) or second
/// derivative (2). ReLU uses the A'(0) = 0, A'' = 0 convention.
double activation_eval(ActivationKind kind, double u, int order);
Vector activation_eval(ActivationKind kind, const Vector& u, int order);

/// One layer: affine transform W z + b followed by an elementwise
/// activation. The parameter flattening order is a frozen contract shared
/// by gradients, Hessian row indices and snapshot arrays: all weights in
/// row-major order first, then the biases.
struct FunctionalBlock {
  Matrix weights;  // q x d
  Vector bias;     // q
  ActivationKind activation = ActivationKind::Identity;
  std::size_t layer_index = 0;

  Index input_dim() const { return weights.cols(); }
  Index output_dim() const { return weights.rows(); }
  Index param_count() const { return weights.size() + bias.size(); }

  Vector flatten_parameters() const;
  void set_parameters(const Vector& theta);
};

struct Network {
  std::vector<FunctionalBlock> blocks;

  Index input_dim() const { return blocks.front().input_dim(); }
  Index output_dim() const { return blocks.back().output_dim(); }
  Index param_count() const;
  /// Throws unless adjacent block dimensions chain.
  void check_chain() const;
};

/// Per-block intermediate state of one forward pass: z_i (inputs),
/// u_i = W_i z_i + b_i (pre-activations), y_i (outputs).
struct ForwardTrace {
  std::vector<Vector> inputs;
  std::vector<Vector> preactivations;
  std::vector<Vector> outputs;
  Vector output;
};

ForwardTrace forward(const Network& net, const Vector& x);

/// S_i(theta_i) = sum_j A(W z + b)_j at fixed block input z.
double scalar_function(const FunctionalBlock& block, const Vector& z);

/// Gradient of S_i with respect to the block's own parameters, in
/// flattening order: entry for W_{jk} is A'(u_j) z_k, entry for b_j is A'(u_j).
Vector block_gradient(const FunctionalBlock& block, const Vector& z);

/// MLP with the given hidden widths. Weights are uniform in [-a, a] with
/// a = sqrt(6 / (d_i + q_i)) * init_scale; biases start at zero.
Network make_mlp(Index input_dim, const std::vector<Index>& hidden_widths,
                 Index output_dim, ActivationKind hidden_activation,
                 ActivationKind output_activation, double init_scale, Rng& rng);

}  // namespace hesskit
