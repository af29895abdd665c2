#pragma once

#include <vector>

#include "hesskit/network.hpp"
#include "hesskit/types.hpp"

namespace hesskit {

/// Matrix of second derivatives of a block's scalar function with respect
/// to that block's own parameters, indexed in the frozen flattening order.
struct LocalHessian {
  std::size_t layer_index = 0;
  Matrix matrix;  // p x p, symmetric
};

/// Row-wise computation: row j is the gradient of the j-th gradient
/// component, obtained by forward-mode tangent propagation through the
/// block's gradient evaluation (forward-over-reverse). Rows whose gradient
/// component is constant in the parameters are written as zeros without
/// differentiation; constancy is decided structurally (Identity always,
/// ReLU under its locally fixed sign pattern). Only one row's tangent
/// state is alive at a time beyond the output matrix.
LocalHessian hessian_rowwise(const FunctionalBlock& block, const Vector& z);

/// Analytic form: block-diagonal per output neuron, the j-th diagonal
/// block being A''(u_j) [z;1][z;1]^T over that neuron's weights and bias.
LocalHessian hessian_closed_form(const FunctionalBlock& block, const Vector& z);

/// Independent verification oracle: central second differences of the
/// scalar function, symmetrized. h must be in [1e-6, 1e-3].
LocalHessian hessian_fd(const FunctionalBlock& block, const Vector& z, double h = 1e-4);

/// One local Hessian per block, each evaluated at the block input traced
/// through forward(net, x); same order as the blocks.
std::vector<LocalHessian> all_local_hessians(const Network& net, const Vector& x);

}  // namespace hesskit
