#include "hesskit/local_hessian.hpp"

#include <stdexcept>

namespace hesskit {

namespace {

// The gradient component for parameter r is A'(u_{j(r)}) * c_r with
// c_r = z_{k(r)} for a weight entry and c_r = 1 for a bias. It is constant
// in theta exactly when A' is: Identity everywhere, ReLU away from its kink
// (locally fixed sign pattern).
bool gradient_is_structurally_constant(ActivationKind kind) {
  return kind == ActivationKind::Identity || kind == ActivationKind::ReLU;
}

}  // namespace

LocalHessian hessian_rowwise(const FunctionalBlock& block, const Vector& z) {
  if (z.size() != block.input_dim()) {
    throw std::invalid_argument("hessian_rowwise: input dimension mismatch");
  }
  const Index q = block.output_dim();
  const Index d = block.input_dim();
  const Index p = block.param_count();

  LocalHessian out;
  out.layer_index = block.layer_index;
  out.matrix = Matrix::Zero(p, p);

  if (gradient_is_structurally_constant(block.activation)) {
    return out;  // every row zero
  }

  // Primal forward pass and the reverse-pass intermediate the gradient
  // reuses: ubar_j = A'(u_j) (phi is a sum, so its adjoint is ones).
  const Vector u = block.weights * z + block.bias;
  const Vector a2 = activation_eval(block.activation, u, 2);

  for (Index r = 0; r < p; ++r) {
    // Tangent of the forward pass along e_r: u depends on theta_r only
    // through output j, with coefficient c (z_k for weights, 1 for bias).
    const Index j = r < q * d ? r / d : r - q * d;
    const double c = r < q * d ? z[r % d] : 1.0;

    // Tangent of the reverse pass: d(ubar)/d(theta_r) = A''(u) .* udot.
    Vector udot = Vector::Zero(q);
    udot[j] = c;
    const Vector ubar_dot = a2.cwiseProduct(udot);

    // Tangent of the gradient, laid out in flattening order.
    for (Index jj = 0; jj < q; ++jj) {
      if (ubar_dot[jj] == 0.0) continue;
      for (Index k = 0; k < d; ++k) out.matrix(r, jj * d + k) = ubar_dot[jj] * z[k];
      out.matrix(r, q * d + jj) = ubar_dot[jj];
    }
  }
  return out;
}

LocalHessian hessian_closed_form(const FunctionalBlock& block, const Vector& z) {
  if (z.size() != block.input_dim()) {
    throw std::invalid_argument("hessian_closed_form: input dimension mismatch");
  }
  const Index q = block.output_dim();
  const Index d = block.input_dim();
  const Index p = block.param_count();

  LocalHessian out;
  out.layer_index = block.layer_index;
  out.matrix = Matrix::Zero(p, p);

  const Vector u = block.weights * z + block.bias;
  const Vector a2 = activation_eval(block.activation, u, 2);

  for (Index j = 0; j < q; ++j) {
    const double s = a2[j];
    if (s == 0.0) continue;
    // neuron j couples only its own row of W and its own bias
    for (Index k = 0; k < d; ++k) {
      for (Index l = 0; l < d; ++l) out.matrix(j * d + k, j * d + l) = s * z[k] * z[l];
      out.matrix(j * d + k, q * d + j) = s * z[k];
      out.matrix(q * d + j, j * d + k) = s * z[k];
    }
    out.matrix(q * d + j, q * d + j) = s;
  }
  return out;
}

LocalHessian hessian_fd(const FunctionalBlock& block, const Vector& z, double h) {
  if (z.size() != block.input_dim()) {
    throw std::invalid_argument("hessian_fd: input dimension mismatch");
  }
  if (!(h >= 1e-6 && h <= 1e-3)) {
    throw std::invalid_argument("hessian_fd: h out of [1e-6, 1e-3]");
  }
  const Index p = block.param_count();
  const Vector theta0 = block.flatten_parameters();
  FunctionalBlock probe = block;

  auto eval = [&](const Vector& theta) {
    probe.set_parameters(theta);
    return scalar_function(probe, z);
  };

  LocalHessian out;
  out.layer_index = block.layer_index;
  out.matrix = Matrix(p, p);
  Vector theta = theta0;
  for (Index j = 0; j < p; ++j) {
    for (Index k = 0; k <= j; ++k) {
      theta = theta0;
      theta[j] += h;
      theta[k] += h;
      const double spp = eval(theta);
      theta = theta0;
      theta[j] += h;
      theta[k] -= h;
      const double spm = eval(theta);
      theta = theta0;
      theta[j] -= h;
      theta[k] += h;
      const double smp = eval(theta);
      theta = theta0;
      theta[j] -= h;
      theta[k] -= h;
      const double smm = eval(theta);
      const double value = (spp - spm - smp + smm) / (4.0 * h * h);
      out.matrix(j, k) = value;
      out.matrix(k, j) = value;
    }
  }
  return out;
}

std::vector<LocalHessian> all_local_hessians(const Network& net, const Vector& x) {
  const ForwardTrace trace = forward(net, x);
  std::vector<LocalHessian> hessians;
  hessians.reserve(net.blocks.size());
  for (std::size_t i = 0; i < net.blocks.size(); ++i) {
    hessians.push_back(hessian_rowwise(net.blocks[i], trace.inputs[i]));
  }
  return hessians;
}

}  // namespace hesskit
