#include <doctest.h>

#include <cmath>

#include "hesskit/network.hpp"
#include "hesskit/rng.hpp"
#include "test_util.hpp"

using namespace hesskit;

TEST_CASE("activation values and derivatives at reference points") {
  CHECK(activation_eval(ActivationKind::Tanh, 0.0, 0) == 0.0);
  CHECK(activation_eval(ActivationKind::Sigmoid, 0.0, 1) == doctest::Approx(0.25));
  CHECK(activation_eval(ActivationKind::Identity, 3.5, 1) == 1.0);
  CHECK(activation_eval(ActivationKind::Identity, 3.5, 2) == 0.0);

  // ReLU kink convention
  CHECK(activation_eval(ActivationKind::ReLU, 0.0, 1) == 0.0);
  CHECK(activation_eval(ActivationKind::ReLU, 0.0, 2) == 0.0);
  CHECK(activation_eval(ActivationKind::ReLU, 2.0, 0) == 2.0);
  CHECK(activation_eval(ActivationKind::ReLU, -2.0, 0) == 0.0);

  // sigma''(1) against a central difference of sigma'
  const double h = 1e-5;
  const double fd = (activation_eval(ActivationKind::Sigmoid, 1.0 + h, 1) -
                     activation_eval(ActivationKind::Sigmoid, 1.0 - h, 1)) /
                    (2.0 * h);
  CHECK(activation_eval(ActivationKind::Sigmoid, 1.0, 2) == doctest::Approx(fd).epsilon(1e-8));
  CHECK(activation_eval(ActivationKind::Sigmoid, 1.0, 2) ==
        doctest::Approx(-0.09085774767294841).epsilon(1e-9));
}

TEST_CASE("activation second derivatives match finite differences of the first") {
  const double h = 1e-5;
  for (ActivationKind kind : {ActivationKind::Sigmoid, ActivationKind::Tanh}) {
    for (double u = -3.0; u <= 3.0; u += 0.37) {
      const double fd =
          (activation_eval(kind, u + h, 1) - activation_eval(kind, u - h, 1)) / (2.0 * h);
      CHECK(std::abs(activation_eval(kind, u, 2) - fd) <= 1e-6);
    }
  }
}

TEST_CASE("forward through identity and relu blocks") {
  FunctionalBlock block;
  block.weights = Matrix::Identity(2, 2);
  block.bias = Vector::Zero(2);
  block.activation = ActivationKind::Identity;
  Network net{{block}};

  Vector x(2);
  x << -1.0, 2.0;
  CHECK((forward(net, x).output - x).cwiseAbs().maxCoeff() == 0.0);

  net.blocks[0].activation = ActivationKind::ReLU;
  const Vector y = forward(net, x).output;
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 2.0);

  CHECK_THROWS_AS(forward(net, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("forward trace equals manual two-block composition") {
  Rng rng(30);
  Network net;
  net.blocks.push_back(test_util::random_block(3, 2, ActivationKind::Tanh, rng));
  net.blocks.push_back(test_util::random_block(2, 3, ActivationKind::Tanh, rng));
  net.blocks[1].layer_index = 1;

  const Vector x = test_util::random_vector(2, rng);
  const ForwardTrace trace = forward(net, x);

  const Vector y1 = activation_eval(ActivationKind::Tanh,
                                    net.blocks[0].weights * x + net.blocks[0].bias, 0);
  const Vector y2 = activation_eval(ActivationKind::Tanh,
                                    net.blocks[1].weights * y1 + net.blocks[1].bias, 0);
  CHECK((trace.output - y2).cwiseAbs().maxCoeff() <= 1e-15);

  // chaining invariants
  CHECK((trace.inputs[0] - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((trace.inputs[1] - trace.outputs[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar_function reference values") {
  FunctionalBlock block;
  block.weights = Matrix::Zero(2, 2);
  block.bias = Vector(2);
  block.bias << 1.0, 2.0;
  block.activation = ActivationKind::Identity;
  CHECK(scalar_function(block, Vector::Zero(2)) == doctest::Approx(3.0));

  block.bias << -5.0, 4.0;
  block.activation = ActivationKind::ReLU;
  CHECK(scalar_function(block, Vector::Zero(2)) == doctest::Approx(4.0));

  FunctionalBlock sig;
  sig.weights = Matrix::Constant(1, 1, 0.5);
  sig.bias = Vector::Zero(1);
  sig.activation = ActivationKind::Sigmoid;
  Vector z(1);
  z << 2.0;
  CHECK(scalar_function(sig, z) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("block_gradient reference values") {
  FunctionalBlock block;
  block.weights = Matrix::Zero(1, 2);
  block.bias = Vector::Zero(1);
  block.activation = ActivationKind::Identity;
  Vector z(2);
  z << 3.0, 4.0;
  const Vector g = block_gradient(block, z);
  CHECK(g[0] == 3.0);
  CHECK(g[1] == 4.0);
  CHECK(g[2] == 1.0);

  FunctionalBlock relu;
  relu.weights = Matrix::Constant(2, 2, 1.0);
  relu.bias = Vector::Constant(2, -10.0);  // all pre-activations negative
  relu.activation = ActivationKind::ReLU;
  CHECK(block_gradient(relu, Vector::Constant(2, 1.0)).cwiseAbs().maxCoeff() == 0.0);

  FunctionalBlock sig;
  sig.weights = Matrix::Constant(1, 1, 0.5);
  sig.bias = Vector::Zero(1);
  sig.activation = ActivationKind::Sigmoid;
  Vector z1(1);
  z1 << 2.0;
  const Vector gs = block_gradient(sig, z1);
  CHECK(gs[0] == doctest::Approx(0.3932238664829637).epsilon(1e-9));
  CHECK(gs[1] == doctest::Approx(0.19661193324148185).epsilon(1e-9));
}

TEST_CASE("block_gradient matches central finite differences on random blocks") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const Index q = 1 + static_cast<Index>(rng.uniform_int(0, 15));
    const Index d = 1 + static_cast<Index>(rng.uniform_int(0, 15));
    const ActivationKind kind =
        rng.uniform01() < 0.5 ? ActivationKind::Sigmoid : ActivationKind::Tanh;
    FunctionalBlock block = test_util::random_block(q, d, kind, rng);
    const Vector z = test_util::random_vector(d, rng);

    const Vector g = block_gradient(block, z);
    const Vector theta0 = block.flatten_parameters();
    const double h = 1e-6;
    FunctionalBlock probe = block;
    for (Index j = 0; j < theta0.size(); ++j) {
      Vector theta = theta0;
      theta[j] += h;
      probe.set_parameters(theta);
      const double up = scalar_function(probe, z);
      theta[j] -= 2.0 * h;
      probe.set_parameters(theta);
      const double down = scalar_function(probe, z);
      CHECK(std::abs(g[j] - (up - down) / (2.0 * h)) <= 1e-6);
    }
  }
}

TEST_CASE("parameter flattening round trip and count") {
  Rng rng(32);
  FunctionalBlock block = test_util::random_block(3, 4, ActivationKind::Tanh, rng);
  CHECK(block.param_count() == 3 * 4 + 3);

  const Vector theta = block.flatten_parameters();
  CHECK(theta[0] == block.weights(0, 0));
  CHECK(theta[1] == block.weights(0, 1));  // row-major
  CHECK(theta[4] == block.weights(1, 0));
  CHECK(theta[12] == block.bias[0]);

  FunctionalBlock copy = block;
  copy.weights.setZero();
  copy.bias.setZero();
  copy.set_parameters(theta);
  CHECK((copy.weights - block.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK((copy.bias - block.bias).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("make_mlp builds a chained network") {
  Rng rng(33);
  const Network net = make_mlp(3, {5, 4}, 2, ActivationKind::Tanh, ActivationKind::Identity,
                               1.0, rng);
  REQUIRE(net.blocks.size() == 3);
  CHECK(net.input_dim() == 3);
  CHECK(net.output_dim() == 2);
  CHECK(net.blocks[1].activation == ActivationKind::Tanh);
  CHECK(net.blocks[2].activation == ActivationKind::Identity);
  CHECK(net.param_count() == (3 * 5 + 5) + (5 * 4 + 4) + (4 * 2 + 2));
  net.check_chain();
}
