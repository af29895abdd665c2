#include <doctest.h>

#include <cmath>

#include "hesskit/local_hessian.hpp"
#include "hesskit/rng.hpp"
#include "test_util.hpp"

using namespace hesskit;

namespace {

FunctionalBlock sigmoid_1x1_example() {
  FunctionalBlock block;
  block.weights = Matrix::Constant(1, 1, 0.5);
  block.bias = Vector::Zero(1);
  block.activation = ActivationKind::Sigmoid;
  return block;
}

}  // namespace

TEST_CASE("row-wise Hessian is exactly zero for affine and relu blocks") {
  Rng rng(40);
  FunctionalBlock identity = test_util::random_block(4, 3, ActivationKind::Identity, rng);
  const Vector z = test_util::random_vector(3, rng);
  CHECK(hessian_rowwise(identity, z).matrix.cwiseAbs().maxCoeff() == 0.0);

  FunctionalBlock relu = test_util::random_block(4, 3, ActivationKind::ReLU, rng);
  relu.bias = Vector::Constant(4, 2.0);  // keep every pre-activation away from the kink
  CHECK(hessian_rowwise(relu, z).matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sigmoid 1x1 block reference Hessian") {
  const FunctionalBlock block = sigmoid_1x1_example();
  Vector z(1);
  z << 2.0;  // u = 1, order [W11, b1]
  const double s2 = activation_eval(ActivationKind::Sigmoid, 1.0, 2);

  const LocalHessian h = hessian_rowwise(block, z);
  CHECK(h.matrix(0, 0) == doctest::Approx(s2 * 4.0).epsilon(1e-12));
  CHECK(h.matrix(0, 1) == doctest::Approx(s2 * 2.0).epsilon(1e-12));
  CHECK(h.matrix(1, 0) == doctest::Approx(s2 * 2.0).epsilon(1e-12));
  CHECK(h.matrix(1, 1) == doctest::Approx(s2).epsilon(1e-12));
  CHECK(h.matrix(0, 0) == doctest::Approx(-0.363431).epsilon(1e-5));

  const LocalHessian fd = hessian_fd(block, z, 1e-4);
  CHECK((h.matrix - fd.matrix).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("closed form: tanh at u = 0 vanishes, cross-neuron entries are structural zeros") {
  FunctionalBlock tanh_block;
  tanh_block.weights = Matrix::Constant(2, 2, 0.0);
  tanh_block.bias = Vector::Zero(2);
  tanh_block.activation = ActivationKind::Tanh;
  CHECK(hessian_closed_form(tanh_block, Vector::Constant(2, 1.0)).matrix.cwiseAbs().maxCoeff() ==
        0.0);

  Rng rng(41);
  FunctionalBlock sig = test_util::random_block(2, 1, ActivationKind::Sigmoid, rng);
  const Vector z = test_util::random_vector(1, rng);
  const Matrix h = hessian_closed_form(sig, z).matrix;
  // parameter order [W11, W21, b1, b2]; neuron 1 owns {0, 2}, neuron 2 owns {1, 3}
  CHECK(h(0, 1) == 0.0);
  CHECK(h(0, 3) == 0.0);
  CHECK(h(2, 1) == 0.0);
  CHECK(h(2, 3) == 0.0);
}

TEST_CASE("row-wise equals closed form on random sigmoid blocks") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Index q = 1 + static_cast<Index>(rng.uniform_int(0, 7));
    const Index d = 1 + static_cast<Index>(rng.uniform_int(0, 7));
    const FunctionalBlock block = test_util::random_block(q, d, ActivationKind::Sigmoid, rng);
    const Vector z = test_util::random_vector(d, rng);
    const Matrix a = hessian_rowwise(block, z).matrix;
    const Matrix b = hessian_closed_form(block, z).matrix;
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9 * scale);
  }
}

TEST_CASE("finite differences: identity vanishes, tanh matches row-wise") {
  Rng rng(43);
  FunctionalBlock identity = test_util::random_block(3, 2, ActivationKind::Identity, rng);
  const Vector z2 = test_util::random_vector(2, rng);
  CHECK(hessian_fd(identity, z2).matrix.cwiseAbs().maxCoeff() <= 1e-6);

  const FunctionalBlock tanh_block = test_util::random_block(4, 3, ActivationKind::Tanh, rng);
  const Vector z3 = test_util::random_vector(3, rng);
  const Matrix fd = hessian_fd(tanh_block, z3).matrix;
  const Matrix rw = hessian_rowwise(tanh_block, z3).matrix;
  CHECK((fd - rw).cwiseAbs().maxCoeff() <= 1e-4);

  CHECK_THROWS_AS(hessian_fd(tanh_block, z3, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(hessian_fd(tanh_block, z3, 1e-7), std::invalid_argument);
}

TEST_CASE("three-way agreement on random blocks up to p = 200") {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    Index q = 1 + static_cast<Index>(rng.uniform_int(0, 11));
    Index d = 1 + static_cast<Index>(rng.uniform_int(0, 11));
    while (q * d + q > 200) { q = std::max<Index>(1, q / 2); d = std::max<Index>(1, d / 2); }
    const ActivationKind kind =
        rng.uniform01() < 0.5 ? ActivationKind::Sigmoid : ActivationKind::Tanh;
    const FunctionalBlock block = test_util::random_block(q, d, kind, rng);
    const Vector z = test_util::random_vector(d, rng);

    const Matrix rw = hessian_rowwise(block, z).matrix;
    const Matrix cf = hessian_closed_form(block, z).matrix;
    const Matrix fd = hessian_fd(block, z).matrix;
    CHECK((rw - cf).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, cf.cwiseAbs().maxCoeff()));
    CHECK((fd - cf).cwiseAbs().maxCoeff() <= 1e-4);
  }
}

TEST_CASE("row-wise output is symmetric without any symmetrization") {
  Rng rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    const FunctionalBlock block = test_util::random_block(5, 4, ActivationKind::Tanh, rng);
    const Vector z = test_util::random_vector(4, rng);
    const Matrix h = hessian_rowwise(block, z).matrix;
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("block-diagonality per output neuron holds in the row-wise path") {
  Rng rng(46);
  const Index q = 3, d = 4;
  const FunctionalBlock block = test_util::random_block(q, d, ActivationKind::Sigmoid, rng);
  const Vector z = test_util::random_vector(d, rng);
  const Matrix h = hessian_rowwise(block, z).matrix;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());

  auto neuron_of = [&](Index r) { return r < q * d ? r / d : r - q * d; };
  for (Index r = 0; r < h.rows(); ++r) {
    for (Index c = 0; c < h.cols(); ++c) {
      if (neuron_of(r) != neuron_of(c)) CHECK(std::abs(h(r, c)) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("scale law at fixed pre-activation") {
  Rng rng(47);
  const Index q = 3, d = 2;
  FunctionalBlock block = test_util::random_block(q, d, ActivationKind::Tanh, rng);
  const Vector z = test_util::random_vector(d, rng);
  const Vector u = block.weights * z + block.bias;

  const double c = 1.7;
  FunctionalBlock scaled = block;
  const Vector zc = c * z;
  scaled.bias = u - scaled.weights * zc;  // compensate so u is unchanged

  const Matrix h = hessian_closed_form(block, z).matrix;
  const Matrix hc = hessian_closed_form(scaled, zc).matrix;
  for (Index j = 0; j < q; ++j) {
    for (Index k = 0; k < d; ++k) {
      for (Index l = 0; l < d; ++l) {
        CHECK(hc(j * d + k, j * d + l) ==
              doctest::Approx(c * c * h(j * d + k, j * d + l)).epsilon(1e-10));
      }
      CHECK(hc(j * d + k, q * d + j) == doctest::Approx(c * h(j * d + k, q * d + j)).epsilon(1e-10));
    }
    CHECK(hc(q * d + j, q * d + j) == doctest::Approx(h(q * d + j, q * d + j)).epsilon(1e-10));
  }
}

TEST_CASE("all_local_hessians walks the trace") {
  Rng rng(48);

  // all-identity network: every Hessian vanishes
  Network id_net = make_mlp(2, {3}, 2, ActivationKind::Identity, ActivationKind::Identity, 1.0,
                            rng);
  const Vector x = test_util::random_vector(2, rng);
  for (const auto& h : all_local_hessians(id_net, x)) {
    CHECK(h.matrix.cwiseAbs().maxCoeff() == 0.0);
  }

  // two-block tanh network: per-block recomputation at the traced inputs
  Network net = make_mlp(2, {3}, 2, ActivationKind::Tanh, ActivationKind::Tanh, 1.0, rng);
  const ForwardTrace trace = forward(net, x);
  const auto hessians = all_local_hessians(net, x);
  REQUIRE(hessians.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const Matrix expected = hessian_rowwise(net.blocks[i], trace.inputs[i]).matrix;
    CHECK((hessians[i].matrix - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK(hessians[i].layer_index == i);
  }

  // relu between tanh blocks: the relu block's Hessian is zero, the tanh ones are not
  Network mixed;
  mixed.blocks.push_back(test_util::random_block(3, 2, ActivationKind::Tanh, rng));
  mixed.blocks.push_back(test_util::random_block(3, 3, ActivationKind::ReLU, rng));
  mixed.blocks.push_back(test_util::random_block(2, 3, ActivationKind::Tanh, rng));
  mixed.blocks[1].layer_index = 1;
  mixed.blocks[2].layer_index = 2;
  mixed.blocks[1].bias = Vector::Constant(3, 0.5);  // pre-activations off the kink

  const auto mixed_h = all_local_hessians(mixed, x);
  CHECK(mixed_h[0].matrix.cwiseAbs().maxCoeff() > 0.0);
  CHECK(mixed_h[1].matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK(mixed_h[2].matrix.cwiseAbs().maxCoeff() > 0.0);
}
