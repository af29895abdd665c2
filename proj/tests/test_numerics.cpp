#include <doctest.h>

#include <cmath>

#include "hesskit/numerics.hpp"
#include "hesskit/rng.hpp"
#include "test_util.hpp"

using namespace hesskit;

TEST_CASE("sym_eigendecompose analytic 2x2 cases") {
  Matrix id = Matrix::Identity(2, 2);
  auto eig = sym_eigendecompose(id);
  CHECK(eig.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));

  Matrix diag(2, 2);
  diag << 2, 0, 0, 3;
  eig = sym_eigendecompose(diag);
  CHECK(eig.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(eig.eigenvalues[1] == doctest::Approx(3.0).epsilon(1e-12));

  Matrix offdiag(2, 2);
  offdiag << 0, 1, 1, 0;
  eig = sym_eigendecompose(offdiag);
  CHECK(eig.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sym_eigendecompose rejects bad input") {
  CHECK_THROWS_AS(sym_eigendecompose(Matrix::Zero(2, 3)), std::invalid_argument);

  Matrix asym(2, 2);
  asym << 0, 1, 0, 0;
  CHECK_THROWS_AS(sym_eigendecompose(asym), std::invalid_argument);

  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(sym_eigendecompose(bad), std::invalid_argument);
}

TEST_CASE("eigendecomposition reconstruction and orthonormality, random sizes 1..64") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(0, 63));
    const Matrix m = test_util::random_symmetric(n, rng);
    const auto eig = sym_eigendecompose(m);

    for (Index j = 0; j < n; ++j) {
      CHECK(std::abs(eig.eigenvectors.col(j).norm() - 1.0) <= 1e-10);
      if (j + 1 < n) CHECK(eig.eigenvalues[j] <= eig.eigenvalues[j + 1]);
    }
    const Matrix recon =
        eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.transpose();
    const double bound = 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff());
    CHECK((m - recon).cwiseAbs().maxCoeff() <= bound);
  }
}

TEST_CASE("trace and determinant identities") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.uniform_int(0, 7));
    const Matrix m = test_util::random_symmetric(n, rng);
    const auto eig = sym_eigendecompose(m);

    const double trace = m.trace();
    CHECK(std::abs(trace - eig.eigenvalues.sum()) <= 1e-8 * std::max(1.0, std::abs(trace)));

    const double det_lu = m.determinant();  // LU oracle
    double det_eig = 1.0;
    for (Index i = 0; i < n; ++i) det_eig *= eig.eigenvalues[i];
    CHECK(std::abs(det_lu - det_eig) <= 1e-6 * std::max(1.0, std::abs(det_lu)));
  }
}

TEST_CASE("svd analytic cases") {
  auto dec = svd(Matrix::Identity(3, 3));
  for (Index i = 0; i < 3; ++i) CHECK(dec.singular_values[i] == doctest::Approx(1.0));

  Rng rng(13);
  Vector u = test_util::random_vector(4, rng);
  Vector v = test_util::random_vector(3, rng);
  u.normalize();
  v.normalize();
  dec = svd(u * v.transpose());
  CHECK(dec.singular_values[0] == doctest::Approx(1.0).epsilon(1e-10));
  for (Index i = 1; i < dec.singular_values.size(); ++i) {
    CHECK(std::abs(dec.singular_values[i]) <= 1e-10);
  }
}

TEST_CASE("svd reconstruction and MtM-eigen oracle") {
  Rng rng(14);
  const Matrix m = test_util::random_matrix(4, 3, rng);
  const auto dec = svd(m);

  const Matrix recon = dec.u * dec.singular_values.asDiagonal() * dec.v.transpose();
  CHECK((m - recon).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff()));
  for (Index i = 0; i + 1 < dec.singular_values.size(); ++i) {
    CHECK(dec.singular_values[i] >= dec.singular_values[i + 1]);
  }

  // independent route: singular values = sqrt of eigenvalues of M^T M
  const auto eig = sym_eigendecompose(m.transpose() * m);
  for (Index i = 0; i < dec.singular_values.size(); ++i) {
    const double expected = std::sqrt(std::max(0.0, eig.eigenvalues[eig.eigenvalues.size() - 1 - i]));
    CHECK(dec.singular_values[i] == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("real_fft_power basics") {
  CHECK_THROWS_AS(real_fft_power(Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(real_fft_power(Vector::Zero(1)), std::invalid_argument);

  const Vector zero = Vector::Zero(16);
  CHECK(real_fft_power(zero).cwiseAbs().maxCoeff() == 0.0);

  const double c = 0.7;
  const Vector constant = Vector::Constant(8, c);
  const Vector p = real_fft_power(constant);
  CHECK(p[0] == doctest::Approx((8 * c) * (8 * c)).epsilon(1e-12));
  for (Index k = 1; k < p.size(); ++k) CHECK(std::abs(p[k]) <= 1e-20);
}

TEST_CASE("real_fft_power matches direct DFT, sine at bin 4 of 64") {
  Vector signal(64);
  for (Index t = 0; t < 64; ++t) signal[t] = std::sin(2.0 * M_PI * 4.0 * t / 64.0);
  const Vector fft = real_fft_power(signal);
  const Vector dft = test_util::dft_power(signal);

  Index argmax = 0;
  fft.maxCoeff(&argmax);
  CHECK(argmax == 4);
  for (Index k = 0; k < fft.size(); ++k) {
    CHECK(fft[k] == doctest::Approx(dft[k]).epsilon(1e-9).scale(fft.maxCoeff()));
  }
}

TEST_CASE("FFT Parseval identity for random signals, lengths 2..1024") {
  Rng rng(15);
  for (Index n = 2; n <= 1024; n *= 2) {
    const Vector signal = test_util::random_vector(n, rng);
    const Vector power = real_fft_power(signal);
    // one-sided: interior bins represent a conjugate pair
    double total = power[0] + power[n / 2];
    for (Index k = 1; k < n / 2; ++k) total += 2.0 * power[k];
    const double time_energy = signal.squaredNorm();
    CHECK(std::abs(time_energy - total / static_cast<double>(n)) <=
          1e-9 * std::max(1.0, time_energy));
  }
}

TEST_CASE("pearson_corr examples and errors") {
  Vector x(3), y(3);
  x << 1, 2, 3;
  CHECK(pearson_corr(x, x) == doctest::Approx(1.0));
  CHECK(pearson_corr(x, -x) == doctest::Approx(-1.0));

  y << 1, 2, 4;
  CHECK(pearson_corr(x, y) == doctest::Approx(0.9819805060619659).epsilon(1e-10));

  CHECK_THROWS_AS(pearson_corr(x, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(pearson_corr(x, Vector::Constant(3, 1.0)), std::invalid_argument);
}

TEST_CASE("pearson_corr invariant under positive affine rescaling") {
  Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = test_util::random_vector(50, rng);
    const Vector y = test_util::random_vector(50, rng);
    const double a = rng.uniform(0.1, 5.0);
    const double b = rng.uniform(-3.0, 3.0);
    const Vector xs = a * x + Vector::Constant(50, b);
    CHECK(std::abs(pearson_corr(xs, y) - pearson_corr(x, y)) <= 1e-12);
  }
}

TEST_CASE("pca_project on a perfect line explains all variance") {
  Rng rng(17);
  Matrix x(40, 2);
  for (Index i = 0; i < 40; ++i) {
    const double t = rng.uniform(-2.0, 2.0);
    x(i, 0) = t;
    x(i, 1) = 3.0 * t;  // exactly collinear
  }
  const PcaResult pca = pca_project(x, 1);
  const double total = 2.0;  // two standardized columns, unit variance each
  CHECK(pca.explained_variance[0] == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("pca_project isotropic case matches covariance eigenvalues") {
  Rng rng(18);
  Matrix x(400, 2);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const PcaResult pca = pca_project(x, 2);

  CHECK(pca.explained_variance[0] >= pca.explained_variance[1]);
  CHECK(pca.explained_variance[0] / pca.explained_variance[1] < 1.5);

  // oracle: eigenvalues of the standardized sample covariance
  Matrix z(x.rows(), 2);
  for (Index j = 0; j < 2; ++j) {
    const double mean = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mean).square().sum() / x.rows());
    z.col(j) = (x.col(j).array() - mean) / sd;
  }
  const auto eig = sym_eigendecompose((z.transpose() * z) / static_cast<double>(x.rows()));
  CHECK(pca.explained_variance[0] == doctest::Approx(eig.eigenvalues[1]).epsilon(1e-10));
  CHECK(pca.explained_variance[1] == doctest::Approx(eig.eigenvalues[0]).epsilon(1e-10));

  // components orthonormal
  const Matrix gram = pca.components * pca.components.transpose();
  CHECK((gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("pca_project full-rank reconstruction") {
  Rng rng(19);
  const Matrix x = test_util::random_matrix(30, 4, rng);
  const PcaResult pca = pca_project(x, 4);

  Matrix z(x.rows(), 4);
  for (Index j = 0; j < 4; ++j) {
    z.col(j) = (x.col(j).array() - pca.column_mean[j]) / pca.column_std[j];
  }
  const Matrix recon = pca.projected * pca.components;
  CHECK((z - recon).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("pca_project drops constant columns instead of failing") {
  Rng rng(20);
  Matrix x = test_util::random_matrix(20, 3, rng);
  x.col(1).setConstant(2.5);
  const PcaResult pca = pca_project(x, 2);
  REQUIRE(pca.dropped_columns.size() == 1);
  CHECK(pca.dropped_columns[0] == 1);
  CHECK(pca.components.col(1).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(pca_project(x, 3), std::invalid_argument);       // k > non-constant count
  CHECK_THROWS_AS(pca_project(x.topRows(1), 1), std::invalid_argument);  // < 2 samples
}
