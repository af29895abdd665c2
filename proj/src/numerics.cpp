#include "hesskit/numerics.hpp"

#include <cmath>
#include <complex>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace hesskit {

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

EigenDecomposition sym_eigendecompose(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("sym_eigendecompose: matrix is not square");
  }
  if (!all_finite(m)) {
    throw std::invalid_argument("sym_eigendecompose: non-finite entries");
  }
  const double max_abs = m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
  const double asym = m.size() > 0 ? (m - m.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-8 * std::max(1.0, max_abs)) {
    throw std::invalid_argument("sym_eigendecompose: asymmetry beyond tolerance");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("sym_eigendecompose: solver did not converge");
  }
  // Eigen returns ascending eigenvalues; fix eigenvector signs so the
  // largest-magnitude entry of each column is positive (deterministic basis).
  EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  for (Index j = 0; j < out.eigenvectors.cols(); ++j) {
    Index imax = 0;
    out.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.eigenvectors(imax, j) < 0.0) out.eigenvectors.col(j) = -out.eigenvectors.col(j);
  }
  return out;
}

SvdResult svd(const Matrix& m) {
  if (!all_finite(m)) {
    throw std::invalid_argument("svd: non-finite entries");
  }
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  for (Index j = 0; j < out.v.cols(); ++j) {
    Index imax = 0;
    out.v.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.v(imax, j) < 0.0) {
      out.v.col(j) = -out.v.col(j);
      out.u.col(j) = -out.u.col(j);
    }
  }
  return out;
}

namespace {

bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey. Kept in-house: the power-of-two contract
// makes it ~40 lines, and the summation order is fixed, which the
// determinism contract needs.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> even = a[i + k];
        const std::complex<double> odd = a[i + k + len / 2] * w;
        a[i + k] = even + odd;
        a[i + k + len / 2] = even - odd;
        w *= wlen;
      }
    }
  }
}

}  // namespace

Vector real_fft_power(const Vector& signal) {
  const std::size_t n = static_cast<std::size_t>(signal.size());
  if (n < 2 || !is_power_of_two(n)) {
    throw std::invalid_argument("real_fft_power: length must be a power of two >= 2");
  }
  if (!all_finite(signal)) {
    throw std::invalid_argument("real_fft_power: non-finite samples");
  }
  std::vector<std::complex<double>> a(n);
  for (std::size_t t = 0; t < n; ++t) a[t] = std::complex<double>(signal[static_cast<Index>(t)], 0.0);
  fft_radix2(a);
  Vector power(static_cast<Index>(n / 2 + 1));
  for (std::size_t k = 0; k <= n / 2; ++k) power[static_cast<Index>(k)] = std::norm(a[k]);
  return power;
}

double pearson_corr(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("pearson_corr: length mismatch");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("pearson_corr: need at least 2 samples");
  }
  const double n = static_cast<double>(x.size());
  const double mx = x.sum() / n;
  const double my = y.sum() / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("pearson_corr: constant series, correlation undefined");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::min(1.0, std::max(-1.0, r));
}

PcaResult pca_project(const Matrix& x, Index k) {
  const Index n = x.rows();
  const Index d = x.cols();
  if (n < 2) {
    throw std::invalid_argument("pca_project: need at least 2 samples");
  }
  if (k < 1 || k > std::min(n, d)) {
    throw std::invalid_argument("pca_project: k out of range");
  }
  if (!all_finite(x)) {
    throw std::invalid_argument("pca_project: non-finite entries");
  }

  PcaResult out;
  out.column_mean = x.colwise().mean();
  out.column_std = Vector::Zero(d);
  std::vector<Index> kept;
  for (Index j = 0; j < d; ++j) {
    const double var = (x.col(j).array() - out.column_mean[j]).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      out.column_std[j] = sd;
      kept.push_back(j);
    } else {
      out.dropped_columns.push_back(j);
      std::cerr << "warning: pca_project: dropping constant column " << j << "\n";
    }
  }
  if (static_cast<Index>(kept.size()) < k) {
    throw std::invalid_argument("pca_project: k exceeds non-constant feature count");
  }

  Matrix z(n, static_cast<Index>(kept.size()));
  for (std::size_t jj = 0; jj < kept.size(); ++jj) {
    const Index j = kept[jj];
    z.col(static_cast<Index>(jj)) = (x.col(j).array() - out.column_mean[j]) / out.column_std[j];
  }

  const Matrix cov = (z.transpose() * z) / static_cast<double>(n);
  const EigenDecomposition eig = sym_eigendecompose(cov);

  const Index m = cov.rows();
  out.components = Matrix::Zero(k, d);
  out.explained_variance = Vector(k);
  Matrix kept_components(k, m);
  for (Index c = 0; c < k; ++c) {
    const Index src = m - 1 - c;  // descending variance
    out.explained_variance[c] = eig.eigenvalues[src];
    kept_components.row(c) = eig.eigenvectors.col(src).transpose();
    for (std::size_t jj = 0; jj < kept.size(); ++jj) {
      out.components(c, kept[jj]) = eig.eigenvectors(static_cast<Index>(jj), src);
    }
  }
  out.projected = z * kept_components.transpose();
  return out;
}

}  // namespace hesskit
