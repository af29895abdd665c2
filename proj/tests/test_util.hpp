#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "hesskit/network.hpp"
#include "hesskit/rng.hpp"
#include "hesskit/types.hpp"

namespace test_util {

inline hesskit::Matrix random_matrix(hesskit::Index rows, hesskit::Index cols, hesskit::Rng& rng,
                                     double lo = -1.0, double hi = 1.0) {
  hesskit::Matrix m(rows, cols);
  for (hesskit::Index i = 0; i < rows; ++i) {
    for (hesskit::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  }
  return m;
}

inline hesskit::Matrix random_symmetric(hesskit::Index n, hesskit::Rng& rng) {
  hesskit::Matrix m = random_matrix(n, n, rng);
  return 0.5 * (m + m.transpose());
}

inline hesskit::Vector random_vector(hesskit::Index n, hesskit::Rng& rng, double lo = -1.0,
                                     double hi = 1.0) {
  hesskit::Vector v(n);
  for (hesskit::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline hesskit::FunctionalBlock random_block(hesskit::Index q, hesskit::Index d,
                                             hesskit::ActivationKind activation,
                                             hesskit::Rng& rng) {
  hesskit::FunctionalBlock block;
  block.weights = random_matrix(q, d, rng);
  block.bias = random_vector(q, rng);
  block.activation = activation;
  return block;
}

// Direct O(n^2) DFT power, the FFT oracle.
inline hesskit::Vector dft_power(const hesskit::Vector& signal) {
  const hesskit::Index n = signal.size();
  hesskit::Vector power(n / 2 + 1);
  for (hesskit::Index k = 0; k <= n / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (hesskit::Index t = 0; t < n; ++t) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(t) /
                         static_cast<double>(n);
      acc += signal[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    power[k] = std::norm(acc);
  }
  return power;
}

}  // namespace test_util
