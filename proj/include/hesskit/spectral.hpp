#pragma once

#include <cstdint>
#include <vector>

#include "hesskit/local_hessian.hpp"
#include "hesskit/types.hpp"

namespace hesskit {

struct Histogram {
  Vector bin_edges;                   // 65 edges, uniform over [min, max]
  std::vector<std::uint64_t> counts;  // 64 bins, sum == series length
};

struct Peak {
  Index bin = 0;
  double frequency = 0.0;  // cycles per sample, bin / window_length
  double power = 0.0;
};

/// Statistical and spectral characterization of one value series.
struct SpectralSummary {
  double mean = 0.0;
  double std = 0.0;  // population convention (1/n)
  double min = 0.0;
  double max = 0.0;
  Histogram histogram;
  Vector welch;                  // one-sided PSD
  std::size_t welch_window = 0;  // actual window length used
  std::vector<Peak> top_peaks;   // <= 5, descending power
};

struct HessianSpectrum {
  std::size_t layer_index = 0;
  Vector eigenvalues;  // ascending
  double trace = 0.0;
  double log_abs_det = 0.0;  // sum of log|lambda| over above-threshold values
  bool singular = false;     // rank < dimension
  std::size_t rank = 0;
  double condition = 0.0;  // >= 1, meaningful only when !condition_infinite
  bool condition_infinite = false;
  double near_zero_fraction = 0.0;
  double symmetry_score = 0.0;  // 1 - |sum lambda| / sum |lambda|
};

struct ShapiroWilkResult {
  double w = 0.0;
  double p_value = 0.0;
};

/// Relative cutoff under which an eigenvalue counts as "near zero":
/// |lambda| <= 1e-6 * max(1, max|lambda|).
inline constexpr double kNearZeroRelativeTol = 1e-6;

// Building blocks shared with the analysis/validation layers; all operate
// on a raw eigenvalue vector.
std::size_t spectrum_rank(const Vector& eigenvalues);
double spectrum_near_zero_fraction(const Vector& eigenvalues);
double spectrum_symmetry_score(const Vector& eigenvalues);

HessianSpectrum hessian_spectrum(const LocalHessian& h);

/// Welch PSD: Hanning window of length 256, hop 128, periodogram average,
/// normalized by the window power so unit-variance white noise sits at
/// level 1. Signals shorter than 256 samples fall back to a single
/// windowed periodogram of the largest power-of-two length <= n (minimum
/// 8, zero-padded below that).
Vector welch_psd(const Vector& signal);

/// Window length welch_psd would use for a signal of length n.
std::size_t welch_window_length(std::size_t n);

/// Local maxima (strictly above both neighbors; boundary bins compare to
/// their single neighbor), top k by power, descending. Frequency is
/// bin / window, with window = 2 * (psd length - 1).
std::vector<Peak> top_peaks(const Vector& psd, std::size_t k);

/// Shapiro-Wilk normality test, Royston's AS R94 approximation;
/// 3 <= n <= 5000, non-constant sample.
ShapiroWilkResult shapiro_wilk(const Vector& sample);

/// Quantile function of the standard normal (Wichura's AS 241).
double normal_quantile(double p);

SpectralSummary series_summary(const Vector& values);

}  // namespace hesskit
