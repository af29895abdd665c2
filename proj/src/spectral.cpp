#include "hesskit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hesskit/numerics.hpp"

namespace hesskit {

namespace {

double rank_tolerance(const Vector& eigenvalues) {
  const double max_abs = eigenvalues.size() > 0 ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return static_cast<double>(eigenvalues.size()) * std::numeric_limits<double>::epsilon() * max_abs;
}

}  // namespace

std::size_t spectrum_rank(const Vector& eigenvalues) {
  const double tau = rank_tolerance(eigenvalues);
  std::size_t rank = 0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    if (std::abs(eigenvalues[i]) > tau) ++rank;
  }
  return rank;
}

double spectrum_near_zero_fraction(const Vector& eigenvalues) {
  if (eigenvalues.size() == 0) return 0.0;
  const double max_abs = eigenvalues.cwiseAbs().maxCoeff();
  const double cutoff = kNearZeroRelativeTol * std::max(1.0, max_abs);
  Index count = 0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    if (std::abs(eigenvalues[i]) <= cutoff) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(eigenvalues.size());
}

double spectrum_symmetry_score(const Vector& eigenvalues) {
  double sum = 0.0, sum_abs = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    sum += eigenvalues[i];
    sum_abs += std::abs(eigenvalues[i]);
  }
  if (sum_abs == 0.0) return 0.0;
  return 1.0 - std::abs(sum) / sum_abs;
}

HessianSpectrum hessian_spectrum(const LocalHessian& h) {
  const EigenDecomposition eig = sym_eigendecompose(h.matrix);

  HessianSpectrum spec;
  spec.layer_index = h.layer_index;
  spec.eigenvalues = eig.eigenvalues;
  spec.trace = eig.eigenvalues.sum();

  const std::size_t dim = static_cast<std::size_t>(eig.eigenvalues.size());
  const double tau = rank_tolerance(eig.eigenvalues);
  spec.rank = spectrum_rank(eig.eigenvalues);
  spec.singular = spec.rank < dim;

  spec.log_abs_det = 0.0;
  double min_above = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  for (Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double a = std::abs(eig.eigenvalues[i]);
    max_abs = std::max(max_abs, a);
    if (a > tau) {
      spec.log_abs_det += std::log(a);
      min_above = std::min(min_above, a);
    }
  }
  spec.condition_infinite = spec.singular;
  spec.condition = spec.rank > 0 ? max_abs / min_above : 0.0;
  spec.near_zero_fraction = spectrum_near_zero_fraction(eig.eigenvalues);
  spec.symmetry_score = spectrum_symmetry_score(eig.eigenvalues);
  return spec;
}

namespace {

constexpr std::size_t kWelchWindow = 256;
constexpr std::size_t kWelchHop = 128;

Vector hann_window(std::size_t n) {
  Vector w(static_cast<Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    w[static_cast<Index>(t)] =
        0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(t) / static_cast<double>(n)));
  }
  return w;
}

}  // namespace

std::size_t welch_window_length(std::size_t n) {
  if (n >= kWelchWindow) return kWelchWindow;
  std::size_t w = 8;
  while (w * 2 <= n) w *= 2;
  return w;
}

Vector welch_psd(const Vector& signal) {
  if (signal.size() == 0) {
    throw std::invalid_argument("welch_psd: empty signal");
  }
  if (!all_finite(signal)) {
    throw std::invalid_argument("welch_psd: non-finite samples");
  }
  const std::size_t n = static_cast<std::size_t>(signal.size());
  const std::size_t window = welch_window_length(n);
  const Vector w = hann_window(window);
  const double window_power = w.squaredNorm();

  Vector psd = Vector::Zero(static_cast<Index>(window / 2 + 1));
  std::size_t segments = 0;
  if (n >= kWelchWindow) {
    for (std::size_t start = 0; start + window <= n; start += kWelchHop) {
      Vector seg = signal.segment(static_cast<Index>(start), static_cast<Index>(window)).cwiseProduct(w);
      psd += real_fft_power(seg);
      ++segments;
    }
  } else {
    Vector seg = Vector::Zero(static_cast<Index>(window));
    const std::size_t take = std::min(n, window);
    seg.head(static_cast<Index>(take)) = signal.head(static_cast<Index>(take));
    psd = real_fft_power(seg.cwiseProduct(w));
    segments = 1;
  }
  psd /= static_cast<double>(segments) * window_power;
  return psd;
}

std::vector<Peak> top_peaks(const Vector& psd, std::size_t k) {
  if (psd.size() == 0) {
    throw std::invalid_argument("top_peaks: empty PSD");
  }
  if (k < 1) {
    throw std::invalid_argument("top_peaks: k must be >= 1");
  }
  const Index n = psd.size();
  const double window = n > 1 ? 2.0 * static_cast<double>(n - 1) : 1.0;
  std::vector<Peak> peaks;
  for (Index i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || psd[i] > psd[i - 1];
    const bool right_ok = i == n - 1 || psd[i] > psd[i + 1];
    if ((left_ok && right_ok) && n > 1) {
      peaks.push_back({i, static_cast<double>(i) / window, psd[i]});
    } else if (n == 1) {
      peaks.push_back({i, 0.0, psd[i]});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.power != b.power) return a.power > b.power;
    return a.bin < b.bin;
  });
  if (peaks.size() > k) peaks.resize(k);
  return peaks;
}

double normal_quantile(double p) {
  // Wichura (1988), algorithm AS 241, PPND16.
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  }
  const double q = p - 0.5;
  double r, val;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    val = q *
          (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
              1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
            1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
          (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
              5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
            4.2313330701600911252e+1) * r + 1.0);
    return val;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

namespace {

double normal_cdf_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

ShapiroWilkResult shapiro_wilk(const Vector& sample) {
  const Index n = sample.size();
  if (n < 3 || n > 5000) {
    throw std::invalid_argument("shapiro_wilk: n must be in [3, 5000]");
  }
  if (!all_finite(sample)) {
    throw std::invalid_argument("shapiro_wilk: non-finite values");
  }
  std::vector<double> x(sample.data(), sample.data() + n);
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) {
    throw std::invalid_argument("shapiro_wilk: constant sample");
  }

  const double nd = static_cast<double>(n);
  // Expected normal order statistics (Blom approximation), then Royston's
  // polynomial-corrected weights.
  Vector m(n);
  for (Index i = 0; i < n; ++i) {
    m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (nd + 0.25));
  }
  const double mtm = m.squaredNorm();

  Vector a(n);
  if (n == 3) {
    a[0] = -std::sqrt(0.5);
    a[1] = 0.0;
    a[2] = std::sqrt(0.5);
  } else {
    const double u = 1.0 / std::sqrt(nd);
    const double cn = m[n - 1] / std::sqrt(mtm);
    const double an = cn + 0.221157 * u - 0.147981 * u * u - 2.071190 * u * u * u +
                      4.434685 * u * u * u * u - 2.706056 * u * u * u * u * u;
    if (n <= 5) {
      const double phi = (mtm - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
      for (Index i = 1; i < n - 1; ++i) a[i] = m[i] / std::sqrt(phi);
      a[n - 1] = an;
      a[0] = -an;
    } else {
      const double cn1 = m[n - 2] / std::sqrt(mtm);
      const double an1 = cn1 + 0.042981 * u - 0.293762 * u * u - 1.752461 * u * u * u +
                         5.682633 * u * u * u * u - 3.582633 * u * u * u * u * u;
      const double phi = (mtm - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                         (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      for (Index i = 2; i < n - 2; ++i) a[i] = m[i] / std::sqrt(phi);
      a[n - 1] = an;
      a[n - 2] = an1;
      a[0] = -an;
      a[1] = -an1;
    }
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= nd;
  double ssq = 0.0, num = 0.0;
  for (Index i = 0; i < n; ++i) {
    ssq += (x[static_cast<std::size_t>(i)] - mean) * (x[static_cast<std::size_t>(i)] - mean);
    num += a[i] * x[static_cast<std::size_t>(i)];
  }
  double w = num * num / ssq;
  w = std::min(w, 1.0);

  double p;
  if (n == 3) {
    const double pi6 = 6.0 / M_PI;
    p = pi6 * (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75)));
    p = std::min(1.0, std::max(0.0, p));
  } else if (n <= 11) {
    const double gamma = 0.459 * nd - 2.273;
    const double lw = -std::log(gamma - std::log1p(-w));
    const double mu = 0.5440 - 0.39978 * nd + 0.025054 * nd * nd - 0.0006714 * nd * nd * nd;
    const double sigma = std::exp(1.3822 - 0.77857 * nd + 0.062767 * nd * nd - 0.0020322 * nd * nd * nd);
    p = normal_cdf_upper((lw - mu) / sigma);
  } else {
    const double ln_n = std::log(nd);
    const double lw = std::log1p(-w);
    const double mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n * ln_n + 0.0038915 * ln_n * ln_n * ln_n;
    const double sigma = std::exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n * ln_n);
    p = normal_cdf_upper((lw - mu) / sigma);
  }
  return {w, p};
}

SpectralSummary series_summary(const Vector& values) {
  if (values.size() == 0) {
    throw std::invalid_argument("series_summary: empty input");
  }
  if (!all_finite(values)) {
    throw std::invalid_argument("series_summary: non-finite values");
  }
  SpectralSummary s;
  const double n = static_cast<double>(values.size());
  s.mean = values.sum() / n;
  s.std = std::sqrt((values.array() - s.mean).square().sum() / n);
  s.min = values.minCoeff();
  s.max = values.maxCoeff();

  s.histogram.bin_edges = Vector(65);
  s.histogram.counts.assign(64, 0);
  const double span = s.max - s.min;
  for (Index i = 0; i <= 64; ++i) {
    s.histogram.bin_edges[i] = s.min + span * static_cast<double>(i) / 64.0;
  }
  for (Index i = 0; i < values.size(); ++i) {
    Index bin = 0;
    if (span > 0.0) {
      bin = static_cast<Index>((values[i] - s.min) / span * 64.0);
      bin = std::min<Index>(bin, 63);
    }
    ++s.histogram.counts[static_cast<std::size_t>(bin)];
  }

  s.welch = welch_psd(values);
  s.welch_window = welch_window_length(static_cast<std::size_t>(values.size()));
  s.top_peaks = top_peaks(s.welch, 5);
  return s;
}

}  // namespace hesskit
