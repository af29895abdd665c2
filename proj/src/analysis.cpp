#include "hesskit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hesskit/numerics.hpp"

namespace hesskit {

namespace {

double capped_log_condition(double condition, bool infinite) {
  if (infinite) return kConditionLogCap;
  return std::min(std::log10(std::max(condition, 1.0)), kConditionLogCap);
}

}  // namespace

FeatureGroups extract_features(const std::vector<Snapshot>& snapshots) {
  if (snapshots.empty()) {
    throw std::invalid_argument("extract_features: empty snapshot list");
  }
  const Task task = snapshots.front().scores.task;
  const std::size_t n_layers = snapshots.front().layers.size();
  for (const auto& s : snapshots) {
    if (s.scores.task != task) {
      throw std::invalid_argument("extract_features: mixed tasks in one group");
    }
    if (s.layers.size() != n_layers) {
      throw std::invalid_argument("extract_features: layer counts differ across snapshots");
    }
  }

  FeatureGroups g;
  g.task = task;
  if (task == Task::Classification) {
    g.a_names = {"Accuracy", "Precision", "Recall", "F1", "AUC", "train_loss"};
  } else {
    g.a_names = {"R2", "neg_MAE", "neg_RMSE", "train_loss"};
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::string p = "layer." + std::to_string(l) + ".";
    for (const char* stem : {"weights", "gradient", "hessian_eigens"}) {
      for (const char* stat : {"mean", "std", "min", "max"}) {
        g.b_names.push_back(p + stem + "." + stat);
      }
    }
    g.b_names.push_back(p + "hessian_rank");
    g.b_names.push_back(p + "hessian_condition_log10");
    g.b_names.push_back(p + "near_zero_fraction");
  }

  const Index n = static_cast<Index>(snapshots.size());
  g.a = Matrix(n, static_cast<Index>(g.a_names.size()));
  g.b = Matrix(n, static_cast<Index>(g.b_names.size()));
  for (Index i = 0; i < n; ++i) {
    const Snapshot& s = snapshots[static_cast<std::size_t>(i)];
    g.sample_keys.push_back({s.run_id, s.iteration});
    if (task == Task::Classification) {
      g.a(i, 0) = s.scores.accuracy;
      g.a(i, 1) = s.scores.precision;
      g.a(i, 2) = s.scores.recall;
      g.a(i, 3) = s.scores.f1;
      g.a(i, 4) = s.scores.auc;
      g.a(i, 5) = s.scores.train_loss;
    } else {
      g.a(i, 0) = s.scores.r2;
      g.a(i, 1) = -s.scores.mae;
      g.a(i, 2) = -s.scores.rmse;
      g.a(i, 3) = s.scores.train_loss;
    }
    Index col = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      const LayerRecord& rec = s.layers[l];
      for (const SpectralSummary* sum :
           {&rec.weights_spectral, &rec.gradient_spectral, &rec.hessian_eigens_spectral}) {
        g.b(i, col++) = sum->mean;
        g.b(i, col++) = sum->std;
        g.b(i, col++) = sum->min;
        g.b(i, col++) = sum->max;
      }
      g.b(i, col++) = static_cast<double>(rec.hessian_rank);
      g.b(i, col++) = capped_log_condition(rec.hessian_condition, rec.hessian_condition_infinite);
      g.b(i, col++) = spectrum_near_zero_fraction(rec.hessian_eigens);
    }
  }
  return g;
}

namespace {

struct Standardized {
  Matrix z;                        // n x kept
  std::vector<Index> kept;         // original column indices
  std::vector<std::string> dropped;
};

Standardized standardize_columns(const Matrix& x, const std::vector<std::string>& names) {
  const Index n = x.rows();
  Standardized out;
  std::vector<Vector> cols;
  for (Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mean).square().sum() / static_cast<double>(n));
    if (sd > 0.0) {
      out.kept.push_back(j);
      cols.push_back((x.col(j).array() - mean) / sd);
    } else {
      out.dropped.push_back(j < static_cast<Index>(names.size())
                                ? names[static_cast<std::size_t>(j)]
                                : "column " + std::to_string(j));
    }
  }
  out.z = Matrix(n, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.z.col(static_cast<Index>(j)) = cols[j];
  return out;
}

// C^{-1/2} of a symmetric positive definite matrix.
Matrix inverse_sqrt(const Matrix& c, const char* which) {
  const EigenDecomposition eig = sym_eigendecompose(c);
  Vector inv(eig.eigenvalues.size());
  for (Index i = 0; i < inv.size(); ++i) {
    if (eig.eigenvalues[i] <= 0.0) {
      throw std::runtime_error(std::string("cca: degenerate ") + which +
                               " covariance after ridge (min eigenvalue " +
                               std::to_string(eig.eigenvalues[i]) + ", max " +
                               std::to_string(eig.eigenvalues[inv.size() - 1]) + ")");
    }
    inv[i] = 1.0 / std::sqrt(eig.eigenvalues[i]);
  }
  return eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.transpose();
}

double safe_corr(const Vector& x, const Vector& y) {
  const double n = static_cast<double>(x.size());
  const double mx = x.sum() / n, my = y.sum() / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

CcaResult cca(const Matrix& a, const Matrix& b, Index k,
              const std::vector<std::string>& a_names,
              const std::vector<std::string>& b_names) {
  if (a.rows() != b.rows()) throw std::invalid_argument("cca: row counts differ");
  const Index n = a.rows();
  if (n < 3) throw std::invalid_argument("cca: need at least 3 rows");
  if (k < 1 || k > std::min(a.cols(), b.cols())) {
    throw std::invalid_argument("cca: k out of range");
  }

  Standardized za = standardize_columns(a, a_names);
  Standardized zb = standardize_columns(b, b_names);
  if (k > std::min<Index>(static_cast<Index>(za.kept.size()), static_cast<Index>(zb.kept.size()))) {
    throw std::invalid_argument("cca: k exceeds non-constant column count");
  }

  const double nd = static_cast<double>(n);
  Matrix caa = (za.z.transpose() * za.z) / nd;
  Matrix cbb = (zb.z.transpose() * zb.z) / nd;
  const Matrix cab = (za.z.transpose() * zb.z) / nd;
  const double ridge_a = 1e-8 * caa.trace() / static_cast<double>(caa.rows());
  const double ridge_b = 1e-8 * cbb.trace() / static_cast<double>(cbb.rows());
  caa += ridge_a * Matrix::Identity(caa.rows(), caa.cols());
  cbb += ridge_b * Matrix::Identity(cbb.rows(), cbb.cols());

  const Matrix wa = inverse_sqrt(caa, "A");
  const Matrix wb = inverse_sqrt(cbb, "B");
  const SvdResult dec = svd(wa * cab * wb);

  Matrix xw_kept = wa * dec.u.leftCols(k);
  Matrix yw_kept = wb * dec.v.leftCols(k);

  // Deterministic sign: largest-magnitude X-weight entry positive per pair.
  for (Index j = 0; j < k; ++j) {
    Index imax = 0;
    xw_kept.col(j).cwiseAbs().maxCoeff(&imax);
    if (xw_kept(imax, j) < 0.0) {
      xw_kept.col(j) = -xw_kept.col(j);
      yw_kept.col(j) = -yw_kept.col(j);
    }
  }

  CcaResult out;
  out.dropped_a = za.dropped;
  out.dropped_b = zb.dropped;
  out.scores_x = za.z * xw_kept;
  out.scores_y = zb.z * yw_kept;

  // Report the realized correlations of the variate pairs; the ridge makes
  // the SVD values a hair conservative.
  std::vector<std::pair<double, Index>> corr_order;
  for (Index j = 0; j < k; ++j) {
    const double r = std::max(0.0, std::min(1.0, safe_corr(out.scores_x.col(j), out.scores_y.col(j))));
    corr_order.emplace_back(r, j);
  }
  std::stable_sort(corr_order.begin(), corr_order.end(),
                   [](const auto& l, const auto& r) { return l.first > r.first; });

  Matrix sx(n, k), sy(n, k), xw_sorted(xw_kept.rows(), k), yw_sorted(yw_kept.rows(), k);
  out.correlations = Vector(k);
  for (Index j = 0; j < k; ++j) {
    const Index src = corr_order[static_cast<std::size_t>(j)].second;
    out.correlations[j] = corr_order[static_cast<std::size_t>(j)].first;
    sx.col(j) = out.scores_x.col(src);
    sy.col(j) = out.scores_y.col(src);
    xw_sorted.col(j) = xw_kept.col(src);
    yw_sorted.col(j) = yw_kept.col(src);
  }
  out.scores_x = std::move(sx);
  out.scores_y = std::move(sy);

  out.x_weights = Matrix::Zero(a.cols(), k);
  for (std::size_t jj = 0; jj < za.kept.size(); ++jj) {
    out.x_weights.row(za.kept[jj]) = xw_sorted.row(static_cast<Index>(jj));
  }
  out.y_weights = Matrix::Zero(b.cols(), k);
  for (std::size_t jj = 0; jj < zb.kept.size(); ++jj) {
    out.y_weights.row(zb.kept[jj]) = yw_sorted.row(static_cast<Index>(jj));
  }
  return out;
}

CcaResult cca(const FeatureGroups& groups, Index k) {
  return cca(groups.a, groups.b, k, groups.a_names, groups.b_names);
}

ScoreStats score_stats(const Vector& values) {
  if (values.size() == 0) throw std::invalid_argument("score_stats: empty input");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  ScoreStats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = sorted[(n - 1) / 2];  // lower middle for even n
  s.avg = values.sum() / static_cast<double>(n);
  s.std = std::sqrt((values.array() - s.avg).square().sum() / static_cast<double>(n));
  return s;
}

Vector cca_score_series(const CcaResult& result) {
  return result.scores_x.col(0).cwiseProduct(result.scores_y.col(0));
}

CorrelationMatrix correlation_matrix(const FeatureGroups& groups) {
  if (groups.a.rows() < 2) {
    throw std::invalid_argument("correlation_matrix: need at least 2 rows");
  }
  CorrelationMatrix out;
  out.labels = groups.a_names;
  out.labels.insert(out.labels.end(), groups.b_names.begin(), groups.b_names.end());
  const Index m = static_cast<Index>(out.labels.size());
  Matrix all(groups.a.rows(), m);
  all << groups.a, groups.b;

  out.values = Matrix::Identity(m, m);
  out.defined.assign(static_cast<std::size_t>(m), std::vector<bool>(static_cast<std::size_t>(m), true));
  std::vector<bool> constant(static_cast<std::size_t>(m), false);
  for (Index j = 0; j < m; ++j) {
    constant[static_cast<std::size_t>(j)] =
        (all.col(j).array() - all.col(j).mean()).square().sum() == 0.0;
  }
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      if (constant[static_cast<std::size_t>(i)] || constant[static_cast<std::size_t>(j)]) {
        out.defined[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = false;
        out.defined[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = false;
        out.values(i, j) = 0.0;
        out.values(j, i) = 0.0;
      } else {
        const double r = pearson_corr(all.col(i), all.col(j));
        out.values(i, j) = r;
        out.values(j, i) = r;
      }
    }
  }
  return out;
}

namespace {

// 7 eigen-derived columns per layer; first/last/mean-over-layers makes the
// row length independent of network depth so variants can be pooled.
Vector hessian_spectral_row(const Snapshot& s) {
  const std::size_t n_layers = s.layers.size();
  auto layer_features = [&](const LayerRecord& rec) {
    Vector f(7);
    f[0] = rec.hessian_eigens_spectral.mean;
    f[1] = rec.hessian_eigens_spectral.std;
    f[2] = rec.hessian_eigens_spectral.min;
    f[3] = rec.hessian_eigens_spectral.max;
    f[4] = static_cast<double>(rec.hessian_rank);
    f[5] = capped_log_condition(rec.hessian_condition, rec.hessian_condition_infinite);
    f[6] = spectrum_near_zero_fraction(rec.hessian_eigens);
    return f;
  };
  Vector row(21);
  row.segment(0, 7) = layer_features(s.layers.front());
  row.segment(7, 7) = layer_features(s.layers.back());
  Vector mean = Vector::Zero(7);
  for (const auto& rec : s.layers) mean += layer_features(rec);
  row.segment(14, 7) = mean / static_cast<double>(n_layers);
  return row;
}

}  // namespace

std::vector<PcaPoint> pca_architectures(const std::vector<std::vector<Snapshot>>& streams) {
  std::size_t total = 0;
  for (const auto& stream : streams) {
    if (stream.size() < 2) {
      throw std::invalid_argument("pca_architectures: every stream needs >= 2 snapshots");
    }
    total += stream.size();
  }
  if (streams.empty()) throw std::invalid_argument("pca_architectures: no streams");

  Matrix pooled(static_cast<Index>(total), 21);
  std::vector<PcaPoint> points(total);
  Index row = 0;
  for (const auto& stream : streams) {
    for (const auto& s : stream) {
      pooled.row(row) = hessian_spectral_row(s).transpose();
      points[static_cast<std::size_t>(row)].key = {s.run_id, s.iteration};
      points[static_cast<std::size_t>(row)].variant = s.variant;
      ++row;
    }
  }

  const PcaResult pca = pca_project(pooled, 2);
  for (Index i = 0; i < pca.projected.rows(); ++i) {
    points[static_cast<std::size_t>(i)].pc1 = pca.projected(i, 0);
    points[static_cast<std::size_t>(i)].pc2 = pca.projected(i, 1);
  }
  return points;
}

double silhouette_by_variant(const std::vector<PcaPoint>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw std::invalid_argument("silhouette_by_variant: need at least 3 points");
  std::vector<std::string> labels;
  for (const auto& p : points) {
    if (std::find(labels.begin(), labels.end(), p.variant) == labels.end()) {
      labels.push_back(p.variant);
    }
  }
  if (labels.size() < 2) {
    throw std::invalid_argument("silhouette_by_variant: need at least 2 variants");
  }

  auto dist = [&](std::size_t i, std::size_t j) {
    const double dx = points[i].pc1 - points[j].pc1;
    const double dy = points[i].pc2 - points[j].pc2;
    return std::sqrt(dx * dx + dy * dy);
  };

  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double intra = 0.0;
    std::size_t intra_n = 0;
    double best_other = std::numeric_limits<double>::infinity();
    for (const auto& label : labels) {
      if (label == points[i].variant) continue;
      double sum = 0.0;
      std::size_t cnt = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (points[j].variant == label) {
          sum += dist(i, j);
          ++cnt;
        }
      }
      if (cnt > 0) best_other = std::min(best_other, sum / static_cast<double>(cnt));
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && points[j].variant == points[i].variant) {
        intra += dist(i, j);
        ++intra_n;
      }
    }
    if (intra_n == 0) continue;  // singleton cluster: undefined, skipped
    const double a = intra / static_cast<double>(intra_n);
    const double b = best_other;
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("silhouette_by_variant: all clusters singletons");
  return total / static_cast<double>(counted);
}

std::vector<LayerSimilarity> adjacent_layer_similarity(const std::vector<Matrix>& weights) {
  if (weights.size() < 2) {
    throw std::invalid_argument("adjacent_layer_similarity: need at least 2 layers");
  }
  std::vector<Vector> profiles;
  for (const auto& w : weights) profiles.push_back(svd(w).singular_values);

  std::vector<LayerSimilarity> out;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    const Vector& s1 = profiles[i];
    const Vector& s2 = profiles[i + 1];
    const Index len = std::max(s1.size(), s2.size());
    Vector p1 = Vector::Zero(len), p2 = Vector::Zero(len);
    p1.head(s1.size()) = s1;
    p2.head(s2.size()) = s2;
    const double n1 = p1.norm(), n2 = p2.norm();
    if (n1 == 0.0 || n2 == 0.0) {
      out.push_back({0.0, false});
    } else {
      out.push_back({p1.dot(p2) / (n1 * n2), true});
    }
  }
  return out;
}

std::vector<LayerSimilarity> adjacent_layer_similarity(const Network& net) {
  std::vector<Matrix> weights;
  for (const auto& b : net.blocks) weights.push_back(b.weights);
  return adjacent_layer_similarity(weights);
}

std::vector<LayerSimilarity> adjacent_layer_similarity(const Snapshot& snapshot) {
  std::vector<Matrix> weights;
  for (const auto& rec : snapshot.layers) {
    const Index q = rec.bias.size();
    const Index d = rec.weights.size() / q;
    Matrix w(q, d);
    for (Index j = 0; j < q; ++j) {
      for (Index k = 0; k < d; ++k) w(j, k) = rec.weights[j * d + k];
    }
    weights.push_back(std::move(w));
  }
  return adjacent_layer_similarity(weights);
}

DiagnosticsReport diagnose(const std::vector<Snapshot>& stream,
                           const DiagnosticThresholds& thr) {
  if (stream.empty()) throw std::invalid_argument("diagnose: empty stream");
  const Snapshot& final_snap = stream.back();
  const std::size_t n_layers = final_snap.layers.size();
  const std::size_t half = (n_layers + 1) / 2;

  DiagnosticsReport report;
  report.run_id = final_snap.run_id;
  report.iteration = final_snap.iteration;

  for (std::size_t l = 0; l < n_layers; ++l) {
    const LayerRecord& rec = final_snap.layers[l];
    const double p = static_cast<double>(rec.param_count());
    const double max_abs =
        rec.hessian_eigens.size() > 0 ? rec.hessian_eigens.cwiseAbs().maxCoeff() : 0.0;
    const double near_zero = spectrum_near_zero_fraction(rec.hessian_eigens);
    const double symmetry = spectrum_symmetry_score(rec.hessian_eigens);
    const double grad_inf = std::max(
        rec.gradient.size() > 0 ? rec.gradient.cwiseAbs().maxCoeff() : 0.0,
        rec.bias_gradient.size() > 0 ? rec.bias_gradient.cwiseAbs().maxCoeff() : 0.0);
    const double rank_frac = static_cast<double>(rec.hessian_rank) / p;

    LayerDiagnostics diag;
    diag.layer = l;
    diag.overparameterized_near_zero = {near_zero > thr.near_zero_fraction, near_zero,
                                        thr.near_zero_fraction};
    diag.low_expressivity = {max_abs < thr.low_expressivity_max_eigen, max_abs,
                             thr.low_expressivity_max_eigen};
    diag.saddle_suspect = {symmetry > thr.saddle_symmetry &&
                               grad_inf < thr.saddle_gradient_inf_norm,
                           symmetry, thr.saddle_symmetry};
    diag.ill_conditioned = {!rec.hessian_condition_infinite &&
                                rec.hessian_condition > thr.condition,
                            rec.hessian_condition_infinite ? 0.0 : rec.hessian_condition,
                            thr.condition};
    diag.low_rank_redundancy = {rank_frac < thr.rank_fraction, rank_frac, thr.rank_fraction};
    report.layers.push_back(diag);

    // positional rules for the network-level verdicts
    if (l + half >= n_layers && diag.overparameterized_near_zero.fired) {
      report.net_overparameterized_near_zero = true;
    }
    if (l < half && diag.low_expressivity.fired) report.net_low_expressivity = true;
    if (diag.saddle_suspect.fired) report.net_saddle_suspect = true;
    if (diag.ill_conditioned.fired) report.net_ill_conditioned = true;
    if (diag.low_rank_redundancy.fired) report.net_low_rank_redundancy = true;
  }

  if (n_layers >= 2) report.adjacent_similarity = adjacent_layer_similarity(final_snap);

  if (report.net_overparameterized_near_zero) {
    report.recommendations.push_back(
        "eigenvalues concentrate near zero in the later layers: consider regularization or "
        "fewer parameters there");
  }
  if (report.net_low_expressivity) {
    report.recommendations.push_back(
        "largest curvature in the early layers is very small: consider adding parameters to "
        "the initial layers");
  }
  if (report.net_saddle_suspect) {
    report.recommendations.push_back(
        "near-symmetric eigenvalue spectrum with a small gradient: the run may be stalled "
        "near a saddle");
  }
  if (report.net_ill_conditioned) {
    report.recommendations.push_back(
        "condition number above 1e6: adaptive optimizers (adam/rmsprop) are advisable");
  }
  if (report.net_low_rank_redundancy) {
    report.recommendations.push_back(
        "local Hessian rank is a small fraction of the layer size: parameters look redundant");
  }
  if (report.recommendations.empty()) {
    report.recommendations.push_back("no warnings");
  }
  return report;
}

}  // namespace hesskit
