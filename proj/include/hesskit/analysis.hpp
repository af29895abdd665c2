#pragma once

#include <string>
#include <vector>

#include "hesskit/snapshot.hpp"
#include "hesskit/types.hpp"

namespace hesskit {

struct SampleKey {
  std::string run_id;
  long iteration = 0;
};

/// The two CCA variable groups: A holds quality metrics per checkpoint,
/// B holds per-layer parameter characteristics. Values are verbatim from
/// the snapshots; standardization happens inside cca/pca.
struct FeatureGroups {
  Matrix a;
  Matrix b;
  std::vector<std::string> a_names;
  std::vector<std::string> b_names;
  std::vector<SampleKey> sample_keys;
  Task task = Task::Classification;
};

/// A columns: [Accuracy, Precision, Recall, F1, AUC, train_loss] for
/// classification runs, [R2, neg_MAE, neg_RMSE, train_loss] for regression.
/// B columns, 15 per layer in fixed order: mean/std/min/max of weights, of
/// gradients, of hessian_eigens, then hessian_rank, log10 condition
/// (capped at 12, infinite mapped to the cap) and near_zero_fraction.
FeatureGroups extract_features(const std::vector<Snapshot>& snapshots);

/// Condition numbers enter features as log10 clipped to this cap.
inline constexpr double kConditionLogCap = 12.0;

struct CcaResult {
  Matrix x_weights;  // a x k; zero rows for dropped constant columns
  Matrix y_weights;  // b x k
  Vector correlations;  // k, descending, in [0, 1]
  Matrix scores_x;   // samples x k, unit-variance canonical variates
  Matrix scores_y;
  std::vector<std::string> dropped_a;
  std::vector<std::string> dropped_b;
};

/// CCA via whitening + SVD with ridge 1e-8 * trace/dim on both covariance
/// blocks. Reported correlations are the Pearson correlations of the
/// canonical variate pairs, clamped to [0, 1].
CcaResult cca(const Matrix& a, const Matrix& b, Index k,
              const std::vector<std::string>& a_names = {},
              const std::vector<std::string>& b_names = {});
CcaResult cca(const FeatureGroups& groups, Index k);

struct ScoreStats {
  double max = 0.0;
  double avg = 0.0;
  double median = 0.0;  // lower middle for even n
  double min = 0.0;
  double std = 0.0;  // population
};

ScoreStats score_stats(const Vector& values);

/// Per-sample products of the first canonical variate pair; the series a
/// score-stats table row summarizes for one run.
Vector cca_score_series(const CcaResult& result);

struct CorrelationMatrix {
  std::vector<std::string> labels;
  Matrix values;                           // symmetric, unit diagonal
  std::vector<std::vector<bool>> defined;  // false where a series is constant
};

CorrelationMatrix correlation_matrix(const FeatureGroups& groups);

struct PcaPoint {
  SampleKey key;
  std::string variant;
  double pc1 = 0.0;
  double pc2 = 0.0;
};

/// Pools the streams' Hessian-spectral features (first layer, last layer
/// and mean over layers of the 7 per-layer eigen-derived columns — a
/// depth-independent representation), standardizes and projects with
/// pca_project(k=2).
std::vector<PcaPoint> pca_architectures(const std::vector<std::vector<Snapshot>>& streams);

/// Mean silhouette of the 2-D points grouped by variant label; positive
/// values mean the variants separate.
double silhouette_by_variant(const std::vector<PcaPoint>& points);

struct LayerSimilarity {
  double value = 0.0;
  bool defined = true;  // false when a profile is all-zero
};

/// Cosine similarity of adjacent weight matrices' singular-value profiles
/// (each padded to common length and scaled to unit norm).
std::vector<LayerSimilarity> adjacent_layer_similarity(const std::vector<Matrix>& weights);
std::vector<LayerSimilarity> adjacent_layer_similarity(const Network& net);
std::vector<LayerSimilarity> adjacent_layer_similarity(const Snapshot& snapshot);

struct DiagnosticThresholds {
  double near_zero_fraction = 0.9;
  double low_expressivity_max_eigen = 1e-3;
  double saddle_symmetry = 0.9;
  double saddle_gradient_inf_norm = 1e-3;
  double condition = 1e6;
  double rank_fraction = 0.1;
};

struct FlagEvidence {
  bool fired = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct LayerDiagnostics {
  std::size_t layer = 0;
  FlagEvidence overparameterized_near_zero;
  FlagEvidence low_expressivity;
  FlagEvidence saddle_suspect;
  FlagEvidence ill_conditioned;
  FlagEvidence low_rank_redundancy;
};

/// Per-layer flags at the final snapshot plus network-level verdicts that
/// apply the positional rules (near-zero concentration in the last half
/// of the layers, low expressivity in the first half).
struct DiagnosticsReport {
  std::string run_id;
  long iteration = 0;  // snapshot the flags were evaluated at
  std::vector<LayerDiagnostics> layers;
  std::vector<LayerSimilarity> adjacent_similarity;
  bool net_overparameterized_near_zero = false;
  bool net_low_expressivity = false;
  bool net_saddle_suspect = false;
  bool net_ill_conditioned = false;
  bool net_low_rank_redundancy = false;
  std::vector<std::string> recommendations;
};

DiagnosticsReport diagnose(const std::vector<Snapshot>& stream,
                           const DiagnosticThresholds& thresholds = {});

}  // namespace hesskit
