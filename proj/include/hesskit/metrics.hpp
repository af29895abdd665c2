#pragma once

#include <vector>

#include "hesskit/datasets.hpp"
#include "hesskit/types.hpp"

namespace hesskit {

/// Model quality metrics for one evaluation pass. The task selects which
/// fields are meaningful; train_loss is always set by the training loop.
struct MetricReport {
  Task task = Task::Classification;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  double r2 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double train_loss = 0.0;
};

/// scores: one column of positive-class scores (binary) or per-class
/// probabilities/logits with >= 2 columns. Precision/Recall/F1 are
/// macro-averaged with the 0-for-empty-denominator convention; AUC is the
/// pairwise rank statistic (macro one-vs-rest for multiclass).
MetricReport classification_metrics(const std::vector<int>& targets, const Matrix& scores);

MetricReport regression_metrics(const Vector& targets, const Vector& predictions);

}  // namespace hesskit
