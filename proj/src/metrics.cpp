#include "hesskit/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace hesskit {

namespace {

double pairwise_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double q : neg) {
      if (p > q) wins += 1.0;
      else if (p == q) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace

MetricReport classification_metrics(const std::vector<int>& targets, const Matrix& scores) {
  const Index n = scores.rows();
  if (n == 0 || targets.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("classification_metrics: size mismatch");
  }
  const bool binary_column = scores.cols() == 1;
  int n_classes = binary_column ? 2 : static_cast<int>(scores.cols());
  for (int t : targets) {
    if (t < 0 || t >= n_classes) {
      throw std::invalid_argument("classification_metrics: target out of range");
    }
  }

  std::vector<int> predicted(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (binary_column) {
      predicted[static_cast<std::size_t>(i)] = scores(i, 0) >= 0.5 ? 1 : 0;
    } else {
      Index arg = 0;
      scores.row(i).maxCoeff(&arg);
      predicted[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
  }

  MetricReport r;
  r.task = Task::Classification;
  Index correct = 0;
  for (Index i = 0; i < n; ++i) {
    if (predicted[static_cast<std::size_t>(i)] == targets[static_cast<std::size_t>(i)]) ++correct;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(n);

  // Macro averages with the 0-for-empty-denominator convention.
  double prec_sum = 0.0, rec_sum = 0.0, f1_sum = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    long tp = 0, fp = 0, fn = 0;
    for (Index i = 0; i < n; ++i) {
      const int t = targets[static_cast<std::size_t>(i)];
      const int p = predicted[static_cast<std::size_t>(i)];
      if (p == c && t == c) ++tp;
      else if (p == c) ++fp;
      else if (t == c) ++fn;
    }
    const double prec = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f1 = prec + rec > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    prec_sum += prec;
    rec_sum += rec;
    f1_sum += f1;
  }
  r.precision = prec_sum / n_classes;
  r.recall = rec_sum / n_classes;
  r.f1 = f1_sum / n_classes;

  bool all_same = true;
  for (int t : targets) {
    if (t != targets.front()) { all_same = false; break; }
  }
  if (all_same) {
    throw std::invalid_argument("classification_metrics: AUC undefined for single-class targets");
  }

  if (n_classes == 2) {
    std::vector<double> pos, neg;
    for (Index i = 0; i < n; ++i) {
      const double s = binary_column ? scores(i, 0) : scores(i, 1);
      if (targets[static_cast<std::size_t>(i)] == 1) pos.push_back(s);
      else neg.push_back(s);
    }
    r.auc = pairwise_auc(pos, neg);
  } else {
    // macro one-vs-rest over classes with at least one positive and one
    // negative sample
    double auc_sum = 0.0;
    int auc_classes = 0;
    for (int c = 0; c < n_classes; ++c) {
      std::vector<double> pos, neg;
      for (Index i = 0; i < n; ++i) {
        if (targets[static_cast<std::size_t>(i)] == c) pos.push_back(scores(i, c));
        else neg.push_back(scores(i, c));
      }
      if (!pos.empty() && !neg.empty()) {
        auc_sum += pairwise_auc(pos, neg);
        ++auc_classes;
      }
    }
    r.auc = auc_sum / auc_classes;
  }
  return r;
}

MetricReport regression_metrics(const Vector& targets, const Vector& predictions) {
  const Index n = targets.size();
  if (n == 0 || predictions.size() != n) {
    throw std::invalid_argument("regression_metrics: size mismatch or empty");
  }
  const double mean = targets.mean();
  double ss_tot = 0.0, ss_res = 0.0, abs_sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double e = targets[i] - predictions[i];
    ss_res += e * e;
    abs_sum += std::abs(e);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  if (ss_tot == 0.0) {
    throw std::invalid_argument("regression_metrics: constant targets, R2 undefined");
  }
  MetricReport r;
  r.task = Task::Regression;
  r.r2 = 1.0 - ss_res / ss_tot;
  r.mae = abs_sum / static_cast<double>(n);
  r.rmse = std::sqrt(ss_res / static_cast<double>(n));
  return r;
}

}  // namespace hesskit
