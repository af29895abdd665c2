#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hesskit/types.hpp"

namespace hesskit {

enum class Task { Classification, Regression };

struct Dataset {
  std::string name;
  Task task = Task::Classification;
  Matrix features;           // n x d
  std::vector<int> classes;  // classification targets, in [0, n_classes)
  Vector targets;            // regression targets
  int n_classes = 0;
  std::uint64_t seed = 0;

  Index size() const { return features.rows(); }
  Index feature_dim() const { return features.cols(); }
};

struct DatasetParams {
  double noise = 0.0;
  int n_classes = 3;         // blobs / classification
  int n_features = 10;       // classification / linear_regression
  int n_informative = 5;     // classification / linear_regression
  double class_sep = 2.0;    // classification
  double cluster_std = 1.0;  // blobs
  double factor = 0.5;       // circles: inner/outer radius ratio
};

/// Synthetic generator family. Recognized names: moons, circles, blobs,
/// classification, hastie, friedman1, friedman2, friedman3,
/// linear_regression. Generation is a pure function of
/// (name, n, params, seed).
Dataset generate(const std::string& name, Index n, const DatasetParams& params,
                 std::uint64_t seed);

const std::vector<std::string>& generator_names();

/// Feature columns to zero mean and unit population std; constant columns
/// are left at zero with a warning on stderr.
Dataset standardize(const Dataset& ds);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};

/// Deterministic shuffled 80/20 split.
TrainTestSplit split_80_20(const Dataset& ds, std::uint64_t seed);

/// CSV with header f0..f{d-1},target; doubles in round-trip decimal form.
void write_csv(const Dataset& ds, const std::string& path);

}  // namespace hesskit
