#include "hesskit/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "hesskit/numerics.hpp"
#include "hesskit/rng.hpp"

namespace hesskit {

namespace {

void check_params(Index n, const DatasetParams& p) {
  if (n < 8) throw std::invalid_argument("generate: n must be >= 8");
  if (p.noise < 0.0) throw std::invalid_argument("generate: noise must be >= 0");
  if (p.n_classes < 2) throw std::invalid_argument("generate: n_classes must be >= 2");
  if (p.n_features < 1) throw std::invalid_argument("generate: n_features must be >= 1");
  if (p.n_informative < 1 || p.n_informative > p.n_features) {
    throw std::invalid_argument("generate: n_informative out of range");
  }
  if (p.cluster_std <= 0.0) throw std::invalid_argument("generate: cluster_std must be > 0");
  if (p.factor <= 0.0 || p.factor >= 1.0) {
    throw std::invalid_argument("generate: circles factor must be in (0, 1)");
  }
}

Dataset make_moons(Index n, const DatasetParams& p, Rng& rng) {
  const Index n_out = (n + 1) / 2;  // class 0 gets the extra sample
  const Index n_in = n - n_out;
  Dataset ds;
  ds.task = Task::Classification;
  ds.n_classes = 2;
  ds.features = Matrix(n, 2);
  ds.classes.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n_out; ++i) {
    const double t = M_PI * static_cast<double>(i) / static_cast<double>(std::max<Index>(n_out - 1, 1));
    ds.features(i, 0) = std::cos(t);
    ds.features(i, 1) = std::sin(t);
    ds.classes[static_cast<std::size_t>(i)] = 0;
  }
  for (Index i = 0; i < n_in; ++i) {
    const double t = M_PI * static_cast<double>(i) / static_cast<double>(std::max<Index>(n_in - 1, 1));
    ds.features(n_out + i, 0) = 1.0 - std::cos(t);
    ds.features(n_out + i, 1) = 0.5 - std::sin(t);
    ds.classes[static_cast<std::size_t>(n_out + i)] = 1;
  }
  if (p.noise > 0.0) {
    for (Index i = 0; i < n; ++i) {
      ds.features(i, 0) += p.noise * rng.normal();
      ds.features(i, 1) += p.noise * rng.normal();
    }
  }
  return ds;
}

Dataset make_circles(Index n, const DatasetParams& p, Rng& rng) {
  const Index n_out = (n + 1) / 2;
  const Index n_in = n - n_out;
  Dataset ds;
  ds.task = Task::Classification;
  ds.n_classes = 2;
  ds.features = Matrix(n, 2);
  ds.classes.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n_out; ++i) {
    const double t = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n_out);
    ds.features(i, 0) = std::cos(t);
    ds.features(i, 1) = std::sin(t);
    ds.classes[static_cast<std::size_t>(i)] = 0;
  }
  for (Index i = 0; i < n_in; ++i) {
    const double t = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n_in);
    ds.features(n_out + i, 0) = p.factor * std::cos(t);
    ds.features(n_out + i, 1) = p.factor * std::sin(t);
    ds.classes[static_cast<std::size_t>(n_out + i)] = 1;
  }
  if (p.noise > 0.0) {
    for (Index i = 0; i < n; ++i) {
      ds.features(i, 0) += p.noise * rng.normal();
      ds.features(i, 1) += p.noise * rng.normal();
    }
  }
  return ds;
}

Dataset make_blobs(Index n, const DatasetParams& p, Rng& rng) {
  const int k = p.n_classes;
  Matrix centers(k, 2);
  for (int c = 0; c < k; ++c) {
    centers(c, 0) = rng.uniform(-10.0, 10.0);
    centers(c, 1) = rng.uniform(-10.0, 10.0);
  }
  Dataset ds;
  ds.task = Task::Classification;
  ds.n_classes = k;
  ds.features = Matrix(n, 2);
  ds.classes.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % k);
    ds.features(i, 0) = centers(c, 0) + p.cluster_std * rng.normal();
    ds.features(i, 1) = centers(c, 1) + p.cluster_std * rng.normal();
    ds.classes[static_cast<std::size_t>(i)] = c;
  }
  return ds;
}

// Gaussian clusters at hypercube vertices plus redundant linear-combination
// features; a simplified cousin of the usual make_classification generator.
Dataset make_classification_ds(Index n, const DatasetParams& p, Rng& rng) {
  const int k = p.n_classes;
  const int d_inf = p.n_informative;
  const int d = p.n_features;
  if (k > (1 << std::min(d_inf, 20))) {
    throw std::invalid_argument("generate: n_classes exceeds 2^n_informative vertices");
  }
  Dataset ds;
  ds.task = Task::Classification;
  ds.n_classes = k;
  ds.features = Matrix(n, d);
  ds.classes.resize(static_cast<std::size_t>(n));

  Matrix centers(k, d_inf);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < d_inf; ++j) {
      centers(c, j) = ((c >> j) & 1 ? 1.0 : -1.0) * p.class_sep;
    }
  }
  Matrix mix(d_inf, d - d_inf);  // redundant features
  for (Index j = 0; j < mix.size(); ++j) mix.data()[j] = rng.uniform(-1.0, 1.0);

  for (Index i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % k);
    for (int j = 0; j < d_inf; ++j) ds.features(i, j) = centers(c, j) + rng.normal();
    ds.classes[static_cast<std::size_t>(i)] = c;
  }
  if (d > d_inf) {
    ds.features.rightCols(d - d_inf) = ds.features.leftCols(d_inf) * mix;
    for (Index i = 0; i < n; ++i) {
      for (int j = d_inf; j < d; ++j) ds.features(i, j) += p.noise * rng.normal();
    }
  }
  return ds;
}

Dataset make_hastie(Index n, Rng& rng) {
  Dataset ds;
  ds.task = Task::Classification;
  ds.n_classes = 2;
  ds.features = Matrix(n, 10);
  ds.classes.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double ssq = 0.0;
    for (Index j = 0; j < 10; ++j) {
      const double v = rng.normal();
      ds.features(i, j) = v;
      ssq += v * v;
    }
    ds.classes[static_cast<std::size_t>(i)] = ssq > 9.34 ? 1 : 0;  // chi2(10) median
  }
  return ds;
}

Dataset make_friedman1(Index n, const DatasetParams& p, Rng& rng) {
  Dataset ds;
  ds.task = Task::Regression;
  ds.features = Matrix(n, 10);
  ds.targets = Vector(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 10; ++j) ds.features(i, j) = rng.uniform01();
    const auto& x = ds.features;
    ds.targets[i] = 10.0 * std::sin(M_PI * x(i, 0) * x(i, 1)) +
                    20.0 * (x(i, 2) - 0.5) * (x(i, 2) - 0.5) + 10.0 * x(i, 3) +
                    5.0 * x(i, 4) + p.noise * rng.normal();
  }
  return ds;
}

Dataset make_friedman2(Index n, const DatasetParams& p, Rng& rng) {
  Dataset ds;
  ds.task = Task::Regression;
  ds.features = Matrix(n, 4);
  ds.targets = Vector(n);
  for (Index i = 0; i < n; ++i) {
    const double x0 = rng.uniform(0.0, 100.0);
    const double x1 = rng.uniform(40.0 * M_PI, 560.0 * M_PI);
    const double x2 = rng.uniform01();
    const double x3 = rng.uniform(1.0, 11.0);
    ds.features(i, 0) = x0;
    ds.features(i, 1) = x1;
    ds.features(i, 2) = x2;
    ds.features(i, 3) = x3;
    const double t = x1 * x2 - 1.0 / (x1 * x3);
    ds.targets[i] = std::sqrt(x0 * x0 + t * t) + p.noise * rng.normal();
  }
  return ds;
}

Dataset make_friedman3(Index n, const DatasetParams& p, Rng& rng) {
  Dataset ds;
  ds.task = Task::Regression;
  ds.features = Matrix(n, 4);
  ds.targets = Vector(n);
  for (Index i = 0; i < n; ++i) {
    const double x0 = rng.uniform(0.0, 100.0);
    const double x1 = rng.uniform(40.0 * M_PI, 560.0 * M_PI);
    const double x2 = rng.uniform01();
    const double x3 = rng.uniform(1.0, 11.0);
    ds.features(i, 0) = x0;
    ds.features(i, 1) = x1;
    ds.features(i, 2) = x2;
    ds.features(i, 3) = x3;
    const double t = x1 * x2 - 1.0 / (x1 * x3);
    ds.targets[i] = std::atan2(t, x0) + p.noise * rng.normal();
  }
  return ds;
}

Dataset make_linear_regression(Index n, const DatasetParams& p, Rng& rng) {
  const int d = p.n_features;
  Vector w = Vector::Zero(d);
  for (int j = 0; j < p.n_informative; ++j) w[j] = rng.uniform(0.0, 100.0);
  Dataset ds;
  ds.task = Task::Regression;
  ds.features = Matrix(n, d);
  ds.targets = Vector(n);
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) ds.features(i, j) = rng.normal();
    ds.targets[i] = ds.features.row(i).dot(w) + p.noise * rng.normal();
  }
  return ds;
}

}  // namespace

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names = {
      "moons",     "circles",   "blobs",     "classification",    "hastie",
      "friedman1", "friedman2", "friedman3", "linear_regression"};
  return names;
}

Dataset generate(const std::string& name, Index n, const DatasetParams& params,
                 std::uint64_t seed) {
  check_params(n, params);
  Rng rng(derive_seed(seed, "dataset." + name));
  Dataset ds;
  if (name == "moons") ds = make_moons(n, params, rng);
  else if (name == "circles") ds = make_circles(n, params, rng);
  else if (name == "blobs") ds = make_blobs(n, params, rng);
  else if (name == "classification") ds = make_classification_ds(n, params, rng);
  else if (name == "hastie") ds = make_hastie(n, rng);
  else if (name == "friedman1") ds = make_friedman1(n, params, rng);
  else if (name == "friedman2") ds = make_friedman2(n, params, rng);
  else if (name == "friedman3") ds = make_friedman3(n, params, rng);
  else if (name == "linear_regression") ds = make_linear_regression(n, params, rng);
  else {
    std::string known;
    for (const auto& g : generator_names()) known += " " + g;
    throw std::invalid_argument("generate: unknown generator '" + name + "'; valid:" + known);
  }
  ds.name = name;
  ds.seed = seed;
  return ds;
}

Dataset standardize(const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("standardize: empty dataset");
  Dataset out = ds;
  const double n = static_cast<double>(ds.size());
  for (Index j = 0; j < ds.feature_dim(); ++j) {
    const double mean = ds.features.col(j).mean();
    const double sd = std::sqrt((ds.features.col(j).array() - mean).square().sum() / n);
    if (sd > 0.0) {
      out.features.col(j) = (ds.features.col(j).array() - mean) / sd;
    } else {
      out.features.col(j).setZero();
      std::cerr << "warning: standardize: constant feature column " << j << " zeroed\n";
    }
  }
  return out;
}

TrainTestSplit split_80_20(const Dataset& ds, std::uint64_t seed) {
  const Index n = ds.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(derive_seed(seed, "split"));
  for (Index i = n - 1; i > 0; --i) {  // Fisher-Yates
    const Index j = static_cast<Index>(rng.uniform_int(0, i));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  const Index n_train = (n * 8) / 10;

  auto take = [&](Index begin, Index count) {
    Dataset part;
    part.name = ds.name;
    part.task = ds.task;
    part.n_classes = ds.n_classes;
    part.seed = ds.seed;
    part.features = Matrix(count, ds.feature_dim());
    if (ds.task == Task::Classification) part.classes.resize(static_cast<std::size_t>(count));
    else part.targets = Vector(count);
    for (Index i = 0; i < count; ++i) {
      const Index src = order[static_cast<std::size_t>(begin + i)];
      part.features.row(i) = ds.features.row(src);
      if (ds.task == Task::Classification) {
        part.classes[static_cast<std::size_t>(i)] = ds.classes[static_cast<std::size_t>(src)];
      } else {
        part.targets[i] = ds.targets[src];
      }
    }
    return part;
  };

  return {take(0, n_train), take(n_train, n - n_train)};
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (Index j = 0; j < ds.feature_dim(); ++j) out << "f" << j << ",";
  out << "target\n";
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index j = 0; j < ds.feature_dim(); ++j) out << format_double(ds.features(i, j)) << ",";
    if (ds.task == Task::Classification) out << ds.classes[static_cast<std::size_t>(i)];
    else out << format_double(ds.targets[i]);
    out << "\n";
  }
}

}  // namespace hesskit
