#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hesskit/local_hessian.hpp"
#include "hesskit/metrics.hpp"
#include "hesskit/network.hpp"
#include "hesskit/spectral.hpp"

namespace hesskit {

inline constexpr const char* kSnapshotSchemaName = "hesskit.snapshot_stream";
inline constexpr const char* kSnapshotSchemaVersion = "1";
inline constexpr Index kDefaultHessianStoreCap = 2048;

/// Per-layer state record. Vectors follow the block's flattening
/// conventions: weights and their gradients row-major, biases separate.
struct LayerRecord {
  Vector weights;
  SpectralSummary weights_spectral;
  Vector gradient;
  SpectralSummary gradient_spectral;
  Vector bias;
  SpectralSummary bias_spectral;
  Vector bias_gradient;
  SpectralSummary bias_gradient_spectral;
  bool hessian_stored = false;
  Matrix hessian;  // p x p, present only when hessian_stored
  SpectralSummary hessian_spectral;  // over all matrix entries
  Vector hessian_eigens;             // ascending, length p
  SpectralSummary hessian_eigens_spectral;
  std::size_t hessian_rank = 0;
  double hessian_condition = 0.0;
  bool hessian_condition_infinite = false;

  Index param_count() const { return weights.size() + bias.size(); }
};

struct Snapshot {
  std::string run_id;
  std::string variant;  // "no" | "sure" | "huge"
  std::string dataset;
  long iteration = 0;
  std::vector<LayerRecord> layers;
  MetricReport scores;
};

struct SnapshotMeta {
  std::string run_id;
  std::string variant;
  std::string dataset;
  Index hessian_store_cap = kDefaultHessianStoreCap;
};

/// Builds the full per-checkpoint record: raw vectors, every spectral
/// summary, eigenvalues, rank and condition. gradients are flat per-block
/// vectors in flattening order (weights then bias); hessians align with
/// net.blocks. The raw Hessian matrix is kept only when p_i <= the
/// store cap; eigenvalues are always kept.
Snapshot capture(const Network& net, const std::vector<Vector>& gradients,
                 const std::vector<LocalHessian>& hessians, const MetricReport& metrics,
                 long iteration, const SnapshotMeta& meta);

/// JSON-Lines stream: a header line carrying the schema version, then one
/// snapshot object per line. Doubles round-trip bit-exactly.
void write_stream(const std::vector<Snapshot>& snapshots, const std::string& path);

/// Reads a stream written by write_stream. With skip_malformed, bad lines
/// are reported to stderr (with their line number) and skipped; otherwise
/// the first bad line aborts with an exception.
std::vector<Snapshot> read_stream(const std::string& path, bool skip_malformed = false);

struct Violation {
  long line = 0;  // 1-based line in the stream file
  std::string field;
  std::string message;
};

/// Schema check of a stream file: presence and types of every field,
/// per-layer invariants (eigens length, rank consistency, histogram count
/// sums, peak ordering) and iteration monotonicity.
std::vector<Violation> validate(const std::string& path);

}  // namespace hesskit
