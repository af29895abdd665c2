#pragma once

#include <vector>

#include "hesskit/types.hpp"

namespace hesskit {

struct EigenDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns are unit eigenvectors, same order
};

struct SvdResult {
  Matrix u;
  Vector singular_values;  // non-negative, descending
  Matrix v;
};

struct PcaResult {
  Matrix components;                   // k x features, orthonormal rows; zero
                                       // entries for dropped features
  Matrix projected;                    // samples x k
  Vector explained_variance;           // k, non-increasing
  std::vector<Index> dropped_columns;  // constant features excluded from the fit
  Vector column_mean;                  // standardization applied internally
  Vector column_std;                   // population convention; 0 for dropped
};

/// True when every entry is finite.
bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

/// Eigendecomposition of a symmetric matrix. Input asymmetry up to
/// 1e-8 * max(1, |M|_max) is tolerated and removed by symmetrizing
/// (M + M^T)/2 before the solve.
EigenDecomposition sym_eigendecompose(const Matrix& m);

/// Thin SVD with a deterministic sign convention: the largest-magnitude
/// entry of every right singular vector is made positive.
SvdResult svd(const Matrix& m);

/// Power spectrum |X_k|^2 of a real signal, k = 0..n/2. The length must be
/// a power of two (radix-2 transform, fixed summation order).
Vector real_fft_power(const Vector& signal);

/// Pearson correlation coefficient. Both series must be non-constant.
double pearson_corr(const Vector& x, const Vector& y);

/// PCA on column-standardized data (zero mean, unit population variance).
/// Constant columns are dropped with a warning on stderr rather than
/// rejected; their component entries are zero.
PcaResult pca_project(const Matrix& x, Index k);

}  // namespace hesskit
