#pragma once

#include <Eigen/Dense>

namespace nlsysid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Row-major n×(n+p) parameter block. Rows are updated independently by SGD,
/// so keeping each row contiguous matters.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Largest singular value, from a dense SVD.
double spectral_norm(const Matrix& m);

/// Smallest of the min(rows, cols) singular values. For a wide n×p matrix
/// (p ≥ n) this is λ_min(B); for a tall matrix with more rows than columns it
/// returns 0 because B·Bᵀ is then singular.
double min_singular_value(const Matrix& m);

struct SymmetricExtremes {
  double min = 0.0;
  double max = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix.
SymmetricExtremes symmetric_extremes(const Matrix& sym);

}  // namespace nlsysid
