#pragma once

#include <Eigen/Dense>

namespace omtk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// M = [[A, D], [B, C]] with A.rows == D.rows, B.rows == C.rows,
/// A.cols == B.cols, D.cols == C.cols.
struct PartitionedMatrix {
  Matrix a;
  Matrix d;
  Matrix b;
  Matrix c;

  void validate() const;
  Matrix assemble() const;
};

/// Extra output of the partitioned formula.
struct PartitionedDiagnostics {
  /// 2-norm condition number of I + T*T (solved, never inverted).
  double inner_condition = 1.0;
};

/// Throws InputError when any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// Singular values below max(rows, cols) * eps * sigma_max are treated as zero.
double rank_cutoff(Eigen::Index rows, Eigen::Index cols, double sigma_max);

/// Moore-Penrose inverse through a singular value decomposition.
Matrix pinv(const Matrix& m);

/// Moore-Penrose inverse of a 2x2 block matrix assembled block-wise from
/// K = A*A + B*B, E = A*D + B*C, R, S, L, T, F and H (Hung-Markham). The
/// inverses of the Gram matrices K and L drop singular values below
/// max(rows, cols) * eps * |M|_F^2, so directions of M with singular value
/// under about 1e-7 |M|_F are treated as null.
Matrix pinv_partitioned(const PartitionedMatrix& m,
                        PartitionedDiagnostics* diagnostics = nullptr);

/// Max-entry residuals of the four Penrose identities for a candidate inverse.
struct PenroseResiduals {
  double symmetric_left = 0.0;   // |(M M+)* - M M+|
  double symmetric_right = 0.0;  // |(M+ M)* - M+ M|
  double reproduces = 0.0;       // |M M+ M - M|
  double reflexive = 0.0;        // |M+ M M+ - M+|

  double max() const;
};

PenroseResiduals penrose_residuals(const Matrix& m, const Matrix& m_pinv);

/// Noise matrix of the degenerate system: zero except the trailing m x m
/// identity block.
PartitionedMatrix degenerate_noise_matrix(int d, int m);

}  // namespace omtk
