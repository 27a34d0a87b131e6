#include "omtk/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "omtk/error.hpp"

namespace omtk {

namespace {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

void PartitionedMatrix::validate() const {
  if (a.rows() != d.rows() || b.rows() != c.rows() || a.cols() != b.cols() ||
      d.cols() != c.cols()) {
    throw InputError(
        "partitioned matrix blocks are not conformable: A " +
        std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ", D " +
        std::to_string(d.rows()) + "x" + std::to_string(d.cols()) + ", B " +
        std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ", C " +
        std::to_string(c.rows()) + "x" + std::to_string(c.cols()));
  }
}

Matrix PartitionedMatrix::assemble() const {
  validate();
  Matrix out(a.rows() + b.rows(), a.cols() + d.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.topRightCorner(d.rows(), d.cols()) = d;
  out.bottomLeftCorner(b.rows(), b.cols()) = b;
  out.bottomRightCorner(c.rows(), c.cols()) = c;
  return out;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + " has non-finite entries");
  }
}

double rank_cutoff(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon() * sigma_max;
}

namespace {

/// SVD inverse with singular values at or below `floor` treated as zero;
/// a negative floor selects the relative cutoff.
Matrix pinv_with_floor(const Matrix& m, double floor) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff =
      std::max(floor, rank_cutoff(m.rows(), m.cols(), sigma(0)));

  Vector inv_sigma = Vector::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) inv_sigma(i) = 1.0 / sigma(i);
  }
  return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

Matrix pinv(const Matrix& m) {
  require_finite(m, "pinv argument");
  return pinv_with_floor(m, -1.0);
}

Matrix pinv_partitioned(const PartitionedMatrix& m,
                        PartitionedDiagnostics* diagnostics) {
  m.validate();
  require_finite(m.a, "block A");
  require_finite(m.d, "block D");
  require_finite(m.b, "block B");
  require_finite(m.c, "block C");

  const Matrix& A = m.a;
  const Matrix& D = m.d;
  const Matrix& B = m.b;
  const Matrix& C = m.c;
  const Eigen::Index n2 = D.cols();

  // K and L are Gram matrices: rounding in R and S reaches L at about
  // (eps |M|)^2, far below L's own relative cutoff when R should vanish.
  // Rank decisions are made against the scale of M instead.
  const double frob2 = A.squaredNorm() + D.squaredNorm() + B.squaredNorm() + C.squaredNorm();
  const double gram_floor =
      rank_cutoff(A.rows() + B.rows(), A.cols() + n2, 1.0) * frob2;

  const Matrix K = A.transpose() * A + B.transpose() * B;
  const Matrix E = A.transpose() * D + B.transpose() * C;
  const Matrix K_p = pinv_with_floor(K, gram_floor);
  const Matrix KpE = K_p * E;
  const Matrix R = D - A * KpE;
  const Matrix S = C - B * KpE;
  const Matrix L = R.transpose() * R + S.transpose() * S;
  const Matrix L_p = pinv_with_floor(L, gram_floor);
  const Matrix I2 = Matrix::Identity(n2, n2);
  const Matrix null_L = I2 - L_p * L;
  const Matrix T = KpE * null_L;

  // I + T*T is symmetric positive definite.
  const Matrix inner = I2 + T.transpose() * T;
  Eigen::LDLT<Matrix> inner_solve(inner);

  if (diagnostics != nullptr) {
    Eigen::JacobiSVD<Matrix> svd(inner);
    const Vector& s = svd.singularValues();
    diagnostics->inner_condition =
        s.size() == 0 ? 1.0 : s(0) / s(s.size() - 1);
  }

  // F and H share the factor (I - L+L)(I + T*T)^{-1}(K+E)* K+.
  const Matrix shared_tail = KpE.transpose() * K_p;
  const Matrix F =
      L_p * R.transpose() +
      null_L * inner_solve.solve(shared_tail * (A.transpose() -
                                                E * L_p * R.transpose()));
  const Matrix H =
      L_p * S.transpose() +
      null_L * inner_solve.solve(shared_tail * (B.transpose() -
                                                E * L_p * S.transpose()));

  Matrix out(A.cols() + n2, A.rows() + B.rows());
  out.topLeftCorner(A.cols(), A.rows()) = K_p * (A.transpose() - E * F);
  out.topRightCorner(A.cols(), B.rows()) = K_p * (B.transpose() - E * H);
  out.bottomLeftCorner(n2, A.rows()) = F;
  out.bottomRightCorner(n2, B.rows()) = H;
  return out;
}

double PenroseResiduals::max() const {
  return std::max({symmetric_left, symmetric_right, reproduces, reflexive});
}

PenroseResiduals penrose_residuals(const Matrix& m, const Matrix& m_pinv) {
  const Matrix left = m * m_pinv;
  const Matrix right = m_pinv * m;
  PenroseResiduals r;
  r.symmetric_left = max_abs(left.transpose() - left);
  r.symmetric_right = max_abs(right.transpose() - right);
  r.reproduces = max_abs(left * m - m);
  r.reflexive = max_abs(right * m_pinv - m_pinv);
  return r;
}

PartitionedMatrix degenerate_noise_matrix(int d, int m) {
  PartitionedMatrix xi;
  xi.a = Matrix::Zero(d, d);
  xi.d = Matrix::Zero(d, m);
  xi.b = Matrix::Zero(m, d);
  xi.c = Matrix::Identity(m, m);
  return xi;
}

}  // namespace omtk
