#include "occafs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#if defined(OCCAFS_HAVE_LAPACKE)
#include <lapacke.h>
#endif

namespace occafs::linalg {

namespace {

void require_finite(const Matrix& B, const char* op) {
  if (!B.allFinite()) throw InvalidInput(std::string(op) + ": input has NaN/Inf entries");
}

// SVD-based orthonormalization, keeping left singular vectors whose singular
// value exceeds drop_tol.
Matrix svd_orth(const Matrix& B, double drop_tol) {
  if (B.cols() == 0) return Matrix(B.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > drop_tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

// One pass of block Gram-Schmidt against P followed by rank-revealing
// orthonormalization.
Matrix project_and_orth(const Matrix& P, const Matrix& B) {
  if (B.cols() == 0) return Matrix(B.rows(), 0);
  double pre_scale = 0.0;
  for (Eigen::Index j = 0; j < B.cols(); ++j) pre_scale = std::max(pre_scale, B.col(j).norm());
  Matrix R = B;
  if (P.cols() > 0) R.noalias() -= P * (P.transpose() * B);
  return svd_orth(R, 1e-12 * (pre_scale + 1.0));
}

}  // namespace

ThinSvd thin_svd(const Matrix& B) {
  require_finite(B, "thin_svd");
  if (B.rows() < B.cols()) throw InvalidInput("thin_svd: need rows >= cols");
  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return ThinSvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Matrix polar_factor(const Matrix& B) {
  ThinSvd f = thin_svd(B);
  return f.U * f.V.transpose();
}

TopEigs top_k_symmetric_eigvecs(const Matrix& H, Eigen::Index k) {
  require_finite(H, "top_k_symmetric_eigvecs");
  const Eigen::Index n = H.rows();
  if (H.cols() != n) throw InvalidInput("top_k_symmetric_eigvecs: matrix not square");
  if (k < 1 || k > n) throw InvalidInput("top_k_symmetric_eigvecs: k out of range");
  if ((H - H.transpose()).norm() > 1e-10 * H.norm())
    throw InvalidInput("top_k_symmetric_eigvecs: matrix not symmetric within 1e-10*||H||_F");

  Vector evals(n);
  Matrix evecs;
#if defined(OCCAFS_HAVE_LAPACKE)
  evecs = H;  // dsyevd reads the lower triangle and overwrites with eigenvectors
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                            evecs.data(), static_cast<lapack_int>(n), evals.data());
  if (info != 0)
    throw NumericalFailure("top_k_symmetric_eigvecs: dsyevd failed, info=" + std::to_string(info));
#else
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("top_k_symmetric_eigvecs: eigendecomposition failed");
  evals = es.eigenvalues();
  evecs = es.eigenvectors();
#endif

  // Eigenvalues come back ascending; flip the top k into descending order.
  TopEigs out;
  out.vectors.resize(n, k);
  out.values.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    out.values(j) = evals(n - 1 - j);
    out.vectors.col(j) = evecs.col(n - 1 - j);
  }
  out.next_value =
      (k < n) ? evals(n - 1 - k) : std::numeric_limits<double>::quiet_NaN();
  const double norm2 = std::max(std::abs(evals(0)), std::abs(evals(n - 1)));
  out.degenerate_gap =
      (k < n) && std::abs(out.values(k - 1) - out.next_value) < 1e-12 * norm2;
  return out;
}

Matrix orthonormalize_against(const Matrix& P, const Matrix& M) {
  require_finite(P, "orthonormalize_against");
  const Eigen::Index k = P.cols();
  if (k > 0) {
    Matrix gram = P.transpose() * P;
    gram.diagonal().array() -= 1.0;
    if (gram.norm() > 1e-10)
      throw InvalidInput("orthonormalize_against: P does not have orthonormal columns");
  }

  Matrix W(P.rows(), 0);
  if (M.cols() > 0) {
    require_finite(M, "orthonormalize_against");
    if (M.rows() != P.rows())
      throw InvalidInput("orthonormalize_against: row count mismatch between P and M");
    W = project_and_orth(P, M);
    W = project_and_orth(P, W);
  }

  Matrix R(P.rows(), k + W.cols());
  R.leftCols(k) = P;
  R.rightCols(W.cols()) = W;
  return R;
}

}  // namespace occafs::linalg
