#pragma once

#include <Eigen/Dense>

#include "occafs/errors.hpp"

namespace occafs::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ThinSvd {
  Matrix U;                // m x n, orthonormal columns
  Vector singular_values;  // length n, descending
  Matrix V;                // n x n, orthogonal
};

/// Thin SVD of B with m >= n. Throws InvalidInput on non-finite entries or
/// when m < n.
ThinSvd thin_svd(const Matrix& B);

/// Orthogonal polar factor Q = U V^T of B (m >= n): the nearest matrix with
/// orthonormal columns. For rank-deficient B the factor is valid but not
/// unique; callers must not rely on which one is returned.
Matrix polar_factor(const Matrix& B);

struct TopEigs {
  Matrix vectors;       // n x k, orthonormal basis of the invariant subspace
  Vector values;        // k eigenvalues, descending
  double next_value;    // (k+1)-th largest eigenvalue; NaN when k == n
  bool degenerate_gap;  // |values(k-1) - next_value| < 1e-12 * ||H||_2
};

/// Eigenpairs for the k algebraically largest eigenvalues of a symmetric H.
/// H must be symmetric within 1e-10 * ||H||_F, else InvalidInput.
TopEigs top_k_symmetric_eigvecs(const Matrix& H, Eigen::Index k);

/// Extends the orthonormal block P (n x k) by the directions of M not already
/// covered: project M against P, orthonormalize, project and orthonormalize a
/// second time, then return [P, M_extra]. The first k columns of the result
/// are a bitwise copy of P. Directions whose post-projection singular value
/// falls below 1e-12 * (pre-projection scale + 1) are dropped, so the output
/// may have fewer than k + M.cols() columns.
Matrix orthonormalize_against(const Matrix& P, const Matrix& M);

}  // namespace occafs::linalg
