#pragma once

#include <optional>

#include "occafs/scf.hpp"

namespace occafs {

/// The problem restricted to the span of an orthonormal W = [P, ...] whose
/// first k columns are the current iterate. Same objective form as the full
/// problem, with the row-norm regularizer expressed through the rows of W.
struct ReducedProblem {
  Matrix A_tilde;  // m x m, W^T A W, stored exactly symmetric
  Matrix D_tilde;  // m x k, W^T D
  Matrix W;        // n x m orthonormal; row i is w_i^T
  double alpha = 0.0;
  double eps0 = 0.0;
  Eigen::Index m = 0;
  Eigen::Index k = 0;
  double norm_A_tilde_fro = 0.0;
  double norm_D_tilde_fro = 0.0;

  Eigen::Index n() const { return W.rows(); }
};

/// Assembles the subspace problem over span([P, grad, P_prev]), where the
/// gradient is taken with respect to the Stiefel manifold. Returns nullopt
/// when that gradient is exactly zero (P already stationary). Generically
/// m = 3k (2k on the first iteration, when P_prev is absent), but dependent
/// directions are dropped and m can be smaller.
std::optional<ReducedProblem> build_subspace(const ProblemData& pd, const StiefelPoint& P,
                                             const std::optional<Matrix>& P_prev);

/// f_eps0(W Z) evaluated through the reduced quantities.
double reduced_objective(const ReducedProblem& rp, const Matrix& Z);

/// The m x m NEPv matrix of the reduced problem. Equals W^T H(W Z) W, with H
/// the full-space NEPv matrix; exactly symmetric.
Matrix reduced_nepv_matrix(const ReducedProblem& rp, const Matrix& Z);

/// Accelerated solver: per outer step, build the subspace from
/// [P, grad, P_prev], solve the reduced problem by the plain SCF iteration
/// started from the first k columns of I_m with tolerance
/// max(kkt_tol, kkt(P)/8), and lift the result back. Outer termination uses
/// the same criteria as scf_solve, evaluated on the full problem.
SolveResult locg_solve(const ProblemData& pd, const SolverConfig& cfg);

}  // namespace occafs
