#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "occafs/errors.hpp"

namespace occafs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// An n x k matrix with orthonormal columns. Construction validates
/// ||P^T P - I||_F <= 1e-10 and finiteness.
class StiefelPoint {
 public:
  explicit StiefelPoint(Matrix P);
  const Matrix& matrix() const { return mat_; }
  Eigen::Index rows() const { return mat_.rows(); }
  Eigen::Index cols() const { return mat_.cols(); }

 private:
  Matrix mat_;
};

struct AssembleOptions {
  // Row-norm perturbation; defaults to 1e-3 * sqrt(k/n) when unset.
  std::optional<double> eps0;
  // Skip the rank(A) > n-k gate. Needed when there are fewer training samples
  // than features; the objective denominator is then only generically, not
  // provably, positive. See README.
  bool allow_rank_deficient = false;
};

/// One problem instance: the quadratic-form matrix A (symmetric PSD), the
/// coupling matrix D, the regularization weight alpha, and the row-norm
/// perturbation eps0. Immutable after construction; safe to share across
/// threads.
struct ProblemData {
  Matrix A;  // n x n, stored exactly symmetric
  Matrix D;  // n x k
  double alpha = 0.0;
  double eps0 = 0.0;
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  // Cached at construction.
  double norm_A_fro = 0.0;
  double norm_D_fro = 0.0;
  double norm_A_2 = 0.0;
  bool rank_deficient = false;  // set only when allow_rank_deficient was used
};

double paper_default_eps0(Eigen::Index n, Eigen::Index k);

/// Validates and packages a problem given A and D directly. Checks symmetry,
/// positive semidefiniteness, and (unless waived) rank(A) > n-k via a full
/// eigendecomposition.
ProblemData make_problem_data(Matrix A, Matrix D, double alpha,
                              const AssembleOptions& opts = {});

/// Builds A = Xc Xc^T and D = Xc Yc^T from a data matrix X (features x
/// samples) and class labels in 1..k, where Xc and Yc^T are X and the one-hot
/// label matrix transposed, both centered across samples.
ProblemData assemble_problem(const Matrix& X, const std::vector<int>& labels, double alpha,
                             const AssembleOptions& opts = {});

struct ModelEval {
  double objective = 0.0;      // f_eps0(P)
  double h = 0.0;              // tr(P^T D) / tr(P^T A P)
  Vector row_norms;            // ||P_(i,:)||_2
  Matrix euclid_grad;          // gradient of f_eps0 in the ambient space
  Matrix riem_grad;            // gradient projected onto the tangent space
  double kkt_residual = 0.0;   // normalized first-order stationarity measure
};

/// [tr(P^T D)]^2 / tr(P^T A P) - alpha * sum_i sqrt(||P_(i,:)||^2 + eps0^2).
double objective(const ProblemData& pd, const StiefelPoint& P);

/// Same objective with the row-norm sum unperturbed (eps0 treated as zero).
/// This is the common scale for comparing solvers of the scaled-regression
/// form of the model.
double exact_objective(const ProblemData& pd, const StiefelPoint& P);

/// tr(P^T D) / tr(P^T A P).
double h_ratio(const ProblemData& pd, const StiefelPoint& P);

/// 2 h(P) [D - h(P) A P] - alpha * sum_i e_i e_i^T P / sqrt(||P_(i,:)||^2 + eps0^2).
Matrix euclid_gradient(const ProblemData& pd, const StiefelPoint& P);

/// 2 h(P) [(D P^T + P D^T) - h(P) A] - alpha * diag(1/sqrt(||P_(i,:)||^2 + eps0^2)).
/// Exactly symmetric by construction.
Matrix nepv_matrix(const ProblemData& pd, const StiefelPoint& P);

/// G - P * (P^T G + G^T P) / 2.
Matrix project_to_tangent(const Matrix& P, const Matrix& G);

/// Gradient with respect to the Stiefel manifold: the tangent projection of
/// the ambient gradient.
Matrix riemannian_gradient(const ProblemData& pd, const StiefelPoint& P);

/// ||grad - P Lambda||_F / (2 h(P) [||D||_F + h(P) ||A||_F] + n alpha) with
/// Lambda the symmetrized multiplier block. Throws NumericalFailure when the
/// denominator is not positive (possible only with alpha = 0 and h <= 0).
double kkt_residual(const ProblemData& pd, const StiefelPoint& P);

ModelEval evaluate(const ProblemData& pd, const StiefelPoint& P);
/// Same as evaluate() with A*P supplied by the caller; solvers use this to
/// reuse cached products.
ModelEval evaluate_with_AP(const ProblemData& pd, const StiefelPoint& P, const Matrix& AP);

struct RowNormBoundsReport {
  bool ok = true;
  int violating_rank = 0;  // 1-based position j of the first violated bound
  double observed = 0.0;
  double bound = 0.0;
};

/// Checks that the j-th largest row norm is at least
/// sqrt((k-j+1)/(n-j+1)) - 1e-10 for j = 1..k. Holds for every matrix with
/// orthonormal columns; a violation indicates a numerical defect.
RowNormBoundsReport row_norm_bounds_check(const StiefelPoint& P);

}  // namespace occafs
