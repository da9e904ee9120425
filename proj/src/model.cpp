#include "occafs/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "occafs/linalg.hpp"

namespace occafs {

namespace {

struct Scalars {
  double tr_pd = 0.0;
  double tr_pap = 0.0;
  double h = 0.0;
  Vector row_norms;
  Vector s;  // sqrt(row_norms^2 + eps0^2)
};

Scalars basic_scalars(const ProblemData& pd, const Matrix& P, const Matrix& AP) {
  Scalars sc;
  sc.tr_pd = P.cwiseProduct(pd.D).sum();
  sc.tr_pap = P.cwiseProduct(AP).sum();
  if (sc.tr_pap <= 1e-14 * pd.norm_A_fro)
    throw NumericalFailure("degenerate denominator: tr(P^T A P) = " +
                           std::to_string(sc.tr_pap) + " is not safely positive");
  sc.h = sc.tr_pd / sc.tr_pap;
  sc.row_norms = P.rowwise().norm();
  sc.s = (sc.row_norms.array().square() + pd.eps0 * pd.eps0).sqrt();
  return sc;
}

void require_grad_defined(const ProblemData& pd, const Scalars& sc) {
  if (pd.eps0 == 0.0 && sc.row_norms.minCoeff() < 1e-14)
    throw NumericalFailure(
        "gradient singular: eps0 = 0 and some row norm is below 1e-14");
}

// Row i of P scaled by 1/s_i.
Matrix row_scaled(const Matrix& P, const Vector& s) {
  return (P.array().colwise() * s.array().cwiseInverse()).matrix();
}

double kkt_denominator(const ProblemData& pd, double h) {
  return 2.0 * h * (pd.norm_D_fro + h * pd.norm_A_fro) +
         static_cast<double>(pd.n) * pd.alpha;
}

}  // namespace

StiefelPoint::StiefelPoint(Matrix P) : mat_(std::move(P)) {
  if (!mat_.allFinite()) throw InvalidInput("StiefelPoint: non-finite entries");
  if (mat_.rows() < mat_.cols() || mat_.cols() < 1)
    throw InvalidInput("StiefelPoint: need n >= k >= 1");
  Matrix gram = mat_.transpose() * mat_;
  gram.diagonal().array() -= 1.0;
  if (gram.norm() > 1e-10)
    throw InvalidInput("StiefelPoint: ||P^T P - I||_F = " + std::to_string(gram.norm()) +
                       " exceeds 1e-10");
}

double paper_default_eps0(Eigen::Index n, Eigen::Index k) {
  return 1e-3 * std::sqrt(static_cast<double>(k) / static_cast<double>(n));
}

ProblemData make_problem_data(Matrix A, Matrix D, double alpha, const AssembleOptions& opts) {
  ProblemData pd;
  pd.n = A.rows();
  pd.k = D.cols();
  if (A.cols() != pd.n) throw InvalidInput("make_problem_data: A must be square");
  if (D.rows() != pd.n) throw InvalidInput("make_problem_data: D row count must match A");
  if (pd.k < 1 || pd.k > pd.n) throw InvalidInput("make_problem_data: need 1 <= k <= n");
  if (!A.allFinite() || !D.allFinite())
    throw InvalidInput("make_problem_data: non-finite entries");
  if (alpha < 0.0) throw InvalidInput("make_problem_data: alpha must be nonnegative");

  const double norm_A = A.norm();
  if ((A - A.transpose()).norm() > 1e-10 * norm_A)
    throw InvalidInput("make_problem_data: A is not symmetric within 1e-10*||A||_F");
  A = (0.5 * (A + A.transpose())).eval();  // store exactly symmetric

  pd.eps0 = opts.eps0.value_or(paper_default_eps0(pd.n, pd.k));
  if (pd.eps0 < 0.0) throw InvalidInput("make_problem_data: eps0 must be nonnegative");

  // One dense eigendecomposition up front buys the PSD check and the rank
  // gate; cheap next to the solve itself.
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("make_problem_data: eigendecomposition of A failed");
  const Vector& evals = es.eigenvalues();  // ascending
  const double lambda_max = evals(pd.n - 1);
  pd.norm_A_2 = std::max(std::abs(lambda_max), std::abs(evals(0)));
  if (evals(0) < -1e-10 * pd.norm_A_2)
    throw InvalidInput("make_problem_data: A is not positive semidefinite (min eig " +
                       std::to_string(evals(0)) + ")");
  // (n-k+1)-th largest eigenvalue is evals(k-1) in ascending order.
  const double rank_witness = evals(pd.k - 1);
  if (rank_witness <= 1e-12 * pd.norm_A_2) {
    if (!opts.allow_rank_deficient)
      throw InvalidInput(
          "make_problem_data: the assumption rank(A) > n-k fails (the (n-k+1)-th "
          "largest eigenvalue of A is " +
          std::to_string(rank_witness) +
          "); tr(P^T A P) > 0 is no longer guaranteed. Pass allow_rank_deficient "
          "to proceed anyway.");
    pd.rank_deficient = true;
  }

  pd.A = std::move(A);
  pd.D = std::move(D);
  pd.alpha = alpha;
  pd.norm_A_fro = pd.A.norm();
  pd.norm_D_fro = pd.D.norm();
  return pd;
}

ProblemData assemble_problem(const Matrix& X, const std::vector<int>& labels, double alpha,
                             const AssembleOptions& opts) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (p < 2) throw InvalidInput("assemble_problem: need at least 2 samples");
  if (static_cast<Eigen::Index>(labels.size()) != p)
    throw InvalidInput("assemble_problem: label count does not match sample count");
  if (!X.allFinite()) throw InvalidInput("assemble_problem: X has non-finite entries");

  int k = 0;
  for (int c : labels) {
    if (c < 1) throw InvalidInput("assemble_problem: labels must be in 1..k");
    k = std::max(k, c);
  }
  std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
  for (int c : labels) ++counts[static_cast<size_t>(c - 1)];
  for (int c = 0; c < k; ++c)
    if (counts[static_cast<size_t>(c)] == 0)
      throw InvalidInput("assemble_problem: class " + std::to_string(c + 1) +
                         " has no samples");
  if (n < k) throw InvalidInput("assemble_problem: need n >= k");

  // Xc = X C_p: subtract per-feature means across samples.
  Matrix Xc = X.colwise() - X.rowwise().mean();
  // Yc^T = C_p Y^T: centered one-hot indicators, p x k.
  Matrix Yct = Matrix::Zero(p, k);
  for (Eigen::Index j = 0; j < p; ++j) Yct(j, labels[static_cast<size_t>(j)] - 1) = 1.0;
  Yct.rowwise() -= Yct.colwise().mean();

  Matrix A = Matrix::Zero(n, n);
  A.selfadjointView<Eigen::Lower>().rankUpdate(Xc);
  A.triangularView<Eigen::StrictlyUpper>() =
      A.triangularView<Eigen::StrictlyLower>().transpose();
  Matrix D = Xc * Yct;

  return make_problem_data(std::move(A), std::move(D), alpha, opts);
}

double objective(const ProblemData& pd, const StiefelPoint& P) {
  const Matrix AP = pd.A * P.matrix();
  const Scalars sc = basic_scalars(pd, P.matrix(), AP);
  return sc.tr_pd * sc.h - pd.alpha * sc.s.sum();
}

double exact_objective(const ProblemData& pd, const StiefelPoint& P) {
  const Matrix AP = pd.A * P.matrix();
  const Scalars sc = basic_scalars(pd, P.matrix(), AP);
  return sc.tr_pd * sc.h - pd.alpha * sc.row_norms.sum();
}

double h_ratio(const ProblemData& pd, const StiefelPoint& P) {
  const Matrix AP = pd.A * P.matrix();
  return basic_scalars(pd, P.matrix(), AP).h;
}

Matrix euclid_gradient(const ProblemData& pd, const StiefelPoint& P) {
  const Matrix AP = pd.A * P.matrix();
  const Scalars sc = basic_scalars(pd, P.matrix(), AP);
  require_grad_defined(pd, sc);
  return 2.0 * sc.h * (pd.D - sc.h * AP) - pd.alpha * row_scaled(P.matrix(), sc.s);
}

Matrix nepv_matrix(const ProblemData& pd, const StiefelPoint& P) {
  const Matrix AP = pd.A * P.matrix();
  const Scalars sc = basic_scalars(pd, P.matrix(), AP);
  require_grad_defined(pd, sc);
  Matrix S = pd.D * P.matrix().transpose();
  S += S.transpose().eval();  // exactly symmetric
  Matrix H = 2.0 * sc.h * (S - sc.h * pd.A);
  H.diagonal() -= pd.alpha * sc.s.cwiseInverse();
  return H;
}

Matrix project_to_tangent(const Matrix& P, const Matrix& G) {
  const Matrix lambda = 0.5 * (P.transpose() * G + G.transpose() * P);
  return G - P * lambda;
}

Matrix riemannian_gradient(const ProblemData& pd, const StiefelPoint& P) {
  return project_to_tangent(P.matrix(), euclid_gradient(pd, P));
}

double kkt_residual(const ProblemData& pd, const StiefelPoint& P) {
  return evaluate(pd, P).kkt_residual;
}

ModelEval evaluate(const ProblemData& pd, const StiefelPoint& P) {
  return evaluate_with_AP(pd, P, pd.A * P.matrix());
}

ModelEval evaluate_with_AP(const ProblemData& pd, const StiefelPoint& P, const Matrix& AP) {
  const Scalars sc = basic_scalars(pd, P.matrix(), AP);
  require_grad_defined(pd, sc);

  ModelEval ev;
  ev.h = sc.h;
  ev.row_norms = sc.row_norms;
  ev.objective = sc.tr_pd * sc.h - pd.alpha * sc.s.sum();
  ev.euclid_grad = 2.0 * sc.h * (pd.D - sc.h * AP) - pd.alpha * row_scaled(P.matrix(), sc.s);
  ev.riem_grad = project_to_tangent(P.matrix(), ev.euclid_grad);

  const double denom = kkt_denominator(pd, sc.h);
  if (denom <= 0.0)
    throw NumericalFailure("kkt_residual undefined: denominator " + std::to_string(denom) +
                           " is not positive (alpha = 0 with h(P) <= 0)");
  ev.kkt_residual = ev.riem_grad.norm() / denom;
  return ev;
}

RowNormBoundsReport row_norm_bounds_check(const StiefelPoint& P) {
  const Eigen::Index n = P.rows();
  const Eigen::Index k = P.cols();
  Vector norms = P.matrix().rowwise().norm();
  std::sort(norms.data(), norms.data() + n, std::greater<double>());
  RowNormBoundsReport rep;
  for (Eigen::Index j = 1; j <= k; ++j) {
    const double bound = std::sqrt(static_cast<double>(k - j + 1) /
                                   static_cast<double>(n - j + 1));
    if (norms(j - 1) < bound - 1e-10) {
      rep.ok = false;
      rep.violating_rank = static_cast<int>(j);
      rep.observed = norms(j - 1);
      rep.bound = bound;
      return rep;
    }
  }
  return rep;
}

}  // namespace occafs
