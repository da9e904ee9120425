#include "occafs/locg.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "occafs/linalg.hpp"

namespace occafs {

namespace {

using Clock = std::chrono::steady_clock;

Matrix first_k_columns_of_identity(Eigen::Index m, Eigen::Index k) {
  Matrix Z = Matrix::Zero(m, k);
  Z.topLeftCorner(k, k).setIdentity();
  return Z;
}

struct ReducedEval {
  double objective = 0.0;
  double h = 0.0;
  double kkt_residual = 0.0;
  Matrix grad;  // m x k gradient of the reduced objective
};

ReducedEval reduced_eval(const ReducedProblem& rp, const Matrix& Z) {
  const Matrix PZ = rp.W * Z;  // the lifted point; its rows drive the regularizer
  const Vector s = (PZ.rowwise().squaredNorm().array() + rp.eps0 * rp.eps0).sqrt();

  const Matrix AZ = rp.A_tilde * Z;
  const double tr_zd = Z.cwiseProduct(rp.D_tilde).sum();
  const double tr_zaz = Z.cwiseProduct(AZ).sum();
  if (tr_zaz <= 1e-14 * rp.norm_A_tilde_fro)
    throw NumericalFailure("reduced problem: degenerate denominator tr(Z^T A~ Z) = " +
                           std::to_string(tr_zaz));

  ReducedEval re;
  re.h = tr_zd / tr_zaz;
  re.objective = tr_zd * re.h - rp.alpha * s.sum();
  const Matrix scaled = (PZ.array().colwise() * s.array().cwiseInverse()).matrix();
  re.grad = 2.0 * re.h * (rp.D_tilde - re.h * AZ) - rp.alpha * (rp.W.transpose() * scaled);

  const double denom = 2.0 * re.h * (rp.norm_D_tilde_fro + re.h * rp.norm_A_tilde_fro) +
                       static_cast<double>(rp.n()) * rp.alpha;
  if (denom <= 0.0)
    throw NumericalFailure("reduced problem: KKT residual undefined (denominator " +
                           std::to_string(denom) + ")");
  re.kkt_residual = project_to_tangent(Z, re.grad).norm() / denom;
  return re;
}

ReducedProblem make_reduced(const ProblemData& pd, Matrix W, const Matrix& AW) {
  ReducedProblem rp;
  rp.m = W.cols();
  rp.k = pd.k;
  rp.alpha = pd.alpha;
  rp.eps0 = pd.eps0;
  Matrix At = W.transpose() * AW;
  rp.A_tilde = 0.5 * (At + At.transpose());
  rp.D_tilde = W.transpose() * pd.D;
  rp.W = std::move(W);
  rp.norm_A_tilde_fro = rp.A_tilde.norm();
  rp.norm_D_tilde_fro = rp.D_tilde.norm();
  return rp;
}

struct InnerResult {
  Matrix Z;
  bool gap_warning = false;
};

// Algorithm-1 iteration on the reduced problem, started from the first k
// columns of I_m.
InnerResult inner_scf(const ReducedProblem& rp, double tol, int max_iter,
                      double stagnation_tol) {
  InnerResult out;
  out.Z = first_k_columns_of_identity(rp.m, rp.k);
  out.Z *= linalg::polar_factor(out.Z.transpose() * rp.D_tilde);

  double prev_objective = 0.0;
  int stalled = 0;
  for (int i = 0;; ++i) {
    const ReducedEval re = reduced_eval(rp, out.Z);
    if (i > 0) {
      if (re.objective < prev_objective - 1e-10 * (1.0 + std::abs(prev_objective)))
        throw InvariantViolation("inner SCF: objective decreased (" +
                                 std::to_string(prev_objective) + " -> " +
                                 std::to_string(re.objective) + ")");
      if (std::abs(re.objective - prev_objective) <
          stagnation_tol * (1.0 + std::abs(prev_objective)))
        ++stalled;
      else
        stalled = 0;
    }
    prev_objective = re.objective;

    if (re.kkt_residual <= tol || stalled >= 3 || i == max_iter) break;

    const Matrix Ht = reduced_nepv_matrix(rp, out.Z);
    const linalg::TopEigs eig = linalg::top_k_symmetric_eigvecs(Ht, rp.k);
    out.gap_warning = out.gap_warning || eig.degenerate_gap;
    out.Z = eig.vectors * linalg::polar_factor(eig.vectors.transpose() * rp.D_tilde);
  }
  return out;
}

}  // namespace

std::optional<ReducedProblem> build_subspace(const ProblemData& pd, const StiefelPoint& P,
                                             const std::optional<Matrix>& P_prev) {
  const Matrix R = riemannian_gradient(pd, P);
  if (R.isZero(0.0)) return std::nullopt;

  Matrix M(pd.n, P_prev ? 2 * pd.k : pd.k);
  M.leftCols(pd.k) = R;
  if (P_prev) M.rightCols(pd.k) = *P_prev;
  Matrix W = linalg::orthonormalize_against(P.matrix(), M);
  const Matrix AW = pd.A * W;
  return make_reduced(pd, std::move(W), AW);
}

double reduced_objective(const ReducedProblem& rp, const Matrix& Z) {
  const Matrix PZ = rp.W * Z;
  const Vector s = (PZ.rowwise().squaredNorm().array() + rp.eps0 * rp.eps0).sqrt();
  const double tr_zd = Z.cwiseProduct(rp.D_tilde).sum();
  const double tr_zaz = Z.cwiseProduct(rp.A_tilde * Z).sum();
  if (tr_zaz <= 1e-14 * rp.norm_A_tilde_fro)
    throw NumericalFailure("reduced_objective: degenerate denominator");
  return tr_zd * tr_zd / tr_zaz - rp.alpha * s.sum();
}

Matrix reduced_nepv_matrix(const ReducedProblem& rp, const Matrix& Z) {
  const Matrix PZ = rp.W * Z;
  const Vector s = (PZ.rowwise().squaredNorm().array() + rp.eps0 * rp.eps0).sqrt();
  const double tr_zd = Z.cwiseProduct(rp.D_tilde).sum();
  const double tr_zaz = Z.cwiseProduct(rp.A_tilde * Z).sum();
  if (tr_zaz <= 1e-14 * rp.norm_A_tilde_fro)
    throw NumericalFailure("reduced_nepv_matrix: degenerate denominator");
  const double h = tr_zd / tr_zaz;

  Matrix S = rp.D_tilde * Z.transpose();
  S += S.transpose().eval();
  Matrix H = 2.0 * h * (S - h * rp.A_tilde);
  // sum_i w_i w_i^T / s_i == W^T diag(1/s) W
  const Matrix scaled_W = (rp.W.array().colwise() * s.array().cwiseInverse()).matrix();
  H.noalias() -= rp.alpha * (rp.W.transpose() * scaled_W);
  return 0.5 * (H + H.transpose());
}

SolveResult locg_solve(const ProblemData& pd, const SolverConfig& cfg) {
  if (pd.eps0 <= 0.0)
    throw InvalidInput("locg_solve: requires eps0 > 0");
  if (cfg.kkt_tol <= 0.0 || cfg.max_iter < 1)
    throw InvalidInput("locg_solve: kkt_tol must be positive and max_iter >= 1");

  const auto t0 = Clock::now();
  StiefelPoint P = enforce_psd_rotation(initial_point(pd, cfg), pd.D);
  Matrix AP = pd.A * P.matrix();
  std::optional<Matrix> P_prev;

  SolverTrace trace;
  int stalled = 0;
  int no_progress = 0;
  bool gap_pending = false;

  for (int j = 0;; ++j) {
    const ModelEval ev = evaluate_with_AP(pd, P, AP);
    trace.entries.push_back({j, ev.objective, ev.kkt_residual,
                             std::chrono::duration<double>(Clock::now() - t0).count(),
                             gap_pending});
    if (cfg.iterate_observer) cfg.iterate_observer(P, j);

    if (j > 0) {
      const double prev = trace.entries[static_cast<size_t>(j - 1)].objective;
      if (ev.objective < prev - 1e-10 * (1.0 + std::abs(prev)))
        throw InvariantViolation("locg_solve: objective decreased at iteration " +
                                 std::to_string(j));
      if (std::abs(ev.objective - prev) < cfg.stagnation_tol * (1.0 + std::abs(prev)))
        ++stalled;
      else
        stalled = 0;
    }

    if (ev.kkt_residual <= cfg.kkt_tol) {
      trace.reason = TerminationReason::Converged;
      break;
    }
    if (stalled >= 3) {
      trace.reason = TerminationReason::Stagnated;
      break;
    }
    if (j == cfg.max_iter) {
      trace.reason = TerminationReason::MaxIter;
      break;
    }
    if (ev.riem_grad.isZero(0.0)) {
      trace.reason = TerminationReason::Converged;
      break;
    }

    Matrix M(pd.n, P_prev ? 2 * pd.k : pd.k);
    M.leftCols(pd.k) = ev.riem_grad;
    if (P_prev) M.rightCols(pd.k) = *P_prev;
    Matrix W = linalg::orthonormalize_against(P.matrix(), M);
    const Eigen::Index m = W.cols();

    // A*W reuses the cached A*P block; only the new directions cost a full
    // product against A.
    Matrix AW(pd.n, m);
    if (cfg.cache_products) {
      AW.leftCols(pd.k) = AP;
      AW.rightCols(m - pd.k).noalias() = pd.A * W.rightCols(m - pd.k);
    } else {
      AW.noalias() = pd.A * W;
    }
    const ReducedProblem rp = make_reduced(pd, std::move(W), AW);

    const double inner_tol = std::max(cfg.kkt_tol, ev.kkt_residual / 8.0);
    const InnerResult inner =
        inner_scf(rp, inner_tol, cfg.inner_max_iter, cfg.stagnation_tol);
    gap_pending = inner.gap_warning;

    const Matrix Z0 = first_k_columns_of_identity(rp.m, rp.k);
    if ((inner.Z - Z0).norm() <= 1e-14) {
      if (++no_progress >= 2) {
        trace.reason = TerminationReason::Stagnated;
        break;
      }
    } else {
      no_progress = 0;
    }

    P_prev = P.matrix();
    P = StiefelPoint(rp.W * inner.Z);
    if (cfg.cache_products)
      AP.noalias() = AW * inner.Z;
    else
      AP.noalias() = pd.A * P.matrix();
  }

  return SolveResult{std::move(P), std::move(trace)};
}

}  // namespace occafs
