#include "occafs/scf.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "occafs/linalg.hpp"
#include "occafs/rng.hpp"

namespace occafs {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::string to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::Converged: return "converged";
    case TerminationReason::MaxIter: return "max-iter";
    case TerminationReason::Stagnated: return "stagnated";
    case TerminationReason::DegenerateGamma: return "degenerate-gamma";
  }
  return "unknown";
}

StiefelPoint initial_point(const ProblemData& pd, const SolverConfig& cfg) {
  switch (cfg.init_policy) {
    case InitPolicy::UserSupplied:
      if (!cfg.initial_point)
        throw InvalidInput("initial_point: init_policy is user-supplied but no point given");
      return StiefelPoint(*cfg.initial_point);
    case InitPolicy::PolarOfD: {
      linalg::ThinSvd f = linalg::thin_svd(pd.D);
      const double sigma1 = f.singular_values(0);
      const double sigmak = f.singular_values(pd.k - 1);
      if (sigmak > 1e-12 * sigma1) return StiefelPoint(f.U * f.V.transpose());
      break;  // D not safely full rank; fall through to the random policy
    }
    case InitPolicy::RandomOrthonormal:
      break;
  }
  std::mt19937_64 rng(cfg.seed);
  for (int attempt = 0; attempt < 16; ++attempt) {
    Matrix G = gaussian_matrix(rng, pd.n, pd.k);
    linalg::ThinSvd f = linalg::thin_svd(G);
    if (f.singular_values(pd.k - 1) > 1e-8 * (f.singular_values(0) + 1.0))
      return StiefelPoint(f.U * f.V.transpose());
  }
  throw NumericalFailure("initial_point: failed to draw a full-rank Gaussian matrix");
}

StiefelPoint enforce_psd_rotation(const StiefelPoint& P, const Matrix& D) {
  const Matrix Q = linalg::polar_factor(P.matrix().transpose() * D);
  return StiefelPoint(P.matrix() * Q);
}

SolveResult scf_solve(const ProblemData& pd, const SolverConfig& cfg) {
  if (pd.eps0 <= 0.0)
    throw InvalidInput("scf_solve: requires eps0 > 0");
  if (cfg.kkt_tol <= 0.0 || cfg.max_iter < 1)
    throw InvalidInput("scf_solve: kkt_tol must be positive and max_iter >= 1");

  const auto t0 = Clock::now();
  StiefelPoint P = enforce_psd_rotation(initial_point(pd, cfg), pd.D);
  Matrix AP = pd.A * P.matrix();

  SolverTrace trace;
  int stalled = 0;
  bool gap_pending = false;

  for (int j = 0;; ++j) {
    const ModelEval ev = evaluate_with_AP(pd, P, AP);
    trace.entries.push_back({j, ev.objective, ev.kkt_residual, seconds_since(t0), gap_pending});
    if (cfg.iterate_observer) cfg.iterate_observer(P, j);

    if (j > 0) {
      const double prev = trace.entries[static_cast<size_t>(j - 1)].objective;
      if (ev.objective < prev - 1e-10 * (1.0 + std::abs(prev)))
        throw InvariantViolation("scf_solve: objective decreased at iteration " +
                                 std::to_string(j) + " (" + std::to_string(prev) + " -> " +
                                 std::to_string(ev.objective) + ")");
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

    const Matrix H = nepv_matrix(pd, P);
    const linalg::TopEigs eig = linalg::top_k_symmetric_eigvecs(H, pd.k);
    gap_pending = eig.degenerate_gap;
    const Matrix Q = linalg::polar_factor(eig.vectors.transpose() * pd.D);
    P = StiefelPoint(eig.vectors * Q);
    AP.noalias() = pd.A * P.matrix();
  }

  return SolveResult{std::move(P), std::move(trace)};
}

}  // namespace occafs
