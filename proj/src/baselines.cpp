#include "occafs/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "occafs/linalg.hpp"
#include "occafs/rng.hpp"

namespace occafs {

namespace {

using Clock = std::chrono::steady_clock;

// Orthonormal completion of P to a full basis; the free directions come from
// a seeded Gaussian block so the completion is deterministic per solve.
Matrix orthonormal_complement(const Matrix& P, std::mt19937_64& rng) {
  const Eigen::Index n = P.rows();
  const Eigen::Index k = P.cols();
  for (int attempt = 0; attempt < 8; ++attempt) {
    const Matrix G = gaussian_matrix(rng, n, n - k);
    const Matrix full = linalg::orthonormalize_against(P, G);
    if (full.cols() == n) return full.rightCols(n - k);
  }
  throw NumericalFailure("orthonormal_complement: could not complete the basis");
}

}  // namespace

FeatureRanking ttest_rank(const Dataset& ds) {
  const Eigen::Index n = ds.n();
  const Eigen::Index p = ds.p();
  const int k = ds.num_classes;
  if (k < 2) throw InvalidInput("ttest_rank: need at least two classes");

  std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
  for (int c : ds.labels) ++counts[static_cast<size_t>(c - 1)];
  for (int c = 0; c < k; ++c)
    if (counts[static_cast<size_t>(c)] < 2)
      throw InvalidInput("ttest_rank: class " + std::to_string(c + 1) +
                         " has fewer than two samples");

  Eigen::VectorXd scores = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd x(p);
  for (int c = 1; c <= k; ++c) {
    const double n1 = static_cast<double>(counts[static_cast<size_t>(c - 1)]);
    const double n2 = static_cast<double>(p) - n1;
    for (Eigen::Index f = 0; f < n; ++f) {
      double sum1 = 0.0, sum2 = 0.0;
      for (Eigen::Index j = 0; j < p; ++j)
        (ds.labels[static_cast<size_t>(j)] == c ? sum1 : sum2) += ds.X(f, j);
      const double m1 = sum1 / n1;
      const double m2 = sum2 / n2;
      double v1 = 0.0, v2 = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double val = ds.X(f, j);
        if (ds.labels[static_cast<size_t>(j)] == c)
          v1 += (val - m1) * (val - m1);
        else
          v2 += (val - m2) * (val - m2);
      }
      v1 /= (n1 - 1.0);
      v2 /= (n2 - 1.0);
      const double se2 = v1 / n1 + v2 / n2;
      // Variances at roundoff level count as zero so constant features score 0.
      if (se2 <= 1e-24 * (m1 * m1 + m2 * m2 + 1.0)) continue;
      scores(f) = std::max(scores(f), std::abs(m1 - m2) / std::sqrt(se2));
    }
  }
  return make_ranking(scores, "ttest");
}

PebResult pebfs_solve(const ProblemData& pd, const SolverConfig& cfg) {
  const Eigen::Index n = pd.n;
  const Eigen::Index k = pd.k;
  const double alpha = pd.alpha;
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x504542));

  const auto t0 = Clock::now();
  StiefelPoint P = initial_point(pd, cfg);
  SolverTrace trace;
  double gamma = 0.0;

  double tr_pd = 0.0;
  auto eval_state = [&](const StiefelPoint& point, double& gamma_out, double& g_out) {
    const Matrix AP = pd.A * point.matrix();
    const double tr_pap = point.matrix().cwiseProduct(AP).sum();
    if (tr_pap <= 1e-14 * pd.norm_A_fro)
      throw NumericalFailure("pebfs_solve: degenerate denominator tr(P^T A P)");
    tr_pd = point.matrix().cwiseProduct(pd.D).sum();
    gamma_out = tr_pd / tr_pap;
    g_out = gamma_out * gamma_out * tr_pap - 2.0 * gamma_out * tr_pd +
            alpha * point.matrix().rowwise().norm().sum();
  };

  auto push_entry = [&](int t, double g) {
    trace.entries.push_back({t, g, std::numeric_limits<double>::quiet_NaN(),
                             std::chrono::duration<double>(Clock::now() - t0).count(), false});
    if (cfg.iterate_observer) cfg.iterate_observer(P, t);
  };

  for (int t = 0;; ++t) {
    double g;
    eval_state(P, gamma, g);
    push_entry(t, g);

    if (t == cfg.max_iter) {
      trace.reason = TerminationReason::MaxIter;
      break;
    }
    // tr(P^T D) at roundoff level means gamma ~ 0 and the alpha/(2 gamma)
    // term is meaningless.
    if (alpha > 0.0 && std::abs(tr_pd) < 1e-14 * (1.0 + pd.norm_D_fro)) {
      trace.reason = TerminationReason::DegenerateGamma;
      break;
    }

    const Matrix P_perp = orthonormal_complement(P.matrix(), rng);
    const Vector s =
        (P.matrix().rowwise().squaredNorm().array() + pd.eps0 * pd.eps0).sqrt();

    Matrix R(n, n);
    R.leftCols(k) = pd.D;
    R.rightCols(n - k).noalias() = (gamma / 2.0) * (pd.A * P_perp);
    if (alpha > 0.0)
      R.rightCols(n - k) +=
          (alpha / (2.0 * gamma)) *
          (P_perp.array().colwise() * s.array().cwiseInverse()).matrix();

    const Matrix Q = linalg::polar_factor(R);
    StiefelPoint P_next(Q.leftCols(k));
    const double delta = (P_next.matrix() - P.matrix()).norm();
    P = std::move(P_next);

    if (delta < 1e-8) {
      double g_final;
      eval_state(P, gamma, g_final);
      push_entry(t + 1, g_final);
      trace.reason = TerminationReason::Converged;
      break;
    }
  }

  return PebResult{std::move(P), std::move(trace), gamma};
}

FeatureRanking pebfs_rank(const Dataset& ds, double alpha, const SolverConfig& cfg,
                          const AssembleOptions& assemble, SolverTrace* trace_out) {
  const ProblemData pd = assemble_problem(ds.X, ds.labels, alpha, assemble);
  PebResult res = pebfs_solve(pd, cfg);
  if (trace_out) *trace_out = res.trace;
  SolveMetadata md;
  md.objective = res.trace.final_objective();
  md.kkt_residual = std::numeric_limits<double>::quiet_NaN();
  md.iterations = res.trace.iterations();
  md.wall_seconds = res.trace.total_seconds();
  md.termination = to_string(res.trace.reason);
  return make_ranking(res.P.matrix().rowwise().norm(), "peb-fs", std::move(md));
}

}  // namespace occafs
