#pragma once

#include "occafs/pipeline.hpp"

namespace occafs {

/// Filter baseline: per feature and class, the Welch two-sample t statistic
/// between that class and the rest; the score is the largest |t| over
/// classes. Requires at least two samples per class.
FeatureRanking ttest_rank(const Dataset& ds);

struct PebResult {
  StiefelPoint P;
  // The objective column carries g(P, gamma), the scaled-regression value
  // being minimized. No monotonicity is guaranteed for this trace: the
  // P-update freezes P-dependent quantities at the current iterate, and runs
  // where g increases between iterations do occur.
  SolverTrace trace;
  double gamma = 0.0;
};

/// Alternating solver for the scaled regression model with row-norm
/// regularization: a closed-form scaling update followed by a P-update that
/// takes the SVD of a matrix frozen at the current iterate. Reproduced as
/// published, including that flaw; its role here is comparative. The
/// problem's eps0 regularizes the inverse-row-norm diagonal.
PebResult pebfs_solve(const ProblemData& pd, const SolverConfig& cfg);

/// rank_features via pebfs_solve.
FeatureRanking pebfs_rank(const Dataset& ds, double alpha, const SolverConfig& cfg,
                          const AssembleOptions& assemble = {},
                          SolverTrace* trace_out = nullptr);

}  // namespace occafs
