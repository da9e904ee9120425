#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "occafs/model.hpp"

namespace occafs {

enum class InitPolicy { PolarOfD, RandomOrthonormal, UserSupplied };

enum class TerminationReason { Converged, MaxIter, Stagnated, DegenerateGamma };

std::string to_string(TerminationReason r);

struct SolverConfig {
  double kkt_tol = 1e-5;
  int max_iter = 500;
  // Relative objective change below which an iteration counts as stalled;
  // three stalled iterations in a row terminate the run as Stagnated.
  double stagnation_tol = 1e-12;
  std::uint64_t seed = 0;
  InitPolicy init_policy = InitPolicy::PolarOfD;
  std::optional<Matrix> initial_point;  // consumed when init_policy == UserSupplied
  // Accelerated solver only: iteration cap for each subspace solve.
  int inner_max_iter = 100;
  // Accelerated solver only: lift A*P from the cached A*W instead of
  // recomputing the full product.
  bool cache_products = true;
  // Invoked with every accepted iterate, including the initial point.
  std::function<void(const StiefelPoint&, int)> iterate_observer;
};

struct TraceEntry {
  int iter = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;  // NaN for solvers without a KKT measure
  double seconds = 0.0;       // elapsed wall time since the solve started
  bool eigen_gap_warning = false;
};

struct SolverTrace {
  std::vector<TraceEntry> entries;
  TerminationReason reason = TerminationReason::MaxIter;

  int iterations() const {
    return entries.empty() ? 0 : static_cast<int>(entries.size()) - 1;
  }
  double final_objective() const { return entries.back().objective; }
  double final_kkt() const { return entries.back().kkt_residual; }
  double total_seconds() const { return entries.empty() ? 0.0 : entries.back().seconds; }
};

struct SolveResult {
  StiefelPoint P;
  SolverTrace trace;
};

/// Starting point per the configured policy. PolarOfD uses the polar factor
/// of D when D is safely full rank and falls back to a seeded random
/// orthonormal matrix otherwise.
StiefelPoint initial_point(const ProblemData& pd, const SolverConfig& cfg);

/// P * Q with Q the orthogonal polar factor of P^T D. The result lands in the
/// cone {P : P^T D is symmetric PSD} and never decreases the objective.
StiefelPoint enforce_psd_rotation(const StiefelPoint& P, const Matrix& D);

/// Plain SCF iteration: repeatedly form the NEPv matrix at the current
/// iterate, take its top-k eigenspace, and rotate by the polar factor against
/// D, until the KKT residual passes kkt_tol. The objective trace is
/// non-decreasing; a violation beyond slack aborts with InvariantViolation.
SolveResult scf_solve(const ProblemData& pd, const SolverConfig& cfg);

}  // namespace occafs
