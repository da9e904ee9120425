#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "occafs/dataset.hpp"
#include "occafs/locg.hpp"

namespace occafs {

enum class SolverKind { Nepv, AccNepv };

std::string to_string(SolverKind s);

struct SolveMetadata {
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::string termination;
};

/// Feature indices sorted by descending score, ties broken by ascending
/// feature index. scores(i) belongs to feature i+1.
struct FeatureRanking {
  std::vector<int> order;  // permutation of 1..n
  Eigen::VectorXd scores;
  std::string method;
  SolveMetadata solve_metadata;
};

FeatureRanking make_ranking(const Eigen::VectorXd& scores, std::string method,
                            SolveMetadata meta = {});

/// Solves the regularized model on the dataset and ranks features by the row
/// norms of the returned point.
FeatureRanking rank_features(const Dataset& ds, double alpha, SolverKind solver,
                             const SolverConfig& cfg, const AssembleOptions& assemble = {},
                             SolverTrace* trace_out = nullptr);

/// First q entries of the ranking order (1-based feature indices).
std::vector<int> select_top_q(const FeatureRanking& r, int q);

/// One-nearest-neighbor accuracy: each test sample takes the label of its
/// nearest training sample in squared Euclidean distance restricted to the
/// selected features. Distance ties go to the smallest training-sample index.
double one_nn_evaluate(const Dataset& ds, const std::vector<int>& train_idx,
                       const std::vector<int>& test_idx, const std::vector<int>& features);

enum class Method { OccaFs, PebFs, Ttest };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct ExperimentOptions {
  std::vector<Method> methods{Method::OccaFs, Method::PebFs, Method::Ttest};
  std::vector<int> q_grid{10, 20, 30, 40, 50};
  double alpha = 0.01;
  int repeats = 10;
  double split_frac = 0.6;
  std::uint64_t master_seed = 0;
  bool stratify = false;
  int workers = 0;  // 0 = all available
  SolverKind occa_solver = SolverKind::AccNepv;
  SolverConfig solver_cfg;  // per-cell seeds are derived from master_seed
  AssembleOptions assemble;
  std::string trace_dir;  // when set, per-solve traces are written here
};

struct AccuracyRecord {
  std::string method;
  int q = 0;
  int repeat = 0;
  double accuracy = 0.0;
};

struct AccuracyAggregate {
  std::string method;
  int q = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over repeats
};

struct CellMetadata {
  std::string method;
  int repeat = 0;
  SolveMetadata meta;
};

struct ExperimentResult {
  std::vector<AccuracyRecord> records;       // method-major, then q, then repeat
  std::vector<AccuracyAggregate> aggregates;
  std::vector<std::uint64_t> split_seeds;    // one per repeat
  std::vector<CellMetadata> cell_metadata;
  double alpha = 0.0;
  double split_frac = 0.0;
  int repeats = 0;
  bool stratified = false;
  std::uint64_t master_seed = 0;
  std::vector<std::string> methods;
  std::vector<int> q_grid;
  std::string occa_solver;
  double total_seconds = 0.0;
};

struct SplitIndices {
  std::vector<int> train;  // sorted ascending
  std::vector<int> test;   // sorted ascending
};

/// Random train/test split. Unstratified draws a uniform shuffle and retries
/// (up to 50 times) until every class appears in the training part; the
/// stratified variant splits each class proportionally.
SplitIndices draw_split(Eigen::Index p, const std::vector<int>& labels, int num_classes,
                        double frac, std::uint64_t seed, bool stratify);

/// The repeated-holdout protocol: per repeat, draw a split, rank features on
/// the training part only with each method, and score a 1-NN classifier on
/// the test part for every q in the grid. Deterministic given master_seed.
ExperimentResult run_experiment(const Dataset& ds, const ExperimentOptions& opts);

}  // namespace occafs
