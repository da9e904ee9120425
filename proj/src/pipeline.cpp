#include "occafs/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "occafs/baselines.hpp"
#include "occafs/results_io.hpp"
#include "occafs/rng.hpp"

namespace occafs {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSplitStream = 0x53504c49;  // distinct stream tags
constexpr std::uint64_t kCellStream = 0x43454c4c;

SolveMetadata metadata_from(const SolverTrace& trace) {
  SolveMetadata md;
  md.objective = trace.final_objective();
  md.kkt_residual = trace.final_kkt();
  md.iterations = trace.iterations();
  md.wall_seconds = trace.total_seconds();
  md.termination = to_string(trace.reason);
  return md;
}

}  // namespace

std::string to_string(SolverKind s) {
  return s == SolverKind::Nepv ? "nepv" : "accnepv";
}

std::string method_name(Method m) {
  switch (m) {
    case Method::OccaFs: return "occa-fs";
    case Method::PebFs: return "peb-fs";
    case Method::Ttest: return "ttest";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "occa-fs") return Method::OccaFs;
  if (name == "peb-fs") return Method::PebFs;
  if (name == "ttest") return Method::Ttest;
  throw InvalidInput("unknown method '" + name + "' (expected occa-fs, peb-fs, or ttest)");
}

FeatureRanking make_ranking(const Eigen::VectorXd& scores, std::string method,
                            SolveMetadata meta) {
  if (scores.size() < 1) throw InvalidInput("make_ranking: empty score vector");
  FeatureRanking r;
  r.scores = scores;
  r.method = std::move(method);
  r.solve_metadata = std::move(meta);
  r.order.resize(static_cast<size_t>(scores.size()));
  std::iota(r.order.begin(), r.order.end(), 1);
  std::sort(r.order.begin(), r.order.end(), [&](int a, int b) {
    const double sa = scores(a - 1), sb = scores(b - 1);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return r;
}

FeatureRanking rank_features(const Dataset& ds, double alpha, SolverKind solver,
                             const SolverConfig& cfg, const AssembleOptions& assemble,
                             SolverTrace* trace_out) {
  const ProblemData pd = assemble_problem(ds.X, ds.labels, alpha, assemble);
  const SolveResult res =
      solver == SolverKind::Nepv ? scf_solve(pd, cfg) : locg_solve(pd, cfg);
  if (trace_out) *trace_out = res.trace;
  return make_ranking(res.P.matrix().rowwise().norm(),
                      "occa-fs[" + to_string(solver) + "]", metadata_from(res.trace));
}

std::vector<int> select_top_q(const FeatureRanking& r, int q) {
  if (q < 1 || q > static_cast<int>(r.order.size()))
    throw InvalidInput("select_top_q: q = " + std::to_string(q) + " out of range 1.." +
                       std::to_string(r.order.size()));
  return {r.order.begin(), r.order.begin() + q};
}

double one_nn_evaluate(const Dataset& ds, const std::vector<int>& train_idx,
                       const std::vector<int>& test_idx, const std::vector<int>& features) {
  if (train_idx.empty() || test_idx.empty())
    throw InvalidInput("one_nn_evaluate: empty train or test split");
  if (features.empty()) throw InvalidInput("one_nn_evaluate: empty feature set");
  for (int f : features)
    if (f < 1 || f > ds.n()) throw InvalidInput("one_nn_evaluate: feature index out of range");
  {
    std::vector<int> a = train_idx, b = test_idx;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<int> inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    if (!inter.empty()) throw InvalidInput("one_nn_evaluate: train and test overlap");
  }

  // Ascending training index order makes the tie-break (smallest index wins)
  // fall out of the strict < comparison.
  std::vector<int> train = train_idx;
  std::sort(train.begin(), train.end());

  const Eigen::Index F = static_cast<Eigen::Index>(features.size());
  Eigen::MatrixXd T(F, static_cast<Eigen::Index>(train.size()));
  for (size_t j = 0; j < train.size(); ++j)
    for (Eigen::Index f = 0; f < F; ++f)
      T(f, static_cast<Eigen::Index>(j)) = ds.X(features[static_cast<size_t>(f)] - 1, train[j]);

  Eigen::VectorXd x(F);
  size_t correct = 0;
  for (int tj : test_idx) {
    for (Eigen::Index f = 0; f < F; ++f) x(f) = ds.X(features[static_cast<size_t>(f)] - 1, tj);
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < T.cols(); ++c) {
      const double d = (T.col(c) - x).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (ds.labels[static_cast<size_t>(train[static_cast<size_t>(best)])] ==
        ds.labels[static_cast<size_t>(tj)])
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_idx.size());
}

SplitIndices draw_split(Eigen::Index p, const std::vector<int>& labels, int num_classes,
                        double frac, std::uint64_t seed, bool stratify) {
  if (p < 2) throw InvalidInput("draw_split: need at least two samples");
  if (!(frac > 0.0 && frac < 1.0)) throw InvalidInput("draw_split: frac must be in (0,1)");
  std::mt19937_64 rng(seed);
  SplitIndices out;

  if (stratify) {
    std::vector<std::vector<int>> by_class(static_cast<size_t>(num_classes));
    for (Eigen::Index j = 0; j < p; ++j)
      by_class[static_cast<size_t>(labels[static_cast<size_t>(j)] - 1)].push_back(
          static_cast<int>(j));
    for (auto& idx : by_class) {
      if (idx.empty()) continue;
      std::shuffle(idx.begin(), idx.end(), rng);
      const auto nc = static_cast<long>(idx.size());
      long tc = std::clamp(std::lround(frac * static_cast<double>(nc)), 1l, nc);
      if (tc == nc && nc > 1) tc = nc - 1;  // keep some test mass when possible
      out.train.insert(out.train.end(), idx.begin(), idx.begin() + tc);
      out.test.insert(out.test.end(), idx.begin() + tc, idx.end());
    }
    if (out.test.empty()) throw InvalidInput("draw_split: stratified split left no test samples");
  } else {
    std::vector<int> perm(static_cast<size_t>(p));
    std::iota(perm.begin(), perm.end(), 0);
    const long t =
        std::clamp(std::lround(frac * static_cast<double>(p)), 1l, static_cast<long>(p - 1));
    for (int attempt = 0; attempt < 50; ++attempt) {
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<bool> seen(static_cast<size_t>(num_classes), false);
      for (long j = 0; j < t; ++j)
        seen[static_cast<size_t>(labels[static_cast<size_t>(perm[static_cast<size_t>(j)])] - 1)] =
            true;
      if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
        out.train.assign(perm.begin(), perm.begin() + t);
        out.test.assign(perm.begin() + t, perm.end());
        break;
      }
    }
    if (out.train.empty())
      throw InvalidInput(
          "draw_split: could not draw a training split covering every class in 50 attempts");
  }

  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

ExperimentResult run_experiment(const Dataset& ds, const ExperimentOptions& opts) {
  if (opts.repeats < 1) throw InvalidInput("run_experiment: repeats must be >= 1");
  if (opts.methods.empty()) throw InvalidInput("run_experiment: no methods");
  if (opts.q_grid.empty()) throw InvalidInput("run_experiment: empty q grid");
  for (int q : opts.q_grid)
    if (q < 1 || q > ds.n())
      throw InvalidInput("run_experiment: q = " + std::to_string(q) + " out of range");

  const auto t0 = Clock::now();
  const int R = opts.repeats;
  const int M = static_cast<int>(opts.methods.size());
  const int Q = static_cast<int>(opts.q_grid.size());

  ExperimentResult result;
  result.alpha = opts.alpha;
  result.split_frac = opts.split_frac;
  result.repeats = R;
  result.stratified = opts.stratify;
  result.master_seed = opts.master_seed;
  result.q_grid = opts.q_grid;
  result.occa_solver = to_string(opts.occa_solver);
  for (Method m : opts.methods) result.methods.push_back(method_name(m));

  // Splits are shared across methods within a repeat.
  std::vector<SplitIndices> splits;
  splits.reserve(static_cast<size_t>(R));
  for (int r = 0; r < R; ++r) {
    const std::uint64_t seed = derive_seed(opts.master_seed, kSplitStream, static_cast<std::uint64_t>(r));
    result.split_seeds.push_back(seed);
    splits.push_back(
        draw_split(ds.p(), ds.labels, ds.num_classes, opts.split_frac, seed, opts.stratify));
  }

  struct Cell {
    int method_idx;
    int repeat;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<size_t>(M * R));
  for (int mi = 0; mi < M; ++mi)
    for (int r = 0; r < R; ++r) cells.push_back({mi, r});

  // Each cell owns a preassigned slot, so results do not depend on thread
  // scheduling.
  std::vector<double> accuracy(static_cast<size_t>(M * R * Q), 0.0);
  std::vector<CellMetadata> cell_meta(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());

  auto run_cell = [&](size_t ci) {
    const auto [mi, r] = cells[ci];
    const Method method = opts.methods[static_cast<size_t>(mi)];
    const SplitIndices& split = splits[static_cast<size_t>(r)];
    const Dataset train_ds = slice_samples(ds, split.train);

    SolverConfig cfg = opts.solver_cfg;
    cfg.iterate_observer = nullptr;  // observers are not shared across threads
    cfg.seed = derive_seed(opts.master_seed, kCellStream,
                           (static_cast<std::uint64_t>(r) << 8) ^ static_cast<std::uint64_t>(mi));

    FeatureRanking ranking;
    SolverTrace trace;
    switch (method) {
      case Method::OccaFs:
        ranking = rank_features(train_ds, opts.alpha, opts.occa_solver, cfg, opts.assemble,
                                &trace);
        break;
      case Method::PebFs:
        ranking = pebfs_rank(train_ds, opts.alpha, cfg, opts.assemble, &trace);
        break;
      case Method::Ttest:
        ranking = ttest_rank(train_ds);
        break;
    }
    if (!opts.trace_dir.empty() && method != Method::Ttest)
      write_trace_csv(opts.trace_dir + "/trace_" + method_name(method) + "_r" +
                          std::to_string(r) + ".csv",
                      trace);

    cell_meta[ci] = {method_name(method), r, ranking.solve_metadata};
    for (int qi = 0; qi < Q; ++qi) {
      const auto feats = select_top_q(ranking, opts.q_grid[static_cast<size_t>(qi)]);
      accuracy[static_cast<size_t>((mi * R + r) * Q + qi)] =
          one_nn_evaluate(ds, split.train, split.test, feats);
    }
  };

  int workers = opts.workers > 0 ? opts.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(cells.size()));
  if (workers == 1) {
    for (size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t ci = next.fetch_add(1); ci < cells.size(); ci = next.fetch_add(1)) {
          try {
            run_cell(ci);
          } catch (...) {
            errors[ci] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  for (int mi = 0; mi < M; ++mi) {
    const std::string name = method_name(opts.methods[static_cast<size_t>(mi)]);
    for (int qi = 0; qi < Q; ++qi) {
      const int q = opts.q_grid[static_cast<size_t>(qi)];
      double sum = 0.0;
      for (int r = 0; r < R; ++r) {
        const double a = accuracy[static_cast<size_t>((mi * R + r) * Q + qi)];
        result.records.push_back({name, q, r, a});
        sum += a;
      }
      const double mean = sum / R;
      double ss = 0.0;
      for (int r = 0; r < R; ++r) {
        const double d = accuracy[static_cast<size_t>((mi * R + r) * Q + qi)] - mean;
        ss += d * d;
      }
      const double sd = R > 1 ? std::sqrt(ss / (R - 1)) : 0.0;
      result.aggregates.push_back({name, q, mean, sd});
    }
  }
  result.cell_metadata = std::move(cell_meta);
  result.total_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

}  // namespace occafs
