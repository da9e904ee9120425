// Command-line front end: wires the loaders, solvers, baselines, and the
// experiment runner together. Exit codes: 0 success, 2 input error,
// 3 numerical failure, 4 internal invariant violation.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "occafs/baselines.hpp"
#include "occafs/results_io.hpp"
#include "occafs/rng.hpp"

namespace {

using namespace occafs;

struct DataArgs {
  std::string path;
  std::string format = "csv";
  int label_column = -1;
  std::string header = "auto";
};

struct ModelArgs {
  double alpha = 0.01;
  double eps0 = -1.0;  // negative = default policy
  bool allow_rank_deficient = false;
};

struct SolverArgs {
  std::string solver = "accnepv";
  double kkt_tol = 1e-5;
  int max_iter = 500;
  std::string init = "polar";
  std::uint64_t seed = 0;
  bool no_cache = false;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.path, "Dataset file")->required();
  cmd->add_option("--format", a.format, "Dataset format")
      ->check(CLI::IsMember({"csv", "libsvm"}))
      ->capture_default_str();
  cmd->add_option("--label-col", a.label_column,
                  "CSV: 0-based label column; -1 = last")
      ->capture_default_str();
  cmd->add_option("--header", a.header, "CSV header handling")
      ->check(CLI::IsMember({"auto", "yes", "no"}))
      ->capture_default_str();
}

void add_model_options(CLI::App* cmd, ModelArgs& a) {
  cmd->add_option("--alpha", a.alpha, "Row-sparsity regularization weight")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--eps0", a.eps0,
                  "Row-norm perturbation; omit for the 1e-3*sqrt(k/n) default");
  cmd->add_flag("--allow-rank-deficient", a.allow_rank_deficient,
                "Proceed when rank(A) <= n-k (more features than training samples)");
}

void add_solver_options(CLI::App* cmd, SolverArgs& a) {
  cmd->add_option("--solver", a.solver, "nepv = plain SCF, accnepv = subspace-accelerated")
      ->check(CLI::IsMember({"nepv", "accnepv"}))
      ->capture_default_str();
  cmd->add_option("--kkt-tol", a.kkt_tol, "Stationarity tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iter", a.max_iter, "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--init", a.init, "Initial point policy")
      ->check(CLI::IsMember({"polar", "random"}))
      ->capture_default_str();
  cmd->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
  cmd->add_flag("--no-cache", a.no_cache,
                "Disable reuse of cached A*W products in the accelerated solver");
}

Dataset load(const DataArgs& a) {
  LoadOptions opts;
  opts.label_column = a.label_column;
  opts.header = a.header == "yes"  ? LoadOptions::Header::Yes
                : a.header == "no" ? LoadOptions::Header::No
                                   : LoadOptions::Header::Auto;
  return load_dataset(a.path, a.format == "csv" ? DataFormat::Csv : DataFormat::Libsvm,
                      opts);
}

AssembleOptions assemble_options(const ModelArgs& a) {
  AssembleOptions opts;
  if (a.eps0 >= 0.0) opts.eps0 = a.eps0;
  opts.allow_rank_deficient = a.allow_rank_deficient;
  return opts;
}

SolverConfig solver_config(const SolverArgs& a) {
  SolverConfig cfg;
  cfg.kkt_tol = a.kkt_tol;
  cfg.max_iter = a.max_iter;
  cfg.seed = a.seed;
  cfg.init_policy =
      a.init == "random" ? InitPolicy::RandomOrthonormal : InitPolicy::PolarOfD;
  cfg.cache_products = !a.no_cache;
  return cfg;
}

SolverKind solver_kind(const SolverArgs& a) {
  return a.solver == "nepv" ? SolverKind::Nepv : SolverKind::AccNepv;
}

Json data_provenance(const DataArgs& d, const ModelArgs& m, const SolverArgs& s) {
  return Json{{"data_path", d.path}, {"format", d.format},     {"alpha", m.alpha},
              {"solver", s.solver},  {"seed", s.seed},         {"kkt_tol", s.kkt_tol},
              {"init", s.init}};
}

int run_rank(const DataArgs& d, const ModelArgs& m, const SolverArgs& s,
             const std::string& method, const std::string& out,
             const std::string& trace_path) {
  const Dataset ds = load(d);
  SolverTrace trace;
  FeatureRanking ranking;
  if (method == "ttest") {
    ranking = ttest_rank(ds);
  } else if (method == "peb-fs") {
    ranking = pebfs_rank(ds, m.alpha, solver_config(s), assemble_options(m), &trace);
  } else {
    ranking = rank_features(ds, m.alpha, solver_kind(s), solver_config(s),
                            assemble_options(m), &trace);
  }
  write_ranking_json(out, ranking, data_provenance(d, m, s));
  if (!trace_path.empty()) write_trace_csv(trace_path, trace);
  std::cout << "wrote " << out << " (method " << ranking.method << ", "
            << ranking.order.size() << " features)\n";
  return 0;
}

int run_solve(const DataArgs& d, const ModelArgs& m, const SolverArgs& s,
              const std::string& out, const std::string& trace_path) {
  const Dataset ds = load(d);
  const ProblemData pd = assemble_problem(ds.X, ds.labels, m.alpha, assemble_options(m));
  const SolverConfig cfg = solver_config(s);
  const SolveResult res =
      solver_kind(s) == SolverKind::Nepv ? scf_solve(pd, cfg) : locg_solve(pd, cfg);

  Json j;
  j["solver"] = s.solver;
  j["objective"] = res.trace.final_objective();
  j["kkt_residual"] = res.trace.final_kkt();
  j["iterations"] = res.trace.iterations();
  j["termination"] = to_string(res.trace.reason);
  j["n"] = pd.n;
  j["k"] = pd.k;
  j["alpha"] = pd.alpha;
  j["eps0"] = pd.eps0;
  j["timing"] = Json{{"wall_seconds", res.trace.total_seconds()}};
  if (!out.empty())
    write_text_file(out, j.dump(2) + "\n");
  else
    std::cout << j.dump(2) << "\n";
  if (!trace_path.empty()) write_trace_csv(trace_path, res.trace);
  return 0;
}

int run_eval(const DataArgs& d, const std::string& ranking_path, int q, double split_frac,
             int repeats, std::uint64_t seed, bool stratify, const std::string& out) {
  const Dataset ds = load(d);
  const FeatureRanking ranking = ranking_from_json(ranking_path);
  if (static_cast<Eigen::Index>(ranking.order.size()) != ds.n())
    throw InvalidInput("ranking covers " + std::to_string(ranking.order.size()) +
                       " features but the dataset has " + std::to_string(ds.n()));
  const auto feats = select_top_q(ranking, q);

  Json records = Json::array();
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t split_seed = derive_seed(seed, 0x4556414c, static_cast<std::uint64_t>(r));
    const SplitIndices split =
        draw_split(ds.p(), ds.labels, ds.num_classes, split_frac, split_seed, stratify);
    const double acc = one_nn_evaluate(ds, split.train, split.test, feats);
    records.push_back(Json{{"repeat", r}, {"accuracy", acc}});
    sum += acc;
    sumsq += acc * acc;
  }
  const double mean = sum / repeats;
  const double var = repeats > 1 ? (sumsq - repeats * mean * mean) / (repeats - 1) : 0.0;
  Json j;
  j["method"] = ranking.method;
  j["q"] = q;
  j["split_frac"] = split_frac;
  j["repeats"] = repeats;
  j["records"] = records;
  j["mean_accuracy"] = mean;
  j["std_accuracy"] = std::sqrt(std::max(0.0, var));
  if (!out.empty())
    write_text_file(out, j.dump(2) + "\n");
  else
    std::cout << j.dump(2) << "\n";
  return 0;
}

int run_experiment_cmd(const DataArgs& d, const ModelArgs& m, const SolverArgs& s,
                       const std::string& methods_csv, std::vector<int> q_grid, int repeats,
                       double split_frac, bool stratify, int workers,
                       const std::string& out_json, const std::string& out_csv,
                       const std::string& trace_dir) {
  const Dataset ds = load(d);
  ExperimentOptions opts;
  opts.methods.clear();
  {
    std::stringstream ss(methods_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) opts.methods.push_back(method_from_name(tok));
  }
  opts.q_grid = std::move(q_grid);
  opts.alpha = m.alpha;
  opts.repeats = repeats;
  opts.split_frac = split_frac;
  opts.master_seed = s.seed;
  opts.stratify = stratify;
  opts.workers = workers;
  opts.occa_solver = solver_kind(s);
  opts.solver_cfg = solver_config(s);
  opts.assemble = assemble_options(m);
  if (!trace_dir.empty()) {
    std::filesystem::create_directories(trace_dir);
    opts.trace_dir = trace_dir;
  }

  const ExperimentResult result = run_experiment(ds, opts);
  if (!out_json.empty()) write_experiment_json(out_json, result);
  if (!out_csv.empty()) write_experiment_csv(out_csv, result);
  if (out_json.empty() && out_csv.empty())
    std::cout << experiment_to_json(result).dump(2) << "\n";
  else
    std::cout << "wrote " << out_json << (out_csv.empty() ? "" : " and " + out_csv) << "\n";
  return 0;
}

int run_compare(const DataArgs& d, const ModelArgs& m, const SolverArgs& s,
                const std::string& out, const std::string& trace_nepv,
                const std::string& trace_accnepv) {
  const Dataset ds = load(d);
  const ProblemData pd = assemble_problem(ds.X, ds.labels, m.alpha, assemble_options(m));

  SolverConfig cfg = solver_config(s);
  const StiefelPoint P0 = initial_point(pd, cfg);
  cfg.init_policy = InitPolicy::UserSupplied;
  cfg.initial_point = P0.matrix();

  const SolveResult plain = scf_solve(pd, cfg);
  const SolveResult accel = locg_solve(pd, cfg);
  if (!trace_nepv.empty()) write_trace_csv(trace_nepv, plain.trace);
  if (!trace_accnepv.empty()) write_trace_csv(trace_accnepv, accel.trace);

  const double f1 = plain.trace.final_objective();
  const double f2 = accel.trace.final_objective();
  Json j;
  j["nepv"] = Json{{"objective", f1},
                   {"iterations", plain.trace.iterations()},
                   {"kkt_residual", plain.trace.final_kkt()},
                   {"termination", to_string(plain.trace.reason)}};
  j["accnepv"] = Json{{"objective", f2},
                      {"iterations", accel.trace.iterations()},
                      {"kkt_residual", accel.trace.final_kkt()},
                      {"termination", to_string(accel.trace.reason)}};
  j["objective_rel_diff"] =
      std::abs(f1 - f2) / std::max({1e-300, std::abs(f1), std::abs(f2)});
  j["timing"] = Json{{"nepv_seconds", plain.trace.total_seconds()},
                     {"accnepv_seconds", accel.trace.total_seconds()},
                     {"speedup", plain.trace.total_seconds() /
                                     std::max(1e-12, accel.trace.total_seconds())}};
  if (!out.empty())
    write_text_file(out, j.dump(2) + "\n");
  else
    std::cout << j.dump(2) << "\n";
  return 0;
}

int run_inject(const DataArgs& d, int t, std::uint64_t seed, const std::string& out) {
  const Dataset ds = load(d);
  const Dataset noisy = inject_noise_features(ds, t, seed);
  save_dataset_csv(noisy, out);
  std::cout << "wrote " << out << " (" << noisy.n() << " features x " << noisy.p()
            << " samples)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occafs: supervised feature selection via orthogonally constrained "
               "correlation maximization with row-sparsity regularization"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI-style key=value file");
  app.get_config_formatter_base()->comment('#');

  DataArgs data;
  ModelArgs model;
  SolverArgs solver;

  // rank
  auto* rank = app.add_subcommand("rank", "Rank features on a dataset");
  std::string rank_method = "occa-fs";
  std::string rank_out = "ranking.json";
  std::string rank_trace;
  add_data_options(rank, data);
  add_model_options(rank, model);
  add_solver_options(rank, solver);
  rank->add_option("--method", rank_method, "Ranking method")
      ->check(CLI::IsMember({"occa-fs", "peb-fs", "ttest"}))
      ->capture_default_str();
  rank->add_option("--out", rank_out, "Output ranking JSON")->capture_default_str();
  rank->add_option("--trace", rank_trace, "Optional solver trace CSV");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the model and report the optimum");
  std::string solve_out;
  std::string solve_trace;
  add_data_options(solve, data);
  add_model_options(solve, model);
  add_solver_options(solve, solver);
  solve->add_option("--out", solve_out, "Summary JSON (stdout when omitted)");
  solve->add_option("--trace", solve_trace, "Solver trace CSV");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a stored ranking with 1-NN");
  std::string eval_ranking;
  int eval_q = 10;
  double eval_split = 0.6;
  int eval_repeats = 1;
  std::uint64_t eval_seed = 0;
  bool eval_stratify = false;
  std::string eval_out;
  add_data_options(eval, data);
  eval->add_option("--ranking", eval_ranking, "Ranking JSON from the rank command")
      ->required();
  eval->add_option("--q", eval_q, "Number of selected features")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_option("--split-frac", eval_split, "Training fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--repeats", eval_repeats, "Number of random splits")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_option("--seed", eval_seed, "RNG seed")->capture_default_str();
  eval->add_flag("--stratify", eval_stratify, "Stratified splits");
  eval->add_option("--out", eval_out, "Output JSON (stdout when omitted)");

  // experiment
  auto* exp = app.add_subcommand(
      "experiment", "Repeated-holdout protocol: rank on train, score 1-NN on test");
  std::string exp_methods = "occa-fs,peb-fs,ttest";
  std::vector<int> exp_q{10, 20, 30, 40, 50};
  int exp_repeats = 10;
  double exp_split = 0.6;
  bool exp_stratify = false;
  int exp_workers = 0;
  std::string exp_out_json = "experiment.json";
  std::string exp_out_csv;
  std::string exp_trace_dir;
  add_data_options(exp, data);
  add_model_options(exp, model);
  add_solver_options(exp, solver);
  exp->add_option("--methods", exp_methods, "Comma-separated method list")
      ->capture_default_str();
  exp->add_option("--q", exp_q, "Selected-feature counts")
      ->delimiter(',')
      ->capture_default_str();
  exp->add_option("--repeats", exp_repeats, "Random splits per method")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  exp->add_option("--split-frac", exp_split, "Training fraction")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  exp->add_flag("--stratify", exp_stratify, "Stratified splits");
  exp->add_option("--workers", exp_workers, "Parallel cells; 1 = fully serial, 0 = auto")
      ->capture_default_str();
  exp->add_option("--out-json", exp_out_json, "Result JSON")->capture_default_str();
  exp->add_option("--out-csv", exp_out_csv, "Per-record CSV");
  exp->add_option("--trace-dir", exp_trace_dir, "Directory for per-solve trace CSVs");

  // compare-solvers
  auto* cmp = app.add_subcommand("compare-solvers",
                                 "Run both solvers from one initial point and compare");
  std::string cmp_out;
  std::string cmp_trace_nepv = "trace_nepv.csv";
  std::string cmp_trace_acc = "trace_accnepv.csv";
  add_data_options(cmp, data);
  add_model_options(cmp, model);
  add_solver_options(cmp, solver);
  cmp->add_option("--out", cmp_out, "Summary JSON (stdout when omitted)");
  cmp->add_option("--trace-nepv", cmp_trace_nepv, "Plain solver trace CSV")
      ->capture_default_str();
  cmp->add_option("--trace-accnepv", cmp_trace_acc, "Accelerated solver trace CSV")
      ->capture_default_str();

  // inject-noise
  auto* inj = app.add_subcommand("inject-noise", "Append 1000*t uniform(0,0.01) features");
  int inj_t = 1;
  std::uint64_t inj_seed = 0;
  std::string inj_out = "noisy.csv";
  add_data_options(inj, data);
  inj->add_option("--t", inj_t, "Noise blocks of 1000 features")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  inj->add_option("--seed", inj_seed, "RNG seed")->capture_default_str();
  inj->add_option("--out", inj_out, "Output CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rank->parsed()) return run_rank(data, model, solver, rank_method, rank_out, rank_trace);
    if (solve->parsed()) return run_solve(data, model, solver, solve_out, solve_trace);
    if (eval->parsed())
      return run_eval(data, eval_ranking, eval_q, eval_split, eval_repeats, eval_seed,
                      eval_stratify, eval_out);
    if (exp->parsed())
      return run_experiment_cmd(data, model, solver, exp_methods, exp_q, exp_repeats,
                                exp_split, exp_stratify, exp_workers, exp_out_json,
                                exp_out_csv, exp_trace_dir);
    if (cmp->parsed()) return run_compare(data, model, solver, cmp_out, cmp_trace_nepv,
                                          cmp_trace_acc);
    if (inj->parsed()) return run_inject(data, inj_t, inj_seed, inj_out);
  } catch (const occafs::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const occafs::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const occafs::InvariantViolation& e) {
    std::cerr << "internal invariant violation: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
