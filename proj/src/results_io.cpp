#include "occafs/results_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace occafs {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open output file: " + path);
  return out;
}

}  // namespace

Json ranking_to_json(const FeatureRanking& r) {
  Json j;
  j["method"] = r.method;
  j["n_features"] = r.scores.size();
  j["order"] = r.order;
  j["scores"] = std::vector<double>(r.scores.data(), r.scores.data() + r.scores.size());
  Json meta;
  meta["objective"] = r.solve_metadata.objective;
  meta["kkt_residual"] = r.solve_metadata.kkt_residual;
  meta["iterations"] = r.solve_metadata.iterations;
  meta["termination"] = r.solve_metadata.termination;
  j["solve_metadata"] = meta;
  j["timing"] = Json{{"wall_seconds", r.solve_metadata.wall_seconds}};
  return j;
}

void write_ranking_json(const std::string& path, const FeatureRanking& r,
                        const Json& provenance) {
  Json j = ranking_to_json(r);
  if (!provenance.empty()) j["provenance"] = provenance;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

FeatureRanking ranking_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open ranking file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidInput("cannot parse ranking JSON " + path + ": " + e.what());
  }
  FeatureRanking r;
  try {
    const auto scores = j.at("scores").get<std::vector<double>>();
    r.scores = Eigen::Map<const Eigen::VectorXd>(scores.data(),
                                                 static_cast<Eigen::Index>(scores.size()));
    r.order = j.at("order").get<std::vector<int>>();
    r.method = j.value("method", "unknown");
  } catch (const std::exception& e) {
    throw InvalidInput("ranking JSON " + path + " missing fields: " + e.what());
  }
  if (r.order.size() != static_cast<size_t>(r.scores.size()))
    throw InvalidInput("ranking JSON " + path + ": order/scores size mismatch");
  return r;
}

Json experiment_to_json(const ExperimentResult& result) {
  Json j;
  j["config"] = Json{{"alpha", result.alpha},
                     {"split_frac", result.split_frac},
                     {"repeats", result.repeats},
                     {"stratified", result.stratified},
                     {"master_seed", result.master_seed},
                     {"methods", result.methods},
                     {"q_grid", result.q_grid},
                     {"occa_solver", result.occa_solver}};
  j["split_seeds"] = result.split_seeds;

  Json records = Json::array();
  for (const auto& rec : result.records)
    records.push_back(Json{{"method", rec.method},
                           {"q", rec.q},
                           {"repeat", rec.repeat},
                           {"accuracy", rec.accuracy}});
  j["records"] = records;

  Json aggregates = Json::array();
  for (const auto& agg : result.aggregates)
    aggregates.push_back(Json{{"method", agg.method},
                              {"q", agg.q},
                              {"mean", agg.mean},
                              {"std", agg.stddev}});
  j["aggregates"] = aggregates;

  Json solves = Json::array();
  for (const auto& cm : result.cell_metadata)
    solves.push_back(Json{{"method", cm.method},
                          {"repeat", cm.repeat},
                          {"objective", cm.meta.objective},
                          {"kkt_residual", cm.meta.kkt_residual},
                          {"iterations", cm.meta.iterations},
                          {"termination", cm.meta.termination}});
  j["solves"] = solves;

  Json timing;
  timing["total_seconds"] = result.total_seconds;
  Json cell_seconds = Json::array();
  for (const auto& cm : result.cell_metadata)
    cell_seconds.push_back(Json{{"method", cm.method},
                                {"repeat", cm.repeat},
                                {"wall_seconds", cm.meta.wall_seconds}});
  timing["cells"] = cell_seconds;
  j["timing"] = timing;
  return j;
}

void write_experiment_json(const std::string& path, const ExperimentResult& result) {
  auto out = open_out(path);
  out << experiment_to_json(result).dump(2) << "\n";
}

void write_experiment_csv(const std::string& path, const ExperimentResult& result) {
  auto out = open_out(path);
  out << "method,q,repeat,accuracy\n";
  out << std::setprecision(17);
  for (const auto& rec : result.records)
    out << rec.method << "," << rec.q << "," << rec.repeat << "," << rec.accuracy << "\n";
}

void write_trace_csv(const std::string& path, const SolverTrace& trace) {
  auto out = open_out(path);
  out << "iter,objective,kkt_residual,seconds\n";
  out << std::setprecision(17);
  for (const auto& e : trace.entries)
    out << e.iter << "," << e.objective << "," << e.kkt_residual << "," << e.seconds << "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

}  // namespace occafs
