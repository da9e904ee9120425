#pragma once

#include <json.hpp>
#include <string>

#include "occafs/pipeline.hpp"

namespace occafs {

using Json = nlohmann::ordered_json;

// Timing lives in a separate "timing" block in every JSON document, so
// determinism checks can strip it and diff the rest byte-wise.

Json ranking_to_json(const FeatureRanking& r);
void write_ranking_json(const std::string& path, const FeatureRanking& r,
                        const Json& provenance = Json::object());
FeatureRanking ranking_from_json(const std::string& path);

Json experiment_to_json(const ExperimentResult& result);
void write_experiment_json(const std::string& path, const ExperimentResult& result);
void write_experiment_csv(const std::string& path, const ExperimentResult& result);

// Columns: iter, objective, kkt_residual, seconds.
void write_trace_csv(const std::string& path, const SolverTrace& trace);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace occafs
