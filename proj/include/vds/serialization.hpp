#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "vds/coherence.hpp"
#include "vds/distribution.hpp"
#include "vds/experiments.hpp"
#include "vds/legendre_adaptive.hpp"
#include "vds/signals.hpp"
#include "vds/solvers.hpp"

namespace vds {

// Shortest text that parses back to the same double; "inf", "-inf", "nan".
std::string format_double(double v);
double parse_double(const std::string& s);

// SHA-1 of "blob <size>\0<content>", hex encoded (the git object id).
std::string git_blob_sha1(const std::string& content);

nlohmann::json to_json(const ProbabilityDistribution& pi);
ProbabilityDistribution distribution_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ComplexVector& v);  // [[re, im], ...]
ComplexVector complex_vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SignalInstance& s);
SignalInstance signal_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SolverResult& r);
nlohmann::json to_json(const CoherenceReport& r);
nlohmann::json to_json(const ConditionCheck& c);

// Columns: trial,draw_index,block_id; one list of draws per trial.
std::string drawn_ids_csv(const std::vector<std::vector<std::size_t>>& draws_per_trial);

// Columns: k,dist_to_cheb,l2_error (k starts at 1).
std::string trace_csv(const MeasureTrace& trace);
nlohmann::json measures_to_json(const MeasureTrace& trace);

std::vector<std::string> record_columns();
std::string records_to_csv(const std::vector<TrialRecord>& records);
// Throws ConfigError on a malformed table.
std::vector<TrialRecord> records_from_csv(const std::string& text);

std::string phase_to_csv(const std::vector<PhasePoint>& points);
std::string traces_to_csv(const std::vector<TraceRow>& rows);

}  // namespace vds
