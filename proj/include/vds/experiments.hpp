#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vds/coherence.hpp"
#include "vds/legendre_adaptive.hpp"
#include "vds/signals.hpp"
#include "vds/solvers.hpp"

namespace vds {

enum class ExperimentKind { coherence_report, strategy_compare_1d, lines_2d, adapt_legendre, phase_curve };
std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);  // ConfigError

// Exactly one field is used, checked against the experiment kind.
struct SparsitySpec {
  std::optional<std::size_t> s;                                  // uniform random support
  std::optional<std::vector<std::size_t>> levels;                // s_j per Haar level
  std::optional<std::vector<double>> band_percentages;           // macro-band profile, coarse to fine
  std::optional<std::vector<std::vector<std::size_t>>> levels_2d;  // [row level][column level] cell counts
};

struct AdaptConfig {
  std::size_t s = 5;
  std::size_t m1 = 10;
  std::size_t K = 5;
  std::string grid = "gauss";  // "gauss" or "uniform"
  std::size_t grid_points = 0;
  std::vector<std::string> strategies{"adapt_i", "adapt_ii", "unif_continuous", "unif_rows", "chebyshev"};
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::strategy_compare_1d;
  std::size_t n = 64;
  SparsitySpec sparsity;
  std::size_t m = 0;
  std::vector<std::size_t> m_grid;
  double epsilon = 0.1;
  double eta = 0.0;
  // Relative noise: ||noise||_2 = noise_level * ||A x||_2; eta is then raised
  // to at least ||noise||_2.
  double noise_level = 0.0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> pi_modes;
  std::vector<double> exponents{0.5, 1.0};
  std::string setting = "isolated_1d";  // phase_curve: "isolated_1d" or "lines_2d"
  std::optional<std::size_t> saturate_levels;
  SignModel sign_model = SignModel::rademacher;
  MagnitudeLaw magnitude_law = MagnitudeLaw::constant;
  bool condition_report = true;
  SolverOptions solver;
  AdaptConfig adapt;
  std::size_t threads = 0;
  std::string output = "out";
};

// Validates and fills defaults; throws ConfigError with the offending key.
ExperimentConfig parse_config(const nlohmann::json& j);
// Canonical echo including defaults (stable key order).
nlohmann::json config_to_json(const ExperimentConfig& c);

struct ConditionMargins {
  double theta_noiseless = 0.0;
  double theta_noisy = 0.0;
  double oracle = 0.0;
  double lambda_gamma = 0.0;
  double lambda_m = 0.0;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::string mode;
  std::size_t m = 0;
  double psnr = 0.0;
  double l2_error = 0.0;
  bool recovered = false;
  std::size_t iterations = 0;
  bool converged = false;
  // Coherence of (S, pi) and the condition margins at this m; NaN when the
  // experiment does not compute them.
  double theta = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  ConditionMargins margins;
};

// Field-wise equality with NaN == NaN, so parsed tables compare equal.
bool operator==(const TrialRecord& a, const TrialRecord& b);

struct PhasePoint {
  std::string mode;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  ConditionMargins mean_margins;
};

struct TraceRow {
  std::size_t trial = 0;
  std::string variant;
  std::size_t k = 0;
  double dist_to_cheb = 0.0;
  double l2_error = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialRecord> records;
  std::vector<PhasePoint> phase;    // phase_curve only
  std::vector<TraceRow> traces;     // adapt_legendre only
  std::size_t solver_failures = 0;  // solves that did not meet the KKT tolerance
  std::size_t solves = 0;
  nlohmann::json details;           // experiment-specific extras, written to details.json

  double failure_rate() const { return solves ? static_cast<double>(solver_failures) / static_cast<double>(solves) : 0.0; }
};

// 10 log10(n ||x||_inf^2 / ||x - x_hat||_2^2); +inf when the error vanishes.
double psnr(const ComplexVector& x, const ComplexVector& x_hat);
// ||x - x_hat||_2 < 1e-4 ||x||_2 (x = 0 requires x_hat = 0).
bool exactly_recovered(const ComplexVector& x, const ComplexVector& x_hat);

ConditionMargins margins_of(const ConditionCheck& check);

// Macro-band profile: the last (B-1) Haar levels form one band each and the
// remaining coarse levels form the first band; B = percentages.size().
std::vector<IndexSet> macro_bands(const SubbandPartition& wavelet, std::size_t bands);
IndexSet support_from_profile(const SubbandPartition& wavelet, const std::vector<double>& percentages,
                              std::uint64_t seed);

ExperimentResult run_coherence_report(const ExperimentConfig& config);
ExperimentResult run_strategy_compare_1d(const ExperimentConfig& config);
ExperimentResult run_lines_2d(const ExperimentConfig& config);
ExperimentResult run_phase_curve(const ExperimentConfig& config);
ExperimentResult run_adapt_experiment(const ExperimentConfig& config);
// Designed distributions for every configured mode on trial 0's support,
// written to details["designs"]; one record per mode (no recovery).
ExperimentResult run_design(const ExperimentConfig& config);
// One isolated 1D recovery per mode on trial 0, keeping x, y and x_hat in
// details["instances"].
ExperimentResult run_recover(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

// Median over the records of one mode; NaN when the mode has no records.
double median_psnr(const std::vector<TrialRecord>& records, const std::string& mode);
double median_l2_error(const std::vector<TrialRecord>& records, const std::string& mode);

inline constexpr const char* kCsvVersion = "1";

// Writes records.csv (plus phase.csv / trace.csv when present) and
// manifest.json into `dir`. Returns the manifest.
nlohmann::json emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace vds
