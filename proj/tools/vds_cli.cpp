#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "vds/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitOther = 1;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw vds::ConfigError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw vds::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

int run(const std::string& command, const Flags& flags) {
  nlohmann::json j = flags.config.empty() ? nlohmann::json::object() : load_json(flags.config);
  if (!j.is_object()) throw vds::ConfigError("config must be a JSON object");

  // The subcommand picks the experiment; design and recover reuse the 1D schema.
  std::string kind;
  if (command == "coherence") kind = "coherence_report";
  else if (command == "compare1d" || command == "design" || command == "recover") kind = "strategy_compare_1d";
  else if (command == "lines2d") kind = "lines_2d";
  else if (command == "adapt") kind = "adapt_legendre";
  else if (command == "phase") kind = "phase_curve";
  if (j.contains("experiment") && j["experiment"] != kind && command != "design" && command != "recover")
    throw vds::ConfigError("config experiment '" + j["experiment"].dump() + "' does not match subcommand '" +
                           command + "'");
  j["experiment"] = kind;
  if (flags.seed) j["seed"] = *flags.seed;
  if (flags.trials) j["trials"] = *flags.trials;
  if (!flags.out.empty()) j["output"] = flags.out;

  const vds::ExperimentConfig config = vds::parse_config(j);
  vds::ExperimentResult result;
  if (command == "design") result = vds::run_design(config);
  else if (command == "recover") result = vds::run_recover(config);
  else result = vds::run_experiment(config);

  const nlohmann::json manifest = vds::emit_outputs(result, config.output);
  std::cout << manifest["summary"].dump(2) << "\n";
  std::cout << "wrote " << config.output << " (" << result.records.size() << " records, "
            << result.solver_failures << "/" << result.solves << " solver failures)\n";
  return result.failure_rate() > 0.5 ? kExitSolver : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-density sampling experiments for compressed sensing"};
  app.require_subcommand(1);
  Flags flags;
  const char* commands[][2] = {
      {"coherence", "Coherence quantities and recovery conditions for each sampling design"},
      {"design", "Designed sampling distributions for one support"},
      {"recover", "One isolated-row recovery per design"},
      {"compare1d", "Monte Carlo comparison of 1D Fourier-Haar sampling designs"},
      {"lines2d", "Line sampling of 2D Fourier-Haar with level designs"},
      {"adapt", "Adaptive Legendre sampling against nonadaptive baselines"},
      {"phase", "Success rate as a function of the number of measurements"},
  };
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", flags.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--out", flags.out, "Output directory (overrides the config)");
    sub->add_option("--trials", trials, "Number of trials (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) flags.seed = seed;
  if (chosen->count("--trials")) flags.trials = trials;
  try {
    return run(chosen->get_name(), flags);
  } catch (const vds::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
