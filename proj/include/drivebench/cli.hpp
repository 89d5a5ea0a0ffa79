#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drivebench/controllers.hpp"
#include "drivebench/experiments.hpp"
#include "drivebench/scenario.hpp"

namespace drivebench::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Benchmark run configuration.
 *
 * Each entry of `scenarios` is either a scenario JSON file or one of the
 * built-in suites: fixtures, deviation, uncertainty, occlusion, corner_far,
 * corner_near, urban_loop.
 */
struct RunConfig {
  std::vector<std::string> scenarios{"fixtures"};
  std::string policy{"expert"};  ///< expert, expert_waypoints, expert_path, shortcut, nc, uncertain
  std::string controller{"weighted"};  ///< weighted or argmax; used by path + speed outputs
  ControllerConfig controller_config;
  bool stop_buffer{false};
  bool occluded_signs{false};
  std::vector<int> seeds{0};
  int evals{1};
  int jobs{1};
  std::string out_dir{"out"};
};

/// Resolves suite names and files into scenarios. Throws ConfigError for unknown names or missing files.
std::vector<Scenario> load_scenarios(const std::vector<std::string>& entries);

/// Agent factory for a configuration. Throws ConfigError for unknown policy or controller names.
AgentFactory make_agent_factory(const RunConfig& cfg);

/// Validates, runs all episodes and writes report.csv and report.json into out_dir.
BenchmarkReport cmd_run(const RunConfig& cfg);

enum class Ablation { conditioning, argmax_vs_weighted, brake_threshold, stop_buffer };

Ablation parse_ablation(const std::string& name);
const char* to_string(Ablation which);

/// Runs a paired configuration and writes <name>.txt, <name>.csv and <name>.json into out_dir. Returns the table.
std::string cmd_ablate(Ablation which, const std::vector<int>& seeds, int jobs, const std::string& out_dir);

struct DatagenConfig {
  std::vector<std::string> scenarios{"fixtures"};
  std::vector<int> seeds{0};
  AugmentationConfig aug;
  std::string out_dir{"out"};
};

/// Writes dataset.jsonl and scorecards.csv into out_dir.
DatagenOutput cmd_datagen(const DatagenConfig& cfg);

struct UkfEvalConfig {
  std::vector<int> seeds{0};
  double gnss_sigma{0.5585};
  std::optional<std::string> params_file;  ///< JSON written by cmd_ukf_tune
  std::string out_dir{"out"};
};

/// Writes ukf_eval.csv (seed, raw, filtered) into out_dir.
UkfEvaluation cmd_ukf_eval(const UkfEvalConfig& cfg);

/// Grid search; writes ukf_params.json into out_dir.
UkfTuning cmd_ukf_tune(const std::vector<int>& seeds, double gnss_sigma, const std::string& out_dir);

/// Writes every built-in scenario as <name>.json into out_dir. Returns the file count.
std::size_t cmd_fixtures(const std::string& out_dir);

std::string ukf_params_json(const UkfParams& params);
UkfParams ukf_params_from_json(const std::string& text);

/// Seed list from DRIVEBENCH_SEED, or `fallback` when unset. Throws ConfigError when malformed.
std::vector<int> env_seeds(std::vector<int> fallback);

}  // namespace drivebench::cli
