#include <iostream>

#include <CLI11.hpp>

#include "drivebench/cli.hpp"

using namespace drivebench;

namespace {

void add_seeds(CLI::App* cmd, std::vector<int>& seeds) {
  cmd->add_option("--seeds", seeds, "seed list; falls back to DRIVEBENCH_SEED, then 0");
}

std::vector<int> resolve(const std::vector<int>& seeds) { return seeds.empty() ? cli::env_seeds({0}) : seeds; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drivebench: 2D closed-loop driving benchmark"};
  app.require_subcommand(1);

  cli::RunConfig run;
  std::vector<int> run_seeds;
  std::string preset = "validation";
  double brake_threshold = -1.0;
  auto* run_cmd = app.add_subcommand("run", "run a policy on scenarios and write report.csv / report.json");
  run_cmd->add_option("--scenario", run.scenarios, "scenario JSON files or suites")->capture_default_str();
  run_cmd->add_option("--policy", run.policy, "expert, expert_waypoints, expert_path, shortcut, nc, uncertain")
      ->capture_default_str();
  run_cmd->add_option("--controller", run.controller, "weighted or argmax")->capture_default_str();
  run_cmd->add_option("--preset", preset, "validation or dense")
      ->check(CLI::IsMember({"validation", "dense"}))
      ->capture_default_str();
  run_cmd->add_option("--brake-threshold", brake_threshold, "overrides the preset threshold");
  run_cmd->add_flag("--stop-buffer", run.stop_buffer, "enable the stop-sign buffer");
  run_cmd->add_flag("--occluded-signs", run.occluded_signs, "hide stop signs once the ego is on them");
  add_seeds(run_cmd, run_seeds);
  run_cmd->add_option("--evals", run.evals, "evaluations per seed")->capture_default_str();
  run_cmd->add_option("--jobs", run.jobs, "parallel episodes")->capture_default_str();
  run_cmd->add_option("--out", run.out_dir, "output directory")->capture_default_str();

  std::string which;
  std::vector<int> ablate_seeds;
  int ablate_jobs = 1;
  std::string ablate_out = "out";
  auto* ablate_cmd = app.add_subcommand("ablate", "paired ablation with a side-by-side table");
  ablate_cmd->add_option("which", which, "conditioning, argmax_vs_weighted, brake_threshold, stop_buffer")->required();
  add_seeds(ablate_cmd, ablate_seeds);
  ablate_cmd->add_option("--jobs", ablate_jobs)->capture_default_str();
  ablate_cmd->add_option("--out", ablate_out)->capture_default_str();

  cli::DatagenConfig gen;
  std::vector<int> gen_seeds;
  auto* gen_cmd = app.add_subcommand("datagen", "expert rollouts to a JSON-lines dataset");
  gen_cmd->add_option("--scenario", gen.scenarios)->capture_default_str();
  add_seeds(gen_cmd, gen_seeds);
  gen_cmd->add_option("--shift-range", gen.aug.shift_range)->capture_default_str();
  gen_cmd->add_option("--out", gen.out_dir)->capture_default_str();

  cli::UkfEvalConfig ukf;
  std::vector<int> ukf_seeds;
  std::string params_file;
  auto* ukf_cmd = app.add_subcommand("ukf-eval", "raw vs filtered localization error");
  add_seeds(ukf_cmd, ukf_seeds);
  ukf_cmd->add_option("--sigma", ukf.gnss_sigma, "GNSS noise per axis (m)")->capture_default_str();
  ukf_cmd->add_option("--params", params_file, "parameter file from ukf-tune");
  ukf_cmd->add_option("--out", ukf.out_dir)->capture_default_str();

  std::vector<int> tune_seeds;
  double tune_sigma = 0.5585;
  std::string tune_out = "out";
  auto* tune_cmd = app.add_subcommand("ukf-tune", "grid search over the process noise");
  add_seeds(tune_cmd, tune_seeds);
  tune_cmd->add_option("--sigma", tune_sigma)->capture_default_str();
  tune_cmd->add_option("--out", tune_out)->capture_default_str();

  std::string fixtures_out = "scenarios";
  auto* fix_cmd = app.add_subcommand("fixtures", "write the built-in scenarios as JSON");
  fix_cmd->add_option("--out", fixtures_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      run.seeds = resolve(run_seeds);
      if (preset == "dense") run.controller_config = ControllerConfig::dense();
      if (brake_threshold >= 0.0) run.controller_config.brake_threshold = brake_threshold;
      const auto report = cli::cmd_run(run);
      std::cout << comparison_table({{run.policy, &report}});
    } else if (*ablate_cmd) {
      std::cout << cli::cmd_ablate(cli::parse_ablation(which), resolve(ablate_seeds), ablate_jobs, ablate_out);
    } else if (*gen_cmd) {
      gen.seeds = resolve(gen_seeds);
      const auto out = cli::cmd_datagen(gen);
      std::cout << out.episodes.size() << " episodes, " << out.records.size() << " records\n";
    } else if (*ukf_cmd) {
      ukf.seeds = resolve(ukf_seeds);
      if (!params_file.empty()) ukf.params_file = params_file;
      const auto ev = cli::cmd_ukf_eval(ukf);
      std::cout << "raw " << ev.raw_mean << " m, filtered " << ev.filtered_mean << " m\n";
    } else if (*tune_cmd) {
      const auto t = cli::cmd_ukf_tune(resolve(tune_seeds), tune_sigma, tune_out);
      std::cout << "best filtered error " << t.best_error << " m\n";
    } else if (*fix_cmd) {
      std::cout << cli::cmd_fixtures(fixtures_out) << " scenario files\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
