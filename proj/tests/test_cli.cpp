#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drivebench/cli.hpp"
#include "drivebench/fixtures.hpp"

using namespace drivebench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("drivebench_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST(Cli, RunWritesOneRowPerEpisodePlusSummary) {
  const fs::path dir = scratch("run");
  const fs::path sc = dir / "straight.json";
  fs::create_directories(dir);
  const auto suite = fixture_suite();
  write_scenario_file(sc.string(), suite[0]);

  cli::RunConfig cfg;
  cfg.scenarios = {sc.string()};
  cfg.seeds = {0, 1, 2};
  cfg.evals = 3;
  cfg.out_dir = (dir / "out").string();
  const auto report = cli::cmd_run(cfg);
  EXPECT_EQ(report.runs.size(), 9u);
  EXPECT_EQ(report.num_seeds, 3u);
  const std::string csv = slurp(dir / "out" / "report.csv");
  // comment, header, 9 runs, mean, std
  EXPECT_EQ(count_lines(csv), 13u);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
  fs::remove_all(dir);
}

TEST(Cli, RunIsByteIdenticalAcrossJobCounts) {
  const fs::path dir = scratch("jobs");
  cli::RunConfig cfg;
  cfg.scenarios = {"uncertainty"};
  cfg.policy = "uncertain";
  cfg.seeds = {0, 1};
  cfg.out_dir = (dir / "a").string();
  cfg.jobs = 1;
  cli::cmd_run(cfg);
  cfg.out_dir = (dir / "b").string();
  cfg.jobs = 4;
  cli::cmd_run(cfg);
  EXPECT_EQ(slurp(dir / "a" / "report.csv"), slurp(dir / "b" / "report.csv"));
  fs::remove_all(dir);
}

TEST(Cli, UnknownNamesAreConfigErrors) {
  cli::RunConfig cfg;
  cfg.out_dir = scratch("bad").string();
  cfg.policy = "transfuser";
  EXPECT_THROW(cli::cmd_run(cfg), cli::ConfigError);
  cfg.policy = "uncertain";
  cfg.controller = "mpc";
  EXPECT_THROW(cli::make_agent_factory(cfg), cli::ConfigError);
  EXPECT_THROW(cli::load_scenarios({"no_such_suite"}), cli::ConfigError);
  EXPECT_THROW(cli::load_scenarios({}), cli::ConfigError);
  EXPECT_THROW(cli::parse_ablation("dropout"), cli::ConfigError);
  cfg = {};
  cfg.seeds = {};
  EXPECT_THROW(cli::cmd_run(cfg), cli::ConfigError);
}

TEST(Cli, SuiteNamesResolve) {
  EXPECT_EQ(cli::load_scenarios({"fixtures"}).size(), fixture_suite().size());
  EXPECT_EQ(cli::load_scenarios({"corner_far", "corner_near", "urban_loop"}).size(), 3u);
  for (const char* p : {"expert", "expert_waypoints", "expert_path", "shortcut", "nc", "uncertain"}) {
    cli::RunConfig cfg;
    cfg.policy = p;
    EXPECT_NO_THROW(cli::make_agent_factory(cfg)) << p;
  }
}

TEST(Cli, AblationNamesRoundTrip) {
  for (auto a : {cli::Ablation::conditioning, cli::Ablation::argmax_vs_weighted, cli::Ablation::brake_threshold,
                 cli::Ablation::stop_buffer}) {
    EXPECT_EQ(cli::parse_ablation(cli::to_string(a)), a);
  }
}

TEST(Cli, EnvSeeds) {
  unsetenv("DRIVEBENCH_SEED");
  EXPECT_EQ(cli::env_seeds({4, 5}), (std::vector<int>{4, 5}));
  setenv("DRIVEBENCH_SEED", "17", 1);
  EXPECT_EQ(cli::env_seeds({0}), (std::vector<int>{17}));
  setenv("DRIVEBENCH_SEED", "17x", 1);
  EXPECT_THROW(cli::env_seeds({0}), cli::ConfigError);
  unsetenv("DRIVEBENCH_SEED");
}

TEST(Cli, UkfParamsJsonRoundTrip) {
  UkfParams p = UkfParams::tuned(0.4);
  p.alpha = 0.3;
  const UkfParams q = cli::ukf_params_from_json(cli::ukf_params_json(p));
  EXPECT_EQ(q.alpha, 0.3);
  EXPECT_EQ(q.Q, p.Q);
  EXPECT_EQ(q.R, p.R);
  EXPECT_THROW(cli::ukf_params_from_json("{\"alpha\": 1}"), cli::ConfigError);
}

TEST(Cli, FixturesExportReloads) {
  const fs::path dir = scratch("fixtures");
  const std::size_t n = cli::cmd_fixtures(dir.string());
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    EXPECT_NO_THROW(read_scenario_file(e.path().string())) << e.path();
    ++files;
  }
  EXPECT_EQ(files, n);
  fs::remove_all(dir);
}

TEST(Cli, DatagenWritesDatasetAndScorecards) {
  const fs::path dir = scratch("datagen");
  const fs::path sc = dir / "s.json";
  fs::create_directories(dir);
  write_scenario_file(sc.string(), fixture_suite()[0]);
  cli::DatagenConfig cfg;
  cfg.scenarios = {sc.string()};
  cfg.out_dir = dir.string();
  const auto out = cli::cmd_datagen(cfg);
  const auto back = read_dataset_file((dir / "dataset.jsonl").string());
  EXPECT_EQ(back, out.records);
  EXPECT_TRUE(fs::exists(dir / "scorecards.csv"));
  fs::remove_all(dir);
}
