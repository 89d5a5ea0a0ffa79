#include "drivebench/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "drivebench/fixtures.hpp"

namespace drivebench::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os << text;
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::vector<Scenario> builtin(const std::string& name) {
  if (name == "fixtures") return fixture_suite();
  if (name == "deviation") return deviation_suite();
  if (name == "uncertainty") return uncertainty_suite();
  if (name == "occlusion") return occlusion_suite();
  if (name == "corner_far") return {corner_scenario(true)};
  if (name == "corner_near") return {corner_scenario(false)};
  if (name == "urban_loop") return {urban_loop()};
  return {};
}

std::string csv_row(const std::string& label, const MetricSummary& m) {
  std::ostringstream os;
  os << std::setprecision(17) << label << ',' << m.ds << ',' << m.rc << ',' << m.is;
  for (double r : m.per_km) os << ',' << r;
  return os.str();
}

nlohmann::ordered_json summary_json(const MetricSummary& m) {
  nlohmann::ordered_json j;
  j["DS"] = m.ds;
  j["RC"] = m.rc;
  j["IS"] = m.is;
  for (std::size_t k = 0; k < kNumInfractionKinds; ++k) j[column_name(static_cast<InfractionKind>(k))] = m.per_km[k];
  return j;
}

void write_comparison(const fs::path& dir, const std::string& name,
                      const std::vector<std::pair<std::string, const BenchmarkReport*>>& rows,
                      const nlohmann::ordered_json& extra) {
  std::ostringstream csv;
  csv << "config";
  for (const char* c : kReportColumns) csv << ',' << c;
  csv << '\n';
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& [label, rep] : rows) {
    csv << csv_row(label, rep->mean) << '\n';
    nlohmann::ordered_json row;
    row["config"] = label;
    row["mean"] = summary_json(rep->mean);
    row["std"] = summary_json(rep->std);
    j["rows"].push_back(row);
  }
  if (!extra.is_null()) j["extra"] = extra;
  write_text(dir / (name + ".csv"), csv.str());
  write_text(dir / (name + ".json"), j.dump(2) + "\n");
  write_text(dir / (name + ".txt"), comparison_table(rows));
}

}  // namespace

std::vector<Scenario> load_scenarios(const std::vector<std::string>& entries) {
  if (entries.empty()) throw ConfigError("no scenarios given");
  std::vector<Scenario> out;
  for (const auto& e : entries) {
    auto suite = builtin(e);
    if (!suite.empty()) {
      for (auto& sc : suite) out.push_back(std::move(sc));
      continue;
    }
    if (!fs::exists(e)) throw ConfigError("unknown scenario suite or missing file: " + e);
    out.push_back(read_scenario_file(e));
  }
  return out;
}

AgentFactory make_agent_factory(const RunConfig& cfg) {
  ControllerConfig cc = cfg.controller_config;
  if (cfg.controller == "argmax") {
    cc.argmax = true;
  } else if (cfg.controller != "weighted") {
    throw ConfigError("unknown controller: " + cfg.controller);
  }
  ExpertConfig perception;
  perception.occluded_stop_signs = cfg.occluded_signs;
  const bool buffer = cfg.stop_buffer;
  const std::string& p = cfg.policy;

  if (p == "expert") {
    return [perception](const Scenario&, std::uint64_t) -> std::unique_ptr<Agent> {
      return std::make_unique<ExpertAgent>(perception);
    };
  }
  if (p == "expert_waypoints" || p == "expert_path") {
    const Representation rep = p == "expert_path" ? Representation::path : Representation::waypoints;
    return [=](const Scenario&, std::uint64_t) -> std::unique_ptr<Agent> {
      return std::make_unique<PolicyAgent>(std::make_unique<ExpertPolicy>(rep, perception), Conditioning::Kind::tp,
                                           cc, buffer, perception);
    };
  }
  if (p == "shortcut") {
    return [=](const Scenario&, std::uint64_t) -> std::unique_ptr<Agent> {
      return std::make_unique<PolicyAgent>(std::make_unique<ShortcutPolicy>(ShortcutParams{}, perception),
                                           Conditioning::Kind::tp, cc, buffer, perception);
    };
  }
  if (p == "nc") {
    return [=](const Scenario&, std::uint64_t) -> std::unique_ptr<Agent> {
      return std::make_unique<PolicyAgent>(std::make_unique<NcPolicy>(NcParams{}, perception),
                                           Conditioning::Kind::nc, cc, buffer, perception);
    };
  }
  if (p == "uncertain") {
    return [=](const Scenario& sc, std::uint64_t seed) -> std::unique_ptr<Agent> {
      return std::make_unique<PolicyAgent>(std::make_unique<UncertainSpeedPolicy>(sc.ambiguity, seed, perception),
                                           Conditioning::Kind::tp, cc, buffer, perception);
    };
  }
  throw ConfigError("unknown policy: " + p);
}

BenchmarkReport cmd_run(const RunConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  if (cfg.evals < 1) throw ConfigError("evals must be >= 1");
  const auto factory = make_agent_factory(cfg);
  const auto scenarios = load_scenarios(cfg.scenarios);
  const fs::path dir = prepare_out(cfg.out_dir);
  BenchmarkReport report = aggregate(run_benchmark(scenarios, factory, cfg.seeds, cfg.evals, cfg.jobs));
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "report.json", report_json(report) + "\n");
  return report;
}

Ablation parse_ablation(const std::string& name) {
  for (Ablation a : {Ablation::conditioning, Ablation::argmax_vs_weighted, Ablation::brake_threshold,
                     Ablation::stop_buffer}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("unknown ablation: " + name);
}

const char* to_string(Ablation which) {
  switch (which) {
    case Ablation::conditioning: return "conditioning";
    case Ablation::argmax_vs_weighted: return "argmax_vs_weighted";
    case Ablation::brake_threshold: return "brake_threshold";
    case Ablation::stop_buffer: return "stop_buffer";
  }
  return "?";
}

std::string cmd_ablate(Ablation which, const std::vector<int>& seeds, int jobs, const std::string& out_dir) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  const fs::path dir = prepare_out(out_dir);
  const std::string name = to_string(which);
  switch (which) {
    case Ablation::conditioning: {
      const auto r = run_conditioning_ablation(seeds, jobs);
      const std::vector<std::pair<std::string, const BenchmarkReport*>> rows{{"shortcut_policy", &r.shortcut},
                                                                            {"nc_policy", &r.nc}};
      write_comparison(dir, name, rows, nullptr);
      return comparison_table(rows);
    }
    case Ablation::argmax_vs_weighted: {
      const auto r = run_output_ablation(seeds, jobs);
      const std::vector<std::pair<std::string, const BenchmarkReport*>> rows{{"path_weighted", &r.weighted},
                                                                            {"path_argmax", &r.argmax}};
      nlohmann::ordered_json extra;
      extra["seeds_argmax_worse"] = r.seeds_argmax_worse;
      extra["seeds_weighted_worse"] = r.seeds_weighted_worse;
      extra["sign_test_p"] = r.sign_test_p;
      write_comparison(dir, name, rows, extra);
      std::ostringstream os;
      os << comparison_table(rows) << "sign test: argmax worse on " << r.seeds_argmax_worse << " seeds, weighted worse on "
         << r.seeds_weighted_worse << ", p = " << r.sign_test_p << '\n';
      return os.str();
    }
    case Ablation::brake_threshold: {
      const auto points = run_brake_threshold_sweep({0.50, 0.40, 0.33, 0.25}, seeds, jobs);
      std::vector<std::string> labels;
      for (const auto& p : points) {
        std::ostringstream os;
        os << "threshold_" << std::fixed << std::setprecision(2) << p.threshold;
        labels.push_back(os.str());
      }
      std::vector<std::pair<std::string, const BenchmarkReport*>> rows;
      for (std::size_t i = 0; i < points.size(); ++i) rows.emplace_back(labels[i], &points[i].report);
      write_comparison(dir, name, rows, nullptr);
      return comparison_table(rows);
    }
    case Ablation::stop_buffer: {
      const auto r = run_stop_buffer_ablation(seeds, jobs);
      const std::vector<std::pair<std::string, const BenchmarkReport*>> rows{{"without_buffer", &r.without_buffer},
                                                                            {"with_buffer", &r.with_buffer}};
      write_comparison(dir, name, rows, nullptr);
      return comparison_table(rows);
    }
  }
  return {};
}

DatagenOutput cmd_datagen(const DatagenConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  const auto scenarios = load_scenarios(cfg.scenarios);
  const fs::path dir = prepare_out(cfg.out_dir);
  DatagenOutput out = generate_dataset(scenarios, cfg.seeds, cfg.aug);
  write_dataset_file((dir / "dataset.jsonl").string(), out.records);

  std::ostringstream csv;
  csv << std::setprecision(17) << "route,frames,kept";
  for (const char* c : kReportColumns) csv << ',' << c;
  csv << '\n';
  for (const auto& ep : out.episodes) {
    const EpisodeResult& r = ep.result;
    csv << ep.route << ',' << ep.frames.size() << ',' << (r.ds == 100.0 ? 1 : 0) << ',' << r.ds << ',' << r.rc << ','
        << r.is;
    for (double v : r.per_km) csv << ',' << v;
    csv << '\n';
  }
  write_text(dir / "scorecards.csv", csv.str());
  return out;
}

std::string ukf_params_json(const UkfParams& p) {
  nlohmann::ordered_json j;
  j["alpha"] = p.alpha;
  j["beta"] = p.beta;
  j["kappa"] = p.kappa;
  j["Q_diag"] = {p.Q(0, 0), p.Q(1, 1), p.Q(2, 2), p.Q(3, 3)};
  j["R_diag"] = {p.R(0, 0), p.R(1, 1)};
  return j.dump(2) + "\n";
}

UkfParams ukf_params_from_json(const std::string& text) {
  UkfParams p;
  try {
    const auto j = nlohmann::json::parse(text);
    p.alpha = j.at("alpha").get<double>();
    p.beta = j.at("beta").get<double>();
    p.kappa = j.at("kappa").get<double>();
    const auto q = j.at("Q_diag").get<std::vector<double>>();
    const auto r = j.at("R_diag").get<std::vector<double>>();
    if (q.size() != 4 || r.size() != 2) throw ConfigError("Q_diag needs 4 entries and R_diag 2");
    p.Q.setZero();
    p.R.setZero();
    for (int i = 0; i < 4; ++i) p.Q(i, i) = q[static_cast<std::size_t>(i)];
    for (int i = 0; i < 2; ++i) p.R(i, i) = r[static_cast<std::size_t>(i)];
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid UKF parameter file: ") + e.what());
  }
  return p;
}

UkfEvaluation cmd_ukf_eval(const UkfEvalConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  UkfParams params = UkfParams::tuned(cfg.gnss_sigma);
  if (cfg.params_file) {
    std::ifstream is(*cfg.params_file);
    if (!is) throw ConfigError("cannot open " + *cfg.params_file);
    std::stringstream ss;
    ss << is.rdbuf();
    params = ukf_params_from_json(ss.str());
  }
  const fs::path dir = prepare_out(cfg.out_dir);
  UkfEvaluation ev = evaluate_ukf(params, cfg.seeds, cfg.gnss_sigma);
  std::ostringstream csv;
  csv << std::setprecision(17) << "seed,raw_error,filtered_error\n";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    csv << cfg.seeds[i] << ',' << ev.raw[i] << ',' << ev.filtered[i] << '\n';
  }
  csv << "mean," << ev.raw_mean << ',' << ev.filtered_mean << '\n';
  write_text(dir / "ukf_eval.csv", csv.str());
  return ev;
}

UkfTuning cmd_ukf_tune(const std::vector<int>& seeds, double gnss_sigma, const std::string& out_dir) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  const fs::path dir = prepare_out(out_dir);
  UkfTuning t = tune_ukf(seeds, gnss_sigma);
  write_text(dir / "ukf_params.json", ukf_params_json(t.best));
  return t;
}

std::size_t cmd_fixtures(const std::string& out_dir) {
  const fs::path dir = prepare_out(out_dir);
  std::size_t n = 0;
  for (const char* suite : {"fixtures", "deviation", "uncertainty", "occlusion", "corner_far", "corner_near",
                            "urban_loop"}) {
    for (const auto& sc : builtin(suite)) {
      write_scenario_file((dir / (sc.name + ".json")).string(), sc);
      ++n;
    }
  }
  return n;
}

std::vector<int> env_seeds(std::vector<int> fallback) {
  const char* env = std::getenv("DRIVEBENCH_SEED");
  if (!env || !*env) return fallback;
  try {
    std::size_t used = 0;
    const int seed = std::stoi(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return {seed};
  } catch (const std::exception&) {
    throw ConfigError(std::string("DRIVEBENCH_SEED is not an integer: ") + env);
  }
}

}  // namespace drivebench::cli
