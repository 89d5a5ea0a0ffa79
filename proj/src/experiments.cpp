#include "drivebench/experiments.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "drivebench/fixtures.hpp"

namespace drivebench {

std::vector<int> seed_range(int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) out.push_back(i);
  return out;
}

double binomial_upper_tail(int k, int n) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  double tail = 0.0;
  for (int i = k; i <= n; ++i) {
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  }
  return std::min(1.0, tail);
}

namespace {

double count_of(const EpisodeResult& r, InfractionKind kind) {
  double n = 0.0;
  for (const auto& e : r.events) n += e.kind == kind ? 1.0 : 0.0;
  return n;
}

AgentFactory uncertain_agent(ControllerConfig cc) {
  return [cc](const Scenario& sc, std::uint64_t seed) -> std::unique_ptr<Agent> {
    return std::make_unique<PolicyAgent>(std::make_unique<UncertainSpeedPolicy>(sc.ambiguity, seed),
                                         Conditioning::Kind::tp, cc);
  };
}

}  // namespace

ConditioningAblation run_conditioning_ablation(const std::vector<int>& seeds, int jobs) {
  const auto suite = deviation_suite();
  ConditioningAblation out;
  out.shortcut = aggregate(run_benchmark(
      suite,
      [](const Scenario&, std::uint64_t) -> std::unique_ptr<Agent> {
        return std::make_unique<PolicyAgent>(std::make_unique<ShortcutPolicy>(), Conditioning::Kind::tp);
      },
      seeds, 1, jobs));
  out.nc = aggregate(run_benchmark(
      suite,
      [](const Scenario&, std::uint64_t) -> std::unique_ptr<Agent> {
        return std::make_unique<PolicyAgent>(std::make_unique<NcPolicy>(), Conditioning::Kind::nc);
      },
      seeds, 1, jobs));
  return out;
}

TurnCutResult run_turn_cut(const std::vector<int>& seeds) {
  TurnCutResult out;
  out.seeds = static_cast<int>(seeds.size());
  for (bool far : {true, false}) {
    const Scenario sc = corner_scenario(far);
    const double boundary = 0.5 * sc.map->lane_width;
    for (int seed : seeds) {
      PolicyAgent agent(std::make_unique<ShortcutPolicy>(), Conditioning::Kind::tp);
      const EpisodeOutcome o = run_episode(sc, agent, episode_seed(seed, 0));
      if (o.max_lateral > boundary) ++(far ? out.far_tp_crossings : out.near_tp_crossings);
    }
  }
  return out;
}

OutputAblation run_output_ablation(const std::vector<int>& seeds, int jobs) {
  const auto suite = uncertainty_suite();
  ControllerConfig weighted;
  ControllerConfig argmax;
  argmax.argmax = true;
  OutputAblation out;
  out.weighted = aggregate(run_benchmark(suite, uncertain_agent(weighted), seeds, 1, jobs));
  out.argmax = aggregate(run_benchmark(suite, uncertain_agent(argmax), seeds, 1, jobs));

  std::map<int, double> veh_w;
  std::map<int, double> veh_a;
  for (const auto& r : out.weighted.runs) veh_w[r.seed] += count_of(r.result, InfractionKind::collision_vehicle);
  for (const auto& r : out.argmax.runs) veh_a[r.seed] += count_of(r.result, InfractionKind::collision_vehicle);
  for (int seed : seeds) {
    if (veh_a[seed] > veh_w[seed]) ++out.seeds_argmax_worse;
    if (veh_a[seed] < veh_w[seed]) ++out.seeds_weighted_worse;
  }
  out.sign_test_p = binomial_upper_tail(out.seeds_argmax_worse, out.seeds_argmax_worse + out.seeds_weighted_worse);
  return out;
}

std::vector<ThresholdPoint> run_brake_threshold_sweep(const std::vector<double>& thresholds,
                                                      const std::vector<int>& seeds, int jobs) {
  const auto suite = uncertainty_suite();
  std::vector<ThresholdPoint> out;
  for (double t : thresholds) {
    ControllerConfig cc;
    cc.brake_threshold = t;
    out.push_back({t, aggregate(run_benchmark(suite, uncertain_agent(cc), seeds, 1, jobs))});
  }
  return out;
}

StopBufferAblation run_stop_buffer_ablation(const std::vector<int>& seeds, int jobs) {
  const auto suite = occlusion_suite();
  auto factory = [](bool buffer) -> AgentFactory {
    return [buffer](const Scenario&, std::uint64_t) -> std::unique_ptr<Agent> {
      ExpertConfig perception;
      perception.occluded_stop_signs = true;
      ControllerConfig cc;
      cc.inference_speed_offset = 0.0;
      return std::make_unique<PolicyAgent>(std::make_unique<ExpertPolicy>(Representation::path, perception),
                                           Conditioning::Kind::tp, cc, buffer, perception);
    };
  };
  StopBufferAblation out;
  out.without_buffer = aggregate(run_benchmark(suite, factory(false), seeds, 1, jobs));
  out.with_buffer = aggregate(run_benchmark(suite, factory(true), seeds, 1, jobs));
  return out;
}

namespace {

class RecordingAgent : public Agent {
 public:
  ControlCommand act(const WorldState& world) override {
    const ControlCommand c = inner_.act(world);
    commands.push_back(c);
    return c;
  }
  std::vector<ControlCommand> commands;

 private:
  ExpertAgent inner_;
};

}  // namespace

std::vector<FilterSample> ukf_fixture(std::uint64_t seed, double gnss_sigma, double duration) {
  const Scenario sc = urban_loop();
  RecordingAgent agent;
  EpisodeOptions opts;
  opts.observer = [duration](const WorldState& w) { return w.time < duration - 1e-9; };
  run_episode(sc, agent, seed, opts);

  const double dt = sc.sim.dt;
  const BicycleParams car = BicycleParams::car();
  Rng rng = make_rng(seed, 0x756b66);
  std::normal_distribution<double> steer_noise(0.0, 0.002);
  std::normal_distribution<double> throttle_noise(0.0, 0.02);

  VehicleState truth;
  const Vec2 start = sc.route->path.point_at(0.0);
  truth.pose = {start.x, start.y, sc.route->path.heading_at(0.0)};
  std::vector<FilterSample> out;
  out.push_back({0.0, {}, gnss_sample(truth.pose.position(), gnss_sigma, rng), truth});
  for (std::size_t i = 0; i < agent.commands.size(); ++i) {
    const ControlCommand& cmd = agent.commands[i];
    ControlCommand actual = cmd;
    actual.steer = std::clamp(cmd.steer + steer_noise(rng), -1.0, 1.0);
    if (!cmd.brake) actual.throttle = std::clamp(cmd.throttle + throttle_noise(rng), 0.0, 1.0);
    truth = step_bicycle(truth, actual, car, dt);
    out.push_back({static_cast<double>(i + 1) * dt, cmd, gnss_sample(truth.pose.position(), gnss_sigma, rng), truth});
  }
  return out;
}

UkfEvaluation evaluate_ukf(const UkfParams& params, const std::vector<int>& seeds, double gnss_sigma) {
  UkfEvaluation ev;
  for (int seed : seeds) {
    const auto samples = ukf_fixture(static_cast<std::uint64_t>(seed), gnss_sigma);
    const FilterRun run = run_filter(samples, 0.05, params);
    ev.raw.push_back(run.raw_error_mean);
    ev.filtered.push_back(run.filtered_error_mean);
  }
  for (std::size_t i = 0; i < ev.raw.size(); ++i) {
    ev.raw_mean += ev.raw[i] / static_cast<double>(ev.raw.size());
    ev.filtered_mean += ev.filtered[i] / static_cast<double>(ev.filtered.size());
  }
  return ev;
}

UkfTuning tune_ukf(const std::vector<int>& seeds, double gnss_sigma) {
  std::vector<std::vector<FilterSample>> data;
  for (int seed : seeds) data.push_back(ukf_fixture(static_cast<std::uint64_t>(seed), gnss_sigma));
  UkfTuning best;
  best.best_error = std::numeric_limits<double>::infinity();
  for (double qp : {1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
    for (double qyaw : {1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
      for (double qv : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
        UkfParams p = UkfParams::tuned(gnss_sigma);
        p.Q.diagonal() << qp, qp, qyaw, qv;
        double err = 0.0;
        for (const auto& d : data) err += run_filter(d, 0.05, p, false).filtered_error_mean;
        err /= static_cast<double>(data.size());
        if (err < best.best_error) {
          best.best_error = err;
          best.best = p;
        }
      }
    }
  }
  return best;
}

DatagenOutput generate_dataset(const std::vector<Scenario>& scenarios, const std::vector<int>& seeds,
                               const AugmentationConfig& aug) {
  DatagenOutput out;
  EpisodeOptions opts;
  opts.record_rollout = true;
  for (const auto& sc : scenarios) {
    for (int seed : seeds) {
      const std::uint64_t es = episode_seed(seed, 0);
      ExpertAgent agent;
      EpisodeOutcome o = run_episode(sc, agent, es, opts);
      out.episodes.push_back({sc.name, o.result, record_episode(o.rollout, sc.name)});
    }
  }
  std::uint64_t stream = 0;
  for (const auto& ep : filter_routes(out.episodes)) {
    Rng rng = make_rng(stream++, 0x617567);
    for (const auto& frame : ep.frames) {
      out.records.push_back(frame);
      out.records.push_back(augment_frame(frame, aug, rng));
    }
  }
  return out;
}

std::string comparison_table(const std::vector<std::pair<std::string, const BenchmarkReport*>>& rows) {
  std::ostringstream os;
  std::size_t width = 8;
  for (const auto& [label, _] : rows) width = std::max(width, label.size() + 2);
  os << std::left << std::setw(static_cast<int>(width)) << "config";
  for (const char* c : kReportColumns) os << std::right << std::setw(8) << c;
  os << '\n' << std::fixed;
  for (const auto& [label, rep] : rows) {
    const MetricSummary& m = rep->mean;
    os << std::left << std::setw(static_cast<int>(width)) << label << std::right << std::setprecision(2)
       << std::setw(8) << m.ds << std::setw(8) << m.rc << std::setw(8) << m.is;
    for (double r : m.per_km) os << std::setw(8) << r;
    os << '\n';
  }
  return os.str();
}

}  // namespace drivebench
