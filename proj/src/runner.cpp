#include "drivebench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace drivebench {

PolicyAgent::PolicyAgent(std::unique_ptr<Policy> policy, Conditioning::Kind conditioning, ControllerConfig cfg,
                         bool stop_buffer, ExpertConfig perception)
    : policy_(std::move(policy)),
      conditioning_(conditioning),
      waypoint_(cfg),
      path_(cfg),
      use_buffer_(stop_buffer),
      perception_(perception) {}

std::vector<OrientedBox> detect_stop_signs(const WorldState& world, const ExpertConfig& perception) {
  std::vector<OrientedBox> out;
  const Pose2D& pose = world.ego.state.pose;
  for (const StopSign* sign : perceived_stop_signs(world, perception)) {
    OrientedBox b = polygon_box(sign->trigger_area);
    b.center = global_to_local(pose, b.center);
    b.yaw = wrap_angle(b.yaw - pose.yaw);
    out.push_back(b);
  }
  return out;
}

ControlCommand PolicyAgent::act(const WorldState& world) {
  const Conditioning cond = make_conditioning(world, conditioning_);
  const PolicyOutput out = policy_->act(world, cond);
  const VehicleState& state = world.ego.state;
  const double dt = world.config.dt;
  ControlCommand cmd;
  if (const auto* wp = std::get_if<WaypointPlan>(&out.plan)) {
    cmd = waypoint_.step(*wp, state, dt);
  } else {
    const auto& ps = std::get<PathSpeedPlan>(out.plan);
    cmd = path_.step(ps.path, ps.speed, state, dt);
  }
  buffer_braked_ = false;
  if (use_buffer_) {
    const Pose2D motion = previous_pose_ ? relative_pose(*previous_pose_, state.pose) : Pose2D{};
    buffer_braked_ = stop_sign_buffer_step(buffer_, detect_stop_signs(world, perception_), motion, state.speed);
    if (buffer_braked_) {
      cmd.throttle = 0.0;
      cmd.brake = true;
    }
  }
  previous_pose_ = state.pose;
  return cmd;
}

EpisodeOutcome run_episode(const Scenario& scenario, Agent& agent, std::uint64_t seed, const EpisodeOptions& options) {
  WorldState world = make_world(scenario, seed);
  const Route& route = *world.route;
  DetectorConfig dc = options.detector;
  if (dc.time_budget <= 0.0) {
    dc.time_budget =
        scenario.sim.max_episode_time > 0.0 ? scenario.sim.max_episode_time : route_time_budget(route.length());
  }
  InfractionDetector detector(dc);
  EpisodeOutcome out;
  std::vector<InfractionEvent> infractions;
  bool completed = false;

  while (true) {
    const ControlCommand cmd = agent.act(world);
    if (options.record_rollout) {
      RolloutTick rt;
      rt.time = world.time;
      rt.ego = world.ego.state;
      rt.route_s = world.progress.s;
      rt.tp_global = next_target_point(route, world.progress.s);
      rt.nc = nav_command_for(route, world.progress.s);
      const auto path = route.path.chord_walk(world.progress.s, kNumPathPoints, kPathSpacing);
      std::copy_n(path.begin(), kNumPathPoints, rt.path_global.begin());
      rt.speed_class = static_cast<int>(agent.speed_class().value_or(0));
      out.rollout.push_back(rt);
    }

    TickRecord rec;
    rec.events = tick(world, cmd);
    rec.tick = world.tick;
    rec.time = world.time;
    rec.ego = world.ego.state;
    rec.progress = world.progress;
    const auto found = detector.observe(rec);
    infractions.insert(infractions.end(), found.begin(), found.end());
    out.max_lateral = std::max(out.max_lateral, world.progress.lateral);
    out.min_lateral = std::min(out.min_lateral, world.progress.lateral);
    if (options.keep_history) out.history.push_back(std::move(rec));

    if (detector.terminated()) break;
    if (world.progress.s >= route.length() - options.completion_tolerance) {
      completed = true;
      break;
    }
    if (options.observer && !options.observer(world)) break;
  }

  out.result = score_episode(world.progress.completed_fraction, completed, std::move(infractions),
                             world.progress.s / 1000.0, world.time, detector.terminal(), options.penalties);
  return out;
}

std::uint64_t episode_seed(int seed, int eval) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(seed)) << 16) ^ static_cast<std::uint64_t>(eval);
}

std::vector<RunRecord> run_benchmark(const std::vector<Scenario>& scenarios, const AgentFactory& factory,
                                     const std::vector<int>& seeds, int evals, int jobs,
                                     const EpisodeOptions& options) {
  struct Task {
    std::size_t scenario;
    int seed;
    int eval;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    for (int seed : seeds) {
      for (int e = 0; e < evals; ++e) tasks.push_back({i, seed, e});
    }
  }
  std::vector<RunRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const Task& t = tasks[k];
      try {
        const Scenario& sc = scenarios[t.scenario];
        const std::uint64_t es = episode_seed(t.seed, t.eval);
        auto agent = factory(sc, es);
        EpisodeOptions opts = options;
        opts.keep_history = false;
        opts.record_rollout = false;
        out[k] = {sc.name, t.seed, t.eval, run_episode(sc, *agent, es, opts).result};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks.size());
      }
    }
  };

  const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, tasks.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace drivebench
