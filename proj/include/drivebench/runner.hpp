#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "drivebench/controllers.hpp"
#include "drivebench/datagen.hpp"
#include "drivebench/expert.hpp"
#include "drivebench/metrics.hpp"
#include "drivebench/policies.hpp"
#include "drivebench/scenario.hpp"

namespace drivebench {

/// Closed-loop driver: one command per tick.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual ControlCommand act(const WorldState& world) = 0;
  /// Speed class of the privileged decision at the latest step, when the agent has one.
  virtual std::optional<std::size_t> speed_class() const { return std::nullopt; }
};

class ExpertAgent : public Agent {
 public:
  explicit ExpertAgent(ExpertConfig cfg = {}) : expert_(cfg) {}
  ControlCommand act(const WorldState& world) override { return expert_.act(world, &last_); }
  std::optional<std::size_t> speed_class() const override { return last_.speed_class_index; }
  const ExpertDecision& last_decision() const { return last_; }

 private:
  Expert expert_;
  ExpertDecision last_;
};

/// Policy output fed to the matching controller, optionally gated by the stop-sign buffer.
class PolicyAgent : public Agent {
 public:
  PolicyAgent(std::unique_ptr<Policy> policy, Conditioning::Kind conditioning, ControllerConfig cfg = {},
              bool stop_buffer = false, ExpertConfig perception = {});
  ControlCommand act(const WorldState& world) override;

  Policy& policy() { return *policy_; }
  /// Whether the buffer forced a brake at the latest step.
  bool buffer_braked() const { return buffer_braked_; }

 private:
  std::unique_ptr<Policy> policy_;
  Conditioning::Kind conditioning_;
  WaypointController waypoint_;
  PathSpeedController path_;
  bool use_buffer_;
  ExpertConfig perception_;
  StopSignBuffer buffer_;
  std::optional<Pose2D> previous_pose_;
  bool buffer_braked_{false};
};

/// Stop-sign trigger boxes the ego can currently see, in its frame.
std::vector<OrientedBox> detect_stop_signs(const WorldState& world, const ExpertConfig& perception);

struct EpisodeOptions {
  bool keep_history{false};
  bool record_rollout{false};
  double completion_tolerance{1.0};  ///< meters before the route end that count as completed
  DetectorConfig detector;           ///< time_budget 0 derives it from the route length
  PenaltyTable penalties;
  /// Called after every tick; returning false stops the episode without scoring changes.
  std::function<bool(const WorldState&)> observer;
};

struct EpisodeOutcome {
  EpisodeResult result;
  std::vector<TickRecord> history;
  std::vector<RolloutTick> rollout;
  double max_lateral{0.0};  ///< signed extreme of the route lateral offset, left positive
  double min_lateral{0.0};
};

EpisodeOutcome run_episode(const Scenario& scenario, Agent& agent, std::uint64_t seed,
                           const EpisodeOptions& options = {});

using AgentFactory = std::function<std::unique_ptr<Agent>(const Scenario& scenario, std::uint64_t seed)>;

/// Runs every scenario for every (seed, eval) pair. Results are ordered by scenario, seed, eval.
std::vector<RunRecord> run_benchmark(const std::vector<Scenario>& scenarios, const AgentFactory& factory,
                                     const std::vector<int>& seeds, int evals, int jobs = 1,
                                     const EpisodeOptions& options = {});

/// Episode seed for a (seed, eval) pair.
std::uint64_t episode_seed(int seed, int eval);

}  // namespace drivebench
