#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "drivebench/controllers.hpp"
#include "drivebench/expert.hpp"
#include "drivebench/world.hpp"

namespace drivebench {

enum class NavCommand { follow, turn_left, turn_right, straight, change_left, change_right };

const char* to_string(NavCommand nc);

struct Conditioning {
  enum class Kind { tp, nc };
  Kind kind{Kind::tp};
  std::optional<Vec2> tp;          ///< ego frame
  std::optional<NavCommand> nc;
};

/// Conditioning signal for the ego's current route progress.
Conditioning make_conditioning(const WorldState& world, Conditioning::Kind kind);

/// Discrete command from the route's heading change over the next `horizon` meters.
NavCommand nav_command_for(const Route& route, double s, double horizon = 35.0);

struct PathSpeedPlan {
  PathPlan path;
  SpeedDistribution speed;
};

struct PolicyOutput {
  std::variant<WaypointPlan, PathSpeedPlan> plan;

  bool is_waypoints() const { return std::holds_alternative<WaypointPlan>(plan); }
};

enum class Representation { waypoints, path };

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyOutput act(const WorldState& world, const Conditioning& cond) = 0;
};

/// Ten route points at exactly 1 m spacing from the ego's route progress, ego frame.
PathPlan route_path_plan(const WorldState& world);

/// Expert's own future at 250 ms intervals, simulated on a copy of the world.
WaypointPlan expert_waypoints(const WorldState& world, const Expert& expert);

/// Privileged expert labels as a policy output.
class ExpertPolicy : public Policy {
 public:
  ExpertPolicy(Representation rep, ExpertConfig cfg = {}) : rep_(rep), expert_(cfg) {}
  PolicyOutput act(const WorldState& world, const Conditioning& cond) override;
  const ExpertDecision& last_decision() const { return last_; }

 private:
  Representation rep_;
  Expert expert_;
  ExpertDecision last_;
};

struct ShortcutParams {
  double strength{0.8};       ///< λ, blend of the lane heading toward the TP bearing
  double ood_threshold{0.75}; ///< δ, lateral offset beyond which the state is out of distribution
  /// Once out of distribution, keep steering to the TP until it is reached.
  bool latch_until_tp{true};
  double tp_reached_distance{2.0};
};

/**
 * TP-shortcut surrogate. In distribution it follows the lane center; out of
 * distribution its waypoints run from the ego along a heading blended toward
 * the target point.
 */
class ShortcutPolicy : public Policy {
 public:
  explicit ShortcutPolicy(ShortcutParams params = {}, ExpertConfig cfg = {}) : params_(params), expert_(cfg) {}
  PolicyOutput act(const WorldState& world, const Conditioning& cond) override;
  bool out_of_distribution() const { return ood_; }

 private:
  ShortcutParams params_;
  Expert expert_;
  bool ood_{false};
  std::size_t latched_tp_{0};
};

struct NcParams {
  double heading_bias{0.3 * kPi / 180.0};  ///< ε
  double switch_margin{0.5};               ///< a nearer lane must be closer by this much to take over
  double heading_tolerance{kPi / 3.0};
};

/**
 * Navigation-command surrogate. Follows the nearest heading-compatible lane
 * at its current lateral offset, rotated by a small heading bias; there is no
 * pull back toward the route's lane center.
 */
class NcPolicy : public Policy {
 public:
  explicit NcPolicy(NcParams params = {}, ExpertConfig cfg = {}) : params_(params), expert_(cfg) {}
  PolicyOutput act(const WorldState& world, const Conditioning& cond) override;
  std::optional<std::size_t> current_lane() const { return lane_; }

 private:
  NcParams params_;
  Expert expert_;
  std::optional<std::size_t> lane_;
  std::vector<std::vector<std::size_t>> successors_;
  const LaneMap* successors_map_{nullptr};
};

/// Successor of `lane` matching a navigation command; the first successor if none matches.
std::optional<std::size_t> choose_successor(const LaneMap& map, const std::vector<std::vector<std::size_t>>& successors,
                                            std::size_t lane, NavCommand nc);

struct AmbiguityAlternative {
  std::size_t speed_class{kStopClass};
  double weight{0.5};
  double jitter{0.0};  ///< per-episode uniform jitter on the weight
};

/// Route interval where the speed prediction is a mixture.
struct AmbiguityWindow {
  double s_begin{0.0};
  double s_end{0.0};
  std::vector<AmbiguityAlternative> alternatives;
  double max_duration{1e9};  ///< seconds after entering the window
};

/**
 * Path = expert path; speed = expert class mixed with the window's
 * alternatives inside active windows, one-hot elsewhere.
 */
class UncertainSpeedPolicy : public Policy {
 public:
  UncertainSpeedPolicy(std::vector<AmbiguityWindow> windows, std::uint64_t seed, ExpertConfig cfg = {});
  PolicyOutput act(const WorldState& world, const Conditioning& cond) override;

  /// Mixture for an expert class and the current world; exposed for tests.
  SpeedDistribution distribution(const WorldState& world, std::size_t expert_class);

 private:
  std::vector<AmbiguityWindow> windows_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> entered_;
  Expert expert_;
};

}  // namespace drivebench
