#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drivebench/world.hpp"

namespace drivebench {

enum class InfractionKind {
  collision_pedestrian,
  collision_vehicle,
  collision_static,
  red_light,
  stop_sign,
  route_deviation,
  timeout,
  blocked,
};

inline constexpr std::size_t kNumInfractionKinds = 8;

/// Report column label: Ped, Veh, Stat, Red, Stop, Dev, TO, Block.
const char* column_name(InfractionKind kind);
bool is_terminal(InfractionKind kind);

struct InfractionEvent {
  InfractionKind kind{InfractionKind::collision_vehicle};
  double route_s{0.0};
  double time{0.0};

  bool operator==(const InfractionEvent&) const = default;
};

struct PenaltyTable {
  double pedestrian{0.50};
  double vehicle{0.60};
  double static_object{0.65};
  double red_light{0.70};
  double stop_sign{0.80};

  /// Factor for a kind; 1 for terminal kinds.
  double factor(InfractionKind kind) const;
};

struct DetectorConfig {
  double deviation_distance{30.0};
  double blocked_time{90.0};
  double blocked_speed{0.1};
  double stop_served_speed{0.1};
  double time_budget{0.0};  ///< seconds; 0 disables the timeout
};

/// Time budget for a route: length / nominal speed × factor.
double route_time_budget(double route_length, double nominal_speed = 8.0, double factor = 4.0);

/// One recorded simulation step.
struct TickRecord {
  long tick{0};
  double time{0.0};
  VehicleState ego;
  RouteProgress progress;
  std::vector<RawEvent> events;
};

/// Streaming infraction classifier over tick records.
class InfractionDetector {
 public:
  explicit InfractionDetector(DetectorConfig cfg = {}) : cfg_(cfg) {}

  /// Consumes one tick; returns the infractions it caused. Nothing is reported after a terminal event.
  std::vector<InfractionEvent> observe(const TickRecord& record);
  bool terminated() const { return terminal_.has_value(); }
  std::optional<InfractionKind> terminal() const { return terminal_; }

 private:
  DetectorConfig cfg_;
  std::optional<InfractionKind> terminal_;
  std::map<int, double> stop_zone_min_speed_;
  double slow_since_{-1.0};
};

/// Replays a complete tick history through the streaming detector.
std::vector<InfractionEvent> detect_infractions(const std::vector<TickRecord>& history, const DetectorConfig& cfg);

/// Product of the penalty factors of the non-terminal events.
double infraction_score(const std::vector<InfractionEvent>& events, const PenaltyTable& penalties = {});

double driving_score(double rc, double is);

using KindRates = std::array<double, kNumInfractionKinds>;

/// count(kind) / km for every kind. Throws std::invalid_argument for km ≤ 0.
KindRates per_km_rates(const std::vector<InfractionEvent>& events, double km_driven);

struct EpisodeResult {
  double rc{0.0};   ///< percent
  double is{1.0};
  double ds{0.0};   ///< percent
  std::vector<InfractionEvent> events;
  double km_driven{0.0};
  KindRates per_km{};
  std::optional<InfractionKind> terminated_by;
  double duration{0.0};
};

/// Scorecard for a finished episode.
EpisodeResult score_episode(double route_completed_fraction, bool completed, std::vector<InfractionEvent> events,
                            double km_driven, double duration, std::optional<InfractionKind> terminated_by,
                            const PenaltyTable& penalties = {});

struct RunRecord {
  std::string route;
  int seed{0};
  int eval{0};
  EpisodeResult result;
};

struct MetricSummary {
  double ds{0.0};
  double rc{0.0};
  double is{0.0};
  KindRates per_km{};
};

struct BenchmarkReport {
  std::vector<RunRecord> runs;
  MetricSummary mean;
  MetricSummary std;  ///< sample std (n − 1) over per-seed means; 0 for a single seed
  std::size_t num_seeds{0};
};

/**
 * DS/RC/IS: mean over all runs of the per-episode values. Per-km rates:
 * total counts over total km. Std: over per-seed values of the same statistics.
 */
BenchmarkReport aggregate(const std::vector<RunRecord>& runs);

/// Column order of CSV reports.
inline constexpr std::array<const char*, 11> kReportColumns{"DS",   "RC",  "IS",  "Ped", "Veh", "Stat",
                                                            "Red", "Stop", "Dev", "TO",  "Block"};

/// One CSV row per run plus `mean` and `std` rows.
std::string report_csv(const BenchmarkReport& report);
std::string report_json(const BenchmarkReport& report);

}  // namespace drivebench
