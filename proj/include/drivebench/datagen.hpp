#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drivebench/controllers.hpp"
#include "drivebench/metrics.hpp"
#include "drivebench/policies.hpp"
#include "drivebench/random.hpp"

namespace drivebench {

struct Augmentation {
  double shift{0.0};  ///< lateral, meters, positive to the left
  double rot{0.0};    ///< radians

  bool operator==(const Augmentation&) const = default;
};

/// One dataset row. All label points are in the (possibly perturbed) ego frame.
struct FrameRecord {
  std::string route;
  long frame{0};
  double time{0.0};
  VehicleState ego;
  Vec2 tp;  ///< ego frame
  NavCommand nc{NavCommand::follow};
  std::array<Vec2, kNumWaypoints> waypoints{};
  std::array<Vec2, kNumPathPoints> path{};
  int speed_class{0};
  std::optional<Augmentation> aug;

  bool operator==(const FrameRecord&) const = default;
};

struct AugmentationConfig {
  double shift_range{1.0};
  double rot_range{5.0 * kPi / 180.0};
  double load_probability{0.5};
};

/// Per-tick expert rollout data used to build records.
struct RolloutTick {
  double time{0.0};
  VehicleState ego;
  double route_s{0.0};
  Vec2 tp_global;
  NavCommand nc{NavCommand::follow};
  std::array<Vec2, kNumPathPoints> path_global{};
  int speed_class{0};
};

/**
 * Keeps every `frame_stride`-th tick (20 Hz / 5 = 4 Hz). Waypoint labels are
 * the realized future positions 5, 10, ..., 40 ticks ahead; past the end of
 * the rollout the last position is repeated.
 */
std::vector<FrameRecord> record_episode(const std::vector<RolloutTick>& rollout, const std::string& route,
                                        int frame_stride = 5);

/// Perturbed frame: ego frame shifted by (0, shift) and rotated by rot.
FrameRecord apply_augmentation(const FrameRecord& record, const Augmentation& aug);
/// Undoes apply_augmentation using the stored metadata.
FrameRecord invert_augmentation(const FrameRecord& record);

/// Samples shift ~ U(±shift_range), rot ~ U(±rot_range) and re-expresses all labels.
FrameRecord augment_frame(const FrameRecord& record, const AugmentationConfig& cfg, Rng& rng);

/// Bernoulli(p) choice of the augmented variant.
const FrameRecord& select_frame(const FrameRecord& clean, const FrameRecord& augmented, double p, Rng& rng);

struct ScoredEpisode {
  std::string route;
  EpisodeResult result;
  std::vector<FrameRecord> frames;
};

/// Keeps episodes with DS exactly 100.
std::vector<ScoredEpisode> filter_routes(const std::vector<ScoredEpisode>& episodes);

class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& msg, std::size_t line) : std::runtime_error(msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// JSON lines; the first line is the header {"schema":1}.
void write_dataset(std::ostream& os, const std::vector<FrameRecord>& records);
std::vector<FrameRecord> read_dataset(std::istream& is);
void write_dataset_file(const std::string& path, const std::vector<FrameRecord>& records);
std::vector<FrameRecord> read_dataset_file(const std::string& path);

/// Every `factor`-th record starting at `offset`.
template <typename T>
std::vector<T> shard_subsample(const std::vector<T>& records, std::size_t factor, std::size_t offset) {
  if (factor == 0 || offset >= factor) throw std::invalid_argument("shard_subsample: need 0 <= offset < factor");
  std::vector<T> out;
  for (std::size_t i = offset; i < records.size(); i += factor) out.push_back(records[i]);
  return out;
}

}  // namespace drivebench
