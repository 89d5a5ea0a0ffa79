#include "drivebench/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace drivebench {

std::vector<FrameRecord> record_episode(const std::vector<RolloutTick>& rollout, const std::string& route,
                                        int frame_stride) {
  std::vector<FrameRecord> out;
  if (rollout.empty()) return out;
  const std::size_t n = rollout.size();
  const auto stride = static_cast<std::size_t>(std::max(1, frame_stride));
  constexpr std::size_t kTicksPerWaypoint = 5;
  for (std::size_t i = 0; i < n; i += stride) {
    const RolloutTick& t = rollout[i];
    const Pose2D& pose = t.ego.pose;
    FrameRecord r;
    r.route = route;
    r.frame = static_cast<long>(i);
    r.time = t.time;
    r.ego = t.ego;
    r.tp = global_to_local(pose, t.tp_global);
    r.nc = t.nc;
    for (std::size_t k = 0; k < kNumWaypoints; ++k) {
      const std::size_t j = std::min(i + (k + 1) * kTicksPerWaypoint, n - 1);
      r.waypoints[k] = global_to_local(pose, rollout[j].ego.pose.position());
    }
    for (std::size_t k = 0; k < kNumPathPoints; ++k) r.path[k] = global_to_local(pose, t.path_global[k]);
    r.speed_class = t.speed_class;
    out.push_back(r);
  }
  return out;
}

namespace {

template <typename F>
FrameRecord map_points(const FrameRecord& record, F f) {
  FrameRecord r = record;
  r.tp = f(r.tp);
  for (auto& p : r.waypoints) p = f(p);
  for (auto& p : r.path) p = f(p);
  return r;
}

}  // namespace

FrameRecord apply_augmentation(const FrameRecord& record, const Augmentation& aug) {
  const Pose2D frame{0.0, aug.shift, aug.rot};
  FrameRecord r = map_points(record, [&](Vec2 p) { return global_to_local(frame, p); });
  r.aug = aug;
  return r;
}

FrameRecord invert_augmentation(const FrameRecord& record) {
  if (!record.aug) return record;
  const Pose2D frame{0.0, record.aug->shift, record.aug->rot};
  FrameRecord r = map_points(record, [&](Vec2 p) { return local_to_global(frame, p); });
  r.aug.reset();
  return r;
}

FrameRecord augment_frame(const FrameRecord& record, const AugmentationConfig& cfg, Rng& rng) {
  Augmentation aug;
  aug.shift = uniform(rng, -cfg.shift_range, cfg.shift_range);
  aug.rot = uniform(rng, -cfg.rot_range, cfg.rot_range);
  return apply_augmentation(record, aug);
}

const FrameRecord& select_frame(const FrameRecord& clean, const FrameRecord& augmented, double p, Rng& rng) {
  return std::bernoulli_distribution(std::clamp(p, 0.0, 1.0))(rng) ? augmented : clean;
}

std::vector<ScoredEpisode> filter_routes(const std::vector<ScoredEpisode>& episodes) {
  std::vector<ScoredEpisode> out;
  for (const auto& e : episodes) {
    if (e.result.ds == 100.0) out.push_back(e);
  }
  return out;
}

namespace {

using json = nlohmann::json;

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

Vec2 point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::runtime_error("expected [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

NavCommand nc_from(const std::string& s) {
  for (auto nc : {NavCommand::follow, NavCommand::turn_left, NavCommand::turn_right, NavCommand::straight,
                  NavCommand::change_left, NavCommand::change_right}) {
    if (s == to_string(nc)) return nc;
  }
  throw std::runtime_error("unknown navigation command '" + s + "'");
}

json record_json(const FrameRecord& r) {
  json j;
  j["route"] = r.route;
  j["frame"] = r.frame;
  j["time"] = r.time;
  j["ego"] = {{"x", r.ego.pose.x}, {"y", r.ego.pose.y}, {"yaw", r.ego.pose.yaw}, {"speed", r.ego.speed}};
  j["tp"] = point_json(r.tp);
  j["nc"] = to_string(r.nc);
  j["waypoints"] = json::array();
  for (const auto& p : r.waypoints) j["waypoints"].push_back(point_json(p));
  j["path"] = json::array();
  for (const auto& p : r.path) j["path"].push_back(point_json(p));
  j["speed_class"] = r.speed_class;
  j["aug"] = r.aug ? json{{"shift", r.aug->shift}, {"rot", r.aug->rot}} : json(nullptr);
  j["sensors"] = json::object();
  return j;
}

FrameRecord record_from(const json& j) {
  FrameRecord r;
  r.route = j.at("route").get<std::string>();
  r.frame = j.at("frame").get<long>();
  r.time = j.at("time").get<double>();
  const json& e = j.at("ego");
  r.ego.pose = {e.at("x").get<double>(), e.at("y").get<double>(), e.at("yaw").get<double>()};
  r.ego.speed = e.at("speed").get<double>();
  r.tp = point_from(j.at("tp"));
  r.nc = nc_from(j.at("nc").get<std::string>());
  const json& wps = j.at("waypoints");
  const json& path = j.at("path");
  if (wps.size() != kNumWaypoints) throw std::runtime_error("expected 8 waypoints");
  if (path.size() != kNumPathPoints) throw std::runtime_error("expected 10 path points");
  for (std::size_t k = 0; k < kNumWaypoints; ++k) r.waypoints[k] = point_from(wps.at(k));
  for (std::size_t k = 0; k < kNumPathPoints; ++k) r.path[k] = point_from(path.at(k));
  r.speed_class = j.at("speed_class").get<int>();
  if (r.speed_class < 0 || r.speed_class >= static_cast<int>(kNumSpeedClasses)) {
    throw std::runtime_error("speed_class out of range");
  }
  const json& aug = j.at("aug");
  if (!aug.is_null()) r.aug = Augmentation{aug.at("shift").get<double>(), aug.at("rot").get<double>()};
  return r;
}

}  // namespace

void write_dataset(std::ostream& os, const std::vector<FrameRecord>& records) {
  os << R"({"schema":1})" << '\n';
  for (const auto& r : records) os << record_json(r).dump() << '\n';
}

std::vector<FrameRecord> read_dataset(std::istream& is) {
  std::vector<FrameRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!header) {
        if (!j.is_object() || !j.contains("schema") || j.at("schema") != 1) {
          throw std::runtime_error("missing or unsupported schema header");
        }
        header = true;
        continue;
      }
      out.push_back(record_from(j));
    } catch (const std::exception& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return out;
}

void write_dataset_file(const std::string& path, const std::vector<FrameRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset(os, records);
}

std::vector<FrameRecord> read_dataset_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  try {
    return read_dataset(is);
  } catch (const DatasetError& e) {
    throw DatasetError(path + ":" + e.what(), e.line());
  }
}

}  // namespace drivebench
