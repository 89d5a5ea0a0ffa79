#include "drivebench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace drivebench {

const char* column_name(InfractionKind kind) {
  switch (kind) {
    case InfractionKind::collision_pedestrian: return "Ped";
    case InfractionKind::collision_vehicle: return "Veh";
    case InfractionKind::collision_static: return "Stat";
    case InfractionKind::red_light: return "Red";
    case InfractionKind::stop_sign: return "Stop";
    case InfractionKind::route_deviation: return "Dev";
    case InfractionKind::timeout: return "TO";
    case InfractionKind::blocked: return "Block";
  }
  return "?";
}

bool is_terminal(InfractionKind kind) {
  return kind == InfractionKind::route_deviation || kind == InfractionKind::timeout || kind == InfractionKind::blocked;
}

double PenaltyTable::factor(InfractionKind kind) const {
  switch (kind) {
    case InfractionKind::collision_pedestrian: return pedestrian;
    case InfractionKind::collision_vehicle: return vehicle;
    case InfractionKind::collision_static: return static_object;
    case InfractionKind::red_light: return red_light;
    case InfractionKind::stop_sign: return stop_sign;
    default: return 1.0;
  }
}

double route_time_budget(double route_length, double nominal_speed, double factor) {
  return route_length / nominal_speed * factor;
}

std::vector<InfractionEvent> InfractionDetector::observe(const TickRecord& r) {
  std::vector<InfractionEvent> out;
  if (terminal_) return out;
  auto emit = [&](InfractionKind kind) {
    if (terminal_) return;
    out.push_back({kind, r.progress.s, r.time});
    if (is_terminal(kind)) terminal_ = kind;
  };

  for (const RawEvent& ev : r.events) {
    switch (ev.kind) {
      case RawEventKind::collision:
        emit(ev.actor_kind == ActorKind::pedestrian ? InfractionKind::collision_pedestrian
                                                    : InfractionKind::collision_vehicle);
        break;
      case RawEventKind::offroad:
        emit(InfractionKind::collision_static);
        break;
      case RawEventKind::stop_line_crossed:
        if (ev.phase == LightPhase::red) emit(InfractionKind::red_light);
        break;
      case RawEventKind::stop_zone_enter:
        stop_zone_min_speed_[ev.object_id] = r.ego.speed;
        break;
      case RawEventKind::stop_zone_exit: {
        const auto it = stop_zone_min_speed_.find(ev.object_id);
        if (it != stop_zone_min_speed_.end()) {
          if (std::min(it->second, r.ego.speed) >= cfg_.stop_served_speed) emit(InfractionKind::stop_sign);
          stop_zone_min_speed_.erase(it);
        }
        break;
      }
      default:
        break;
    }
  }
  for (auto& [id, v] : stop_zone_min_speed_) v = std::min(v, r.ego.speed);

  if (std::abs(r.progress.lateral) > cfg_.deviation_distance) emit(InfractionKind::route_deviation);

  if (r.ego.speed < cfg_.blocked_speed) {
    if (slow_since_ < 0.0) slow_since_ = r.time;
    if (r.time - slow_since_ >= cfg_.blocked_time - 1e-9) emit(InfractionKind::blocked);
  } else {
    slow_since_ = -1.0;
  }

  if (cfg_.time_budget > 0.0 && r.time > cfg_.time_budget) emit(InfractionKind::timeout);
  return out;
}

std::vector<InfractionEvent> detect_infractions(const std::vector<TickRecord>& history, const DetectorConfig& cfg) {
  InfractionDetector det(cfg);
  std::vector<InfractionEvent> out;
  for (const auto& r : history) {
    auto evs = det.observe(r);
    out.insert(out.end(), evs.begin(), evs.end());
    if (det.terminated()) break;
  }
  return out;
}

double infraction_score(const std::vector<InfractionEvent>& events, const PenaltyTable& penalties) {
  double score = 1.0;
  for (const auto& e : events) score *= penalties.factor(e.kind);
  return score;
}

double driving_score(double rc, double is) { return rc * is; }

KindRates per_km_rates(const std::vector<InfractionEvent>& events, double km_driven) {
  if (!(km_driven > 0.0)) throw std::invalid_argument("per_km_rates: km_driven must be positive");
  KindRates rates{};
  for (const auto& e : events) rates[static_cast<std::size_t>(e.kind)] += 1.0;
  for (double& r : rates) r /= km_driven;
  return rates;
}

EpisodeResult score_episode(double route_completed_fraction, bool completed, std::vector<InfractionEvent> events,
                            double km_driven, double duration, std::optional<InfractionKind> terminated_by,
                            const PenaltyTable& penalties) {
  EpisodeResult r;
  r.rc = completed ? 100.0 : std::clamp(route_completed_fraction, 0.0, 1.0) * 100.0;
  r.is = infraction_score(events, penalties);
  r.ds = driving_score(r.rc, r.is);
  r.km_driven = km_driven;
  if (km_driven > 0.0) r.per_km = per_km_rates(events, km_driven);
  r.events = std::move(events);
  r.terminated_by = terminated_by;
  r.duration = duration;
  return r;
}

namespace {

struct Accum {
  double ds{0.0};
  double rc{0.0};
  double is{0.0};
  double n{0.0};
  double km{0.0};
  KindRates counts{};

  void add(const EpisodeResult& r) {
    ds += r.ds;
    rc += r.rc;
    is += r.is;
    n += 1.0;
    km += r.km_driven;
    for (const auto& e : r.events) counts[static_cast<std::size_t>(e.kind)] += 1.0;
  }

  MetricSummary summary() const {
    MetricSummary m;
    if (n > 0.0) {
      m.ds = ds / n;
      m.rc = rc / n;
      m.is = is / n;
    }
    for (std::size_t k = 0; k < kNumInfractionKinds; ++k) m.per_km[k] = km > 0.0 ? counts[k] / km : 0.0;
    return m;
  }
};

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

BenchmarkReport aggregate(const std::vector<RunRecord>& runs) {
  BenchmarkReport rep;
  rep.runs = runs;
  Accum all;
  std::map<int, Accum> by_seed;
  for (const auto& r : runs) {
    all.add(r.result);
    by_seed[r.seed].add(r.result);
  }
  rep.mean = all.summary();
  rep.num_seeds = by_seed.size();

  std::vector<MetricSummary> seed_means;
  for (const auto& [seed, acc] : by_seed) seed_means.push_back(acc.summary());
  auto column = [&](auto get) {
    std::vector<double> xs;
    for (const auto& m : seed_means) xs.push_back(get(m));
    return sample_std(xs);
  };
  rep.std.ds = column([](const MetricSummary& m) { return m.ds; });
  rep.std.rc = column([](const MetricSummary& m) { return m.rc; });
  rep.std.is = column([](const MetricSummary& m) { return m.is; });
  for (std::size_t k = 0; k < kNumInfractionKinds; ++k) {
    rep.std.per_km[k] = column([k](const MetricSummary& m) { return m.per_km[k]; });
  }
  return rep;
}

namespace {

void write_metrics(std::ostream& os, double ds, double rc, double is, const KindRates& rates) {
  os << ds << ',' << rc << ',' << is;
  for (double r : rates) os << ',' << r;
}

}  // namespace

std::string report_csv(const BenchmarkReport& report) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# std: sample standard deviation (n-1) over per-seed means\n";
  os << "route,seed,eval";
  for (const char* c : kReportColumns) os << ',' << c;
  os << '\n';
  for (const auto& r : report.runs) {
    os << r.route << ',' << r.seed << ',' << r.eval << ',';
    write_metrics(os, r.result.ds, r.result.rc, r.result.is, r.result.per_km);
    os << '\n';
  }
  os << "mean,,,";
  write_metrics(os, report.mean.ds, report.mean.rc, report.mean.is, report.mean.per_km);
  os << "\nstd,,,";
  write_metrics(os, report.std.ds, report.std.rc, report.std.is, report.std.per_km);
  os << '\n';
  return os.str();
}

namespace {

nlohmann::ordered_json summary_json(const MetricSummary& m) {
  nlohmann::ordered_json j;
  j["DS"] = m.ds;
  j["RC"] = m.rc;
  j["IS"] = m.is;
  for (std::size_t k = 0; k < kNumInfractionKinds; ++k) j[column_name(static_cast<InfractionKind>(k))] = m.per_km[k];
  return j;
}

}  // namespace

std::string report_json(const BenchmarkReport& report) {
  nlohmann::ordered_json j;
  j["std_convention"] = "sample standard deviation (n-1) over per-seed means";
  j["num_seeds"] = report.num_seeds;
  j["mean"] = summary_json(report.mean);
  j["std"] = summary_json(report.std);
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : report.runs) {
    nlohmann::ordered_json row;
    row["route"] = r.route;
    row["seed"] = r.seed;
    row["eval"] = r.eval;
    row["km"] = r.result.km_driven;
    row["duration"] = r.result.duration;
    row["terminated_by"] = r.result.terminated_by ? column_name(*r.result.terminated_by) : "";
    nlohmann::ordered_json m = summary_json({r.result.ds, r.result.rc, r.result.is, r.result.per_km});
    row.update(m);
    runs.push_back(row);
  }
  j["runs"] = runs;
  return j.dump(2);
}

}  // namespace drivebench
