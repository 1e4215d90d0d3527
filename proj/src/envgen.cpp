#include "hmai/envgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <string>

namespace hmai {

TaskRecord make_task(std::int64_t id, int camera_id, CameraKind group,
                     double capture_time, TaskKind kind, Model model,
                     double safety_time,
                     std::optional<std::int64_t> depends_on) {
  TaskRecord t;
  t.id = id;
  t.camera_id = camera_id;
  t.group = group;
  t.capture_time = capture_time;
  t.task_kind = kind;
  t.model = model;
  t.amount = model_amount_gmac(model);
  t.layer_num = model_layer_num(model);
  t.safety_time = safety_time;
  t.depends_on = depends_on;
  return t;
}

DrivingArea driving_area(Area kind, std::optional<double> velocity_kmh) {
  double kmh = 60.0;
  if (kind == Area::UHW) kmh = 80.0;
  if (kind == Area::HW) kmh = 120.0;
  if (velocity_kmh) kmh = *velocity_kmh;
  if (!(kmh > 0.0)) throw ConfigError("area velocity must be positive");
  return {kind, kmh_to_ms(kmh), kind != Area::HW};
}

std::vector<CameraGroup> default_cameras() {
  return {{CameraKind::FC, 11, 250.0, Facing::Forward},
          {CameraKind::FLSC, 4, 80.0, Facing::Side},
          {CameraKind::RLSC, 4, 80.0, Facing::Side},
          {CameraKind::FRSC, 4, 80.0, Facing::Side},
          {CameraKind::RRSC, 4, 80.0, Facing::Side},
          {CameraKind::RC, 3, 100.0, Facing::Rear}};
}

int total_cameras(std::span<const CameraGroup> cameras) {
  int n = 0;
  for (const auto& g : cameras) n += g.count;
  return n;
}

FrameRateMatrix FrameRateMatrix::defaults(double uhw_scale, double hw_scale) {
  // Columns FC, FLSC, RLSC, FRSC, RRSC, RC.
  constexpr std::array<std::array<double, 6>, 3> kUrban{{
      {40, 30, 20, 30, 20, 10},  // GoStraight
      {40, 40, 30, 30, 20, 10},  // Turn
      {20, 20, 30, 20, 30, 40},  // Reverse
  }};
  FrameRateMatrix m;
  const std::array<double, 3> scale{1.0, uhw_scale, hw_scale};
  for (Area a : kAreas) {
    for (Scenario s : kScenarios) {
      for (CameraKind c : kCameraKinds) {
        m.fps_[index_of(a)][index_of(s)][index_of(c)] =
            m.defined(a, s) ? kUrban[index_of(s)][index_of(c)] *
                                  scale[index_of(a)]
                            : 0.0;
      }
    }
  }
  return m;
}

double FrameRateMatrix::get(Area a, Scenario s, CameraKind c) const {
  if (!defined(a, s)) {
    throw DomainError("invalid scenario: " + std::string(to_string(s)) +
                      " is not allowed in area " + std::string(to_string(a)));
  }
  return fps_[index_of(a)][index_of(s)][index_of(c)];
}

void FrameRateMatrix::set(Area a, Scenario s, CameraKind c, double fps) {
  if (!defined(a, s)) {
    throw ConfigError("cannot set frame rate for " +
                      std::string(to_string(s)) + " in area " +
                      std::string(to_string(a)));
  }
  if (!(fps > 0.0)) throw ConfigError("frame rates must be positive");
  fps_[index_of(a)][index_of(s)][index_of(c)] = fps;
}

double frame_rate(const FrameRateMatrix& m, Area a, Scenario s,
                  CameraKind c) {
  return m.get(a, s, c);
}

void RouteConfig::validate() const {
  if (!(distance > 0.0)) throw ConfigError("route distance must be positive");
  if (!(velocity > 0.0)) throw ConfigError("route velocity must be positive");
  if (max_times_turn < 0 || max_times_reverse < 0) {
    throw ConfigError("event counts must be non-negative");
  }
  if (!(max_duration_turn > 0.0) || !(max_duration_reverse > 0.0)) {
    throw ConfigError("event durations must be positive");
  }
  if (!(min_segment > 0.0)) throw ConfigError("min_segment must be positive");
  if (!(max_event_fraction > 0.0 && max_event_fraction < 1.0)) {
    throw ConfigError("max_event_fraction must lie in (0, 1)");
  }
  if (!area.reverse_allowed && max_times_reverse > 0) {
    throw ConfigError("reversing is not allowed in area " +
                      std::string(to_string(area.kind)));
  }
}

std::vector<ScenarioSegment> build_scenario_schedule(const RouteConfig& route,
                                                     Rng& rng) {
  if (!(route.distance > 0.0) || !(route.velocity > 0.0)) {
    throw ConfigError("route distance and velocity must be positive");
  }
  const double total = route.duration();
  if (total < route.min_segment) {
    throw DomainError("route duration " + std::to_string(total) +
                      " s is shorter than one minimal segment");
  }

  const int max_reverse =
      route.area.reverse_allowed ? route.max_times_reverse : 0;
  const auto draw_count = [&](int max_times) {
    return max_times > 0 ? static_cast<int>(uniform_index(
                               rng, static_cast<std::size_t>(max_times) + 1))
                         : 0;
  };
  const int n_turn = draw_count(route.max_times_turn);
  const int n_reverse = draw_count(max_reverse);

  std::vector<ScenarioSegment> events;
  for (int i = 0; i < n_turn; ++i) {
    events.push_back({Scenario::Turn, 0.0,
                      route.max_duration_turn * (1.0 - uniform01(rng))});
  }
  for (int i = 0; i < n_reverse; ++i) {
    events.push_back({Scenario::Reverse, 0.0,
                      route.max_duration_reverse * (1.0 - uniform01(rng))});
  }

  double event_time = 0.0;
  for (const auto& e : events) event_time += e.duration;
  const double cap = route.max_event_fraction * total;
  if (event_time > cap) {
    const double shrink = cap / event_time;
    for (auto& e : events) e.duration *= shrink;
    event_time = cap;
  }

  std::shuffle(events.begin(), events.end(), rng);
  // Split the straight-driving time into events.size() + 1 gaps.
  const double slack = total - event_time;
  std::vector<double> cuts(events.size());
  for (auto& c : cuts) c = slack * uniform01(rng);
  std::sort(cuts.begin(), cuts.end());

  std::vector<ScenarioSegment> schedule;
  double t = 0.0;
  double prev_cut = 0.0;
  const auto push = [&](Scenario kind, double duration) {
    if (duration <= 0.0) return;
    if (!schedule.empty() && schedule.back().kind == kind) {
      schedule.back().duration += duration;
    } else {
      schedule.push_back({kind, t, duration});
    }
    t += duration;
  };
  for (std::size_t i = 0; i < events.size(); ++i) {
    push(Scenario::GoStraight, cuts[i] - prev_cut);
    prev_cut = cuts[i];
    push(events[i].kind, events[i].duration);
  }
  push(Scenario::GoStraight, slack - prev_cut);
  // Absorb rounding so the tiling ends exactly at the route duration.
  schedule.back().duration = total - schedule.back().start;
  return schedule;
}

Scenario scenario_at(std::span<const ScenarioSegment> schedule, double t) {
  if (schedule.empty()) return Scenario::GoStraight;
  auto it = std::upper_bound(
      schedule.begin(), schedule.end(), t,
      [](double v, const ScenarioSegment& s) { return v < s.start; });
  if (it == schedule.begin()) return schedule.front().kind;
  return std::prev(it)->kind;
}

double scenario_velocity(const DrivingArea& area, Scenario s,
                         const SafetyTimePolicy& policy) {
  switch (s) {
    case Scenario::Turn: return policy.turn_velocity;
    case Scenario::Reverse:
      return policy.reverse_velocity.value_or(area.max_velocity);
    case Scenario::GoStraight: break;
  }
  return area.max_velocity;
}

SafetyTimeTable::SafetyTimeTable(const DrivingArea& area,
                                 std::span<const CameraGroup> cameras,
                                 const SafetyTimePolicy& policy) {
  for (Scenario s : kScenarios) {
    RssParams p = policy.rss;
    p.v1 = p.v2 = scenario_velocity(area, s, policy);
    for (const auto& g : cameras) {
      double st = policy.insufficient_range_time;
      if (g.max_distance > rss_min_distance(0.0, p)) {
        st = safety_time(g.max_distance, p);
      } else if (policy.error_on_insufficient_range &&
                 (s != Scenario::Reverse || area.reverse_allowed)) {
        (void)safety_time(g.max_distance, p);  // throws with details
      }
      table_[index_of(s)][index_of(g.kind)] = st;
    }
  }
}

std::vector<TaskRecord> generate_task_queue(
    const RouteConfig& route, std::span<const ScenarioSegment> schedule,
    std::span<const CameraGroup> cameras, const FrameRateMatrix& matrix,
    const SafetyTimeTable& safety) {
  struct Frame {
    double t;
    int camera;
    CameraKind group;
    Model model;
    bool with_tracking;
    double st;
  };
  std::vector<Frame> frames;
  const Area area = route.area.kind;

  int camera_id = 0;
  for (const auto& g : cameras) {
    for (int c = 0; c < g.count; ++c, ++camera_id) {
      // Frame clock and YOLO/SSD alternation both run across segments.
      bool yolo_next = true;
      double last = -1.0;
      for (const auto& seg : schedule) {
        const double fps = frame_rate(matrix, area, seg.kind, g.kind);
        const double st = safety.at(seg.kind, g.kind);
        const bool tracking =
            g.facing != Facing::Rear || seg.kind == Scenario::Reverse;
        const double anchor =
            last < 0.0 ? seg.start : std::max(seg.start, last + 1.0 / fps);
        const double end = seg.end() - 1e-9;
        long k = 0;
        for (double t = anchor; t < end; t = anchor + static_cast<double>(++k) / fps) {
          frames.push_back({t, camera_id, g.kind,
                            yolo_next ? Model::YOLO : Model::SSD, tracking,
                            st});
          yolo_next = !yolo_next;
          last = t;
        }
      }
    }
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const Frame& a, const Frame& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return a.camera < b.camera;
                   });

  std::vector<TaskRecord> queue;
  queue.reserve(frames.size() * 2);
  std::int64_t next_id = 0;
  for (const auto& f : frames) {
    const std::int64_t det_id = next_id++;
    queue.push_back(make_task(det_id, f.camera, f.group, f.t, TaskKind::DET,
                              f.model, f.st));
    if (f.with_tracking) {
      queue.push_back(make_task(next_id++, f.camera, f.group, f.t,
                                TaskKind::TRA, Model::GOTURN, f.st, det_id));
    }
  }
  return queue;
}

std::string format_seconds(double t) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), t, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    s += '.';
    dot = s.size() - 1;
  }
  const std::size_t decimals = s.size() - dot - 1;
  if (decimals < 6) s.append(6 - decimals, '0');
  return s;
}

void write_queue_jsonl(std::ostream& out, std::span<const TaskRecord> queue) {
  for (const auto& t : queue) {
    out << "{\"id\":" << t.id << ",\"camera_id\":" << t.camera_id
        << ",\"group\":\"" << to_string(t.group)
        << "\",\"capture_time\":" << format_seconds(t.capture_time)
        << ",\"task_kind\":\"" << to_string(t.task_kind) << "\",\"model\":\""
        << to_string(t.model) << "\",\"amount\":"
        << nlohmann::json(t.amount).dump() << ",\"layer_num\":" << t.layer_num
        << ",\"safety_time\":" << format_seconds(t.safety_time)
        << ",\"depends_on\":";
    if (t.depends_on) {
      out << *t.depends_on;
    } else {
      out << "null";
    }
    out << "}\n";
  }
}

std::vector<TaskRecord> read_queue_jsonl(std::istream& in) {
  std::vector<TaskRecord> queue;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TaskRecord t;
      t.id = j.at("id").get<std::int64_t>();
      t.camera_id = j.at("camera_id").get<int>();
      t.group = parse_camera_kind(j.at("group").get<std::string>());
      t.capture_time = j.at("capture_time").get<double>();
      t.task_kind = parse_task_kind(j.at("task_kind").get<std::string>());
      t.model = parse_model(j.at("model").get<std::string>());
      t.amount = j.at("amount").get<double>();
      t.layer_num = j.at("layer_num").get<int>();
      t.safety_time = j.at("safety_time").get<double>();
      if (!j.at("depends_on").is_null()) {
        t.depends_on = j.at("depends_on").get<std::int64_t>();
      }
      queue.push_back(t);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("queue line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw IoError("queue line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return queue;
}

}  // namespace hmai
