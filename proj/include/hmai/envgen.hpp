#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hmai/common.hpp"
#include "hmai/criteria.hpp"
#include "hmai/task.hpp"

namespace hmai {

struct DrivingArea {
  Area kind = Area::UB;
  double max_velocity = kmh_to_ms(60.0);  // m/s
  bool reverse_allowed = true;
};

/// Area with its default speed limit (60/80/120 km/h) unless overridden.
DrivingArea driving_area(Area kind, std::optional<double> velocity_kmh = {});

struct CameraGroup {
  CameraKind kind = CameraKind::FC;
  int count = 0;
  double max_distance = 0.0;  // m
  Facing facing = Facing::Forward;
};

/// 30 cameras: FC 11, FLSC 4, RLSC 4, FRSC 4, RRSC 4, RC 3.
std::vector<CameraGroup> default_cameras();
int total_cameras(std::span<const CameraGroup> cameras);

struct ScenarioSegment {
  Scenario kind = Scenario::GoStraight;
  double start = 0.0;
  double duration = 0.0;

  double end() const { return start + duration; }
  bool operator==(const ScenarioSegment&) const = default;
};

/// Required frame rate per (area, scenario, camera group).
class FrameRateMatrix {
 public:
  /// Urban matrix reconstructed from the per-scenario totals; UHW and HW
  /// default to the urban matrix times a per-area factor.
  static FrameRateMatrix defaults(double uhw_scale = 1.0,
                                  double hw_scale = 1.0);

  bool defined(Area a, Scenario s) const {
    return !(a == Area::HW && s == Scenario::Reverse);
  }
  double get(Area a, Scenario s, CameraKind c) const;
  void set(Area a, Scenario s, CameraKind c, double fps);

 private:
  std::array<std::array<std::array<double, 6>, 3>, 3> fps_{};
};

double frame_rate(const FrameRateMatrix& m, Area a, Scenario s, CameraKind c);

struct RouteConfig {
  DrivingArea area;
  double distance = 1000.0;               // m
  double velocity = kmh_to_ms(60.0);      // m/s
  int max_times_turn = 10;
  int max_times_reverse = 10;
  double max_duration_turn = 10.0;        // s
  double max_duration_reverse = 20.0;     // s
  double min_segment = 0.1;               // s; shortest route accepted
  double max_event_fraction = 0.5;        // cap on turn+reverse time share
  std::uint64_t seed = 1;

  double duration() const { return distance / velocity; }
  void validate() const;
};

/// Random turn/reverse events on a GoStraight background. Counts are
/// uniform in [0, max_times], durations uniform in (0, max_duration];
/// if the events would not fit they are shrunk proportionally.
std::vector<ScenarioSegment> build_scenario_schedule(const RouteConfig& route,
                                                     Rng& rng);

/// Scenario active at time t (last segment for t past the end).
Scenario scenario_at(std::span<const ScenarioSegment> schedule, double t);

/// Velocities fed to the safety distance model for each scenario.
struct SafetyTimePolicy {
  RssParams rss;                            // accelerations used
  double turn_velocity = kmh_to_ms(50.0);   // m/s
  std::optional<double> reverse_velocity;   // m/s, default: area velocity
  // Used when a camera's range is below the zero-response floor.
  double insufficient_range_time = 0.1;     // s
  bool error_on_insufficient_range = false;
};

/// Safety time per (scenario, camera group) for one driving area.
class SafetyTimeTable {
 public:
  SafetyTimeTable() = default;
  SafetyTimeTable(const DrivingArea& area,
                  std::span<const CameraGroup> cameras,
                  const SafetyTimePolicy& policy);

  double at(Scenario s, CameraKind c) const {
    return table_[index_of(s)][index_of(c)];
  }

 private:
  std::array<std::array<double, 6>, 3> table_{};
};

/// Velocity used for the safety time of a scenario in `area`.
double scenario_velocity(const DrivingArea& area, Scenario s,
                         const SafetyTimePolicy& policy);

/// Frames at 1/fps from each segment start. Every frame yields a DET task
/// (YOLO/SSD alternating per camera) and, except for rear cameras outside
/// Reverse, a GOTURN TRA task depending on it. Sorted by capture time.
std::vector<TaskRecord> generate_task_queue(
    const RouteConfig& route, std::span<const ScenarioSegment> schedule,
    std::span<const CameraGroup> cameras, const FrameRateMatrix& matrix,
    const SafetyTimeTable& safety);

/// JSON lines, one task per line.
void write_queue_jsonl(std::ostream& out, std::span<const TaskRecord> queue);
std::vector<TaskRecord> read_queue_jsonl(std::istream& in);

/// Fixed notation, shortest round-trip digits, at least six decimals.
std::string format_seconds(double t);

}  // namespace hmai
