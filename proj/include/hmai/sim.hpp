#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmai/envgen.hpp"
#include "hmai/platform.hpp"
#include "hmai/task.hpp"

namespace hmai {

class SchedulerPolicy;

struct EpisodeSummary {
  double energy = 0.0;
  double time = 0.0;  // max_i T_i
  double r_balance = 0.0;
  double ms = 0.0;
  double makespan = 0.0;
  double utilization = 0.0;
  double stm_rate = 0.0;
  double mean_response = 0.0;
  double total_reward = 0.0;
  std::size_t tasks = 0;
};

struct EpisodeReport {
  std::string scheduler;
  std::string platform;
  std::uint64_t seed = 0;
  NormalizationScales norm;
  RBalanceMode rbalance_mode = RBalanceMode::Recursive;
  std::size_t num_accelerators = 0;
  std::vector<TaskOutcome> records;  // commit order
  std::vector<double> accelerator_busy;
  EpisodeSummary summary;
  double scheduler_wall_seconds = 0.0;  // not part of deterministic output
};

struct BrakingConfig {
  double velocity = kmh_to_ms(60.0);  // m/s
  double deceleration = 6.2;          // m/s^2
  std::int64_t trigger_task_id = 0;
  double t_data = 0.001;  // CAN bus transfer
  double t_mech = 0.019;  // actuator reaction
  double camera_range = 250.0;
};

struct BrakingReport {
  std::int64_t trigger_task_id = 0;
  double t_wait = 0.0;
  double t_schedule = 0.0;
  double t_compute = 0.0;
  double t_data = 0.0;
  double t_mech = 0.0;
  double total_braking_time = 0.0;
  double braking_distance = 0.0;
  double camera_range = 0.0;
  bool safe = true;
};

/// A task that has become schedulable.
struct Released {
  std::size_t index = 0;  // position in the queue
  double release_time = 0.0;
};

/// Step-wise discrete-event engine: tasks are released at their capture
/// time (tracking tasks once their detection has completed) and handed
/// out in (release time, id) order.
class Engine {
 public:
  Engine(std::span<const TaskRecord> queue, Platform platform,
         double sched_overhead = 0.0);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  bool done() const { return pending_.empty(); }
  double next_release_time() const { return pending_.top().release_time; }
  const TaskRecord& next_task() const { return queue_[pending_.top().index]; }
  const TaskRecord& task(const Released& r) const { return queue_[r.index]; }

  Released take();
  const TaskOutcome& dispatch(const Released& r, std::size_t accel,
                              double dispatch_time);

  const Platform& platform() const { return platform_; }
  double overhead() const { return overhead_; }
  const std::vector<TaskOutcome>& outcomes() const { return outcomes_; }
  std::size_t remaining() const { return queue_.size() - outcomes_.size(); }

  /// Throws DomainError if tasks were never released (dependency cycle).
  void check_complete() const;

 private:
  struct Later {
    const std::vector<TaskRecord>* q;
    bool operator()(const Released& a, const Released& b) const {
      if (a.release_time != b.release_time) {
        return a.release_time > b.release_time;
      }
      return (*q)[a.index].id > (*q)[b.index].id;
    }
  };

  std::vector<TaskRecord> queue_;
  std::vector<std::vector<std::size_t>> dependents_;
  std::priority_queue<Released, std::vector<Released>, Later> pending_;
  Platform platform_;
  double overhead_ = 0.0;
  std::vector<TaskOutcome> outcomes_;
};

struct RunOptions {
  double sched_overhead = 0.0;
  std::uint64_t seed = 0;
  std::vector<ScenarioSegment> schedule;  // needed by the static allocation
};

/// Replays `queue` on `platform` under `policy`.
EpisodeReport run_episode(std::span<const TaskRecord> queue, Platform platform,
                          SchedulerPolicy& policy, const RunOptions& opts = {});

/// Aggregates recomputed from the per-task records.
EpisodeSummary summarize(std::span<const TaskOutcome> records,
                         std::size_t num_accelerators, RBalanceMode mode,
                         std::vector<double>* busy = nullptr);

double stm_rate(const EpisodeReport& report);
double utilization_rate(const EpisodeReport& report);

BrakingReport braking_report(const EpisodeReport& report,
                             const BrakingConfig& cfg);

/// The forward-camera detection frame that sees the obstacle: the latest
/// FC DET captured at or before `trigger_time`.
std::int64_t find_trigger_task(std::span<const TaskRecord> queue,
                               double trigger_time);

/// Scales for Gvalue taken from a worst-case run of the same queue.
NormalizationScales calibrate_norm(std::span<const TaskRecord> queue,
                                   const PlatformConfig& config,
                                   RBalanceMode mode);

}  // namespace hmai
