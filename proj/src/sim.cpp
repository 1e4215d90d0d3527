#include "hmai/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hmai/sched.hpp"

namespace hmai {

Engine::Engine(std::span<const TaskRecord> queue, Platform platform,
               double sched_overhead)
    : queue_(queue.begin(), queue.end()),
      dependents_(queue.size()),
      pending_(Later{&queue_}),
      platform_(std::move(platform)),
      overhead_(sched_overhead) {
  if (!(sched_overhead >= 0.0)) {
    throw ConfigError("scheduler overhead must be non-negative");
  }
  std::unordered_map<std::int64_t, std::size_t> by_id;
  by_id.reserve(queue_.size());
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    if (i > 0 && queue_[i].capture_time < queue_[i - 1].capture_time) {
      throw DomainError("task queue is not sorted by capture time");
    }
    if (!by_id.emplace(queue_[i].id, i).second) {
      throw DomainError("duplicate task id " + std::to_string(queue_[i].id));
    }
  }
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    if (!queue_[i].depends_on) {
      pending_.push({i, queue_[i].capture_time});
      continue;
    }
    auto it = by_id.find(*queue_[i].depends_on);
    if (it == by_id.end()) {
      throw DomainError("task " + std::to_string(queue_[i].id) +
                        " depends on unknown task " +
                        std::to_string(*queue_[i].depends_on));
    }
    dependents_[it->second].push_back(i);
  }
  outcomes_.reserve(queue_.size());
}

Released Engine::take() {
  Released r = pending_.top();
  pending_.pop();
  return r;
}

const TaskOutcome& Engine::dispatch(const Released& r, std::size_t accel,
                                    double dispatch_time) {
  const TaskRecord& t = queue_[r.index];
  outcomes_.push_back(
      platform_.commit(t, accel, r.release_time, dispatch_time, overhead_));
  const TaskOutcome& o = outcomes_.back();
  for (std::size_t dep : dependents_[r.index]) {
    pending_.push(
        {dep, std::max(queue_[dep].capture_time, o.completion_time)});
  }
  return o;
}

void Engine::check_complete() const {
  if (outcomes_.size() != queue_.size()) {
    throw DomainError(std::to_string(queue_.size() - outcomes_.size()) +
                      " tasks were never released (dependency cycle)");
  }
}

EpisodeSummary summarize(std::span<const TaskOutcome> records,
                         std::size_t num_accelerators, RBalanceMode mode,
                         std::vector<double>* busy) {
  EpisodeSummary s;
  s.tasks = records.size();
  std::vector<HwInfo> infos(num_accelerators);
  if (busy) busy->assign(num_accelerators, 0.0);
  if (records.empty() || num_accelerators == 0) return s;

  double first_release = records.front().release_time;
  double last_completion = 0.0;
  std::size_t met = 0;
  double response_sum = 0.0;
  for (const auto& o : records) {
    infos[o.accelerator] =
        update_hw_info(infos[o.accelerator], o.e, o.t, o.ms, o.r, mode);
    first_release = std::min(first_release, o.release_time);
    last_completion = std::max(last_completion, o.completion_time);
    if (o.met_deadline()) ++met;
    response_sum += o.response_time;
    s.total_reward += o.reward;
  }
  double r_sum = 0.0;
  double busy_sum = 0.0;
  for (std::size_t i = 0; i < num_accelerators; ++i) {
    s.energy += infos[i].energy;
    s.time = std::max(s.time, infos[i].time);
    r_sum += infos[i].r_balance;
    s.ms += infos[i].ms;
    busy_sum += infos[i].time;
    if (busy) (*busy)[i] = infos[i].time;
  }
  const auto n = static_cast<double>(num_accelerators);
  s.r_balance = r_sum / n;
  s.makespan = last_completion - first_release;
  s.utilization = s.makespan > 0.0 ? busy_sum / (n * s.makespan) : 0.0;
  s.stm_rate = static_cast<double>(met) / static_cast<double>(records.size());
  s.mean_response = response_sum / static_cast<double>(records.size());
  return s;
}

EpisodeReport run_episode(std::span<const TaskRecord> queue, Platform platform,
                          SchedulerPolicy& policy, const RunOptions& opts) {
  EpisodeReport report;
  report.scheduler = policy.name();
  report.platform = platform.name();
  report.seed = opts.seed;
  report.norm = platform.settings().norm;
  report.rbalance_mode = platform.settings().rbalance_mode;
  report.num_accelerators = platform.size();

  Engine engine(queue, std::move(platform), opts.sched_overhead);
  policy.reset();
  using Clock = std::chrono::steady_clock;
  Clock::duration wall{};

  PlatformView view;
  view.platform = &engine.platform();
  view.overhead = engine.overhead();

  const double window = policy.window();
  std::vector<Released> batch;
  std::vector<TaskRecord> batch_tasks;
  while (!engine.done()) {
    if (window <= 0.0) {
      const Released r = engine.take();
      const TaskRecord& t = engine.task(r);
      view.now = r.release_time;
      view.scenario.reset();
      if (!opts.schedule.empty()) {
        view.scenario = scenario_at(opts.schedule, t.capture_time);
      }
      const auto t0 = Clock::now();
      const std::size_t accel = policy.decide(t, view);
      wall += Clock::now() - t0;
      engine.dispatch(r, accel, r.release_time);
      continue;
    }
    const double next = engine.next_release_time();
    double close = (std::floor(next / window) + 1.0) * window;
    if (close <= next) close += window;
    batch.clear();
    batch_tasks.clear();
    while (!engine.done() && engine.next_release_time() < close) {
      batch.push_back(engine.take());
      batch_tasks.push_back(engine.task(batch.back()));
    }
    view.now = close;
    view.scenario.reset();
    const auto t0 = Clock::now();
    const auto assignment = policy.decide_window(batch_tasks, view);
    wall += Clock::now() - t0;
    if (assignment.size() != batch.size()) {
      throw DomainError("window policy returned wrong assignment size");
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      engine.dispatch(batch[i], assignment[i], close);
    }
  }
  engine.check_complete();

  report.records = engine.outcomes();
  report.summary = summarize(report.records, report.num_accelerators,
                             report.rbalance_mode, &report.accelerator_busy);
  report.scheduler_wall_seconds =
      std::chrono::duration<double>(wall).count();
  return report;
}

double stm_rate(const EpisodeReport& report) {
  if (report.records.empty()) {
    throw DomainError("STMRate of an empty report is undefined");
  }
  std::size_t met = 0;
  for (const auto& o : report.records) {
    if (o.met_deadline()) ++met;
  }
  return static_cast<double>(met) /
         static_cast<double>(report.records.size());
}

double utilization_rate(const EpisodeReport& report) {
  const double makespan = report.summary.makespan;
  if (!(makespan > 0.0) || report.num_accelerators == 0) return 0.0;
  double busy = 0.0;
  for (double b : report.accelerator_busy) busy += b;
  return busy / (static_cast<double>(report.num_accelerators) * makespan);
}

BrakingReport braking_report(const EpisodeReport& report,
                             const BrakingConfig& cfg) {
  if (!(cfg.deceleration > 0.0) || !(cfg.velocity >= 0.0)) {
    throw ConfigError("braking needs velocity >= 0 and deceleration > 0");
  }
  auto it = std::find_if(
      report.records.begin(), report.records.end(),
      [&](const TaskOutcome& o) { return o.task_id == cfg.trigger_task_id; });
  if (it == report.records.end()) {
    throw DomainError("trigger task " + std::to_string(cfg.trigger_task_id) +
                      " not found in report");
  }
  BrakingReport b;
  b.trigger_task_id = cfg.trigger_task_id;
  b.t_schedule = it->sched_overhead;
  b.t_wait = it->start_time - it->release_time - it->sched_overhead;
  b.t_compute = it->t;
  b.t_data = cfg.t_data;
  b.t_mech = cfg.t_mech;
  b.total_braking_time =
      b.t_wait + b.t_schedule + b.t_compute + b.t_data + b.t_mech;
  const double v = cfg.velocity;
  b.braking_distance =
      v * b.total_braking_time + v * v / (2.0 * cfg.deceleration);
  b.camera_range = cfg.camera_range;
  b.safe = b.braking_distance < cfg.camera_range;
  return b;
}

std::int64_t find_trigger_task(std::span<const TaskRecord> queue,
                               double trigger_time) {
  const TaskRecord* best = nullptr;
  for (const auto& t : queue) {
    if (t.capture_time > trigger_time) break;
    if (t.group != CameraKind::FC || t.task_kind != TaskKind::DET) continue;
    if (!best || t.capture_time > best->capture_time) best = &t;
  }
  if (!best) {
    throw DomainError("no forward-camera detection at or before t = " +
                      std::to_string(trigger_time) + " s (trigger not found)");
  }
  return best->id;
}

NormalizationScales calibrate_norm(std::span<const TaskRecord> queue,
                                   const PlatformConfig& config,
                                   RBalanceMode mode) {
  WorstCaseScheduler worst;
  const auto report =
      run_episode(queue, Platform(config, {NormalizationScales{}, mode}),
                  worst);
  NormalizationScales norm;
  if (report.summary.energy > 0.0) norm.energy_ref = report.summary.energy;
  if (report.summary.time > 0.0) norm.time_ref = report.summary.time;
  return norm;
}

}  // namespace hmai
