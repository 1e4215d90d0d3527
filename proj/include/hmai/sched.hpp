#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmai/platform.hpp"
#include "hmai/task.hpp"

namespace hmai {

/// What a policy may look at when deciding: the current HW-Info and queue
/// state, the decision instant and the scheduling overhead.
struct PlatformView {
  const Platform* platform = nullptr;
  double now = 0.0;
  double overhead = 0.0;
  std::optional<Scenario> scenario;  // scenario at the task's capture time

  const Platform& p() const { return *platform; }
};

class SchedulerPolicy {
 public:
  virtual ~SchedulerPolicy() = default;

  virtual std::string name() const = 0;

  /// Length of the batching window in seconds; 0 means decide per task.
  virtual double window() const { return 0.0; }

  virtual std::size_t decide(const TaskRecord& task,
                             const PlatformView& view) = 0;

  /// Batch decision for window policies; all tasks are dispatched at
  /// view.now in the given order.
  virtual std::vector<std::size_t> decide_window(
      std::span<const TaskRecord> tasks, const PlatformView& view);

  /// Called at the start of every episode.
  virtual void reset() {}
};

std::size_t minmin_choose(const TaskRecord& task, const PlatformView& view);
std::size_t ata_choose(const TaskRecord& task, const PlatformView& view);
std::size_t worstcase_choose(const TaskRecord& task, const PlatformView& view);

struct GaParams {
  int population = 50;
  int generations = 100;
  double mutation_rate = 0.05;
  int elitism = 2;
  int tournament = 3;
};

struct SaParams {
  double alpha = 0.95;
  int iterations = 2000;
  int initial_samples = 20;
  std::optional<double> initial_temperature;  // default: stddev of samples
};

/// Sum of per-task rewards of dispatching `tasks` in order at view.now
/// with `assignment`, on a scratch copy of the platform.
double window_fitness(std::span<const TaskRecord> tasks,
                      std::span<const std::size_t> assignment,
                      const PlatformView& view);

std::vector<std::size_t> ga_schedule_window(std::span<const TaskRecord> tasks,
                                            const PlatformView& view, Rng& rng,
                                            const GaParams& params);

std::vector<std::size_t> sa_schedule_window(std::span<const TaskRecord> tasks,
                                            const PlatformView& view, Rng& rng,
                                            const SaParams& params);

/// Static per-scenario allocation for (4 SconvOD, 4 SconvIC, 3 MconvMC):
/// each (model, scenario) stream round-robins over its own subset.
class StaticAllocation {
 public:
  explicit StaticAllocation(const Platform& platform);

  const std::vector<std::size_t>& subset(Model m, Scenario s) const;
  std::size_t choose(const TaskRecord& task, Scenario s);
  void reset() { cursor_ = {}; }

 private:
  std::array<std::array<std::vector<std::size_t>, 3>, 3> subsets_;
  std::array<std::array<std::size_t, 3>, 3> cursor_{};
};

std::size_t static_choose(const TaskRecord& task, Scenario scenario,
                                 StaticAllocation& allocation);

class MinMinScheduler : public SchedulerPolicy {
 public:
  std::string name() const override { return "minmin"; }
  std::size_t decide(const TaskRecord& t, const PlatformView& v) override {
    return minmin_choose(t, v);
  }
};

class AtaScheduler : public SchedulerPolicy {
 public:
  std::string name() const override { return "ata"; }
  std::size_t decide(const TaskRecord& t, const PlatformView& v) override {
    return ata_choose(t, v);
  }
};

class WorstCaseScheduler : public SchedulerPolicy {
 public:
  std::string name() const override { return "worst"; }
  std::size_t decide(const TaskRecord& t, const PlatformView& v) override {
    return worstcase_choose(t, v);
  }
};

class StaticScheduler : public SchedulerPolicy {
 public:
  std::string name() const override { return "static"; }
  std::size_t decide(const TaskRecord& t, const PlatformView& v) override;
  void reset() override { alloc_.reset(); }

 private:
  std::unique_ptr<StaticAllocation> alloc_;
};

class GaScheduler : public SchedulerPolicy {
 public:
  GaScheduler(GaParams params, double window, std::uint64_t seed);
  std::string name() const override { return "ga"; }
  double window() const override { return window_; }
  std::size_t decide(const TaskRecord& t, const PlatformView& v) override;
  std::vector<std::size_t> decide_window(std::span<const TaskRecord> tasks,
                                         const PlatformView& view) override;
  void reset() override { rng_.seed(seed_); }

 private:
  GaParams params_;
  double window_;
  std::uint64_t seed_;
  Rng rng_;
};

class SaScheduler : public SchedulerPolicy {
 public:
  SaScheduler(SaParams params, double window, std::uint64_t seed);
  std::string name() const override { return "sa"; }
  double window() const override { return window_; }
  std::size_t decide(const TaskRecord& t, const PlatformView& v) override;
  std::vector<std::size_t> decide_window(std::span<const TaskRecord> tasks,
                                         const PlatformView& view) override;
  void reset() override { rng_.seed(seed_); }

 private:
  SaParams params_;
  double window_;
  std::uint64_t seed_;
  Rng rng_;
};

}  // namespace hmai
