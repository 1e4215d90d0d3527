#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmai/common.hpp"
#include "hmai/criteria.hpp"
#include "hmai/task.hpp"

namespace hmai {

// Accelerator taxonomy: how much of a 2D convolution one iteration covers,
// how partial sums propagate, and how registers are allocated.
enum class ProcessingStyle { Sconv, SSconv, Mconv };
enum class Propagation { OP, IP, MP };
enum class RegisterAllocation { DR, CR };

std::string_view to_string(ProcessingStyle s);
std::string_view to_string(Propagation p);
std::string_view to_string(RegisterAllocation r);

struct AcceleratorKind {
  std::string name;
  ProcessingStyle style = ProcessingStyle::Sconv;
  Propagation propagation = Propagation::OP;
  RegisterAllocation reg = RegisterAllocation::DR;
  std::array<double, kNumModels> fps{};              // frames/s per Model
  std::array<double, kNumModels> energy_per_gmac{};  // J per giga-MAC
  double idle_power = 0.0;                           // W

  double fps_for(Model m) const { return fps[index_of(m)]; }
};

AcceleratorKind sconv_od();
AcceleratorKind sconv_ic();
AcceleratorKind mconv_mc();

/// Execution time of one frame of `m` on `kind` (1 / fps).
double exec_time(Model m, const AcceleratorKind& kind);

/// MAC-proportional execution energy.
double exec_energy(const TaskRecord& task, const AcceleratorKind& kind);

struct KindCount {
  AcceleratorKind kind;
  int count = 0;
};

struct PlatformConfig {
  std::string name;
  std::vector<KindCount> instances;

  void validate() const;
  int total() const;
};

PlatformConfig hmai_platform();
PlatformConfig homogeneous_platform(const AcceleratorKind& kind, int count);

/// Named presets: hmai, homo-sconvod, homo-sconvic, homo-mconvmc.
PlatformConfig platform_preset(std::string_view name);
std::vector<std::string> platform_preset_names();

/// Live per-accelerator state. FIFO order is implied by busy_until: every
/// new task starts no earlier than the previous one finished.
struct AcceleratorState {
  std::size_t index = 0;
  std::size_t kind = 0;  // index into Platform::kinds()
  double busy_until = 0.0;
  HwInfo info;
};

/// Everything the simulator records about one executed task.
struct TaskOutcome {
  std::int64_t task_id = 0;
  std::size_t accelerator = 0;
  TaskKind task_kind = TaskKind::DET;
  Model model = Model::YOLO;
  double capture_time = 0.0;
  double safety_time = 0.0;
  double release_time = 0.0;
  double dispatch_time = 0.0;
  double sched_overhead = 0.0;
  double start_time = 0.0;
  double completion_time = 0.0;
  double response_time = 0.0;
  double ms = 0.0;
  double e = 0.0;
  double t = 0.0;
  double r = 0.0;
  double reward = 0.0;

  bool met_deadline() const { return response_time <= safety_time; }
};

struct CriteriaSettings {
  NormalizationScales norm;
  RBalanceMode rbalance_mode = RBalanceMode::Recursive;
};

/// A platform instance: accelerator kinds, their live states, and the
/// criteria used to score each committed task.
class Platform {
 public:
  Platform() = default;
  Platform(const PlatformConfig& config, CriteriaSettings settings);

  std::size_t size() const { return accels_.size(); }
  std::span<const AcceleratorState> accelerators() const { return accels_; }
  const AcceleratorState& accelerator(std::size_t i) const {
    return accels_.at(i);
  }
  const std::vector<AcceleratorKind>& kinds() const { return *kinds_; }
  const AcceleratorKind& kind_of(std::size_t i) const {
    return (*kinds_)[accels_.at(i).kind];
  }
  const CriteriaSettings& settings() const { return settings_; }
  void set_norm(const NormalizationScales& norm) { settings_.norm = norm; }
  const std::string& name() const { return name_; }

  PlatformSummary summary() const;

  /// Predicted start and completion if `task` were dispatched to `accel`.
  double predicted_start(std::size_t accel, double dispatch_time,
                         double overhead) const;
  double predicted_completion(const TaskRecord& task, std::size_t accel,
                              double dispatch_time, double overhead) const;

  /// Fraction of accelerators busy at `now`, counting `accel` as busy.
  double busy_fraction(std::size_t accel, double now) const;

  /// Appends `task` to the FIFO of `accel` and folds its outcome into the
  /// accelerator's HW-Info. Completion is fully determined at dispatch
  /// (FIFO, no preemption), so the HW-Info update is applied here.
  TaskOutcome commit(const TaskRecord& task, std::size_t accel,
                     double release_time, double dispatch_time,
                     double overhead);

 private:
  std::string name_;
  std::shared_ptr<const std::vector<AcceleratorKind>> kinds_;
  std::vector<AcceleratorState> accels_;
  CriteriaSettings settings_;
};

/// Zero-initialized accelerator states in config order.
std::vector<AcceleratorState> build_platform(const PlatformConfig& config);

}  // namespace hmai
