#include "hmai/platform.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace hmai {

std::string_view to_string(ProcessingStyle s) {
  switch (s) {
    case ProcessingStyle::Sconv: return "Sconv";
    case ProcessingStyle::SSconv: return "SSconv";
    case ProcessingStyle::Mconv: return "Mconv";
  }
  return "?";
}

std::string_view to_string(Propagation p) {
  switch (p) {
    case Propagation::OP: return "OP";
    case Propagation::IP: return "IP";
    case Propagation::MP: return "MP";
  }
  return "?";
}

std::string_view to_string(RegisterAllocation r) {
  return r == RegisterAllocation::DR ? "DR" : "CR";
}

// Energy coefficients in J/GMAC, order YOLO, SSD, GOTURN.
AcceleratorKind sconv_od() {
  return {"SconvOD",
          ProcessingStyle::Sconv,
          Propagation::OP,
          RegisterAllocation::DR,
          {170.37, 74.99, 352.69},
          {0.0030, 0.0068, 0.0050},
          0.0};
}

AcceleratorKind sconv_ic() {
  return {"SconvIC",
          ProcessingStyle::SSconv,
          Propagation::IP,
          RegisterAllocation::CR,
          {132.54, 82.94, 350.34},
          {0.0046, 0.0050, 0.0059},
          0.0};
}

AcceleratorKind mconv_mc() {
  return {"MconvMC",
          ProcessingStyle::Mconv,
          Propagation::MP,
          RegisterAllocation::CR,
          {149.32, 82.57, 500.54},
          {0.0080, 0.0041, 0.0045},
          0.0};
}

double exec_time(Model m, const AcceleratorKind& kind) {
  const double fps = kind.fps_for(m);
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw DomainError("accelerator kind " + kind.name + " cannot run model " +
                      std::string(to_string(m)));
  }
  return 1.0 / fps;
}

double exec_energy(const TaskRecord& task, const AcceleratorKind& kind) {
  return task.amount * kind.energy_per_gmac[index_of(task.model)];
}

void PlatformConfig::validate() const {
  if (instances.empty()) throw ConfigError("platform has no accelerators");
  for (const auto& kc : instances) {
    if (kc.count < 0) throw ConfigError("negative accelerator count");
    for (double f : kc.kind.fps) {
      if (!(f > 0.0)) {
        throw ConfigError("accelerator kind " + kc.kind.name +
                          " needs positive fps for every model");
      }
    }
    for (double e : kc.kind.energy_per_gmac) {
      if (!(e >= 0.0)) {
        throw ConfigError("energy coefficients must be non-negative");
      }
    }
  }
  if (total() < 1) throw ConfigError("platform has no accelerators");
}

int PlatformConfig::total() const {
  int n = 0;
  for (const auto& kc : instances) n += kc.count;
  return n;
}

PlatformConfig hmai_platform() {
  return {"hmai", {{sconv_od(), 4}, {sconv_ic(), 4}, {mconv_mc(), 3}}};
}

PlatformConfig homogeneous_platform(const AcceleratorKind& kind, int count) {
  std::string name = "homo-" + kind.name;
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return {name, {{kind, count}}};
}

PlatformConfig platform_preset(std::string_view name) {
  if (name == "hmai") return hmai_platform();
  if (name == "homo-sconvod") return homogeneous_platform(sconv_od(), 13);
  if (name == "homo-sconvic") return homogeneous_platform(sconv_ic(), 13);
  if (name == "homo-mconvmc") return homogeneous_platform(mconv_mc(), 12);
  throw ConfigError("unknown platform preset '" + std::string(name) + "'");
}

std::vector<std::string> platform_preset_names() {
  return {"hmai", "homo-sconvod", "homo-sconvic", "homo-mconvmc"};
}

std::vector<AcceleratorState> build_platform(const PlatformConfig& config) {
  config.validate();
  std::vector<AcceleratorState> states;
  std::vector<std::string> seen;
  for (const auto& kc : config.instances) {
    auto it = std::find(seen.begin(), seen.end(), kc.kind.name);
    const auto kind = static_cast<std::size_t>(it - seen.begin());
    if (it == seen.end()) seen.push_back(kc.kind.name);
    for (int c = 0; c < kc.count; ++c) {
      AcceleratorState s;
      s.index = states.size();
      s.kind = kind;
      states.push_back(s);
    }
  }
  return states;
}

Platform::Platform(const PlatformConfig& config, CriteriaSettings settings)
    : name_(config.name), settings_(settings) {
  accels_ = build_platform(config);
  auto kinds = std::make_shared<std::vector<AcceleratorKind>>();
  for (const auto& kc : config.instances) {
    const bool known =
        std::any_of(kinds->begin(), kinds->end(),
                    [&](const auto& k) { return k.name == kc.kind.name; });
    if (!known) kinds->push_back(kc.kind);
  }
  kinds_ = std::move(kinds);
}

PlatformSummary Platform::summary() const {
  PlatformSummary s;
  if (accels_.empty()) return s;
  double r_sum = 0.0;
  for (const auto& a : accels_) {
    s.energy += a.info.energy;
    s.time = std::max(s.time, a.info.time);
    r_sum += a.info.r_balance;
    s.ms += a.info.ms;
  }
  s.r_balance = r_sum / static_cast<double>(accels_.size());
  return s;
}

double Platform::predicted_start(std::size_t accel, double dispatch_time,
                                 double overhead) const {
  return std::max(dispatch_time + overhead, accels_[accel].busy_until);
}

double Platform::predicted_completion(const TaskRecord& task,
                                      std::size_t accel, double dispatch_time,
                                      double overhead) const {
  return predicted_start(accel, dispatch_time, overhead) +
         exec_time(task.model, kind_of(accel));
}

double Platform::busy_fraction(std::size_t accel, double now) const {
  std::size_t busy = 0;
  for (const auto& a : accels_) {
    if (a.index == accel || a.busy_until > now) ++busy;
  }
  return static_cast<double>(busy) / static_cast<double>(accels_.size());
}

TaskOutcome Platform::commit(const TaskRecord& task, std::size_t accel,
                             double release_time, double dispatch_time,
                             double overhead) {
  if (accel >= accels_.size()) {
    throw DomainError("scheduler returned accelerator index " +
                      std::to_string(accel) + " on a platform of " +
                      std::to_string(accels_.size()));
  }
  const AcceleratorKind& kind = kind_of(accel);
  TaskOutcome o;
  o.task_id = task.id;
  o.accelerator = accel;
  o.task_kind = task.task_kind;
  o.model = task.model;
  o.capture_time = task.capture_time;
  o.safety_time = task.safety_time;
  o.release_time = release_time;
  o.dispatch_time = dispatch_time;
  o.sched_overhead = overhead;
  o.r = busy_fraction(accel, dispatch_time);
  o.start_time = predicted_start(accel, dispatch_time, overhead);
  o.t = exec_time(task.model, kind);
  o.completion_time = o.start_time + o.t;
  o.response_time = o.completion_time - task.capture_time;
  o.e = exec_energy(task, kind);
  o.ms = task.task_kind == TaskKind::DET
             ? matching_score_det(o.response_time, task.safety_time)
             : matching_score_tra(o.response_time, task.safety_time);

  const PlatformSummary before = summary();
  AcceleratorState& state = accels_[accel];
  state.busy_until = o.completion_time;
  state.info = update_hw_info(state.info, o.e, o.t, o.ms, o.r,
                              settings_.rbalance_mode);
  o.reward = reward(before, summary(), settings_.norm);
  return o;
}

}  // namespace hmai
