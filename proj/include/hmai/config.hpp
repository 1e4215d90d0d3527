#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmai/envgen.hpp"
#include "hmai/flexai.hpp"
#include "hmai/platform.hpp"
#include "hmai/sched.hpp"

namespace hmai {

/// Flat "section.key" -> value map. Later sources override earlier ones:
/// defaults < INI file < HMAI_SECTION_KEY environment < command line.
using Settings = std::map<std::string, std::string>;

/// Every accepted key with its default value (empty = unset/optional).
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// INI file into settings. Unknown keys are collected and reported together.
Settings read_config_file(const std::string& path);
Settings parse_config_text(const std::string& text);

/// HMAI_ROUTE_AREA overrides route.area etc.
using EnvLookup = std::function<const char*(const char*)>;
void apply_env_overrides(Settings& s, const EnvLookup& getenv_fn);
void apply_env_overrides(Settings& s);

/// Throws ConfigError naming every key that is not in config_keys().
void check_keys(const Settings& s);

/// All keys with defaults filled in.
Settings resolve(const Settings& s);

struct BrakeSettings {
  std::optional<double> velocity;          // m/s; default: area velocity
  double deceleration = 6.2;               // m/s^2
  std::optional<double> trigger_distance;  // m; default: route end
  double t_data = 0.001;
  double t_mech = 0.019;
  std::optional<double> camera_range;      // m; default: forward range
};

struct TrainSettings {
  std::size_t episodes = 200;
  double distance = 100.0;  // m, per training route
  std::uint64_t seed = 1000;
};

struct ExperimentConfig {
  RouteConfig route;
  std::vector<CameraGroup> cameras;
  FrameRateMatrix framerate;
  SafetyTimePolicy safety;
  std::string platform_preset = "hmai";
  PlatformConfig platform;
  RBalanceMode rbalance_mode = RBalanceMode::Recursive;
  double sched_overhead = 0.0;
  double window = 0.05;
  std::uint64_t sched_seed = 1;
  GaParams ga;
  SaParams sa;
  AgentConfig agent;
  TrainSettings train;
  BrakeSettings brake;
  Settings resolved;  // snapshot of every key
};

ExperimentConfig build_config(const Settings& s);

/// Named preset with the configured counts and coefficient overrides.
PlatformConfig platform_from(const Settings& resolved,
                             const std::string& preset);

/// Route of the same area with a different length/seed (training episodes).
RouteConfig route_variant(const ExperimentConfig& cfg, double distance,
                          std::uint64_t seed);

/// Safety times for cfg's area.
SafetyTimeTable safety_table(const ExperimentConfig& cfg);

/// Schedule plus queue for one route.
struct GeneratedQueue {
  std::vector<ScenarioSegment> schedule;
  std::vector<TaskRecord> tasks;
};
GeneratedQueue generate(const ExperimentConfig& cfg, const RouteConfig& route);

std::unique_ptr<SchedulerPolicy> make_scheduler(
    const std::string& name, const ExperimentConfig& cfg,
    const std::optional<AgentWeights>& weights);

const std::vector<std::string>& scheduler_names();

}  // namespace hmai
