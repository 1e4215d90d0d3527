#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hmai/config.hpp"
#include "hmai/report.hpp"

namespace hmai {

enum class OutputFormat { Json, Csv, Text };
OutputFormat parse_format(std::string_view s);

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> area;
  std::optional<std::size_t> episodes;
  std::vector<std::string> schedulers;
  std::vector<std::string> platforms;
  std::optional<std::string> weights;
  std::optional<std::string> queue;
  std::string out;  // empty: stdout
  OutputFormat format = OutputFormat::Text;
  std::vector<std::string> overrides;  // "section.key=value"
  bool use_env = true;
};

/// File, environment, then --set/--seed/--area/--episodes.
ExperimentConfig load_experiment(const CommandOptions& o);

/// A queue plus whatever the generator knew about its route.
struct LoadedQueue {
  std::vector<TaskRecord> tasks;
  std::vector<ScenarioSegment> schedule;  // empty if unknown
  double duration = 0.0;
  double velocity = 0.0;
  std::string source;  // path or "generated"
};
LoadedQueue load_or_generate_queue(const CommandOptions& o,
                                   const ExperimentConfig& cfg);

/// gen: queue JSON lines at o.out plus <out>.manifest.json.
void cmd_gen(const CommandOptions& o, std::ostream& log);

/// train: weights at o.out, <out>.loss.csv and <out>.manifest.json.
TrainResult cmd_train(const CommandOptions& o, std::ostream& log);

/// run: one scheduler, full report.
EpisodeReport cmd_run(const CommandOptions& o, std::ostream& stdout_stream);

/// compare: every (platform, scheduler) pair on the same queue.
std::vector<EpisodeReport> cmd_compare(const CommandOptions& o,
                                       std::ostream& stdout_stream);

/// brake: braking breakdown per scheduler for the trigger frame.
std::vector<BrakingRow> cmd_brake(const CommandOptions& o,
                                  std::ostream& stdout_stream);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDomain = 4;

}  // namespace hmai
