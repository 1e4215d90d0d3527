#pragma once

#include <iosfwd>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "hmai/config.hpp"
#include "hmai/sim.hpp"

namespace hmai {

/// Provenance attached to every emitted artifact.
struct RunManifest {
  std::string command;
  Settings config;  // resolved snapshot
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> artifacts;
  std::string tool_version = std::string(kToolVersion);
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EpisodeSummary& s);
nlohmann::json to_json(const TaskOutcome& o);
nlohmann::json to_json(const BrakingReport& b);
nlohmann::json to_json(const ScenarioSegment& s);
ScenarioSegment segment_from_json(const nlohmann::json& j);

/// Summary, normalization and (optionally) the per-task records. Wall-clock
/// is left out on purpose.
nlohmann::json report_json(const EpisodeReport& r, bool with_records);

/// One row per task.
void write_records_csv(std::ostream& out, const EpisodeReport& r);

/// Aligned text table / CSV of summary rows.
struct SummaryRow {
  std::string platform;
  std::string scheduler;
  EpisodeSummary summary;
};
void write_summary_text(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

struct BrakingRow {
  std::string scheduler;
  BrakingReport report;
  EpisodeSummary summary;
};
void write_braking_text(std::ostream& out, const std::vector<BrakingRow>& rows);
void write_braking_csv(std::ostream& out, const std::vector<BrakingRow>& rows);

/// Sidecar written next to a generated queue: manifest plus the scenario
/// schedule and route duration.
struct QueueManifest {
  RunManifest run;
  std::vector<ScenarioSegment> schedule;
  double duration = 0.0;
  double velocity = 0.0;
};
std::string queue_manifest_path(const std::string& queue_path);
void write_queue_manifest(const std::string& path, const QueueManifest& m);
QueueManifest read_queue_manifest(const std::string& path);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace hmai
