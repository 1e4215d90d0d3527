#include "hmai/report.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hmai {

namespace {

std::string_view rbalance_name(RBalanceMode m) {
  return m == RBalanceMode::Recursive ? "recursive" : "arithmetic-mean";
}

// Round-trip CSV numbers; same digits as the JSON writer.
std::string csv_num(double v) { return nlohmann::json(v).dump(); }

}  // namespace

nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"tool_version", m.tool_version},
          {"config", m.config},
          {"seeds", m.seeds},
          {"artifacts", m.artifacts}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.config = j.at("config").get<Settings>();
  m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
  m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
  return m;
}

nlohmann::json to_json(const EpisodeSummary& s) {
  return {{"energy", s.energy},
          {"time", s.time},
          {"r_balance", s.r_balance},
          {"ms", s.ms},
          {"makespan", s.makespan},
          {"utilization", s.utilization},
          {"stm_rate", s.stm_rate},
          {"mean_response", s.mean_response},
          {"total_reward", s.total_reward},
          {"tasks", s.tasks}};
}

nlohmann::json to_json(const TaskOutcome& o) {
  return {{"task_id", o.task_id},
          {"accelerator", o.accelerator},
          {"task_kind", std::string(to_string(o.task_kind))},
          {"model", std::string(to_string(o.model))},
          {"capture_time", o.capture_time},
          {"safety_time", o.safety_time},
          {"release_time", o.release_time},
          {"dispatch_time", o.dispatch_time},
          {"start_time", o.start_time},
          {"completion_time", o.completion_time},
          {"response_time", o.response_time},
          {"ms", o.ms},
          {"e", o.e},
          {"t", o.t},
          {"r", o.r},
          {"reward", o.reward}};
}

nlohmann::json to_json(const BrakingReport& b) {
  return {{"trigger_task_id", b.trigger_task_id},
          {"t_wait", b.t_wait},
          {"t_schedule", b.t_schedule},
          {"t_compute", b.t_compute},
          {"t_data", b.t_data},
          {"t_mech", b.t_mech},
          {"total_braking_time", b.total_braking_time},
          {"braking_distance", b.braking_distance},
          {"camera_range", b.camera_range},
          {"safe", b.safe}};
}

nlohmann::json to_json(const ScenarioSegment& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"start", s.start},
          {"duration", s.duration}};
}

ScenarioSegment segment_from_json(const nlohmann::json& j) {
  ScenarioSegment s;
  s.kind = parse_scenario(j.at("kind").get<std::string>());
  s.start = j.at("start").get<double>();
  s.duration = j.at("duration").get<double>();
  return s;
}

nlohmann::json report_json(const EpisodeReport& r, bool with_records) {
  nlohmann::json j = {
      {"scheduler", r.scheduler},
      {"platform", r.platform},
      {"seed", r.seed},
      {"num_accelerators", r.num_accelerators},
      {"rbalance_mode", std::string(rbalance_name(r.rbalance_mode))},
      {"norm", {{"energy_ref", r.norm.energy_ref}, {"time_ref", r.norm.time_ref}}},
      {"summary", to_json(r.summary)},
      {"accelerator_busy", r.accelerator_busy}};
  if (with_records) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& o : r.records) recs.push_back(to_json(o));
    j["records"] = std::move(recs);
  }
  return j;
}

void write_records_csv(std::ostream& out, const EpisodeReport& r) {
  out << "task_id,accelerator,task_kind,model,capture_time,safety_time,"
         "release_time,dispatch_time,start_time,completion_time,"
         "response_time,ms,e,t,r,reward\n";
  for (const auto& o : r.records) {
    out << o.task_id << ',' << o.accelerator << ',' << to_string(o.task_kind)
        << ',' << to_string(o.model) << ',' << csv_num(o.capture_time) << ','
        << csv_num(o.safety_time) << ',' << csv_num(o.release_time) << ','
        << csv_num(o.dispatch_time) << ',' << csv_num(o.start_time) << ','
        << csv_num(o.completion_time) << ',' << csv_num(o.response_time) << ','
        << csv_num(o.ms) << ',' << csv_num(o.e) << ',' << csv_num(o.t) << ','
        << csv_num(o.r) << ',' << csv_num(o.reward) << '\n';
  }
}

void write_summary_text(std::ostream& out,
                        const std::vector<SummaryRow>& rows) {
  std::ios old(nullptr);
  old.copyfmt(out);
  out << std::left << std::setw(14) << "platform" << std::setw(9)
      << "scheduler" << std::right << std::setw(11) << "Time[s]"
      << std::setw(13) << "Energy[J]" << std::setw(12) << "R_Balance"
      << std::setw(12) << "MS" << std::setw(9) << "STMRate" << std::setw(8)
      << "Util" << std::setw(11) << "Makespan" << '\n';
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << std::left << std::setw(14) << r.platform << std::setw(9)
        << r.scheduler << std::right << std::fixed << std::setprecision(4)
        << std::setw(11) << s.time << std::setprecision(3) << std::setw(13)
        << s.energy << std::setprecision(6) << std::setw(12) << s.r_balance
        << std::setprecision(2) << std::setw(12) << s.ms
        << std::setprecision(4) << std::setw(9) << s.stm_rate << std::setw(8)
        << s.utilization << std::setw(11) << s.makespan << '\n';
  }
  out.copyfmt(old);
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "platform,scheduler,time,energy,r_balance,ms,stm_rate,utilization,"
         "makespan,mean_response,total_reward,tasks\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << r.platform << ',' << r.scheduler << ',' << csv_num(s.time) << ','
        << csv_num(s.energy) << ',' << csv_num(s.r_balance) << ','
        << csv_num(s.ms) << ',' << csv_num(s.stm_rate) << ','
        << csv_num(s.utilization) << ',' << csv_num(s.makespan) << ','
        << csv_num(s.mean_response) << ',' << csv_num(s.total_reward) << ','
        << s.tasks << '\n';
  }
}

void write_braking_text(std::ostream& out,
                        const std::vector<BrakingRow>& rows) {
  std::ios old(nullptr);
  old.copyfmt(out);
  out << std::left << std::setw(9) << "scheduler" << std::right
      << std::setw(10) << "trigger" << std::setw(10) << "T_wait"
      << std::setw(10) << "T_sched" << std::setw(10) << "T_comp"
      << std::setw(9) << "T_data" << std::setw(9) << "T_mech"
      << std::setw(10) << "total[s]" << std::setw(11) << "dist[m]"
      << std::setw(8) << "safe" << '\n';
  for (const auto& r : rows) {
    const auto& b = r.report;
    out << std::left << std::setw(9) << r.scheduler << std::right
        << std::setw(10) << b.trigger_task_id << std::fixed
        << std::setprecision(4) << std::setw(10) << b.t_wait << std::setw(10)
        << b.t_schedule << std::setw(10) << b.t_compute << std::setw(9)
        << b.t_data << std::setw(9) << b.t_mech << std::setw(10)
        << b.total_braking_time << std::setprecision(3) << std::setw(11)
        << b.braking_distance << std::setw(8) << (b.safe ? "yes" : "UNSAFE")
        << '\n';
  }
  out.copyfmt(old);
}

void write_braking_csv(std::ostream& out, const std::vector<BrakingRow>& rows) {
  out << "scheduler,trigger_task_id,t_wait,t_schedule,t_compute,t_data,"
         "t_mech,total_braking_time,braking_distance,camera_range,safe\n";
  for (const auto& r : rows) {
    const auto& b = r.report;
    out << r.scheduler << ',' << b.trigger_task_id << ',' << csv_num(b.t_wait)
        << ',' << csv_num(b.t_schedule) << ',' << csv_num(b.t_compute) << ','
        << csv_num(b.t_data) << ',' << csv_num(b.t_mech) << ','
        << csv_num(b.total_braking_time) << ','
        << csv_num(b.braking_distance) << ',' << csv_num(b.camera_range)
        << ',' << (b.safe ? "true" : "false") << '\n';
  }
}

std::string queue_manifest_path(const std::string& queue_path) {
  return queue_path + ".manifest.json";
}

void write_queue_manifest(const std::string& path, const QueueManifest& m) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : m.schedule) segs.push_back(to_json(s));
  write_json_file(path, {{"manifest", to_json(m.run)},
                         {"schedule", segs},
                         {"duration", m.duration},
                         {"velocity", m.velocity}});
}

QueueManifest read_queue_manifest(const std::string& path) {
  const auto j = read_json_file(path);
  QueueManifest m;
  try {
    m.run = manifest_from_json(j.at("manifest"));
    for (const auto& s : j.at("schedule")) m.schedule.push_back(segment_from_json(s));
    m.duration = j.at("duration").get<double>();
    m.velocity = j.at("velocity").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed queue manifest " + path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw IoError("malformed queue manifest " + path + ": " + e.what());
  }
  return m;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace hmai
