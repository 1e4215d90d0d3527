#include "hmai/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace hmai {

namespace {

template <typename F>
void emit(const std::string& path, std::ostream& fallback, F write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write(out);
  if (!out) throw IoError("failed writing " + path);
}

RunManifest base_manifest(const std::string& command,
                          const ExperimentConfig& cfg) {
  RunManifest m;
  m.command = command;
  m.config = cfg.resolved;
  m.seeds = {{"route", cfg.route.seed},
             {"sched", cfg.sched_seed},
             {"agent", cfg.agent.seed},
             {"train", cfg.train.seed}};
  return m;
}

std::optional<AgentWeights> maybe_weights(const CommandOptions& o,
                                          const std::vector<std::string>& scheds) {
  const bool needs =
      std::find(scheds.begin(), scheds.end(), "flexai") != scheds.end();
  if (!o.weights) {
    if (needs) throw ConfigError("scheduler flexai needs --weights");
    return std::nullopt;
  }
  return load_weights(*o.weights);
}

std::vector<std::string> schedulers_or(const CommandOptions& o,
                                       std::vector<std::string> def) {
  return o.schedulers.empty() ? def : o.schedulers;
}

void write_timing(const std::string& out,
                  const std::vector<EpisodeReport>& reports) {
  if (out.empty()) return;
  nlohmann::json t = nlohmann::json::array();
  for (const auto& r : reports) {
    t.push_back({{"platform", r.platform},
                 {"scheduler", r.scheduler},
                 {"scheduler_wall_seconds", r.scheduler_wall_seconds}});
  }
  write_json_file(out + ".timing.json", t);
}

EpisodeReport run_one(const LoadedQueue& q, const ExperimentConfig& cfg,
                      const PlatformConfig& pc, const std::string& sched,
                      const std::optional<AgentWeights>& weights) {
  if (sched == "flexai" && weights &&
      weights->net.output_size() != static_cast<std::size_t>(pc.total())) {
    throw DomainError("shape mismatch: weights have " +
                      std::to_string(weights->net.output_size()) +
                      " outputs but platform " + pc.name + " has " +
                      std::to_string(pc.total()) + " accelerators");
  }
  auto policy = make_scheduler(sched, cfg, weights);
  const NormalizationScales norm =
      calibrate_norm(q.tasks, pc, cfg.rbalance_mode);
  RunOptions ro;
  ro.sched_overhead = cfg.sched_overhead;
  ro.seed = cfg.sched_seed;
  ro.schedule = q.schedule;
  return run_episode(q.tasks, Platform(pc, {norm, cfg.rbalance_mode}), *policy,
                     ro);
}

}  // namespace

OutputFormat parse_format(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "text") return OutputFormat::Text;
  throw ConfigError("unknown format '" + std::string(s) + "' (json|csv|text)");
}

ExperimentConfig load_experiment(const CommandOptions& o) {
  Settings s;
  if (o.config_path) s = read_config_file(*o.config_path);
  if (o.use_env) apply_env_overrides(s);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    }
    s[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (o.seed) s["route.seed"] = std::to_string(*o.seed);
  if (o.area) s["route.area"] = *o.area;
  if (o.episodes) s["train.episodes"] = std::to_string(*o.episodes);
  return build_config(s);
}

LoadedQueue load_or_generate_queue(const CommandOptions& o,
                                   const ExperimentConfig& cfg) {
  LoadedQueue q;
  if (!o.queue) {
    auto g = generate(cfg, cfg.route);
    q.tasks = std::move(g.tasks);
    q.schedule = std::move(g.schedule);
    q.duration = cfg.route.duration();
    q.velocity = cfg.route.velocity;
    q.source = "generated";
    return q;
  }
  std::ifstream in(*o.queue);
  if (!in) throw IoError("cannot read queue file " + *o.queue);
  q.tasks = read_queue_jsonl(in);
  q.source = *o.queue;
  const std::string mpath = queue_manifest_path(*o.queue);
  if (std::filesystem::exists(mpath)) {
    const auto m = read_queue_manifest(mpath);
    q.schedule = m.schedule;
    q.duration = m.duration;
    q.velocity = m.velocity;
  } else {
    q.velocity = cfg.route.velocity;
    q.duration = q.tasks.empty() ? 0.0 : q.tasks.back().capture_time;
  }
  return q;
}

void cmd_gen(const CommandOptions& o, std::ostream& log) {
  if (o.out.empty()) throw ConfigError("gen needs --out");
  const ExperimentConfig cfg = load_experiment(o);
  const auto g = generate(cfg, cfg.route);
  emit(o.out, log, [&](std::ostream& os) { write_queue_jsonl(os, g.tasks); });
  QueueManifest m;
  m.run = base_manifest("gen", cfg);
  m.schedule = g.schedule;
  m.duration = cfg.route.duration();
  m.velocity = cfg.route.velocity;
  write_queue_manifest(queue_manifest_path(o.out), m);
  log << "wrote " << g.tasks.size() << " tasks (" << g.schedule.size()
      << " scenario segments, " << format_seconds(m.duration) << " s) to "
      << o.out << '\n';
}

TrainResult cmd_train(const CommandOptions& o, std::ostream& log) {
  if (o.out.empty()) throw ConfigError("train needs --out");
  const ExperimentConfig cfg = load_experiment(o);
  const EpisodeFactory env = [&](std::size_t e) {
    const RouteConfig r =
        route_variant(cfg, cfg.train.distance, cfg.train.seed + e);
    auto g = generate(cfg, r);
    return TrainingEpisode{std::move(g.tasks), cfg.platform, cfg.sched_overhead};
  };
  TrainOptions opts;
  opts.rbalance_mode = cfg.rbalance_mode;
  opts.on_episode = [&](std::size_t e, double reward, double loss) {
    log << "episode " << e + 1 << '/' << cfg.train.episodes << " reward "
        << reward << " mean_loss " << loss << '\n';
    log.flush();
  };
  TrainResult res = train_agent(env, cfg.agent, cfg.train.episodes, opts);

  AgentWeights w{res.weights, cfg.route.area.kind, cfg.agent.normalization,
                 cfg.agent};
  save_weights(w, o.out);
  emit(o.out + ".loss.csv", log, [&](std::ostream& os) {
    os << "episode,iteration,loss\n";
    for (const auto& row : res.loss_trace) {
      os << row.episode << ',' << row.iteration << ','
         << nlohmann::json(row.loss).dump() << '\n';
    }
  });
  RunManifest m = base_manifest("train", cfg);
  m.artifacts = {{"weights", o.out}, {"loss", o.out + ".loss.csv"}};
  write_json_file(o.out + ".manifest.json", to_json(m));
  log << "trained " << cfg.train.episodes << " episodes, "
      << res.loss_trace.size() << " SGD steps, " << res.sync_count
      << " target syncs; weights in " << o.out << '\n';
  return res;
}

EpisodeReport cmd_run(const CommandOptions& o, std::ostream& out) {
  const ExperimentConfig cfg = load_experiment(o);
  const auto scheds = schedulers_or(o, {"minmin"});
  if (scheds.size() != 1) throw ConfigError("run takes exactly one --scheduler");
  const auto weights = maybe_weights(o, scheds);
  const auto q = load_or_generate_queue(o, cfg);
  const std::string preset = o.platforms.empty() ? cfg.platform_preset
                                                 : o.platforms.front();
  const PlatformConfig pc = platform_from(cfg.resolved, preset);
  EpisodeReport r = run_one(q, cfg, pc, scheds.front(), weights);

  RunManifest m = base_manifest("run", cfg);
  m.artifacts["queue"] = q.source;
  if (o.weights) m.artifacts["weights"] = *o.weights;
  emit(o.out, out, [&](std::ostream& os) {
    switch (o.format) {
      case OutputFormat::Json: {
        auto j = report_json(r, true);
        j["manifest"] = to_json(m);
        os << j.dump(2) << '\n';
        break;
      }
      case OutputFormat::Csv: write_records_csv(os, r); break;
      case OutputFormat::Text:
        write_summary_text(os, {{r.platform, r.scheduler, r.summary}});
        break;
    }
  });
  if (!o.out.empty() && o.format != OutputFormat::Json) {
    write_json_file(o.out + ".manifest.json", to_json(m));
  }
  write_timing(o.out, {r});
  return r;
}

std::vector<EpisodeReport> cmd_compare(const CommandOptions& o,
                                       std::ostream& out) {
  const ExperimentConfig cfg = load_experiment(o);
  const auto scheds =
      schedulers_or(o, {"minmin", "ata", "ga", "sa", "worst", "static"});
  const auto weights = maybe_weights(o, scheds);
  const auto q = load_or_generate_queue(o, cfg);
  const std::vector<std::string> presets =
      o.platforms.empty() ? std::vector<std::string>{cfg.platform_preset}
                          : o.platforms;

  std::vector<EpisodeReport> reports;
  for (const auto& preset : presets) {
    const PlatformConfig pc = platform_from(cfg.resolved, preset);
    for (const auto& s : scheds) {
      reports.push_back(run_one(q, cfg, pc, s, weights));
    }
  }

  RunManifest m = base_manifest("compare", cfg);
  m.artifacts["queue"] = q.source;
  if (o.weights) m.artifacts["weights"] = *o.weights;
  std::vector<SummaryRow> rows;
  for (const auto& r : reports) rows.push_back({r.platform, r.scheduler, r.summary});
  emit(o.out, out, [&](std::ostream& os) {
    switch (o.format) {
      case OutputFormat::Json: {
        nlohmann::json reps = nlohmann::json::array();
        for (const auto& r : reports) reps.push_back(report_json(r, false));
        nlohmann::json j = {{"manifest", to_json(m)},
                            {"tasks", q.tasks.size()},
                            {"reports", reps}};
        os << j.dump(2) << '\n';
        break;
      }
      case OutputFormat::Csv: write_summary_csv(os, rows); break;
      case OutputFormat::Text: write_summary_text(os, rows); break;
    }
  });
  if (!o.out.empty() && o.format != OutputFormat::Json) {
    write_json_file(o.out + ".manifest.json", to_json(m));
  }
  write_timing(o.out, reports);
  return reports;
}

std::vector<BrakingRow> cmd_brake(const CommandOptions& o, std::ostream& out) {
  const ExperimentConfig cfg = load_experiment(o);
  const auto scheds =
      schedulers_or(o, {"minmin", "ata", "ga", "sa", "worst", "static"});
  const auto weights = maybe_weights(o, scheds);
  const auto q = load_or_generate_queue(o, cfg);
  const std::string preset = o.platforms.empty() ? cfg.platform_preset
                                                 : o.platforms.front();
  const PlatformConfig pc = platform_from(cfg.resolved, preset);

  const double route_v = q.velocity > 0.0 ? q.velocity : cfg.route.velocity;
  const double trigger_distance =
      cfg.brake.trigger_distance.value_or(route_v * q.duration);
  if (!(route_v > 0.0)) throw DomainError("route velocity must be > 0");
  const double trigger_time = trigger_distance / route_v;
  BrakingConfig bc;
  bc.velocity = cfg.brake.velocity.value_or(route_v);
  bc.deceleration = cfg.brake.deceleration;
  bc.t_data = cfg.brake.t_data;
  bc.t_mech = cfg.brake.t_mech;
  double forward_range = 250.0;
  for (const auto& g : cfg.cameras) {
    if (g.kind == CameraKind::FC) forward_range = g.max_distance;
  }
  bc.camera_range = cfg.brake.camera_range.value_or(forward_range);
  bc.trigger_task_id = find_trigger_task(q.tasks, trigger_time);

  std::vector<BrakingRow> rows;
  std::vector<EpisodeReport> reports;
  for (const auto& s : scheds) {
    reports.push_back(run_one(q, cfg, pc, s, weights));
    rows.push_back({s, braking_report(reports.back(), bc), reports.back().summary});
  }

  RunManifest m = base_manifest("brake", cfg);
  m.artifacts["queue"] = q.source;
  if (o.weights) m.artifacts["weights"] = *o.weights;
  emit(o.out, out, [&](std::ostream& os) {
    switch (o.format) {
      case OutputFormat::Json: {
        nlohmann::json br = nlohmann::json::array();
        for (const auto& r : rows) {
          auto j = to_json(r.report);
          j["scheduler"] = r.scheduler;
          br.push_back(std::move(j));
        }
        nlohmann::json j = {{"manifest", to_json(m)},
                            {"platform", pc.name},
                            {"velocity", bc.velocity},
                            {"deceleration", bc.deceleration},
                            {"trigger_time", trigger_time},
                            {"braking", br}};
        os << j.dump(2) << '\n';
        break;
      }
      case OutputFormat::Csv: write_braking_csv(os, rows); break;
      case OutputFormat::Text: write_braking_text(os, rows); break;
    }
  });
  if (!o.out.empty() && o.format != OutputFormat::Json) {
    write_json_file(o.out + ".manifest.json", to_json(m));
  }
  write_timing(o.out, reports);
  return rows;
}

}  // namespace hmai
