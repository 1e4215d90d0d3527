#include "hmai/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hmai {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

std::string_view scenario_token(Scenario s) {
  switch (s) {
    case Scenario::GoStraight: return "gs";
    case Scenario::Turn: return "turn";
    case Scenario::Reverse: return "reverse";
  }
  return "?";
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<std::pair<std::string, std::string>> build_keys() {
  std::vector<std::pair<std::string, std::string>> k = {
      {"route.area", "ub"},
      {"route.distance", "1000"},
      {"route.velocity_kmh", ""},
      {"route.max_times_turn", "10"},
      {"route.max_times_reverse", ""},
      {"route.max_duration_turn", "10"},
      {"route.max_duration_reverse", "20"},
      {"route.min_segment", "0.1"},
      {"route.max_event_fraction", "0.5"},
      {"route.seed", "1"},
  };
  for (const auto& g : default_cameras()) {
    const std::string c = lower(to_string(g.kind));
    k.emplace_back("cameras." + c + "_count", std::to_string(g.count));
    k.emplace_back("cameras." + c + "_range", num(g.max_distance));
  }
  k.emplace_back("framerate.uhw_scale", "1");
  k.emplace_back("framerate.hw_scale", "1");
  for (Area a : kAreas) {
    for (Scenario s : kScenarios) {
      if (a == Area::HW && s == Scenario::Reverse) continue;
      for (CameraKind c : kCameraKinds) {
        k.emplace_back("framerate." + lower(to_string(a)) + "_" +
                           std::string(scenario_token(s)) + "_" +
                           lower(to_string(c)),
                       "");
      }
    }
  }
  const RssParams rss;
  k.insert(k.end(), {
                        {"rss.a_max_accel", num(rss.a_max_accel)},
                        {"rss.a_min_brake_correct", num(rss.a_min_brake_correct)},
                        {"rss.a_min_brake", num(rss.a_min_brake)},
                        {"rss.turn_velocity_kmh", "50"},
                        {"rss.reverse_velocity_kmh", ""},
                        {"rss.insufficient_range_time", "0.1"},
                        {"rss.error_on_insufficient_range", "false"},
                        {"platform.preset", "hmai"},
                    });
  for (const auto& kind : {sconv_od(), sconv_ic(), mconv_mc()}) {
    const std::string n = lower(kind.name);
    k.emplace_back("platform." + n + "_count", "");
    for (Model m : kModels) {
      k.emplace_back("platform." + n + "_fps_" + lower(to_string(m)),
                     num(kind.fps_for(m)));
      k.emplace_back("platform." + n + "_energy_" + lower(to_string(m)),
                     num(kind.energy_per_gmac[index_of(m)]));
    }
    k.emplace_back("platform." + n + "_idle_power", num(kind.idle_power));
  }
  const GaParams ga;
  const SaParams sa;
  const AgentConfig ag;
  const StateNormalization sn;
  k.insert(k.end(), {
                        {"criteria.rbalance_mode", "recursive"},
                        {"sim.sched_overhead", "0"},
                        {"sched.window", "0.05"},
                        {"sched.seed", "1"},
                        {"sched.ga_population", std::to_string(ga.population)},
                        {"sched.ga_generations", std::to_string(ga.generations)},
                        {"sched.ga_mutation_rate", num(ga.mutation_rate)},
                        {"sched.ga_elitism", std::to_string(ga.elitism)},
                        {"sched.ga_tournament", std::to_string(ga.tournament)},
                        {"sched.sa_alpha", num(sa.alpha)},
                        {"sched.sa_iterations", std::to_string(sa.iterations)},
                        {"sched.sa_initial_samples",
                         std::to_string(sa.initial_samples)},
                        {"sched.sa_initial_temperature", ""},
                        {"agent.gamma", num(ag.gamma)},
                        {"agent.learning_rate", num(ag.learning_rate)},
                        {"agent.memory_size", std::to_string(ag.memory_size)},
                        {"agent.batch_size", std::to_string(ag.batch_size)},
                        {"agent.target_sync_interval",
                         std::to_string(ag.target_sync_interval)},
                        {"agent.train_interval", std::to_string(ag.train_interval)},
                        {"agent.epsilon_start", num(ag.epsilon_start)},
                        {"agent.epsilon_end", num(ag.epsilon_end)},
                        {"agent.epsilon_fraction", num(ag.epsilon_fraction)},
                        {"agent.loss_mode", std::string(to_string(ag.loss_mode))},
                        {"agent.hidden", "256,64"},
                        {"agent.seed", std::to_string(ag.seed)},
                        {"agent.time_reference",
                         std::string(to_string(sn.time_reference))},
                        {"agent.amount_scale", num(sn.amount_scale)},
                        {"agent.layer_scale", num(sn.layer_scale)},
                        {"agent.safety_time_scale", num(sn.safety_time_scale)},
                        {"agent.energy_scale", num(sn.energy_scale)},
                        {"agent.time_scale", num(sn.time_scale)},
                        {"agent.ms_scale", num(sn.ms_scale)},
                        {"train.episodes", "200"},
                        {"train.distance", "100"},
                        {"train.seed", "1000"},
                        {"brake.velocity_kmh", ""},
                        {"brake.deceleration", "6.2"},
                        {"brake.trigger_distance", ""},
                        {"brake.t_data", "0.001"},
                        {"brake.t_mech", "0.019"},
                        {"brake.camera_range", ""},
                    });
  return k;
}

// Typed access to a resolved settings map.
class Reader {
 public:
  explicit Reader(const Settings& s) : s_(s) {}

  const std::string& str(const std::string& key) const {
    auto it = s_.find(key);
    if (it == s_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }
  bool has(const std::string& key) const { return !str(key).empty(); }

  double real(const std::string& key) const {
    const std::string& v = str(key);
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
      throw ConfigError("config key '" + key + "': invalid number '" + v + "'");
    }
    return out;
  }
  std::optional<double> opt_real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return real(key);
  }
  std::int64_t integer(const std::string& key) const {
    const std::string& v = str(key);
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
      throw ConfigError("config key '" + key + "': invalid integer '" + v +
                        "'");
    }
    return out;
  }
  std::size_t count(const std::string& key) const {
    const auto v = integer(key);
    if (v < 0) throw ConfigError("config key '" + key + "' must be >= 0");
    return static_cast<std::size_t>(v);
  }
  std::uint64_t seed(const std::string& key) const {
    const std::string& v = str(key);
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
      throw ConfigError("config key '" + key + "': invalid seed '" + v + "'");
    }
    return out;
  }
  bool boolean(const std::string& key) const {
    const std::string v = lower(str(key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': invalid boolean '" + v + "'");
  }
  template <typename F>
  auto parse(const std::string& key, F f) const {
    try {
      return f(str(key));
    } catch (const Error& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }

 private:
  const Settings& s_;
};

RBalanceMode parse_rbalance(std::string_view s) {
  if (s == "recursive") return RBalanceMode::Recursive;
  if (s == "arithmetic-mean") return RBalanceMode::ArithmeticMean;
  throw ConfigError("unknown R_Balance mode '" + std::string(s) +
                    "' (recursive|arithmetic-mean)");
}

std::vector<std::size_t> parse_list(const std::string& key,
                                    const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    std::size_t x = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || p != item.data() + item.size() || x == 0) {
      throw ConfigError("config key '" + key + "': invalid layer size '" +
                        item + "'");
    }
    out.push_back(x);
  }
  return out;
}

Settings from_ptree(const boost::property_tree::ptree& pt) {
  Settings s;
  std::vector<std::string> unknown;
  for (const auto& [section, child] : pt) {
    if (child.empty()) {
      unknown.push_back(section);
      continue;
    }
    for (const auto& [key, value] : child) {
      s[section + "." + key] = value.get_value<std::string>();
    }
  }
  if (!unknown.empty()) {
    std::string msg = "config keys outside any section:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }
  check_keys(s);
  return s;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const auto keys = build_keys();
  return keys;
}

void check_keys(const Settings& s) {
  std::vector<std::string> bad;
  const auto& keys = config_keys();
  for (const auto& [k, v] : s) {
    const bool known = std::any_of(keys.begin(), keys.end(),
                                   [&](const auto& p) { return p.first == k; });
    if (!known) bad.push_back(k);
  }
  if (!bad.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& b : bad) msg += " " + b;
    throw ConfigError(msg);
  }
}

Settings parse_config_text(const std::string& text) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_ptree(pt);
}

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_ptree(pt);
}

void apply_env_overrides(Settings& s, const EnvLookup& getenv_fn) {
  for (const auto& [key, def] : config_keys()) {
    std::string var = "HMAI_" + upper(key);
    std::replace(var.begin(), var.end(), '.', '_');
    if (const char* v = getenv_fn(var.c_str())) s[key] = v;
  }
}

void apply_env_overrides(Settings& s) {
  apply_env_overrides(s, [](const char* n) { return std::getenv(n); });
}

Settings resolve(const Settings& s) {
  check_keys(s);
  Settings out;
  for (const auto& [k, def] : config_keys()) out[k] = def;
  for (const auto& [k, v] : s) out[k] = v;
  return out;
}

PlatformConfig platform_from(const Settings& resolved,
                             const std::string& preset) {
  const Reader r(resolved);
  PlatformConfig pc;
  try {
    pc = platform_preset(preset);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (hmai, homo-sconvod, "
                      "homo-sconvic, homo-mconvmc)");
  }
  for (auto& kc : pc.instances) {
    const std::string n = "platform." + lower(kc.kind.name);
    for (Model m : kModels) {
      kc.kind.fps[index_of(m)] = r.real(n + "_fps_" + lower(to_string(m)));
      kc.kind.energy_per_gmac[index_of(m)] =
          r.real(n + "_energy_" + lower(to_string(m)));
    }
    kc.kind.idle_power = r.real(n + "_idle_power");
    // Counts only reshape the heterogeneous platform.
    if (preset == "hmai" && r.has(n + "_count")) {
      kc.count = static_cast<int>(r.count(n + "_count"));
    }
  }
  pc.validate();
  return pc;
}

ExperimentConfig build_config(const Settings& s) {
  ExperimentConfig cfg;
  cfg.resolved = resolve(s);
  const Reader r(cfg.resolved);

  const Area area = r.parse("route.area", [](const std::string& v) {
    return parse_area(v);
  });
  cfg.route.area = driving_area(area, r.opt_real("route.velocity_kmh"));
  cfg.route.velocity = cfg.route.area.max_velocity;
  cfg.route.distance = r.real("route.distance");
  cfg.route.max_times_turn = static_cast<int>(r.count("route.max_times_turn"));
  // Unset: 10 where reversing is allowed, none on the highway.
  cfg.route.max_times_reverse =
      r.has("route.max_times_reverse")
          ? static_cast<int>(r.count("route.max_times_reverse"))
          : (cfg.route.area.reverse_allowed ? 10 : 0);
  cfg.route.max_duration_turn = r.real("route.max_duration_turn");
  cfg.route.max_duration_reverse = r.real("route.max_duration_reverse");
  cfg.route.min_segment = r.real("route.min_segment");
  cfg.route.max_event_fraction = r.real("route.max_event_fraction");
  cfg.route.seed = r.seed("route.seed");
  cfg.route.validate();

  cfg.cameras = default_cameras();
  for (auto& g : cfg.cameras) {
    const std::string c = "cameras." + lower(to_string(g.kind));
    g.count = static_cast<int>(r.count(c + "_count"));
    g.max_distance = r.real(c + "_range");
    if (!(g.max_distance > 0.0)) {
      throw ConfigError("config key '" + c + "_range' must be > 0");
    }
  }

  cfg.framerate = FrameRateMatrix::defaults(r.real("framerate.uhw_scale"),
                                            r.real("framerate.hw_scale"));
  for (Area a : kAreas) {
    for (Scenario sc : kScenarios) {
      if (a == Area::HW && sc == Scenario::Reverse) continue;
      for (CameraKind c : kCameraKinds) {
        const std::string key = "framerate." + lower(to_string(a)) + "_" +
                                std::string(scenario_token(sc)) + "_" +
                                lower(to_string(c));
        if (!r.has(key)) continue;
        const double fps = r.real(key);
        if (!(fps > 0.0)) throw ConfigError("config key '" + key + "' must be > 0");
        cfg.framerate.set(a, sc, c, fps);
      }
    }
  }

  cfg.safety.rss.a_max_accel = r.real("rss.a_max_accel");
  cfg.safety.rss.a_min_brake_correct = r.real("rss.a_min_brake_correct");
  cfg.safety.rss.a_min_brake = r.real("rss.a_min_brake");
  cfg.safety.turn_velocity = kmh_to_ms(r.real("rss.turn_velocity_kmh"));
  if (auto v = r.opt_real("rss.reverse_velocity_kmh")) {
    cfg.safety.reverse_velocity = kmh_to_ms(*v);
  }
  cfg.safety.insufficient_range_time = r.real("rss.insufficient_range_time");
  cfg.safety.error_on_insufficient_range =
      r.boolean("rss.error_on_insufficient_range");

  cfg.platform_preset = r.str("platform.preset");
  cfg.platform = platform_from(cfg.resolved, cfg.platform_preset);

  cfg.rbalance_mode = parse_rbalance(r.str("criteria.rbalance_mode"));
  cfg.sched_overhead = r.real("sim.sched_overhead");
  if (!(cfg.sched_overhead >= 0.0)) {
    throw ConfigError("config key 'sim.sched_overhead' must be >= 0");
  }

  cfg.window = r.real("sched.window");
  if (!(cfg.window > 0.0)) throw ConfigError("config key 'sched.window' must be > 0");
  cfg.sched_seed = r.seed("sched.seed");
  cfg.ga.population = static_cast<int>(r.count("sched.ga_population"));
  cfg.ga.generations = static_cast<int>(r.count("sched.ga_generations"));
  cfg.ga.mutation_rate = r.real("sched.ga_mutation_rate");
  cfg.ga.elitism = static_cast<int>(r.count("sched.ga_elitism"));
  cfg.ga.tournament = static_cast<int>(r.count("sched.ga_tournament"));
  if (cfg.ga.population < 1 || cfg.ga.tournament < 1) {
    throw ConfigError("GA population and tournament size must be >= 1");
  }
  cfg.sa.alpha = r.real("sched.sa_alpha");
  cfg.sa.iterations = static_cast<int>(r.count("sched.sa_iterations"));
  cfg.sa.initial_samples = static_cast<int>(r.count("sched.sa_initial_samples"));
  cfg.sa.initial_temperature = r.opt_real("sched.sa_initial_temperature");
  if (!(cfg.sa.alpha >= 0.0 && cfg.sa.alpha <= 1.0)) {
    throw ConfigError("config key 'sched.sa_alpha' must be in [0,1]");
  }

  auto& ag = cfg.agent;
  ag.gamma = r.real("agent.gamma");
  ag.learning_rate = r.real("agent.learning_rate");
  ag.memory_size = r.count("agent.memory_size");
  ag.batch_size = r.count("agent.batch_size");
  ag.target_sync_interval = r.count("agent.target_sync_interval");
  ag.train_interval = r.count("agent.train_interval");
  ag.epsilon_start = r.real("agent.epsilon_start");
  ag.epsilon_end = r.real("agent.epsilon_end");
  ag.epsilon_fraction = r.real("agent.epsilon_fraction");
  ag.loss_mode = r.parse("agent.loss_mode", [](const std::string& v) {
    return parse_loss_mode(v);
  });
  ag.hidden = parse_list("agent.hidden", r.str("agent.hidden"));
  ag.seed = r.seed("agent.seed");
  auto& sn = ag.normalization;
  sn.time_reference = r.parse("agent.time_reference", [](const std::string& v) {
    return parse_time_reference(v);
  });
  sn.amount_scale = r.real("agent.amount_scale");
  sn.layer_scale = r.real("agent.layer_scale");
  sn.safety_time_scale = r.real("agent.safety_time_scale");
  sn.energy_scale = r.real("agent.energy_scale");
  sn.time_scale = r.real("agent.time_scale");
  sn.ms_scale = r.real("agent.ms_scale");
  for (double v : {sn.amount_scale, sn.layer_scale, sn.safety_time_scale,
                   sn.energy_scale, sn.time_scale, sn.ms_scale}) {
    if (!(v > 0.0)) throw ConfigError("agent normalization scales must be > 0");
  }
  ag.validate();

  cfg.train.episodes = r.count("train.episodes");
  cfg.train.distance = r.real("train.distance");
  cfg.train.seed = r.seed("train.seed");
  if (!(cfg.train.distance > 0.0)) {
    throw ConfigError("config key 'train.distance' must be > 0");
  }

  if (auto v = r.opt_real("brake.velocity_kmh")) {
    if (!(*v >= 0.0)) throw ConfigError("config key 'brake.velocity_kmh' must be >= 0");
    cfg.brake.velocity = kmh_to_ms(*v);
  }
  cfg.brake.deceleration = r.real("brake.deceleration");
  if (!(cfg.brake.deceleration > 0.0)) {
    throw ConfigError("config key 'brake.deceleration' must be > 0");
  }
  cfg.brake.trigger_distance = r.opt_real("brake.trigger_distance");
  cfg.brake.t_data = r.real("brake.t_data");
  cfg.brake.t_mech = r.real("brake.t_mech");
  cfg.brake.camera_range = r.opt_real("brake.camera_range");
  return cfg;
}

RouteConfig route_variant(const ExperimentConfig& cfg, double distance,
                          std::uint64_t seed) {
  RouteConfig r = cfg.route;
  r.distance = distance;
  r.seed = seed;
  r.validate();
  return r;
}

SafetyTimeTable safety_table(const ExperimentConfig& cfg) {
  return SafetyTimeTable(cfg.route.area, cfg.cameras, cfg.safety);
}

GeneratedQueue generate(const ExperimentConfig& cfg, const RouteConfig& route) {
  GeneratedQueue g;
  Rng rng(route.seed);
  g.schedule = build_scenario_schedule(route, rng);
  g.tasks = generate_task_queue(route, g.schedule, cfg.cameras, cfg.framerate,
                                safety_table(cfg));
  return g;
}

const std::vector<std::string>& scheduler_names() {
  static const std::vector<std::string> names{"minmin", "ata", "ga", "sa",
                                              "worst", "static", "flexai"};
  return names;
}

std::unique_ptr<SchedulerPolicy> make_scheduler(
    const std::string& name, const ExperimentConfig& cfg,
    const std::optional<AgentWeights>& weights) {
  if (name == "minmin") return std::make_unique<MinMinScheduler>();
  if (name == "ata") return std::make_unique<AtaScheduler>();
  if (name == "worst") return std::make_unique<WorstCaseScheduler>();
  if (name == "static") return std::make_unique<StaticScheduler>();
  if (name == "ga") {
    return std::make_unique<GaScheduler>(cfg.ga, cfg.window, cfg.sched_seed);
  }
  if (name == "sa") {
    return std::make_unique<SaScheduler>(cfg.sa, cfg.window, cfg.sched_seed);
  }
  if (name == "flexai") {
    if (!weights) throw ConfigError("scheduler flexai needs --weights");
    return std::make_unique<FlexAiScheduler>(weights->net,
                                             weights->normalization);
  }
  throw ConfigError("unknown scheduler '" + name +
                    "' (minmin|ata|ga|sa|worst|static|flexai)");
}

}  // namespace hmai
