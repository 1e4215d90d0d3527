#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hmai/commands.hpp"
#include "hmai/config.hpp"

using namespace hmai;

namespace {

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hmai_cfg_" + name)).string();
}

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("defaults resolve to a valid experiment") {
  const auto cfg = build_config(resolve({}));
  CHECK(cfg.route.area.kind == Area::UB);
  CHECK(cfg.platform.total() == 11);
  CHECK(cfg.window == 0.05);
  CHECK(cfg.agent.learning_rate == 0.01);
  CHECK(cfg.agent.hidden == std::vector<std::size_t>{256, 64});
  CHECK(cfg.brake.deceleration == 6.2);
  for (const auto& [k, v] : config_keys()) CHECK(cfg.resolved.count(k) == 1);
}

TEST_CASE("unknown keys are listed by name") {
  try {
    parse_config_text("[route]\narea = uhw\nspeed = 3\n[bogus]\nx = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("route.speed") != std::string::npos);
    CHECK(msg.find("bogus.x") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("area = ub\n"), ConfigError);
  const auto s = parse_config_text("[route]\narea = uhw\n");
  CHECK(s.at("route.area") == "uhw");
  CHECK(build_config(resolve(s)).route.area.kind == Area::UHW);
  CHECK_THROWS_AS(read_config_file(tmp("absent.ini")), IoError);
}

TEST_CASE("environment overrides") {
  Settings s = parse_config_text("[route]\narea = uhw\n");
  apply_env_overrides(s, [](const char* k) -> const char* {
    if (std::string(k) == "HMAI_ROUTE_AREA") return "hw";
    if (std::string(k) == "HMAI_SCHED_GA_POPULATION") return "12";
    return nullptr;
  });
  CHECK(s.at("route.area") == "hw");
  const auto cfg = build_config(resolve(s));
  CHECK(cfg.ga.population == 12);
}

TEST_CASE("bad values are config errors") {
  CHECK_THROWS_AS(build_config(resolve({{"route.area", "mars"}})), ConfigError);
  CHECK_THROWS_AS(build_config(resolve({{"route.distance", "abc"}})), ConfigError);
  CHECK_THROWS_AS(build_config(resolve({{"agent.gamma", "1.5"}})), ConfigError);
  CHECK_THROWS_AS(build_config(resolve({{"platform.preset", "gpu"}})), ConfigError);
  CHECK_THROWS_AS(check_keys({{"nope.key", "1"}}), ConfigError);
}

TEST_CASE("platform overrides") {
  const auto r = resolve({{"platform.sconvod_count", "2"},
                          {"platform.mconvmc_fps_yolo", "200"}});
  const auto pc = platform_from(r, "hmai");
  CHECK(pc.total() == 9);
  CHECK(pc.instances[2].kind.fps[0] == 200.0);
  CHECK(platform_from(r, "homo-sconvod").total() == 13);
}

TEST_CASE("make_scheduler") {
  const auto cfg = build_config(resolve({}));
  for (const auto& n : scheduler_names()) {
    if (n == "flexai") {
      CHECK_THROWS_AS(make_scheduler(n, cfg, std::nullopt), ConfigError);
    } else {
      CHECK(make_scheduler(n, cfg, std::nullopt)->name() == n);
    }
  }
  CHECK_THROWS_AS(make_scheduler("edp", cfg, std::nullopt), ConfigError);
}

TEST_CASE("HW routes reject reverse events") {
  CommandOptions o;
  o.use_env = false;
  o.area = "hw";
  o.overrides = {"route.max_times_reverse=1"};
  o.out = tmp("hw.jsonl");
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_gen(o, log), ConfigError);
}

TEST_CASE("gen and compare are byte-identical on rerun") {
  CommandOptions g;
  g.use_env = false;
  g.seed = 4;
  g.overrides = {"route.distance=20"};
  g.out = tmp("q.jsonl");
  std::ostringstream log;
  cmd_gen(g, log);
  const auto q1 = slurp(g.out);
  const auto m1 = slurp(queue_manifest_path(g.out));
  cmd_gen(g, log);
  CHECK(slurp(g.out) == q1);
  CHECK(slurp(queue_manifest_path(g.out)) == m1);

  CommandOptions c = g;
  c.queue = g.out;
  c.out = tmp("cmp.json");
  c.format = OutputFormat::Json;
  c.schedulers = {"minmin", "ata", "static", "sa"};
  std::ostringstream sink;
  const auto reports = cmd_compare(c, sink);
  CHECK(reports.size() == 4);
  const auto a = slurp(c.out);
  cmd_compare(c, sink);
  CHECK(slurp(c.out) == a);
  CHECK(std::filesystem::exists(c.out + ".timing.json"));
  const auto j = nlohmann::json::parse(a);
  CHECK(j.at("manifest").at("command") == "compare");
  CHECK(j.at("reports").size() == 4);

  CommandOptions b = c;
  b.out.clear();
  const auto brakes = cmd_brake(b, sink);
  REQUIRE(brakes.size() == reports.size());
  for (std::size_t i = 0; i < brakes.size(); ++i) {
    CHECK(brakes[i].scheduler == reports[i].scheduler);
    CHECK(brakes[i].summary.stm_rate == reports[i].summary.stm_rate);
    CHECK(brakes[i].summary.r_balance == reports[i].summary.r_balance);
    CHECK(brakes[i].summary.energy == reports[i].summary.energy);
  }

  c.schedulers = {"flexai"};
  CHECK_THROWS_AS(cmd_compare(c, sink), ConfigError);
  for (const auto& p : {g.out, queue_manifest_path(g.out), c.out, c.out + ".timing.json"}) {
    std::filesystem::remove(p);
  }
}
