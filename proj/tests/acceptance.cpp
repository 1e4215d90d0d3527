// Acceptance checks. One PASS/FAIL line per criterion; pass criterion
// numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "hmai/commands.hpp"
#include "hmai/config.hpp"
#include "hmai/criteria.hpp"
#include "hmai/envgen.hpp"
#include "hmai/flexai.hpp"
#include "hmai/sched.hpp"
#include "hmai/sim.hpp"
#include "oracles.hpp"
#include "toy_env.hpp"

using namespace hmai;

namespace {

struct Result {
  bool pass = true;
  std::string detail;

  int failures = 0;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (++failures > 8) {
      if (failures == 9) detail += "; ...";
      return;
    }
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string workdir() {
  auto p = std::filesystem::temp_directory_path() / "hmai_acceptance";
  std::filesystem::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1 ---------------------------------------------------------------------

Result criterion1() {
  Result res;
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = FrameRateMatrix::defaults();
  const auto cams = default_cameras();
  const std::map<Scenario, std::pair<int, int>> want{
      {Scenario::GoStraight, {870, 840}},
      {Scenario::Turn, {950, 920}},
      {Scenario::Reverse, {740, 740}}};
  int windows = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RouteConfig r;
    r.area = driving_area(Area::UB);
    r.velocity = r.area.max_velocity;
    r.distance = 300.0;
    r.seed = seed;
    r.max_duration_turn = 4.0;
    r.max_duration_reverse = 4.0;
    Rng rng(seed);
    const auto sched = build_scenario_schedule(r, rng);
    const auto q = generate_task_queue(r, sched, cams, m,
                                       SafetyTimeTable(r.area, cams, SafetyTimePolicy{}));
    for (const auto& seg : sched) {
      // Every whole second inside the segment.
      for (double a = seg.start; a + 1.0 <= seg.end(); a += 1.0) {
        ++windows;
        std::map<int, std::pair<int, int>> per_cam;
        std::map<int, const CameraGroup*> group_of;
        int det = 0, tra = 0;
        for (const auto& t : q) {
          if (t.capture_time < a || t.capture_time >= a + 1.0) continue;
          for (const auto& g : cams) {
            if (g.kind == t.group) group_of[t.camera_id] = &g;
          }
          if (t.task_kind == TaskKind::DET) {
            ++per_cam[t.camera_id].first;
            ++det;
          } else {
            ++per_cam[t.camera_id].second;
            ++tra;
          }
        }
        const auto [wd, wt] = want.at(seg.kind);
        if (std::abs(det - wd) > total_cameras(cams) ||
            std::abs(tra - wt) > total_cameras(cams)) {
          res.fail("seed " + std::to_string(seed) + " " +
                   std::string(to_string(seg.kind)) + " window at " +
                   fmt("%.3f", a) + ": " + std::to_string(det) + "/" +
                   std::to_string(tra));
        }
        for (const auto& [cam, c] : per_cam) {
          const auto& g = *group_of.at(cam);
          const double f = frame_rate(m, Area::UB, seg.kind, g.kind);
          const bool rear = g.facing == Facing::Rear;
          const double ft = rear && seg.kind != Scenario::Reverse ? 0.0 : f;
          if (std::abs(c.first - f) > 1.0 || std::abs(c.second - ft) > 1.0) {
            res.fail("camera " + std::to_string(cam) + " stream off by more than 1");
          }
        }
      }
    }
  }
  // Exact totals over one aligned second of each scenario.
  for (const auto& [s, w] : want) {
    RouteConfig r;
    r.area = driving_area(Area::UB);
    r.velocity = r.area.max_velocity;
    r.distance = r.velocity;
    const std::vector<ScenarioSegment> sched{{s, 0.0, 1.0}};
    const auto q = generate_task_queue(r, sched, cams, m,
                                       SafetyTimeTable(r.area, cams, SafetyTimePolicy{}));
    int det = 0, tra = 0;
    for (const auto& t : q) (t.task_kind == TaskKind::DET ? det : tra)++;
    if (det != w.first || tra != w.second) {
      res.fail(std::string(to_string(s)) + " gave " + std::to_string(det) + "/" +
               std::to_string(tra));
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 1.0) res.fail("runtime " + fmt("%.2f s", dt));
  if (res.pass) {
    res.detail = "870/840, 950/920, 740/740 per second; " +
                 std::to_string(windows) + " route windows within +-1 per stream; " +
                 fmt("%.2f s", dt);
  }
  return res;
}

// 2 ---------------------------------------------------------------------

Result criterion2() {
  Result res;
  RssParams p;
  p.v1 = p.v2 = kmh_to_ms(60.0);
  const double floor = rss_min_distance(0.0, p);
  if (std::abs(floor - 44.80) > 0.005 * 44.80) {
    res.fail("floor " + fmt("%.4f m", floor));
  }
  double worst = 0.0;
  for (Area a : kAreas) {
    RssParams q;
    q.v1 = q.v2 = driving_area(a).max_velocity;
    for (int i = 1; i <= 50; ++i) {
      const double rho = 0.05 * i;
      const double st = safety_time(rss_min_distance(rho, q), q);
      worst = std::max(worst, std::abs(st - rho));
    }
  }
  if (worst > 1e-9) res.fail("round trip error " + fmt("%.3g s", worst));
  if (res.pass) {
    res.detail = "floor " + fmt("%.4f m", floor) + ", round trip max error " +
                 fmt("%.2g s", worst);
  }
  return res;
}

// 3 ---------------------------------------------------------------------

Result criterion3() {
  Result res;
  for (int i = 0; i < 100; ++i) {
    const double st = 0.1 + 0.02 * i;
    const double r = st * i / 99.0;
    if (std::abs(matching_score_det(r, st) - r / st) > 1e-12) {
      res.fail("DET score off at grid point " + std::to_string(i));
    }
    if (matching_score_det(st * (1.0 + 1e-6) + 1e-9, st) != -1.0) {
      res.fail("DET score past st is not -1");
    }
    if (matching_score_tra(r, st) != 1.0 ||
        matching_score_tra(st + 1e-6, st) != -1.0) {
      res.fail("TRA score not +-1");
    }
  }
  Rng rng(33);
  double worst = 0.0;
  for (int e = 0; e < 100; ++e) {
    std::vector<TaskRecord> q;
    double t = 0.0;
    for (int i = 0; i < 30; ++i) {
      t += 0.002 * uniform01(rng);
      const Model m = kModels[uniform_index(rng, 3)];
      const TaskKind k = m == Model::GOTURN ? TaskKind::TRA : TaskKind::DET;
      q.push_back(make_task(i, i % 5, CameraKind::FC, t, k, m,
                            0.005 + 0.05 * uniform01(rng)));
    }
    const auto pc = hmai_platform();
    const auto norm = calibrate_norm(q, pc, RBalanceMode::Recursive);
    struct Rand : SchedulerPolicy {
      Rng r;
      explicit Rand(std::uint64_t s) : r(s) {}
      std::string name() const override { return "random"; }
      std::size_t decide(const TaskRecord&, const PlatformView& v) override {
        return uniform_index(r, v.p().size());
      }
    } pol(e);
    const auto rep = run_episode(q, Platform(pc, {norm, RBalanceMode::Recursive}), pol);
    double sum = 0.0;
    for (const auto& o : rep.records) sum += o.reward;
    const PlatformSummary fin{rep.summary.energy, rep.summary.time,
                              rep.summary.r_balance, rep.summary.ms};
    const double total = gvalue(fin, norm) + fin.ms;
    worst = std::max(worst, std::abs(sum - total) / std::max(1.0, std::abs(total)));
  }
  if (worst > 1e-12) res.fail("telescoping error " + fmt("%.3g", worst));
  if (res.pass) {
    res.detail = "100-point DET/TRA grids exact; telescoping max rel error " +
                 fmt("%.2g", worst) + " over 100 mini-episodes";
  }
  return res;
}

// 4 ---------------------------------------------------------------------

TaskRecord random_task(Rng& rng, std::int64_t id, double now) {
  const Model m = kModels[uniform_index(rng, 3)];
  const TaskKind k = m == Model::GOTURN ? TaskKind::TRA : TaskKind::DET;
  return make_task(id, 0, CameraKind::FC, now - 0.01 * uniform01(rng), k, m,
                   0.005 + 0.06 * uniform01(rng));
}

Platform random_state(Rng& rng, double& now) {
  Platform p(hmai_platform(), {NormalizationScales{0.5, 0.05}, RBalanceMode::Recursive});
  now = 0.0;
  const std::size_t n = uniform_index(rng, 40);
  for (std::size_t i = 0; i < n; ++i) {
    now += 0.002 * uniform01(rng);
    p.commit(random_task(rng, static_cast<std::int64_t>(i), now),
             uniform_index(rng, p.size()), now, now, 0.0);
  }
  now += 0.003 * uniform01(rng);
  return p;
}

Result criterion4() {
  Result res;
  Rng rng(44);
  int mm_bad = 0, ata_bad = 0, ga_bad = 0, sa_bad = 0, satisfiable = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    double now = 0.0;
    const Platform p = random_state(rng, now);
    const TaskRecord t = random_task(rng, 1000, now);
    const PlatformView v{&p, now, 0.0, std::nullopt};
    if (minmin_choose(t, v) != oracle::min_completion(t, p, now, 0.0)) ++mm_bad;
    bool any = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      any = any || p.predicted_completion(t, i, now, 0.0) - t.capture_time <= t.safety_time;
    }
    if (any) {
      ++satisfiable;
      const auto c = ata_choose(t, v);
      if (p.predicted_completion(t, c, now, 0.0) - t.capture_time > t.safety_time) ++ata_bad;
    }
  }
  Rng ga_rng(1), sa_rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    double now = 0.0;
    const Platform p = random_state(rng, now);
    const TaskRecord t = random_task(rng, 1000, now);
    const PlatformView v{&p, now, 0.0, std::nullopt};
    double best = -1e300;
    for (std::size_t i = 0; i < p.size(); ++i) {
      Platform copy = p;
      best = std::max(best, copy.commit(t, i, now, now, 0.0).reward);
    }
    const auto ga = ga_schedule_window(std::span(&t, 1), v, ga_rng, GaParams{});
    const auto sa = sa_schedule_window(std::span(&t, 1), v, sa_rng, SaParams{});
    if (window_fitness(std::span(&t, 1), ga, v) != best) ++ga_bad;
    if (window_fitness(std::span(&t, 1), sa, v) != best) ++sa_bad;
  }
  if (mm_bad) res.fail(std::to_string(mm_bad) + "/1000 minmin mismatches");
  if (ata_bad) res.fail(std::to_string(ata_bad) + " ata deadline violations");
  if (ga_bad) res.fail(std::to_string(ga_bad) + "/100 GA misses");
  if (sa_bad) res.fail(std::to_string(sa_bad) + "/100 SA misses");
  if (res.pass) {
    res.detail = "minmin 1000/1000, ata 0 violations on " +
                 std::to_string(satisfiable) + " satisfiable states, GA 100/100, SA 100/100";
  }
  return res;
}

// 5 ---------------------------------------------------------------------

Result criterion5() {
  Result res;
  Rng rng(55);
  const double h = 1e-5;
  double worst = 0.0;
  for (int net_i = 0; net_i < 20; ++net_i) {
    const std::size_t in = 2 + uniform_index(rng, 4);
    const std::size_t hid = 2 + uniform_index(rng, 5);
    const std::size_t out = 2 + uniform_index(rng, 3);
    const auto eval = QNetwork::initialized({in, hid, hid, out}, rng);
    const auto target = QNetwork::initialized({in, hid, hid, out}, rng);
    std::vector<Transition> ts;
    for (int i = 0; i < 4; ++i) {
      Transition t;
      for (std::size_t k = 0; k < in; ++k) {
        t.state.push_back(2.0 * uniform01(rng) - 1.0);
        t.next_state.push_back(2.0 * uniform01(rng) - 1.0);
      }
      t.action = uniform_index(rng, out);
      t.reward = 2.0 * uniform01(rng) - 1.0;
      t.terminal = i == 0;
      ts.push_back(t);
    }
    std::vector<const Transition*> batch;
    for (const auto& t : ts) batch.push_back(&t);
    Gradients g;
    td_loss(eval, target, batch, 0.9, LossMode::StandardSa, &g);
    std::vector<double> analytic;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
      for (Eigen::Index r = 0; r < g.weights[l].rows(); ++r) {
        for (Eigen::Index c = 0; c < g.weights[l].cols(); ++c) {
          analytic.push_back(g.weights[l](r, c));
        }
      }
      for (Eigen::Index r = 0; r < g.biases[l].size(); ++r) analytic.push_back(g.biases[l](r));
    }
    const auto params = eval.flatten();
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto plus = params, minus = params;
      plus[k] += h;
      minus[k] -= h;
      QNetwork np = eval, nm = eval;
      np.unflatten(plus);
      nm.unflatten(minus);
      const double numeric = (td_loss(np, target, batch, 0.9, LossMode::StandardSa) -
                              td_loss(nm, target, batch, 0.9, LossMode::StandardSa)) /
                             (2.0 * h);
      worst = std::max(worst, std::abs(numeric - analytic[k]) /
                                  std::max(1e-6, std::abs(numeric) + std::abs(analytic[k])));
    }
  }
  if (worst >= 1e-4) res.fail("gradient rel error " + fmt("%.3g", worst));

  AgentConfig c;
  c.hidden = {16, 8};
  c.batch_size = 1;
  c.memory_size = 1;
  DqnAgent agent(5, 3, c);
  Transition t;
  t.state = {0.3, -0.2, 0.9, 0.1, -0.5};
  t.next_state = t.state;
  t.action = 1;
  t.reward = 0.7;
  t.terminal = true;
  const Transition* one[] = {&t};
  double loss = 1.0;
  int steps = 0;
  while (steps < 5000 && loss >= 1e-6) {
    loss = agent.train_on_batch(one);
    ++steps;
  }
  if (loss >= 1e-6) res.fail("overfit loss " + fmt("%.3g", loss));

  const auto a = toy::train(3);
  const auto b = toy::train(3);
  bool same = a.weights == b.weights && a.loss_trace.size() == b.loss_trace.size();
  for (std::size_t i = 0; same && i < a.loss_trace.size(); ++i) {
    same = a.loss_trace[i].loss == b.loss_trace[i].loss;
  }
  if (!same) res.fail("weight trajectories differ under a fixed seed");
  if (res.pass) {
    res.detail = "gradient max rel error " + fmt("%.2g", worst) + ", overfit to " +
                 fmt("%.2g", loss) + " in " + std::to_string(steps) +
                 " steps, trajectories identical";
  }
  return res;
}

// 6 ---------------------------------------------------------------------

Result criterion6() {
  Result res;
  const auto t0 = std::chrono::steady_clock::now();
  const auto q = toy::queue(40, 999);
  std::size_t yolo = 0, ssd = 0;
  const double best = toy::optimal_reward(q, &yolo, &ssd);
  const auto trained = toy::train(50);
  FlexAiScheduler agent(trained.weights, toy::agent_config().normalization);
  const double got = toy::total_reward(q, agent);
  const double dt = seconds_since(t0);
  if (std::abs(got - best) > 1e-9 * std::max(1.0, std::abs(best))) {
    res.fail("greedy reward " + fmt("%.6f", got) + " vs optimum " + fmt("%.6f", best));
  }
  if (dt > 120.0) res.fail("runtime " + fmt("%.1f s", dt));
  if (res.pass) {
    res.detail = "50 toy episodes reach the optimal table (YOLO->" +
                 std::to_string(yolo) + ", SSD->" + std::to_string(ssd) +
                 "), reward " + fmt("%.4f", got) + ", " + fmt("%.1f s", dt);
  }
  return res;
}

// 7 ---------------------------------------------------------------------

Result criterion7() {
  Result res;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string dir = workdir();
  CommandOptions base;
  base.use_env = false;
  base.overrides = {"route.distance=100", "agent.train_interval=4", "agent.time_reference=elapsed",
                    "agent.gamma=0.5"};

  CommandOptions tr = base;
  tr.out = dir + "/c7_weights.json";
  std::ostringstream log;
  const auto trained = cmd_train(tr, log);
  const std::size_t episodes = trained.episode_reward.size();
  if (episodes < 200) res.fail("only " + std::to_string(episodes) + " episodes");

  const std::vector<std::string> scheds{"flexai", "minmin", "ata", "ga", "sa", "worst", "static"};
  std::string table;
  for (int k = 0; k < 5; ++k) {
    CommandOptions o = base;
    o.seed = 5000 + k;
    o.weights = tr.out;
    o.schedulers = scheds;
    std::ostringstream sink;
    const auto brakes = cmd_brake(o, sink);
    std::map<std::string, const EpisodeSummary*> s;
    std::map<std::string, double> d;
    for (const auto& b : brakes) {
      s[b.scheduler] = &b.summary;
      d[b.scheduler] = b.report.braking_distance;
    }
    const std::string q = "queue seed " + std::to_string(5000 + k);
    const auto& f = *s.at("flexai");
    table += "\n    " + q + ":";
    for (const auto& n : scheds) {
      table += " " + n + "(STM " + fmt("%.3f", s.at(n)->stm_rate) + ", R " +
               fmt("%.5f", s.at(n)->r_balance) + ", brake " + fmt("%.1f", d.at(n)) + ")";
    }
    if (f.stm_rate < 0.95) res.fail(q + ": (a) FlexAI STMRate " + fmt("%.4f", f.stm_rate) + " < 0.95");
    for (const auto& n : scheds) {
      if (n == "flexai") continue;
      if (s.at(n)->stm_rate > f.stm_rate) {
        res.fail(q + ": (a) " + n + " STMRate " + fmt("%.4f", s.at(n)->stm_rate) +
                 " > FlexAI " + fmt("%.4f", f.stm_rate));
      }
      if (s.at(n)->r_balance >= f.r_balance) {
        res.fail(q + ": (b) " + n + " R_Balance " + fmt("%.6f", s.at(n)->r_balance) +
                 " >= FlexAI " + fmt("%.6f", f.r_balance));
      }
      if (d.at(n) < d.at("flexai")) {
        res.fail(q + ": (c) " + n + " braking " + fmt("%.2f m", d.at(n)) +
                 " < FlexAI " + fmt("%.2f m", d.at("flexai")));
      }
    }
    if (!(d.at("flexai") < 250.0)) {
      res.fail(q + ": (c) FlexAI braking " + fmt("%.2f m", d.at("flexai")) + " >= 250 m");
    }
  }
  const double dt = seconds_since(t0);
  if (res.pass) {
    res.detail = std::to_string(episodes) + " episodes, 5 held-out queues, " +
                 fmt("%.0f s", dt);
  } else {
    res.detail += " [" + std::to_string(episodes) + " episodes, " + fmt("%.0f s", dt) +
                  "]" + table;
  }
  return res;
}

// 8 ---------------------------------------------------------------------

Result criterion8() {
  Result res;
  const auto t0 = std::chrono::steady_clock::now();
  CommandOptions o;
  o.use_env = false;
  o.overrides = {"route.distance=100"};
  o.schedulers = {"minmin"};
  o.platforms = platform_preset_names();
  std::ostringstream sink;
  const auto reports = cmd_compare(o, sink);
  const EpisodeReport* hmai = nullptr;
  for (const auto& r : reports) {
    if (r.platform == "hmai") hmai = &r;
  }
  if (!hmai) {
    res.fail("no hmai report");
    return res;
  }
  std::string info = "HMAI U " + fmt("%.4f", hmai->summary.utilization) + " E " +
                     fmt("%.1f J", hmai->summary.energy);
  for (const auto& r : reports) {
    if (&r == hmai) continue;
    info += "; " + r.platform + " U " + fmt("%.4f", r.summary.utilization) + " E " +
            fmt("%.1f J", r.summary.energy);
    if (!(hmai->summary.utilization > r.summary.utilization)) {
      res.fail("utilization not above " + r.platform);
    }
    if (!(hmai->summary.energy < r.summary.energy)) {
      res.fail("energy not below " + r.platform);
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 60.0) res.fail("runtime " + fmt("%.1f s", dt));
  res.detail = (res.pass ? "" : res.detail + " | ") + info + ", " + fmt("%.1f s", dt);
  return res;
}

// 9 ---------------------------------------------------------------------

Result criterion9() {
  Result res;
  const std::string dir = workdir();
  const auto once = [&](const std::string& tag) {
    CommandOptions g;
    g.use_env = false;
    g.seed = 77;
    g.overrides = {"route.distance=30", "sched.seed=5"};
    g.out = dir + "/c9_" + tag + ".jsonl";
    std::ostringstream log;
    cmd_gen(g, log);
    CommandOptions c = g;
    c.queue = g.out;
    c.out = dir + "/c9_" + tag + ".json";
    c.format = OutputFormat::Json;
    c.schedulers = {"minmin", "ata", "ga", "sa", "worst", "static"};
    cmd_compare(c, log);
    // Artifact paths differ by tag; compare everything else.
    auto j = nlohmann::json::parse(slurp(c.out));
    j["manifest"]["artifacts"] = nullptr;
    auto mj = nlohmann::json::parse(slurp(queue_manifest_path(g.out)));
    mj["manifest"]["artifacts"] = nullptr;
    return std::array<std::string, 3>{slurp(g.out), mj.dump(), j.dump()};
  };
  const auto a = once("a");
  const auto b = once("b");
  if (a[0] != b[0]) res.fail("queue files differ");
  if (a[1] != b[1]) res.fail("queue manifests differ");
  if (a[2] != b[2]) res.fail("compare JSON differs");
  if (res.pass) {
    res.detail = "gen + compare (6 schedulers) byte-identical, " +
                 std::to_string(a[2].size()) + " bytes of JSON";
  }
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Result()>> all{criterion1, criterion2, criterion3,
                                                 criterion4, criterion5, criterion6,
                                                 criterion7, criterion8, criterion9};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(n)) continue;
    Result r;
    try {
      r = all[i]();
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d: %s\n", r.pass ? "PASS" : "FAIL", n, r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
