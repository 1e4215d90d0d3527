#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hmai/commands.hpp"
#include "hmai/config.hpp"
#include "hmai/criteria.hpp"
#include "hmai/envgen.hpp"
#include "hmai/platform.hpp"

namespace py = pybind11;
using namespace hmai;

namespace {

CommandOptions options(const std::map<std::string, std::string>& settings,
                       std::optional<std::uint64_t> seed,
                       std::vector<std::string> schedulers,
                       std::vector<std::string> platforms,
                       std::optional<std::string> queue,
                       std::optional<std::string> weights) {
  CommandOptions o;
  o.use_env = false;
  for (const auto& [k, v] : settings) o.overrides.push_back(k + "=" + v);
  o.seed = seed;
  o.schedulers = std::move(schedulers);
  o.platforms = std::move(platforms);
  o.queue = std::move(queue);
  o.weights = std::move(weights);
  o.format = OutputFormat::Json;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heterogeneous accelerator scheduling simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def("rss_min_distance",
        [](double rho, double v1, double v2, double a_accel, double a_brake_correct,
           double a_brake) {
          return rss_min_distance(rho, {v1, v2, a_accel, a_brake_correct, a_brake});
        },
        py::arg("rho"), py::arg("v1"), py::arg("v2"), py::arg("a_max_accel") = 8.382,
        py::arg("a_min_brake_correct") = 6.2, py::arg("a_min_brake") = 6.2);
  m.def("safety_time",
        [](double d_min, double v1, double v2, double a_accel, double a_brake_correct,
           double a_brake) {
          return safety_time(d_min, {v1, v2, a_accel, a_brake_correct, a_brake});
        },
        py::arg("d_min"), py::arg("v1"), py::arg("v2"), py::arg("a_max_accel") = 8.382,
        py::arg("a_min_brake_correct") = 6.2, py::arg("a_min_brake") = 6.2);
  m.def("matching_score_det", &matching_score_det, py::arg("response"), py::arg("st"));
  m.def("matching_score_tra", &matching_score_tra, py::arg("response"), py::arg("st"));
  m.def("kmh_to_ms", &kmh_to_ms);

  m.def("platform_presets", &platform_preset_names);
  m.def("scheduler_names", &scheduler_names);
  m.def("platform_size", [](const std::string& p) { return platform_preset(p).total(); });
  m.def("config_keys", [] {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : config_keys()) out[k] = v;
    return out;
  });

  m.def("generate_jsonl",
        [](const std::map<std::string, std::string>& settings,
           std::optional<std::uint64_t> seed) {
          CommandOptions o = options(settings, seed, {}, {}, {}, {});
          const auto cfg = load_experiment(o);
          const auto g = generate(cfg, cfg.route);
          std::ostringstream os;
          write_queue_jsonl(os, g.tasks);
          return os.str();
        },
        py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("seed") = py::none());

  m.def("gen",
        [](const std::string& out, const std::map<std::string, std::string>& settings,
           std::optional<std::uint64_t> seed) {
          CommandOptions o = options(settings, seed, {}, {}, {}, {});
          o.out = out;
          std::ostringstream log;
          py::gil_scoped_release nogil;
          cmd_gen(o, log);
          return log.str();
        },
        py::arg("out"), py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("seed") = py::none());

  m.def("train",
        [](const std::string& out, const std::map<std::string, std::string>& settings,
           std::optional<std::size_t> episodes) {
          CommandOptions o = options(settings, {}, {}, {}, {}, {});
          o.out = out;
          o.episodes = episodes;
          std::ostringstream log;
          py::gil_scoped_release nogil;
          cmd_train(o, log);
          return log.str();
        },
        py::arg("out"), py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("episodes") = py::none());

  m.def("run_json",
        [](const std::string& scheduler, const std::map<std::string, std::string>& settings,
           std::optional<std::uint64_t> seed, std::optional<std::string> platform,
           std::optional<std::string> queue, std::optional<std::string> weights) {
          CommandOptions o = options(settings, seed, {scheduler},
                                     platform ? std::vector<std::string>{*platform}
                                              : std::vector<std::string>{},
                                     queue, weights);
          std::ostringstream os;
          py::gil_scoped_release nogil;
          cmd_run(o, os);
          return os.str();
        },
        py::arg("scheduler") = "minmin",
        py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("seed") = py::none(), py::arg("platform") = py::none(),
        py::arg("queue") = py::none(), py::arg("weights") = py::none());

  m.def("compare_json",
        [](std::vector<std::string> schedulers, std::vector<std::string> platforms,
           const std::map<std::string, std::string>& settings,
           std::optional<std::uint64_t> seed, std::optional<std::string> queue,
           std::optional<std::string> weights) {
          CommandOptions o = options(settings, seed, std::move(schedulers),
                                     std::move(platforms), queue, weights);
          std::ostringstream os;
          py::gil_scoped_release nogil;
          cmd_compare(o, os);
          return os.str();
        },
        py::arg("schedulers") = std::vector<std::string>{},
        py::arg("platforms") = std::vector<std::string>{},
        py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("seed") = py::none(), py::arg("queue") = py::none(),
        py::arg("weights") = py::none());

  m.def("brake_json",
        [](std::vector<std::string> schedulers,
           const std::map<std::string, std::string>& settings,
           std::optional<std::uint64_t> seed, std::optional<std::string> queue,
           std::optional<std::string> weights) {
          CommandOptions o = options(settings, seed, std::move(schedulers), {}, queue,
                                     weights);
          std::ostringstream os;
          py::gil_scoped_release nogil;
          cmd_brake(o, os);
          return os.str();
        },
        py::arg("schedulers") = std::vector<std::string>{},
        py::arg("settings") = std::map<std::string, std::string>{},
        py::arg("seed") = py::none(), py::arg("queue") = py::none(),
        py::arg("weights") = py::none());
}
