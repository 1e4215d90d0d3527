#include <CLI11.hpp>
#include <iostream>

#include "hmai/commands.hpp"

namespace {

void add_common(CLI::App* cmd, hmai::CommandOptions& o, std::string& format) {
  cmd->add_option("--config", o.config_path, "INI configuration file");
  cmd->add_option("--seed", o.seed, "route seed (route.seed)");
  cmd->add_option("--area", o.area, "driving area: ub|uhw|hw")
      ->check(CLI::IsMember({"ub", "uhw", "hw"}, CLI::ignore_case));
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--format", format, "json|csv|text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  cmd->add_option("--set", o.overrides, "override a key: section.key=value");
  cmd->add_flag("!--no-env", o.use_env, "ignore HMAI_* environment overrides");
}

void add_sched(CLI::App* cmd, hmai::CommandOptions& o) {
  cmd->add_option("--scheduler", o.schedulers,
                  "minmin|ata|ga|sa|worst|static|flexai (comma separated)")
      ->delimiter(',');
  cmd->add_option("--platform", o.platforms,
                  "hmai|homo-sconvod|homo-sconvic|homo-mconvmc")
      ->delimiter(',');
  cmd->add_option("--weights", o.weights, "FlexAI weights file");
  cmd->add_option("--queue", o.queue,
                  "task queue (JSON lines); generated from config if absent");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous multi-accelerator scheduling simulator"};
  app.set_version_flag("--version", std::string(hmai::kToolVersion));
  app.require_subcommand(1);

  hmai::CommandOptions o;
  std::string format = "text";

  auto* gen = app.add_subcommand("gen", "generate a task queue");
  add_common(gen, o, format);

  auto* train = app.add_subcommand("train", "train a FlexAI agent");
  add_common(train, o, format);
  train->add_option("--episodes", o.episodes, "training episodes");

  auto* run = app.add_subcommand("run", "run one scheduler on a queue");
  add_common(run, o, format);
  add_sched(run, o);

  auto* compare = app.add_subcommand("compare", "compare schedulers/platforms");
  add_common(compare, o, format);
  add_sched(compare, o);

  auto* brake = app.add_subcommand("brake", "braking distance breakdown");
  add_common(brake, o, format);
  add_sched(brake, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? hmai::kExitOk : hmai::kExitConfig;
  }

  try {
    o.format = hmai::parse_format(format);
    if (*gen) {
      hmai::cmd_gen(o, std::cerr);
    } else if (*train) {
      hmai::cmd_train(o, std::cerr);
    } else if (*run) {
      hmai::cmd_run(o, std::cout);
    } else if (*compare) {
      hmai::cmd_compare(o, std::cout);
    } else if (*brake) {
      hmai::cmd_brake(o, std::cout);
    }
  } catch (const hmai::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return hmai::kExitConfig;
  } catch (const hmai::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return hmai::kExitIo;
  } catch (const hmai::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hmai::kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return hmai::kExitOk;
}
