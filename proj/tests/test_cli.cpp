#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef HMAI_EXE
#error "HMAI_EXE must point at the hmai binary"
#endif

namespace {

std::string dir() {
  static const std::string d = [] {
    auto p = std::filesystem::temp_directory_path() / "hmai_cli_test";
    std::filesystem::create_directories(p);
    return p.string();
  }();
  return d;
}

int run(const std::string& args) {
  const std::string cmd = std::string(HMAI_EXE) + " " + args + " >" + dir() +
                          "/stdout.txt 2>" + dir() + "/stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("--version") == 0);
  CHECK(run("run --bogus-flag") == 2);
  CHECK(run("gen --no-env --set route.nothing=1 --out " + dir() + "/x.jsonl") == 2);
  CHECK(slurp(dir() + "/stderr.txt").find("route.nothing") != std::string::npos);
  CHECK(run("run --no-env --queue " + dir() + "/absent.jsonl") == 3);
  CHECK(run("run --no-env --scheduler flexai --set route.distance=10") == 2);
  {
    std::ofstream(dir() + "/bad.jsonl") << "{not json\n";
  }
  CHECK(run("run --no-env --queue " + dir() + "/bad.jsonl") == 3);
}

TEST_CASE("gen, train, run and brake round trip") {
  const std::string q = dir() + "/q.jsonl";
  const std::string w = dir() + "/w.json";
  REQUIRE(run("gen --no-env --seed 3 --set route.distance=15 --out " + q) == 0);
  const auto first = slurp(q);
  REQUIRE(run("gen --no-env --seed 3 --set route.distance=15 --out " + q) == 0);
  CHECK(slurp(q) == first);

  REQUIRE(run("train --no-env --episodes 1 --set train.distance=5 --out " + w) == 0);
  CHECK(std::filesystem::exists(w + ".loss.csv"));
  CHECK(std::filesystem::exists(w + ".manifest.json"));

  CHECK(run("run --no-env --scheduler flexai --weights " + w + " --queue " + q +
            " --format json") == 0);
  CHECK(slurp(dir() + "/stdout.txt").find("\"flexai\"") != std::string::npos);
  CHECK(run("compare --no-env --scheduler flexai --platform homo-sconvod --weights " +
            w + " --queue " + q) == 4);
  CHECK(run("compare --no-env --scheduler minmin --queue " + q) == 0);
  const auto table = slurp(dir() + "/stdout.txt");
  CHECK(table.find("minmin") != std::string::npos);
  CHECK(run("brake --no-env --scheduler minmin,ata --queue " + q + " --format csv") == 0);
  CHECK(slurp(dir() + "/stdout.txt").rfind("scheduler,trigger_task_id", 0) == 0);
  CHECK(run("brake --no-env --scheduler minmin --queue " + q +
            " --set brake.velocity_kmh=0") == 0);
  CHECK(slurp(dir() + "/stdout.txt").find("UNSAFE") == std::string::npos);
}

TEST_CASE("environment overrides reach the config") {
  const std::string q = dir() + "/env.jsonl";
  const std::string env = "HMAI_ROUTE_DISTANCE=5 HMAI_ROUTE_AREA=hw ";
  const int rc = std::system((env + HMAI_EXE + " gen --out " + q + " >/dev/null 2>&1").c_str());
  REQUIRE(WEXITSTATUS(rc) == 0);
  CHECK(slurp(q + ".manifest.json").find("\"route.area\": \"hw\"") != std::string::npos);
  REQUIRE(run("gen --no-env --out " + q + " --set route.distance=5") == 0);
  CHECK(slurp(q + ".manifest.json").find("\"route.area\": \"ub\"") != std::string::npos);
}
