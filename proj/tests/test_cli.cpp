#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "krbn/errors.hpp"
#include "krbn_tools/runner.hpp"

using namespace krbn::tools;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("krbn_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + KRBN_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json small_simulation() {
  return json::parse(R"({
    "kind": "simulate",
    "seed": 5,
    "noise": { "alpha": 1.5, "dim": 1 },
    "drift": { "type": "peano", "beta": 0.5 },
    "params": { "horizon": 1, "steps": 40, "paths": 600, "snapshots": [0.5, 1.0] }
  })");
}

}  // namespace

TEST_CASE("yw-check writes a summary and reproduces byte for byte") {
  const json cfg = load_config_file(std::string(KRBN_CONFIG_DIR) + "/yw-check.json");
  const fs::path a = scratch("yw_a"), b = scratch("yw_b");
  const RunResult r = run_experiment(cfg, a);
  CHECK(r.exit_code == 0);
  CHECK(r.kind == "yw-check");
  const std::string summary = slurp(a / "summary.csv");
  CHECK(summary.rfind("check,status,statistic,value,stderr\n", 0) == 0);
  CHECK(fs::exists(a / "manifest.json"));
  run_experiment(cfg, b);
  for (const auto& f : r.outputs)
    if (fs::path(f).extension() == ".csv") CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("unknown keys are rejected by name") {
  json cfg = small_simulation();
  cfg["noise"]["alpa"] = 1.5;
  try {
    run_experiment(cfg, scratch("typo"));
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alpa") != std::string::npos);
  }
  json bad_kind = small_simulation();
  bad_kind["kind"] = "nonsense";
  CHECK_THROWS_AS(run_experiment(bad_kind, scratch("kind")), ConfigError);
  json bad_alpha = small_simulation();
  bad_alpha["noise"]["alpha"] = 2.5;
  CHECK_THROWS_AS(run_experiment(bad_alpha, scratch("alpha")), ConfigError);
}

TEST_CASE("results do not depend on the worker count") {
  const json cfg = small_simulation();
  RunSettings one, three;
  one.workers = 1;
  three.workers = 3;
  const fs::path a = scratch("w1"), b = scratch("w3");
  const RunResult ra = run_experiment(cfg, a, one);
  const RunResult rb = run_experiment(cfg, b, three);
  CHECK(rb.workers == 3);
  REQUIRE(ra.outputs == rb.outputs);
  for (const auto& f : ra.outputs)
    if (fs::path(f).extension() == ".csv") CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("seed override changes the paths") {
  const json cfg = small_simulation();
  RunSettings s;
  s.seed = 99;
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  run_experiment(cfg, a);
  const RunResult r = run_experiment(cfg, b, s);
  CHECK(r.seed == 99);
  CHECK(slurp(a / "moments.csv") != slurp(b / "moments.csv"));
}

TEST_CASE("report aggregation and exit codes") {
  const fs::path root = scratch("report");
  const std::string header = "check,status,statistic,value,stderr\n";
  fs::create_directories(root / "one");
  write_file(root / "one" / "summary.csv", header + "a,PASS,x,1,0\n");
  ReportResult r = emit_report(root);
  CHECK(r.pass == 1);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(r.csv));
  CHECK(slurp(r.csv) == "experiment,check,status,statistic,value,stderr\none,a,PASS,x,1,0\n");
  CHECK(slurp(r.markdown).find("| a | PASS |") != std::string::npos);

  fs::create_directories(root / "two");
  write_file(root / "two" / "summary.csv", header + "b,INCONCLUSIVE,y,0,0\nc,INFO,z,2,0\n");
  r = emit_report(root);
  CHECK(r.inconclusive == 1);
  CHECK(r.info == 1);
  CHECK(r.exit_code == 0);

  write_file(root / "two" / "summary.csv", header + "b,FAIL,y,0,0\n");
  r = emit_report(root);
  CHECK(r.fail == 1);
  CHECK(r.exit_code != 0);

  CHECK_THROWS_AS(emit_report(scratch("empty")), krbn::ArgumentError);
}

TEST_CASE("environment overrides") {
  ::setenv("KRBN_SEED", "17", 1);
  ::setenv("KRBN_WORKERS", "2", 1);
  RunSettings s = settings_from_environment();
  CHECK(s.seed == 17u);
  CHECK(s.workers == 2u);
  ::setenv("KRBN_WORKERS", "0", 1);
  CHECK_THROWS_AS(settings_from_environment(), ConfigError);
  ::setenv("KRBN_SEED", "abc", 1);
  ::unsetenv("KRBN_WORKERS");
  CHECK_THROWS_AS(settings_from_environment(), ConfigError);
  ::unsetenv("KRBN_SEED");
  s = settings_from_environment();
  CHECK_FALSE(s.seed.has_value());
  CHECK_FALSE(s.workers.has_value());
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("exe");
  const std::string yw = std::string(KRBN_CONFIG_DIR) + "/yw-check.json";
  CHECK(cli("yw-check --config \"" + yw + "\" --out \"" + (dir / "ok").string() + "\" --no-plots") == 0);
  CHECK(fs::exists(dir / "ok" / "summary.csv"));
  CHECK_FALSE(fs::exists(dir / "ok" / "phi.svg"));

  json typo = small_simulation();
  typo["params"]["pahts"] = 10;
  write_file(dir / "typo.json", typo.dump());
  CHECK(cli("simulate --config \"" + (dir / "typo.json").string() + "\" --out \"" + (dir / "t").string() + "\"") == 2);

  // Kind in the file must match the subcommand.
  CHECK(cli("pea-check --config \"" + yw + "\" --out \"" + (dir / "m").string() + "\"") == 2);
  CHECK(cli("yw-check --config /nonexistent.json") == 2);
  CHECK(cli("yw-check --config \"" + yw + "\" --workers 0 --out \"" + (dir / "w").string() + "\"") == 2);
  CHECK(cli("report \"" + (dir / "ok").string() + "\"") == 0);
  CHECK(cli("report \"" + scratch("none").string() + "\"") == 2);

  const std::string env_cmd = "KRBN_WORKERS=bogus \"" + std::string(KRBN_CLI_PATH) + "\" yw-check --config \"" + yw +
                              "\" --out \"" + (dir / "e").string() + "\" > /dev/null 2>&1";
  const int rc = std::system(env_cmd.c_str());
  CHECK(WEXITSTATUS(rc) == 2);
}
