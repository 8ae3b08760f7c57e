#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "krbn/errors.hpp"
#include "krbn_tools/config.hpp"
#include "krbn_tools/runner.hpp"

namespace {

int run(const std::string& kind, const std::string& config_path, const std::string& out, std::optional<long long> seed,
        std::optional<long long> workers, bool no_plots) {
  using namespace krbn::tools;
  json cfg = load_config_file(config_path);
  if (!cfg.is_object()) throw ConfigError("the configuration must be a JSON object");
  if (!cfg.contains("kind")) cfg["kind"] = kind;
  if (cfg["kind"] != kind)
    throw ConfigError("config kind '" + cfg["kind"].dump() + "' does not match the command '" + kind + "'");
  RunSettings s = settings_from_environment();
  if (seed) {
    if (*seed < 0) throw ConfigError("--seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(*seed);
  }
  if (workers) {
    if (*workers < 1 || *workers > 1024) throw ConfigError("--workers must lie in [1, 1024]");
    s.workers = static_cast<unsigned>(*workers);
  }
  s.plots = !no_plots;
  const RunResult r = run_experiment(cfg, out, s);
  for (const auto& c : r.checks) std::cout << to_string(c.status) << "  " << c.check << "  " << c.statistic << "=" << c.value << "\n";
  std::cout << r.kind << ": seed " << r.seed << ", " << r.workers << " worker(s), exit " << r.exit_code << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetic-rbn: configuration-driven experiments on kinetic SDEs with irregular drift"};
  app.require_subcommand(1);

  std::string config, out = "out", report_dir;
  std::optional<long long> seed, workers;
  bool no_plots = false;
  std::string chosen;
  for (const auto& kind : krbn::tools::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    sub->add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "master seed (overrides KRBN_SEED and the config)");
    sub->add_option("--workers", workers, "worker threads (overrides KRBN_WORKERS and the config)");
    sub->add_flag("--no-plots", no_plots, "skip SVG output");
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  auto* rep = app.add_subcommand("report", "consolidate summary.csv files under a directory");
  rep->add_option("dir", report_dir, "results directory")->required();
  rep->callback([&chosen] { chosen = "report"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (chosen == "report") {
      const auto r = krbn::tools::emit_report(report_dir);
      std::cout << "PASS " << r.pass << ", FAIL " << r.fail << ", INCONCLUSIVE " << r.inconclusive << ", INFO " << r.info
                << "\n" << r.csv.string() << "\n" << r.markdown.string() << "\n";
      return r.exit_code;
    }
    return run(chosen, config, out, seed, workers, no_plots);
  } catch (const krbn::tools::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const krbn::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return chosen == "report" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
