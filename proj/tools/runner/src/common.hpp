#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "krbn/csv.hpp"
#include "krbn/drift.hpp"
#include "krbn/kinetic.hpp"
#include "krbn/stable_noise.hpp"
#include "krbn_tools/config.hpp"
#include "krbn_tools/runner.hpp"

namespace krbn::tools::detail {

// Keys shared by every experiment kind.
struct Common {
  std::string kind;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool plots = true;
  StableNoiseSpec noise;
  DriftModel drift;
  double sigma = 1.0;

  SystemSpec system() const { return SystemSpec::standard(noise, drift, sigma); }
  // Independent seed for sub-experiment `part`.
  std::uint64_t sub_seed(std::uint64_t part) const;
};

// Sink for check rows and artifact files of one run.
class Output {
 public:
  Output(std::filesystem::path dir, bool plots) : dir_(std::move(dir)), plots_(plots) {}

  void check(std::string name, Status status, std::string statistic, double value, double se = 0.0);
  void pass_if(std::string name, bool ok, std::string statistic, double value, double se = 0.0) {
    check(std::move(name), ok ? Status::Pass : Status::Fail, std::move(statistic), value, se);
  }
  // Opens a CSV under the output directory and records its name.
  void csv(const std::string& name, const std::function<void(CsvWriter&)>& fill);
  std::filesystem::path file(const std::string& name);
  bool plots() const { return plots_; }

  std::vector<CheckRow> checks;
  std::vector<std::string> files;

 private:
  std::filesystem::path dir_;
  bool plots_;
};

DriftModel parse_drift(ConfigObject obj, int dim);
StableNoiseSpec parse_noise(ConfigObject obj);
State parse_state(ConfigObject obj, int dim);
std::vector<Vec> parse_points(const std::vector<std::vector<double>>& rows, int dim, const std::string& where);

// A configured experiment: the parse step validates everything up front and
// returns the closure that performs the computation.
using Job = std::function<void(Output&)>;

Job parse_simulate(ConfigObject& p, const Common& c);
Job parse_pea(ConfigObject& p, const Common& c);
Job parse_uniqueness(ConfigObject& p, const Common& c);
Job parse_density(ConfigObject& p, const Common& c);
Job parse_transport(ConfigObject& p, const Common& c);
Job parse_yw(ConfigObject& p, const Common& c);
Job parse_zvonkin(ConfigObject& p, const Common& c);

// Shorthand for argument checks made while parsing.
void require(bool ok, const std::string& message);

}  // namespace krbn::tools::detail
