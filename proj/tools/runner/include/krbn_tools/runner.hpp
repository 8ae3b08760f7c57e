#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "krbn_tools/config.hpp"

namespace krbn::tools {

enum class Status { Pass, Fail, Inconclusive, Info };
const char* to_string(Status s);

// One line of summary.csv: check,status,statistic,value,stderr.
struct CheckRow {
  std::string check;
  Status status = Status::Info;
  std::string statistic;
  double value = 0.0;
  double std_error = 0.0;
};

struct RunSettings {
  std::optional<std::uint64_t> seed;  // overrides the config
  std::optional<unsigned> workers;
  bool plots = true;
};

struct RunResult {
  std::string kind;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::vector<CheckRow> checks;
  std::vector<std::string> outputs;  // file names written under the output directory
  int exit_code = 0;                 // 0 when no check failed, else 1
};

const std::vector<std::string>& experiment_kinds();

// Validates the whole configuration first (ConfigError on any problem,
// including unknown keys), then runs the experiment and writes summary.csv,
// per-datum CSVs, manifest.json and, if enabled, SVG plots into out_dir.
// Module failures propagate as krbn::Error.
RunResult run_experiment(const json& config, const std::filesystem::path& out_dir, const RunSettings& settings = {});

struct ReportResult {
  std::size_t pass = 0, fail = 0, inconclusive = 0, info = 0;
  std::filesystem::path csv;
  std::filesystem::path markdown;
  int exit_code = 0;  // 1 if any FAIL row
};

// Concatenates every summary.csv found in dir and its immediate
// subdirectories into report.csv and report.md inside dir. Throws
// krbn::ArgumentError if none is found.
ReportResult emit_report(const std::filesystem::path& dir);

// KRBN_SEED and KRBN_WORKERS; ConfigError when set but malformed.
RunSettings settings_from_environment();

}  // namespace krbn::tools
