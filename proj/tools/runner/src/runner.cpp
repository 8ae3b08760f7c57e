#include "krbn_tools/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "common.hpp"
#include "krbn/errors.hpp"
#include "krbn/rng.hpp"

#ifndef KRBN_GIT_DESCRIBE
#define KRBN_GIT_DESCRIBE "unknown"
#endif

namespace krbn::tools {

namespace fs = std::filesystem;

const char* to_string(Status s) {
  switch (s) {
    case Status::Pass:
      return "PASS";
    case Status::Fail:
      return "FAIL";
    case Status::Inconclusive:
      return "INCONCLUSIVE";
    case Status::Info:
      return "INFO";
  }
  return "INFO";
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k = {"simulate",       "pea-check",       "uniqueness-probe", "density-check",
                                             "transport-check", "yw-check",       "zvonkin-check"};
  return k;
}

namespace detail {

std::uint64_t Common::sub_seed(std::uint64_t part) const { return substream_key(seed, 0x5EED0000ULL + part); }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void Output::check(std::string name, Status status, std::string statistic, double value, double se) {
  checks.push_back({std::move(name), status, std::move(statistic), value, se});
}

fs::path Output::file(const std::string& name) {
  if (std::find(files.begin(), files.end(), name) == files.end()) files.push_back(name);
  return dir_ / name;
}

void Output::csv(const std::string& name, const std::function<void(CsvWriter&)>& fill) {
  std::ofstream out(file(name), std::ios::binary);
  if (!out) throw Error("cannot write " + (dir_ / name).string());
  CsvWriter w(out);
  fill(w);
}

StableNoiseSpec parse_noise(ConfigObject obj) {
  const double alpha = obj.number("alpha", 2.0);
  const long long dim = obj.integer("dim", 1);
  obj.finish();
  require(dim >= 1 && dim <= kMaxDim, "'noise.dim' must lie in [1, " + std::to_string(kMaxDim) + "]");
  require(alpha > 1.0 && alpha <= 2.0, "'noise.alpha' must lie in (1, 2]");
  return StableNoiseSpec::make(alpha, static_cast<int>(dim));
}

DriftModel parse_drift(ConfigObject obj, int dim) {
  const std::string type = obj.string("type", "peano");
  DriftModel m;
  if (type == "peano") {
    const double beta = obj.number("beta", 0.5);
    const double a = obj.number("a", 1.0);
    require(beta > 0.0 && beta <= 1.0, "'drift.beta' must lie in (0, 1]");
    m = DriftModel::peano(beta, a, dim);
  } else if (type == "accumulating") {
    const double beta = obj.number("beta", 0.5);
    const long long anchors = obj.integer("anchors", 256);
    require(dim == 1, "accumulating drift requires noise.dim = 1");
    require(beta > 0.0 && beta <= 1.0, "'drift.beta' must lie in (0, 1]");
    require(anchors >= 2, "'drift.anchors' must be >= 2");
    m = DriftModel::accumulating(beta, static_cast<int>(anchors));
  } else if (type == "zero") {
    m = DriftModel::zero(dim);
  } else if (type == "constant") {
    const auto v = obj.numbers("value", std::vector<double>(dim, 0.0));
    require(static_cast<int>(v.size()) == dim, "'drift.value' must have noise.dim entries");
    m = DriftModel::constant(Eigen::Map<const Eigen::VectorXd>(v.data(), dim));
  } else if (type == "lipschitz") {
    const auto rows = obj.rows("matrix", {});
    const auto off = obj.numbers("offset", std::vector<double>(dim, 0.0));
    require(static_cast<int>(rows.size()) == dim, "'drift.matrix' must be noise.dim x noise.dim");
    Mat mm(dim, dim);
    for (int i = 0; i < dim; ++i) {
      require(static_cast<int>(rows[i].size()) == dim, "'drift.matrix' must be noise.dim x noise.dim");
      for (int j = 0; j < dim; ++j) mm(i, j) = rows[i][j];
    }
    require(static_cast<int>(off.size()) == dim, "'drift.offset' must have noise.dim entries");
    m = DriftModel::lipschitz(mm, Eigen::Map<const Eigen::VectorXd>(off.data(), dim));
  } else {
    throw ConfigError("unknown drift type '" + type + "' at '" + obj.where("type") + "'");
  }
  obj.finish();
  return m;
}

State parse_state(ConfigObject obj, int dim) {
  const auto v = obj.numbers("v", std::vector<double>(dim, 0.0));
  const auto x = obj.numbers("x", std::vector<double>(dim, 0.0));
  obj.finish();
  require(static_cast<int>(v.size()) == dim && static_cast<int>(x.size()) == dim,
          "initial state components must have noise.dim entries");
  return State{Eigen::Map<const Eigen::VectorXd>(v.data(), dim), Eigen::Map<const Eigen::VectorXd>(x.data(), dim)};
}

std::vector<Vec> parse_points(const std::vector<std::vector<double>>& rows, int dim, const std::string& where) {
  std::vector<Vec> out;
  for (const auto& r : rows) {
    require(static_cast<int>(r.size()) == dim, "points in '" + where + "' must have noise.dim entries");
    out.push_back(Eigen::Map<const Eigen::VectorXd>(r.data(), dim));
  }
  return out;
}

}  // namespace detail

namespace {

std::string git_describe() { return KRBN_GIT_DESCRIBE; }

}  // namespace

RunResult run_experiment(const json& config, const fs::path& out_dir, const RunSettings& settings) {
  using namespace detail;
  ConfigObject root(config, "");
  Common c;
  c.kind = root.string("kind", "");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
    throw ConfigError("unknown or missing experiment kind '" + c.kind + "'");
  const long long seed = root.integer("seed", 1);
  const long long workers = root.integer("workers", 1);
  require(seed >= 0, "'seed' must be >= 0");
  require(workers >= 1 && workers <= 1024, "'workers' must lie in [1, 1024]");
  c.seed = settings.seed.value_or(static_cast<std::uint64_t>(seed));
  c.workers = settings.workers.value_or(static_cast<unsigned>(workers));
  c.plots = settings.plots && root.boolean("plots", true);
  c.noise = parse_noise(root.object("noise"));
  c.sigma = root.number("sigma", 1.0);
  require(c.sigma >= 0.0, "'sigma' must be >= 0");
  try {
    c.drift = parse_drift(root.object("drift"), c.noise.dim);
  } catch (const krbn::Error& e) {
    throw ConfigError(std::string("invalid drift: ") + e.what());
  }
  ConfigObject params = root.object("params");
  Job job;
  try {
    if (c.kind == "simulate") job = parse_simulate(params, c);
    else if (c.kind == "pea-check") job = parse_pea(params, c);
    else if (c.kind == "uniqueness-probe") job = parse_uniqueness(params, c);
    else if (c.kind == "density-check") job = parse_density(params, c);
    else if (c.kind == "transport-check") job = parse_transport(params, c);
    else if (c.kind == "yw-check") job = parse_yw(params, c);
    else job = parse_zvonkin(params, c);
  } catch (const krbn::Error& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
  params.finish();
  root.finish();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  Output out(out_dir, c.plots);
  const auto t0 = std::chrono::steady_clock::now();
  job(out);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.csv("summary.csv", [&](CsvWriter& w) {
    w.header({"check", "status", "statistic", "value", "stderr"});
    for (const auto& r : out.checks)
      w.field(r.check).field(to_string(r.status)).field(r.statistic).field(r.value).field(r.std_error).end_row();
  });

  RunResult res;
  res.kind = c.kind;
  res.seed = c.seed;
  res.workers = c.workers;
  res.checks = out.checks;
  res.exit_code = std::any_of(res.checks.begin(), res.checks.end(), [](const CheckRow& r) {
    return r.status == Status::Fail;
  }) ? 1 : 0;

  json manifest;
  manifest["kind"] = c.kind;
  manifest["config"] = config;
  manifest["seed"] = c.seed;
  manifest["workers"] = c.workers;
  manifest["git_describe"] = git_describe();
  manifest["wall_time_s"] = wall;
  manifest["exit_code"] = res.exit_code;
  res.outputs = out.files;
  res.outputs.push_back("manifest.json");
  manifest["outputs"] = res.outputs;
  std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
  mf << manifest.dump(2) << "\n";
  return res;
}

ReportResult emit_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ArgumentError("emit_report: not a directory: " + dir.string());
  std::vector<std::pair<std::string, fs::path>> found;
  if (fs::exists(dir / "summary.csv")) found.push_back({".", dir / "summary.csv"});
  std::vector<fs::path> subs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "summary.csv")) subs.push_back(e.path());
  std::sort(subs.begin(), subs.end());
  for (const auto& s : subs) found.push_back({s.filename().string(), s / "summary.csv"});
  if (found.empty()) throw ArgumentError("emit_report: no summary.csv under " + dir.string());

  ReportResult rep;
  rep.csv = dir / "report.csv";
  rep.markdown = dir / "report.md";
  std::ofstream csv(rep.csv, std::ios::binary), md(rep.markdown, std::ios::binary);
  csv << "experiment,check,status,statistic,value,stderr\n";
  std::ostringstream body;
  for (const auto& [name, path] : found) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    body << "\n## " << name << "\n\n| check | status | statistic | value | stderr |\n|---|---|---|---|---|\n";
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      csv << name << "," << line << "\n";
      std::vector<std::string> f;
      std::string cur;
      bool quoted = false;
      for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        else if (ch == ',' && !quoted) f.push_back(std::exchange(cur, {}));
        else cur += ch;
      }
      f.push_back(cur);
      f.resize(5);
      if (f[1] == "PASS") ++rep.pass;
      else if (f[1] == "FAIL") ++rep.fail;
      else if (f[1] == "INCONCLUSIVE") ++rep.inconclusive;
      else ++rep.info;
      body << "| " << f[0] << " | " << f[1] << " | " << f[2] << " | " << f[3] << " | " << f[4] << " |\n";
    }
  }
  md << "# Experiment report\n\n" << rep.pass << " pass, " << rep.fail << " fail, " << rep.inconclusive
     << " inconclusive, " << rep.info << " informational.\n" << body.str();
  rep.exit_code = rep.fail > 0 ? 1 : 0;
  return rep;
}

RunSettings settings_from_environment() {
  RunSettings s;
  auto parse = [](const char* name, const char* v) -> unsigned long long {
    char* end = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(v, &end, 10);
    if (errno != 0 || end == v || *end != '\0' || v[0] == '-')
      throw ConfigError(std::string("environment variable ") + name + " is not a non-negative integer: '" + v + "'");
    return x;
  };
  if (const char* v = std::getenv("KRBN_SEED")) s.seed = parse("KRBN_SEED", v);
  if (const char* v = std::getenv("KRBN_WORKERS")) {
    const auto w = parse("KRBN_WORKERS", v);
    if (w < 1 || w > 1024) throw ConfigError("KRBN_WORKERS must lie in [1, 1024]");
    s.workers = static_cast<unsigned>(w);
  }
  return s;
}

}  // namespace krbn::tools
