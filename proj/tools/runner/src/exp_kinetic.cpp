// simulate, uniqueness-probe and density-check.
#include <algorithm>
#include <cmath>
#include <memory>

#include "common.hpp"
#include "krbn/density.hpp"
#include "krbn/errors.hpp"
#include "krbn/parallel.hpp"
#include "krbn_tools/svg.hpp"

namespace krbn::tools::detail {

namespace {

struct CfCheck {
  double alpha, xi, t;
};

}  // namespace

Job parse_simulate(ConfigObject& p, const Common& c) {
  struct Cfg {
    SystemSpec spec;
    State x0;
    std::vector<double> grid;
    std::size_t paths;
    double eps;
    std::vector<double> snapshots;
    std::vector<CfCheck> cf;
    std::size_t cf_samples;
    bool ks;
    double ks_dt;
    int ks_samples;
    bool covariance;
    std::size_t dump;
  };
  auto cfg = std::make_shared<Cfg>();
  const int d = c.noise.dim;
  cfg->spec = c.system();
  cfg->x0 = parse_state(p.object("x0"), d);
  const double horizon = p.number("horizon", 1.0);
  const long long steps = p.integer("steps", 200);
  const long long paths = p.integer("paths", 10000);
  cfg->eps = p.number("eps", 0.0);
  require(horizon > 0.0, "'params.horizon' must be positive");
  require(steps >= 1 && steps <= 10000000, "'params.steps' must lie in [1, 1e7]");
  require(paths >= 2, "'params.paths' must be >= 2");
  require(cfg->eps >= 0.0, "'params.eps' must be >= 0");
  cfg->paths = static_cast<std::size_t>(paths);
  cfg->grid = uniform_grid(0.0, horizon, static_cast<int>(steps));
  cfg->snapshots = p.numbers("snapshots", {horizon});
  for (double s : cfg->snapshots) grid_index(cfg->grid, s);
  for (auto& o : p.objects("cf_checks")) {
    CfCheck k{o.number("alpha"), o.number("xi"), o.number("t")};
    o.finish();
    require(k.alpha > 1.0 && k.alpha <= 2.0 && k.t > 0.0, "cf_checks entries need alpha in (1, 2] and t > 0");
    cfg->cf.push_back(k);
  }
  const long long cfn = p.integer("cf_samples", 100000);
  require(cfn >= 100, "'params.cf_samples' must be >= 100");
  cfg->cf_samples = static_cast<std::size_t>(cfn);
  cfg->ks = p.has("ks");
  ConfigObject ks = p.object("ks");
  cfg->ks_dt = ks.number("dt", 0.25);
  cfg->ks_samples = static_cast<int>(ks.integer("samples", 20000));
  ks.finish();
  require(cfg->ks_dt > 0.0 && cfg->ks_samples >= 100, "'params.ks' needs dt > 0 and samples >= 100");
  const bool exact_case = d == 1 && c.noise.alpha == 2.0 && c.sigma == 1.0 && c.drift.as<ZeroDrift>() != nullptr;
  cfg->covariance = p.boolean("covariance_check", exact_case);
  require(!cfg->covariance || exact_case,
          "'params.covariance_check' needs d = 1, alpha = 2, sigma = 1 and a zero drift");
  const long long dump = p.integer("dump_paths", 0);
  require(dump >= 0 && dump <= paths, "'params.dump_paths' must lie in [0, paths]");
  cfg->dump = static_cast<std::size_t>(dump);
  cfg->spec.validate(horizon);

  return [cfg, c](Output& out) {
    const int d = c.noise.dim;
    const auto field = make_drift_field(c.drift, cfg->eps, FieldMode::Tabulated);
    EnsembleOptions eo;
    eo.paths = cfg->paths;
    eo.seed = c.sub_seed(0);
    eo.workers = c.workers;
    eo.snapshot_times = cfg->snapshots;
    const Ensemble ens = simulate_ensemble(cfg->spec, *field, cfg->x0, cfg->grid, eo);
    out.check("truncated_paths", Status::Info, "count", static_cast<double>(ens.truncated_count));
    out.csv("moments.csv", [&](CsvWriter& w) {
      w.header({"time", "component", "mean", "stderr", "variance"});
      for (std::size_t k = 0; k < ens.times.size(); ++k)
        for (int comp = 0; comp < d; ++comp)
          for (int which = 0; which < 2; ++which) {
            const auto xs = which == 0 ? ens.v_component(k, comp) : ens.x_component(k, comp);
            const MeanStat m = mean_stat(xs);
            w.field(ens.times[k]).field((which == 0 ? "v" : "x") + std::to_string(comp));
            w.field(m.mean).field(m.std_error).field(m.variance).end_row();
          }
    });
    if (cfg->dump > 0) {
      // Re-simulate the first paths from their substreams for a full dump.
      out.csv("paths.csv", [&](CsvWriter& w) {
        std::vector<std::string> h = {"path", "t"};
        for (int i = 0; i < d; ++i) h.push_back("v" + std::to_string(i));
        for (int i = 0; i < d; ++i) h.push_back("x" + std::to_string(i));
        w.header(h);
        for (std::size_t j = 0; j < cfg->dump; ++j) {
          const KineticPath kp = simulate(cfg->spec, *field, cfg->x0, sample_stream(c.noise, cfg->grid, eo.seed, j));
          for (std::size_t k = 0; k < kp.V.size(); ++k) {
            w.field(j).field(kp.grid[k]);
            for (int i = 0; i < d; ++i) w.field(kp.V[k][i]);
            for (int i = 0; i < d; ++i) w.field(kp.X[k][i]);
            w.end_row();
          }
        }
      });
    }
    if (cfg->covariance) {
      const std::size_t k = ens.times.size() - 1;
      const double T = ens.times[k];
      const auto v = ens.v_component(k), x = ens.x_component(k);
      const double mv = mean_stat(v).mean, mx = mean_stat(x).mean;
      struct Entry {
        const char* name;
        double exact;
        std::vector<double> prod;
      };
      std::vector<Entry> es = {{"vv", T, {}}, {"vx", T * T / 2.0, {}}, {"xx", T * T * T / 3.0, {}}};
      for (std::size_t j = 0; j < v.size(); ++j) {
        es[0].prod.push_back((v[j] - mv) * (v[j] - mv));
        es[1].prod.push_back((v[j] - mv) * (x[j] - mx));
        es[2].prod.push_back((x[j] - mx) * (x[j] - mx));
      }
      out.csv("covariance.csv", [&](CsvWriter& w) {
        w.header({"time", "entry", "empirical", "stderr", "exact"});
        for (auto& e : es) {
          const MeanStat m = mean_stat(e.prod);
          const double n = static_cast<double>(e.prod.size());
          const double emp = m.mean * n / (n - 1.0);
          w.field(T).field(e.name).field(emp).field(m.std_error).field(e.exact).end_row();
          out.pass_if(std::string("covariance_") + e.name, std::fabs(emp - e.exact) <= 3.0 * m.std_error, "empirical",
                      emp, m.std_error);
        }
      });
    }
    if (!cfg->cf.empty()) {
      out.csv("cf.csv", [&](CsvWriter& w) {
        w.header({"alpha", "xi", "t", "re", "re_stderr", "im", "im_stderr", "exact"});
        for (std::size_t q = 0; q < cfg->cf.size(); ++q) {
          const auto& k = cfg->cf[q];
          const StableNoiseSpec ns = StableNoiseSpec::make(k.alpha, d);
          const std::uint64_t seed = c.sub_seed(100 + q);
          std::vector<Vec> xs(cfg->cf_samples);
          parallel_for(xs.size(), c.workers, [&](std::size_t i) {
            Rng rng(seed, i);
            xs[i] = sample_increment(ns, k.t, rng);
          });
          Vec xi = Vec::Zero(d);
          xi[0] = k.xi;
          const CfEstimate e = empirical_cf_full(xs, xi);
          const double exact = exact_cf(ns, k.t, xi);
          w.field(k.alpha).field(k.xi).field(k.t).field(e.re).field(e.re_se).field(e.im).field(e.im_se).field(exact);
          w.end_row();
          const bool ok = std::fabs(e.re - exact) <= 3.0 * e.re_se && std::fabs(e.im) <= 3.0 * e.im_se;
          out.pass_if("cf_alpha" + format_double(k.alpha) + "_xi" + format_double(k.xi) + "_t" + format_double(k.t),
                      ok, "re_minus_exact", e.re - exact, e.re_se);
        }
      });
    }
    if (cfg->ks) {
      const KsResult r = self_similarity_test(c.noise, cfg->ks_dt, cfg->ks_samples, c.sub_seed(200));
      out.pass_if("self_similarity_ks", r.pass, "ks_statistic", r.statistic, r.critical_1pct);
    }
  };
}

Job parse_uniqueness(ConfigObject& p, const Common& c) {
  struct Cfg {
    SystemSpec spec;
    State x0;
    std::vector<double> grid;
    std::size_t paths;
    std::vector<double> eps;
    bool control;
    double beta;
    double branch_T;
  };
  auto cfg = std::make_shared<Cfg>();
  const int d = c.noise.dim;
  cfg->spec = c.system();
  cfg->x0 = parse_state(p.object("x0"), d);
  const double horizon = p.number("horizon", 1.0);
  const long long steps = p.integer("steps", 200);
  const long long paths = p.integer("paths", 2000);
  cfg->eps = p.numbers("eps_list", {0.2, 0.1, 0.05});
  cfg->control = p.boolean("control", true);
  const auto* peano = c.drift.as<PeanoPower>();
  ConfigObject br = p.object("branching");
  cfg->beta = br.number("beta", peano ? peano->beta : 0.5);
  cfg->branch_T = br.number("T", 1.0);
  br.finish();
  require(horizon > 0.0 && steps >= 1 && paths >= 2, "uniqueness-probe needs horizon > 0, steps >= 1, paths >= 2");
  require(!cfg->eps.empty(), "'params.eps_list' must not be empty");
  for (double e : cfg->eps) require(e > 0.0, "'params.eps_list' entries must be positive");
  require(std::is_sorted(cfg->eps.rbegin(), cfg->eps.rend()), "'params.eps_list' must be decreasing");
  require(cfg->beta > 0.0 && cfg->beta < 1.0 && cfg->branch_T > 0.0, "branching needs beta in (0, 1) and T > 0");
  cfg->paths = static_cast<std::size_t>(paths);
  cfg->grid = uniform_grid(0.0, horizon, static_cast<int>(steps));
  cfg->spec.validate(horizon);

  return [cfg, c](Output& out) {
    GapOptions go;
    go.workers = c.workers;
    const std::uint64_t seed = c.sub_seed(0);
    std::vector<GapStats> gaps;
    for (double e : cfg->eps) gaps.push_back(uniqueness_gap(cfg->spec, cfg->x0, {0.0, e}, cfg->paths, seed, cfg->grid, go));
    const GapStats same =
        uniqueness_gap(cfg->spec, cfg->x0, {cfg->eps.front(), cfg->eps.front()}, cfg->paths, seed, cfg->grid, go);
    std::vector<GapStats> ctrl;
    SystemSpec still = SystemSpec::standard(c.noise, c.drift, 0.0);
    const State origin{Vec::Zero(c.noise.dim), Vec::Zero(c.noise.dim)};
    if (cfg->control)
      for (double e : cfg->eps) ctrl.push_back(uniqueness_gap(still, origin, {0.0, e}, cfg->paths, seed, cfg->grid, go));
    out.csv("gaps.csv", [&](CsvWriter& w) {
      w.header({"system", "eps_a", "eps_b", "mean", "stderr", "max", "paths", "truncated"});
      auto row = [&](const char* sys, double a, double b, const GapStats& g) {
        w.field(sys).field(a).field(b).field(g.mean).field(g.mean_se).field(g.max).field(g.paths).field(g.truncated);
        w.end_row();
      };
      for (std::size_t i = 0; i < gaps.size(); ++i) row("noisy", 0.0, cfg->eps[i], gaps[i]);
      row("noisy", cfg->eps.front(), cfg->eps.front(), same);
      for (std::size_t i = 0; i < ctrl.size(); ++i) row("sigma0", 0.0, cfg->eps[i], ctrl[i]);
    });
    out.pass_if("identical_pair_gap", same.max == 0.0, "max_gap", same.max);
    bool mono = true;
    for (std::size_t i = 1; i < gaps.size(); ++i)
      if (gaps[i].mean > gaps[i - 1].mean + 2.0 * std::hypot(gaps[i].mean_se, gaps[i - 1].mean_se)) mono = false;
    out.pass_if("gap_nonincreasing_in_eps", mono, "mean_gap_smallest_eps", gaps.back().mean, gaps.back().mean_se);
    if (!ctrl.empty())
      out.pass_if("sigma0_gap_persists", ctrl.back().mean >= 0.5 * ctrl.front().mean && ctrl.back().mean > 0.0,
                  "mean_gap_smallest_eps", ctrl.back().mean, ctrl.back().mean_se);
    const BranchingReport br = peano_branching(cfg->beta, cfg->branch_T);
    out.csv("branching.csv", [&](CsvWriter& w) {
      w.header({"t", "branch", "integral", "residual"});
      for (const auto& r : br.rows) w.field(r.t).field(r.branch).field(r.integral).field(r.residual).end_row();
    });
    out.pass_if("branch_zero_residual", br.zero_residual == 0.0, "residual", br.zero_residual);
    out.pass_if("branch_nontrivial_residual", br.max_residual < 1e-8, "max_residual", br.max_residual);
  };
}

Job parse_density(ConfigObject& p, const Common& c) {
  struct Cfg {
    SystemSpec spec;
    State x0;
    double t, s;
    std::vector<double> grid;
    std::size_t paths;
    std::vector<double> eps;
    double lambda0;
    double factor;
  };
  auto cfg = std::make_shared<Cfg>();
  require(c.noise.dim == 1, "density-check supports noise.dim = 1");
  require(c.noise.alpha == 2.0, "density-check requires alpha = 2 (the envelope is Gaussian)");
  cfg->spec = c.system();
  cfg->x0 = parse_state(p.object("x0"), 1);
  cfg->t = p.number("t", 0.0);
  cfg->s = p.number("s", 1.0);
  const long long steps = p.integer("steps", 200);
  const long long paths = p.integer("paths", 100000);
  cfg->eps = p.numbers("eps_list", {0.1, 0.05, 0.025});
  cfg->lambda0 = p.number("lambda0", 1.0 / 3.0);
  cfg->factor = p.number("max_factor", 2.0);
  require(cfg->s > cfg->t && cfg->t >= 0.0, "density-check needs 0 <= t < s");
  require(steps >= 1 && paths >= 100, "density-check needs steps >= 1 and paths >= 100");
  require(!cfg->eps.empty() && cfg->lambda0 > 0.0 && cfg->factor > 1.0,
          "density-check needs eps_list, lambda0 > 0 and max_factor > 1");
  for (double e : cfg->eps) require(e >= 0.0, "'params.eps_list' entries must be >= 0");
  cfg->paths = static_cast<std::size_t>(paths);
  cfg->grid = uniform_grid(cfg->t, cfg->s, static_cast<int>(steps));
  cfg->spec.validate(cfg->s);

  return [cfg, c](Output& out) {
    std::vector<EnvelopeResult> res;
    std::vector<double> masses;
    const auto lgrid = lambda_log_grid(cfg->lambda0);
    for (std::size_t i = 0; i < cfg->eps.size(); ++i) {
      const double e = cfg->eps[i];
      const auto field = make_drift_field(c.drift, e, FieldMode::Tabulated);
      EnsembleOptions eo;
      eo.paths = cfg->paths;
      eo.seed = c.sub_seed(0);
      eo.workers = c.workers;
      eo.snapshot_times = {cfg->s};
      const Ensemble ens = simulate_ensemble(cfg->spec, *field, cfg->x0, cfg->grid, eo);
      // eps = 0 has no mollified flow; its center uses the smallest positive eps of the list.
      const double flow_eps = e > 0.0 ? e : 1e-3;
      res.push_back(envelope_check(ens, cfg->spec, flow_eps, cfg->t, cfg->s, cfg->x0.v, cfg->x0.x, lgrid));
      masses.push_back(kde_marginal(ens, cfg->s).mass);
      out.csv("envelope_eps" + format_double(e) + ".csv", [&](CsvWriter& w) {
        w.header({"xi", "kde", "envelope", "ratio"});
        for (const auto& r : res.back().rows) w.field(r.xi).field(r.kde).field(r.envelope).field(r.ratio).end_row();
      });
    }
    out.csv("envelope_summary.csv", [&](CsvWriter& w) {
      w.header({"eps", "c_fit", "lambda_star", "c_half_bandwidth", "center", "mode_gap", "bandwidth", "kde_mass"});
      for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& r = res[i];
        w.field(cfg->eps[i]).field(r.c_fit).field(r.lambda_star).field(r.c_half_bandwidth).field(r.center);
        w.field(r.mode_gap).field(r.bandwidth).field(masses[i]).end_row();
      }
    });
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
      out.check("c_fit_eps" + format_double(cfg->eps[i]), Status::Info, "c_fit", res[i].c_fit);
      lo = std::min(lo, res[i].c_fit);
      hi = std::max(hi, res[i].c_fit);
      out.pass_if("kde_mass_eps" + format_double(cfg->eps[i]), masses[i] >= 0.99 && masses[i] <= 1.0 + 1e-9,
                  "mass", masses[i]);
    }
    out.pass_if("c_fit_eps_stability", hi < cfg->factor * lo, "max_over_min", hi / lo);
    if (out.plots()) {
      std::vector<PlotSeries> ser;
      for (std::size_t i = 0; i < res.size(); ++i) {
        PlotSeries k{"KDE eps=" + format_double(cfg->eps[i]), {}, {}, false};
        PlotSeries g{"envelope eps=" + format_double(cfg->eps[i]), {}, {}, false};
        for (const auto& r : res[i].rows) {
          k.x.push_back(r.xi);
          k.y.push_back(r.kde);
          g.x.push_back(r.xi);
          g.y.push_back(r.envelope);
        }
        ser.push_back(std::move(k));
        ser.push_back(std::move(g));
      }
      write_svg_plot(out.file("envelope.svg"), {"KDE of X_s against the Gaussian envelope", "xi", "density"}, ser);
    }
  };
}

}  // namespace krbn::tools::detail
