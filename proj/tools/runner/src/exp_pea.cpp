// pea-check: decay exponents, eps-uniformity, rho-interval sweep, counterexample.
#include <algorithm>
#include <cmath>
#include <memory>

#include "common.hpp"
#include "krbn/pea.hpp"
#include "krbn_tools/svg.hpp"

namespace krbn::tools::detail {

Job parse_pea(ConfigObject& p, const Common& c) {
  struct Cfg {
    std::vector<double> betas;
    double a;
    double lambda;
    std::vector<double> eps_decay;
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> thetas;
    double slope_tol;
    std::vector<double> uni_eps;
    double uni_t, uni_s, uni_theta, uni_max;
    int sweep_points;
    bool counter;
    double ce_beta;
    int ce_N;
    int ce_anchors;
    int ce_halvings;
    double ce_min_ratio;
    double ce_lambda;
    double harmonic_target, harmonic_tol;
  };
  auto cfg = std::make_shared<Cfg>();
  const auto* peano = c.drift.as<PeanoPower>();
  require(c.noise.dim == 1 && peano, "pea-check expects a one-dimensional 'peano' drift");
  cfg->a = peano->a.constant;
  cfg->betas = p.numbers("betas", {peano->beta});
  cfg->lambda = p.number("lambda", 1.0);
  cfg->eps_decay = p.numbers("eps_list", {1e-8});
  std::vector<std::vector<double>> def_pairs;
  for (double d : {0.01, 0.0316227766016838, 0.1, 0.316227766016838, 1.0}) def_pairs.push_back({0.0, d});
  for (const auto& r : p.rows("time_pairs", def_pairs)) {
    require(r.size() == 2 && r[1] > r[0], "'params.time_pairs' rows are [t, s] with t < s");
    cfg->pairs.emplace_back(r[0], r[1]);
  }
  require(cfg->pairs.size() >= 2, "'params.time_pairs' needs at least two pairs");
  cfg->thetas = p.numbers("theta", {0.0, 0.05, -0.2});
  cfg->slope_tol = p.number("slope_tol", 0.05);
  ConfigObject u = p.object("eps_uniformity");
  cfg->uni_eps = u.numbers("eps", {0.1, 0.05, 0.025});
  cfg->uni_t = u.number("t", 0.0);
  cfg->uni_s = u.number("s", 1.0);
  cfg->uni_theta = u.number("theta", 1.0);
  cfg->uni_max = u.number("max_variation", 0.1);
  u.finish();
  ConfigObject sw = p.object("rho_sweep");
  cfg->sweep_points = static_cast<int>(sw.integer("points", 50));
  sw.finish();
  ConfigObject ce = p.object("counterexample");
  cfg->counter = ce.boolean("enabled", true);
  cfg->ce_beta = ce.number("beta", 0.5);
  cfg->ce_N = static_cast<int>(ce.integer("N", 10000));
  cfg->ce_anchors = static_cast<int>(ce.integer("anchors", 256));
  cfg->ce_halvings = static_cast<int>(ce.integer("halvings", 6));
  cfg->ce_min_ratio = ce.number("min_ratio", 1.2);
  cfg->ce_lambda = ce.number("lambda", 0.1);
  cfg->harmonic_target = ce.number("harmonic_target", 9.79);
  cfg->harmonic_tol = ce.number("harmonic_tol", 0.01);
  ce.finish();

  for (double b : cfg->betas) require(b > 0.0 && b <= 1.0, "'params.betas' entries must lie in (0, 1]");
  require(cfg->lambda > 0.0, "'params.lambda' must be positive");
  for (double e : cfg->eps_decay) require(e > 0.0, "'params.eps_list' entries must be positive");
  require(cfg->uni_eps.size() >= 2 && cfg->uni_s > cfg->uni_t && cfg->uni_max > 0.0,
          "'params.eps_uniformity' needs two eps values, t < s and max_variation > 0");
  for (double e : cfg->uni_eps) require(e > 0.0, "'params.eps_uniformity.eps' entries must be positive");
  require(cfg->sweep_points >= 2, "'params.rho_sweep.points' must be >= 2");
  require(cfg->ce_beta > 0.0 && cfg->ce_beta < 1.0 && cfg->ce_N >= 1 && cfg->ce_anchors >= 2 && cfg->ce_halvings >= 1 &&
              cfg->ce_halvings <= 20 && cfg->ce_lambda > 0.0,
          "'params.counterexample' has out-of-range values");

  return [cfg, c](Output& out) {
    PeaBudget budget;
    budget.workers = c.workers;
    budget.seed = c.sub_seed(0);
    std::vector<PlotSeries> series;
    out.csv("decay_fit.csv", [&](CsvWriter& w) {
      w.header({"beta", "eps", "lambda", "slope", "stderr", "ci_lo", "ci_hi", "expected"});
      for (double b : cfg->betas) {
        PeaProbe probe;
        probe.model = DriftModel::peano(b, cfg->a);
        probe.lambda = cfg->lambda;
        probe.eps_list = cfg->eps_decay;
        probe.time_pairs = cfg->pairs;
        for (double th : cfg->thetas) probe.theta_grid.push_back(scalar_vec(th));
        probe.budget = budget;
        const double expected = 1.5 * (b - 1.0);
        for (const DecayFit& f : fit_decay_exponent(probe)) {
          w.field(b).field(f.eps).field(f.lambda).field(f.slope).field(f.slope_se).field(f.ci_lo).field(f.ci_hi);
          w.field(expected).end_row();
          out.pass_if("decay_slope_beta" + format_double(b) + "_eps" + format_double(f.eps),
                      std::fabs(f.slope - expected) <= cfg->slope_tol, "slope_minus_expected", f.slope - expected,
                      f.slope_se);
          PlotSeries s{"beta=" + format_double(b), f.dt, f.values, true};
          series.push_back(std::move(s));
        }
      }
    });
    if (out.plots())
      write_svg_plot(out.file("decay.svg"), {"max over theta of the [Pea] integral", "s - t", "integral", true, true},
                     series);

    out.csv("eps_uniformity.csv", [&](CsvWriter& w) {
      w.header({"beta", "eps", "t", "s", "theta", "integral", "stderr"});
      for (double b : cfg->betas) {
        PeaProbe probe;
        probe.model = DriftModel::peano(b, cfg->a);
        probe.lambda = cfg->lambda;
        probe.budget = budget;
        double lo = INFINITY, hi = -INFINITY, sum = 0.0;
        for (double e : cfg->uni_eps) {
          const PeaValue v = pea_integral(probe, e, cfg->uni_t, cfg->uni_s, scalar_vec(cfg->uni_theta));
          w.field(b).field(e).field(cfg->uni_t).field(cfg->uni_s).field(cfg->uni_theta).field(v.value);
          w.field(v.std_error).end_row();
          lo = std::min(lo, v.value);
          hi = std::max(hi, v.value);
          sum += v.value;
        }
        const double var = (hi - lo) / (sum / static_cast<double>(cfg->uni_eps.size()));
        out.pass_if("eps_uniformity_beta" + format_double(b), var < cfg->uni_max, "relative_variation", var);
      }
    });

    bool sweep_ok = true;
    out.csv("rho_sweep.csv", [&](CsvWriter& w) {
      w.header({"d", "beta", "lo", "hi", "nonempty"});
      for (int k = 1; k <= cfg->sweep_points; ++k) {
        const double b = static_cast<double>(k) / cfg->sweep_points;
        const RhoInterval r = rho_interval(1, b);
        w.field(1).field(b).field(r.lo).field(r.hi).field(r.nonempty ? 1 : 0).end_row();
        if (r.nonempty != (b > 1.0 / 3.0)) sweep_ok = false;
      }
    });
    out.pass_if("rho_sweep_threshold", sweep_ok, "points", cfg->sweep_points);
    const RhoIntervalExact third = rho_interval_exact(1, Rational(1, 3));
    out.pass_if("rho_exact_beta_1_3_empty", !third.nonempty, "lo", third.lo.value());
    const RhoIntervalExact half = rho_interval_exact(1, Rational(1, 2));
    out.pass_if("rho_exact_beta_1_2", half.nonempty && half.lo == Rational(1) && half.hi && *half.hi == Rational(2),
                "lo", half.lo.value());

    if (cfg->counter) {
      CounterexampleOptions co;
      co.anchors = cfg->ce_anchors;
      co.lambda = cfg->ce_lambda;
      co.budget = budget;
      for (int j = 0; j <= cfg->ce_halvings; ++j) co.eps_list.push_back(std::ldexp(1.0, -2 - j));
      const CounterexampleReport r = counterexample_divergence(cfg->ce_beta, cfg->ce_N, co);
      const double H = r.partial_sums.back();
      out.pass_if("harmonic_partial_sum", std::fabs(H - cfg->harmonic_target) <= cfg->harmonic_tol, "H_N", H);
      out.csv("counterexample.csv", [&](CsvWriter& w) {
        w.header({"eps", "integral", "stderr", "ratio_to_previous"});
        for (std::size_t j = 0; j < r.eps.size(); ++j) {
          w.field(r.eps[j]).field(r.integrals[j]).field(r.std_errors[j]);
          if (j > 0) w.field(r.ratios[j - 1]);
          else w.field("");
          w.end_row();
        }
      });
      const double worst = r.ratios.empty() ? 0.0 : *std::min_element(r.ratios.begin(), r.ratios.end());
      out.pass_if("counterexample_growth", worst >= cfg->ce_min_ratio, "min_ratio", worst);
    }
  };
}

}  // namespace krbn::tools::detail
