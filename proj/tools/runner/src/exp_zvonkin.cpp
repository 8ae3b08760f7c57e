// zvonkin-check: Monte Carlo resolvent, gradient bound search, Holder fit, lemma.
#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include "common.hpp"
#include "krbn/zvonkin.hpp"
#include "krbn_tools/svg.hpp"

namespace krbn::tools::detail {

namespace {

std::vector<ProbePoint> probe_points(const std::vector<std::vector<double>>& rows, const std::string& where) {
  std::vector<ProbePoint> out;
  for (const auto& r : rows) {
    require(r.size() == 2, "rows of '" + where + "' are [v, x]");
    out.push_back({r[0], r[1]});
  }
  require(!out.empty(), "'" + where + "' must not be empty");
  return out;
}

}  // namespace

Job parse_zvonkin(ConfigObject& p, const Common& c) {
  struct Cfg {
    ResolventProbe probe;
    std::vector<std::vector<double>> u_points;
    double lambda0;
    int count;
    GradientBoundOptions go;
    std::vector<ProbePoint> search_grid, consistency_grid;
    double ht, hv;
    std::vector<std::pair<double, double>> pairs;
    HolderOptions ho;
    std::vector<LemmaSample> lemma;
    std::optional<double> lemma_lambda;
    std::vector<std::vector<double>> crn_points;
    double crn_h;
  };
  auto cfg = std::make_shared<Cfg>();
  require(c.noise.dim == 1, "zvonkin-check supports noise.dim = 1");
  ResolventProbe& pr = cfg->probe;
  pr.spec = c.system();
  pr.lambda = p.number("lambda", 1.0);
  pr.horizon = p.number("horizon", 1.0);
  const long long paths = p.integer("paths", 20000);
  const long long steps = p.integer("steps", 200);
  pr.drift_eps = p.number("drift_eps", 0.0);
  pr.seed = c.sub_seed(0);
  pr.workers = c.workers;
  require(paths >= 2 && steps >= 1, "zvonkin-check needs paths >= 2 and steps >= 1");
  require(pr.drift_eps >= 0.0, "'params.drift_eps' must be >= 0");
  pr.paths = static_cast<std::size_t>(paths);
  pr.steps = static_cast<std::size_t>(steps);
  ConfigObject src = p.object("source");
  const std::string kind = src.string("type", "cutoff_drift");
  if (kind == "cutoff_drift") {
    const long long m = src.integer("cutoff", 10);
    require(m >= 1, "'params.source.cutoff' must be >= 1");
    pr.source = Source::cutoff_drift(static_cast<int>(m));
  } else if (kind == "constant") {
    pr.source = Source::constant(src.number("value", 1.0));
  } else {
    require(false, "'params.source.type' must be 'cutoff_drift' or 'constant'");
  }
  src.finish();
  pr.validate();

  cfg->u_points = p.rows("resolvent_points", {{0.0, 0.0, 0.0}, {0.5, 1.0, -0.5}, {0.9, -0.5, 0.3}});
  for (const auto& r : cfg->u_points)
    require(r.size() == 3 && r[0] >= 0.0 && r[0] < pr.horizon, "'params.resolvent_points' rows are [t, v, x], t < T");

  ConfigObject g = p.object("gradient");
  cfg->lambda0 = g.number("lambda0", 0.25);
  cfg->count = static_cast<int>(g.integer("count", 8));
  cfg->go.bound = g.number("bound", 0.5);
  cfg->go.fd_step = g.number("fd_step", 0.02);
  cfg->go.mc_sigmas = g.number("mc_sigmas", 3.0);
  cfg->go.t = g.number("t", 0.0);
  std::vector<std::vector<double>> grid;
  for (double v : {-1.0, 0.0, 1.0})
    for (double x : {-0.5, 0.0, 0.5}) grid.push_back({v, x});
  cfg->search_grid = probe_points(g.rows("grid", grid), "params.gradient.grid");
  cfg->consistency_grid =
      probe_points(g.rows("consistency_grid", {{-1.0, -0.5}, {0.0, 0.5}, {1.0, 0.5}}), "params.gradient.consistency_grid");
  g.finish();
  require(cfg->lambda0 > 0.0 && cfg->count >= 1 && cfg->count <= 40, "gradient search needs lambda0 > 0, count in [1, 40]");
  require(cfg->go.bound > 0.0 && cfg->go.fd_step > 0.0 && cfg->go.mc_sigmas >= 0.0, "gradient options out of range");
  require(cfg->go.t >= 0.0 && cfg->go.t < pr.horizon, "'params.gradient.t' must lie in [0, T)");

  ConfigObject h = p.object("holder");
  cfg->ht = h.number("t", 0.0);
  cfg->hv = h.number("v", 0.0);
  const double anchor = h.number("x", 0.0);
  const double dir = h.number("direction", -1.0);
  for (double s : h.numbers("separations", {0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2})) {
    require(s > 0.0, "'params.holder.separations' entries must be positive");
    cfg->pairs.push_back({anchor, anchor + dir * s});
  }
  cfg->ho.fd_step = h.number("fd_step", 0.1);
  cfg->ho.target = h.number("target", 0.5);
  cfg->ho.tol = h.number("tol", 0.1);
  h.finish();
  require(dir == 1.0 || dir == -1.0, "'params.holder.direction' must be 1 or -1");
  require(cfg->ht >= 0.0 && cfg->ht < pr.horizon && cfg->ho.fd_step > 0.0, "holder options out of range");

  ConfigObject lm = p.object("lemma");
  for (const auto& r : lm.rows("samples", {{0.0, 0.0, 0.0, 0.1, 0.5},
                                           {0.0, 0.0, -0.3, 0.3, 1.0},
                                           {0.5, 1.0, 0.2, 0.6, -0.5},
                                           {0.0, 0.0, 0.4, 0.4, 1.0},
                                           {0.0, 0.0, 0.1, -0.1, 0.0}})) {
    require(r.size() == 5 && r[0] >= 0.0 && r[0] < pr.horizon, "'params.lemma.samples' rows are [t, v, x, x2, w]");
    cfg->lemma.push_back({r[0], r[1], r[2], r[3], r[4]});
  }
  if (lm.has("lambda")) cfg->lemma_lambda = lm.number("lambda");
  lm.finish();
  require(!cfg->lemma_lambda || *cfg->lemma_lambda > 0.0, "'params.lemma.lambda' must be positive");

  ConfigObject cr = p.object("crn");
  cfg->crn_points = cr.rows("points", {{0.0, 0.0, 0.5}});
  cfg->crn_h = cr.number("h", 0.05);
  cr.finish();
  for (const auto& r : cfg->crn_points)
    require(r.size() == 3 && r[0] >= 0.0 && r[0] < pr.horizon, "'params.crn.points' rows are [t, v, x], t < T");
  require(cfg->crn_h > 0.0, "'params.crn.h' must be positive");

  return [cfg](Output& out) {
    const ResolventProbe& pr = cfg->probe;
    ResolventProbe unit = pr;
    unit.source = Source::constant(1.0);
    out.csv("u_estimates.csv", [&](CsvWriter& w) {
      w.header({"source", "t", "v", "x", "u", "stderr", "exact"});
      for (const auto& r : cfg->u_points) {
        const UEstimate e = estimate_u(pr, r[0], r[1], r[2]);
        w.field("configured").field(r[0]).field(r[1]).field(r[2]).field(e.value).field(e.std_error).field("").end_row();
      }
      for (const auto& r : cfg->u_points) {
        const UEstimate e = estimate_u(unit, r[0], r[1], r[2]);
        const double exact = resolvent_constant_source(unit.lambda, unit.horizon, r[0]);
        w.field("one").field(r[0]).field(r[1]).field(r[2]).field(e.value).field(e.std_error).field(exact).end_row();
        out.pass_if("resolvent_f1_t" + format_double(r[0]) + "_v" + format_double(r[1]) + "_x" + format_double(r[2]),
                    std::fabs(e.value - exact) <= std::max(3.0 * e.std_error, 1e-12), "u_minus_exact", e.value - exact,
                    e.std_error);
      }
    });

    const auto schedule = doubling_schedule(cfg->lambda0, cfg->count);
    const GradientBoundReport rep = gradient_bound_report(pr, schedule, cfg->search_grid, cfg->go);
    out.csv("gradient_search.csv", [&](CsvWriter& w) {
      w.header({"lambda", "sup_grad", "stderr", "within"});
      for (const auto& r : rep.rows) w.field(r.lambda).field(r.sup_grad).field(r.sup_se).field(r.within ? 1 : 0).end_row();
    });
    out.csv("gradient_points.csv", [&](CsvWriter& w) {
      w.header({"t", "v", "x", "du_dv", "du_dv_stderr", "du_dx", "du_dx_stderr", "du_dv_half", "du_dx_half"});
      for (std::size_t i = 0; i < rep.points.size(); ++i) {
        const auto& a = rep.points[i];
        const auto& b = rep.half_step[i];
        w.field(a.t).field(a.v).field(a.x).field(a.du_dv).field(a.du_dv_se).field(a.du_dx).field(a.du_dx_se);
        w.field(b.du_dv).field(b.du_dx).end_row();
      }
    });
    out.pass_if("gradient_search_terminates", rep.achieving_lambda.has_value(), "lambda",
                rep.achieving_lambda.value_or(rep.rows.back().lambda));
    out.check("gradient_infimum", Status::Info, "sup_grad", rep.infimum);
    out.pass_if("gradient_lambda_monotone", rep.lambda_monotone, "rows", static_cast<double>(rep.rows.size()));
    // The x-gradient is only Holder continuous near the singular point, so the
    // halving comparison there is reported, not judged.
    out.check("gradient_step_halving_search_grid", Status::Info, "consistent", rep.step_halving_consistent ? 1.0 : 0.0);
    const double lam = rep.achieving_lambda.value_or(rep.rows.back().lambda);
    const std::vector<double> one_lambda = {lam};
    const GradientBoundReport cons = gradient_bound_report(pr, one_lambda, cfg->consistency_grid, cfg->go);
    out.pass_if("gradient_step_halving", cons.step_halving_consistent, "lambda", lam);

    const HolderFit hf = check_holder_gradient(pr, cfg->ht, cfg->hv, cfg->pairs, cfg->ho);
    out.csv("holder.csv", [&](CsvWriter& w) {
      w.header({"x", "x2", "separation", "diff", "stderr", "resolved"});
      for (const auto& r : hf.rows)
        w.field(r.x).field(r.x2).field(r.separation).field(r.diff).field(r.std_error).field(r.resolved ? 1 : 0).end_row();
    });
    out.check("holder_exponent", hf.inconclusive ? Status::Inconclusive : hf.pass ? Status::Pass : Status::Fail,
              "exponent", hf.exponent, hf.exponent_se);
    if (out.plots()) {
      PlotSeries s{"|d_v u(x) - d_v u(x2)|", {}, {}, true};
      for (const auto& r : hf.rows)
        if (r.diff != 0.0) {
          s.x.push_back(r.separation);
          s.y.push_back(std::fabs(r.diff));
        }
      PlotSeries fit{"fit", {}, {}, false};
      for (const auto& r : hf.rows) {
        fit.x.push_back(r.separation);
        fit.y.push_back(std::exp(hf.intercept) * std::pow(r.separation, hf.exponent));
      }
      write_svg_plot(out.file("holder.svg"), {"Holder fit of x -> d_v u", "|x - x2|", "difference", true, true},
                     {s, fit});
    }

    ResolventProbe lp = pr;
    lp.lambda = cfg->lemma_lambda.value_or(lam);
    const LemmaReport lr = check_phi_h_lemma(lp, cfg->lemma, cfg->go.mc_sigmas);
    out.csv("lemma.csv", [&](CsvWriter& w) {
      w.header({"t", "v", "x", "x2", "w", "phi", "phi_stderr", "h", "h_stderr", "kappa_ratio", "phi_bound", "phi_h_bound",
                "inconclusive"});
      for (const auto& r : lr.rows) {
        w.field(r.s.t).field(r.s.v).field(r.s.x).field(r.s.x2).field(r.s.w).field(r.phi).field(r.phi_se).field(r.h);
        w.field(r.h_se).field(r.kappa_ratio).field(r.phi_bound ? 1 : 0).field(r.phi_h_bound ? 1 : 0);
        w.field(r.inconclusive ? 1 : 0).end_row();
      }
    });
    const bool all_inconclusive = lr.inconclusive == lr.rows.size();
    out.check("phi_h_lemma", all_inconclusive ? Status::Inconclusive : lr.pass ? Status::Pass : Status::Fail, "kappa",
              lr.kappa);

    out.csv("crn.csv", [&](CsvWriter& w) {
      w.header({"t", "v", "x", "h", "var_crn", "var_independent"});
      for (const auto& r : cfg->crn_points) {
        const CrnComparison cc = crn_variance(pr, r[0], r[1], r[2], cfg->crn_h);
        w.field(r[0]).field(r[1]).field(r[2]).field(cfg->crn_h).field(cc.var_crn).field(cc.var_independent).end_row();
        out.pass_if("crn_variance_t" + format_double(r[0]) + "_v" + format_double(r[1]) + "_x" + format_double(r[2]),
                    cc.var_crn < cc.var_independent, "ratio", cc.var_crn / cc.var_independent);
      }
    });
  };
}

}  // namespace krbn::tools::detail
