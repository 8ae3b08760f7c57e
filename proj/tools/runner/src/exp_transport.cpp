// transport-check: characteristics along a frozen velocity path.
#include <algorithm>
#include <cmath>
#include <memory>

#include "common.hpp"
#include "krbn/errors.hpp"
#include "krbn/linalg.hpp"
#include "krbn/parallel.hpp"
#include "krbn/transport.hpp"
#include "krbn_tools/svg.hpp"

namespace krbn::tools::detail {

namespace {

struct MomentCase {
  DriftModel drift;
  State x0;
};

bool flat_within(const std::vector<MomentRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      if (std::fabs(rows[i].moment - rows[j].moment) > 2.0 * std::hypot(rows[i].std_error, rows[j].std_error))
        return false;
  return true;
}

double relative_growth(const std::vector<MomentRow>& rows) {
  return (rows.back().moment - rows.front().moment) / rows.front().moment;
}

}  // namespace

Job parse_transport(ConfigObject& p, const Common& c) {
  struct Cfg {
    SystemSpec spec;
    int d;
    double eps, horizon, tau;
    std::vector<double> grid;
    State x0;
    FieldMode mode;
    std::vector<Vec> identity, residual, flow;
    std::size_t probes;
    double probe_box;
    double identity_tol, residual_tol, flow_tol;
    bool moments;
    MomentCase primary, contrast;
    double mq, mt, mtau;
    std::size_t mpaths, msteps;
    std::vector<double> meps;
  };
  auto cfg = std::make_shared<Cfg>();
  const int d = c.noise.dim;
  cfg->d = d;
  cfg->spec = c.system();
  cfg->eps = p.number("eps", 0.05);
  cfg->horizon = p.number("horizon", 1.0);
  cfg->tau = p.number("tau", 0.9);
  const long long steps = p.integer("steps", 200);
  cfg->x0 = parse_state(p.object("x0"), d);
  const std::string mode = p.string("field", "direct");
  require(mode == "direct" || mode == "tabulated", "'params.field' must be 'direct' or 'tabulated'");
  require(mode == "direct" || d == 1, "tabulated fields need noise.dim = 1");
  cfg->mode = mode == "direct" ? FieldMode::Direct : FieldMode::Tabulated;
  require(cfg->eps > 0.0, "'params.eps' must be positive");
  require(cfg->horizon > 0.0 && cfg->tau > 0.0 && cfg->tau <= cfg->horizon, "need 0 < tau <= horizon");
  require(steps >= 1, "'params.steps' must be >= 1");
  cfg->grid = uniform_grid(0.0, cfg->horizon, static_cast<int>(steps));

  auto with_times = [&](const char* key, int lead, const std::vector<std::vector<double>>& def) {
    const auto pts = parse_points(p.rows(key, def), lead + d, std::string("params.") + key);
    for (const Vec& q : pts) {
      bool ok = q[0] >= 0.0 && q[lead - 1] <= cfg->tau;
      for (int i = 1; i < lead; ++i) ok = ok && q[i - 1] <= q[i];
      require(ok, std::string("'params.") + key + "' times must be ordered within [0, tau]");
    }
    return pts;
  };
  const bool one = d == 1;
  cfg->identity = with_times("identity_points", 1,
                             one ? std::vector<std::vector<double>>{{0.0, 0.5}, {0.1, -0.3}, {0.3, 0.05}, {0.5, 0.0}}
                                 : std::vector<std::vector<double>>{});
  cfg->residual = with_times("residual_points", 1,
                             one ? std::vector<std::vector<double>>{{0.2025, -0.4}, {0.2, 0.0}, {0.5, 0.1}, {0.5025, 0.5}}
                                 : std::vector<std::vector<double>>{});
  cfg->flow = with_times("flow_points", 2,
                         one ? std::vector<std::vector<double>>{{0.0, 0.4, 0.3}, {0.1, 0.55, -0.2}, {0.2, 0.2, 0.0}}
                             : std::vector<std::vector<double>>{});
  const long long probes = p.integer("gronwall_probes", 1000);
  require(probes >= 0, "'params.gronwall_probes' must be >= 0");
  cfg->probes = static_cast<std::size_t>(probes);
  cfg->probe_box = p.number("probe_box", 2.0);
  cfg->identity_tol = p.number("identity_tol", 1e-4);
  cfg->residual_tol = p.number("residual_tol", 1e-4);
  cfg->flow_tol = p.number("flow_tol", 1e-8);
  require(cfg->probe_box > 0.0 && cfg->identity_tol > 0.0 && cfg->residual_tol > 0.0 && cfg->flow_tol > 0.0,
          "transport tolerances and probe_box must be positive");

  ConfigObject m = p.object("moments");
  cfg->moments = m.boolean("enabled", true);
  cfg->mq = m.number("q", 2.0);
  cfg->mt = m.number("t", 0.5);
  cfg->mtau = m.number("tau", 1.0);
  const long long mp = m.integer("paths", 8000);
  const long long ms = m.integer("steps", 200);
  cfg->meps = m.numbers("eps_list", {0.05, 0.025, 0.0125});
  State px0{Vec::Zero(d), Vec::Zero(d)};
  px0.x[0] = -1.0;
  cfg->primary = {c.drift, m.has("x0") ? parse_state(m.object("x0"), d) : px0};
  ConfigObject ct = m.object("contrast");
  State cx0{Vec::Zero(d), Vec::Zero(d)};
  cx0.x[0] = 1.5;
  cfg->contrast = {ct.has("drift") ? parse_drift(ct.object("drift"), d) : DriftModel::accumulating(0.5),
                   ct.has("x0") ? parse_state(ct.object("x0"), d) : cx0};
  ct.finish();
  m.finish();
  if (cfg->moments) {
    require(c.noise.alpha == 2.0, "'params.moments' needs alpha = 2; set moments.enabled = false otherwise");
    require(cfg->mq >= 0.0 && cfg->mt >= 0.0 && cfg->mtau > cfg->mt, "moments need q >= 0 and 0 <= t < tau");
    require(mp >= 2 && ms >= 1, "moments need paths >= 2 and steps >= 1");
    require(cfg->meps.size() >= 2, "'params.moments.eps_list' needs at least two values");
    for (double e : cfg->meps) require(e > 0.0, "'params.moments.eps_list' entries must be positive");
    require(cfg->contrast.drift.dim() == d, "contrast drift dimension must match noise.dim");
  }
  cfg->mpaths = static_cast<std::size_t>(mp);
  cfg->msteps = static_cast<std::size_t>(ms);
  cfg->spec.validate(cfg->horizon);

  return [cfg, c](Output& out) {
    const int d = cfg->d;
    const KineticPath path = simulate(cfg->spec, cfg->x0, sample_stream(c.noise, cfg->grid, c.sub_seed(0), 0), 0.0);
    if (path.truncated) throw NumericError("transport-check: the frozen velocity path overflowed");
    const CharacteristicSolver solver(make_drift_field(c.drift, cfg->eps, cfg->mode), FrozenTrajectory::from_path(path));

    double worst_gap = 0.0;
    out.csv("identity.csv", [&](CsvWriter& w) {
      w.header({"t", "x", "tau", "grad_fd", "identity_form", "gap"});
      for (const Vec& q : cfg->identity) {
        const Vec x = q.tail(d);
        const GradIdentityReport r = solver.grad_identity_report(q[0], x, cfg->tau, 1e-4, cfg->identity_tol);
        w.field(q[0]).field(x[0]).field(cfg->tau).field(r.grad_fd(0, 0)).field(r.identity_form(0, 0));
        w.field(r.max_gap).end_row();
        worst_gap = std::max(worst_gap, r.max_gap);
      }
    });
    if (!cfg->identity.empty())
      out.pass_if("gradient_identity", worst_gap <= cfg->identity_tol, "max_gap", worst_gap);

    double worst_res = 0.0;
    out.csv("residual.csv", [&](CsvWriter& w) {
      w.header({"t", "x", "tau", "residual"});
      for (const Vec& q : cfg->residual) {
        const Vec x = q.tail(d);
        const double r = solver.transport_residual(q[0], x, cfg->tau);
        w.field(q[0]).field(x[0]).field(cfg->tau).field(r).end_row();
        worst_res = std::max(worst_res, r);
      }
    });
    if (!cfg->residual.empty())
      out.pass_if("transport_residual", worst_res <= cfg->residual_tol, "max_residual", worst_res);

    if (cfg->probes > 0) {
      struct Probe {
        double t, x, norm, bound;
      };
      std::vector<Probe> rows(cfg->probes);
      const std::uint64_t seed = c.sub_seed(1);
      parallel_for(rows.size(), c.workers, [&](std::size_t i) {
        Rng rng(seed, i);
        const double t = rng.uniform() * cfg->tau * 0.99;
        Vec x(d);
        for (int k = 0; k < d; ++k) x[k] = cfg->probe_box * (2.0 * rng.uniform() - 1.0);
        const CharacteristicResult r = solver.characteristic(t, x, cfg->tau);
        rows[i] = {t, x[0], operator_norm(r.end().jacobian), std::exp(r.integral_grad)};
      });
      std::size_t violations = 0;
      double worst = 0.0;
      for (const auto& r : rows) {
        if (r.norm > r.bound * (1.0 + 1e-8)) ++violations;
        worst = std::max(worst, r.norm / r.bound);
      }
      out.csv("gronwall.csv", [&](CsvWriter& w) {
        w.header({"t", "x", "jacobian_norm", "bound"});
        for (const auto& r : rows) w.field(r.t).field(r.x).field(r.norm).field(r.bound).end_row();
      });
      out.pass_if("gronwall_violations", violations == 0, "count", static_cast<double>(violations));
      out.check("gronwall_max_ratio", Status::Info, "norm_over_bound", worst);
    }

    double worst_flow = 0.0;
    out.csv("flow_composition.csv", [&](CsvWriter& w) {
      w.header({"t", "r", "x", "tau", "position_gap", "jacobian_gap"});
      for (const Vec& q : cfg->flow) {
        const Vec x = q.tail(d);
        const CharacteristicResult whole = solver.characteristic(q[0], x, cfg->tau);
        const CharacteristicResult first = solver.characteristic(q[0], x, q[1]);
        const CharacteristicResult second = solver.characteristic(q[1], first.end().position, cfg->tau);
        const double pg = (whole.end().position - second.end().position).norm();
        const double jg = (whole.end().jacobian - second.end().jacobian * first.end().jacobian).norm();
        w.field(q[0]).field(q[1]).field(x[0]).field(cfg->tau).field(pg).field(jg).end_row();
        worst_flow = std::max({worst_flow, pg, jg});
      }
    });
    if (!cfg->flow.empty()) out.pass_if("flow_composition", worst_flow <= cfg->flow_tol, "max_gap", worst_flow);

    if (cfg->moments) {
      auto run = [&](const MomentCase& mc, std::uint64_t part) {
        MomentOptions mo;
        mo.x0 = mc.x0;
        mo.steps = cfg->msteps;
        mo.workers = c.workers;
        const SystemSpec spec = SystemSpec::standard(c.noise, mc.drift, c.sigma);
        return grad_moments(spec, cfg->meps, cfg->mq, cfg->mt, cfg->mtau, cfg->mpaths, c.sub_seed(part), mo);
      };
      const auto a = run(cfg->primary, 2);
      const auto b = run(cfg->contrast, 3);
      out.csv("moments.csv", [&](CsvWriter& w) {
        w.header({"drift", "eps", "q", "moment", "stderr", "exp_moment", "exp_stderr", "khasminskii_delta", "paths"});
        auto put = [&](const std::string& name, const std::vector<MomentRow>& rows) {
          for (const auto& r : rows) {
            w.field(name).field(r.eps).field(r.q).field(r.moment).field(r.std_error).field(r.exp_moment);
            w.field(r.exp_std_error).field(r.khasminskii_delta).field(r.paths).end_row();
          }
        };
        put(cfg->primary.drift.kind(), a);
        put("contrast:" + cfg->contrast.drift.kind(), b);
      });
      out.pass_if("moments_flat_primary", flat_within(a), "relative_growth", relative_growth(a));
      bool grows = true;
      for (std::size_t i = 1; i < b.size(); ++i) grows = grows && b[i].moment > b[i - 1].moment;
      grows = grows && b.back().moment - b.front().moment > 2.0 * std::hypot(b.back().std_error, b.front().std_error);
      out.pass_if("moments_growing_contrast", grows, "relative_growth", relative_growth(b));
      out.pass_if("moments_ordering", relative_growth(b) > relative_growth(a), "growth_gap",
                  relative_growth(b) - relative_growth(a));
      if (out.plots()) {
        PlotSeries sa{cfg->primary.drift.kind(), {}, {}, true}, sb{"contrast", {}, {}, true};
        for (const auto& r : a) {
          sa.x.push_back(r.eps);
          sa.y.push_back(r.moment);
        }
        for (const auto& r : b) {
          sb.x.push_back(r.eps);
          sb.y.push_back(r.moment);
        }
        write_svg_plot(out.file("moments.svg"), {"E|grad u_eps(t, X_t)|^q", "eps", "moment", true, false}, {sa, sb});
      }
    }
  };
}

}  // namespace krbn::tools::detail
