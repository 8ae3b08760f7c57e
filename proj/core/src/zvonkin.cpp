#include "krbn/zvonkin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "krbn/errors.hpp"
#include "krbn/parallel.hpp"
#include "krbn/rng.hpp"

namespace krbn {

Source Source::constant(double c) {
  Source s;
  s.kind = Kind::Constant;
  s.value = c;
  s.depends_on_x = false;
  return s;
}

Source Source::cutoff_drift(int m) {
  if (m < 1) throw ParameterError("cutoff source: m must be >= 1");
  Source s;
  s.kind = Kind::CutoffDrift;
  s.cutoff = m;
  return s;
}

Source Source::from_function(std::function<double(double, double, double)> f, bool depends_on_x) {
  if (!f) throw ArgumentError("custom source: empty function");
  Source s;
  s.kind = Kind::Custom;
  s.custom = std::move(f);
  s.depends_on_x = depends_on_x;
  return s;
}

void ResolventProbe::validate() const {
  if (spec.dim() != 1) throw ArgumentError("resolvent probe: d = 1 only");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("resolvent probe: lambda must be positive");
  if (!(horizon > 0.0)) throw ParameterError("resolvent probe: horizon must be positive");
  if (paths == 0) throw ArgumentError("resolvent probe: Monte Carlo budget is zero");
  if (steps == 0) throw ArgumentError("resolvent probe: steps must be positive");
  if (!(drift_eps >= 0.0)) throw ParameterError("resolvent probe: drift_eps must be >= 0");
  spec.validate(horizon);
}

namespace {

using Functionals = std::vector<std::vector<double>>;  // [point][path]

// One simulation pass serves every discount rate: the dynamics do not depend on lambda.
std::vector<Functionals> functionals(const ResolventProbe& probe, double t, std::span<const ProbePoint> points,
                                     std::uint64_t stream_offset, std::span<const double> lambdas) {
  probe.validate();
  if (!(t >= 0.0 && t <= probe.horizon)) throw ArgumentError("resolvent probe: t outside [0, T]");
  const std::size_t np = points.size(), n = probe.paths, nl = lambdas.size();
  for (double lam : lambdas)
    if (!(lam > 0.0) || !std::isfinite(lam)) throw ParameterError("resolvent probe: lambda must be positive");
  std::vector<Functionals> out(nl, Functionals(np, std::vector<double>(n, 0.0)));
  if (t == probe.horizon || np == 0) return out;
  const double h0 = probe.horizon / static_cast<double>(probe.steps);
  const int steps = std::max(1, static_cast<int>(std::ceil((probe.horizon - t) / h0 - 1e-9)));
  const std::vector<double> grid = uniform_grid(t, probe.horizon, steps);
  // Left-point weights e^{-lambda (t_k - t)} (1 - e^{-lambda dt}) / lambda sum to the exact
  // resolvent of a constant source.
  std::vector<std::vector<double>> weight(nl, std::vector<double>(steps));
  for (std::size_t l = 0; l < nl; ++l)
    for (int k = 0; k < steps; ++k) {
      const double dt = grid[k + 1] - grid[k];
      weight[l][k] = std::exp(-lambdas[l] * (grid[k] - t)) * (-std::expm1(-lambdas[l] * dt)) / lambdas[l];
    }
  const auto dyn = make_drift_field(probe.spec.drift, probe.drift_eps);
  const auto raw = make_drift_field(probe.spec.drift, 0.0);
  const Source& src = probe.source;
  auto f = [&](double s, const State& st) {
    switch (src.kind) {
      case Source::Kind::Constant:
        return src.value;
      case Source::Kind::CutoffDrift:
        return raw->value(s, st.x)[0] * cutoff_chi(src.cutoff, st.x[0]);
      case Source::Kind::Custom:
        return src.custom(s, st.v[0], st.x[0]);
    }
    return 0.0;
  };
  std::vector<std::uint8_t> bad(n, 0);
  parallel_for(n, probe.workers, [&](std::size_t j) {
    Rng rng(probe.seed, j + stream_offset);
    std::vector<State> st(np);
    std::vector<double> acc(np * nl, 0.0);
    for (std::size_t i = 0; i < np; ++i) st[i] = State{scalar_vec(points[i].v), scalar_vec(points[i].x)};
    for (int k = 0; k < steps; ++k) {
      const double dt = grid[k + 1] - grid[k];
      const Vec dl = sample_increment(probe.spec.noise, dt, rng);
      for (std::size_t i = 0; i < np; ++i) {
        const double fv = f(grid[k], st[i]);
        for (std::size_t l = 0; l < nl; ++l) acc[l * np + i] += weight[l][k] * fv;
        if (!bad[j] && !euler_step(probe.spec, *dyn, grid[k], dt, dl, st[i], probe.sim.overflow)) bad[j] = 1;
      }
    }
    for (std::size_t l = 0; l < nl; ++l)
      for (std::size_t i = 0; i < np; ++i) out[l][i][j] = acc[l * np + i];
  });
  if (std::find(bad.begin(), bad.end(), 1) != bad.end()) {
    for (auto& per_lambda : out)
      for (auto& row : per_lambda) {
        std::vector<double> kept;
        for (std::size_t j = 0; j < n; ++j)
          if (!bad[j]) kept.push_back(row[j]);
        row = std::move(kept);
      }
  }
  return out;
}

Functionals functionals(const ResolventProbe& probe, double t, std::span<const ProbePoint> points,
                        std::uint64_t stream_offset) {
  const double lam = probe.lambda;
  return std::move(functionals(probe, t, points, stream_offset, std::span<const double>(&lam, 1)).front());
}

MeanStat diff_stat(const std::vector<double>& a, const std::vector<double>& b, double scale) {
  std::vector<double> d(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) d[j] = (a[j] - b[j]) * scale;
  return mean_stat(d);
}

}  // namespace

std::vector<std::vector<double>> path_functionals(const ResolventProbe& probe, double t,
                                                  std::span<const ProbePoint> points) {
  return functionals(probe, t, points, 0);
}

UEstimate estimate_u(const ResolventProbe& probe, double t, double v, double x) {
  const ProbePoint p{v, x};
  const auto f = path_functionals(probe, t, std::span<const ProbePoint>(&p, 1));
  if (f[0].size() < 2) throw NumericError("estimate_u: fewer than two usable paths");
  const MeanStat m = mean_stat(f[0]);
  return {m.mean, m.std_error, f[0].size()};
}

double resolvent_constant_source(double lambda, double horizon, double t) {
  if (!(lambda > 0.0)) throw ParameterError("resolvent: lambda must be positive");
  return -std::expm1(-lambda * (horizon - t)) / lambda;
}

namespace {

// Points ordered (v+h, x), (v-h, x), (v, x+h), (v, x-h) starting at offset 4i.
GradientEstimate gradient_from(const Functionals& f, std::size_t i, double t, double v, double x, double h) {
  const auto &a = f[4 * i], &b = f[4 * i + 1], &c = f[4 * i + 2], &d = f[4 * i + 3];
  const std::size_t n = a.size();
  if (n < 2) throw NumericError("estimate_gradient: fewer than two usable paths");
  GradientEstimate g{t, v, x};
  const MeanStat gv = diff_stat(a, b, 0.5 / h), gx = diff_stat(c, d, 0.5 / h);
  g.du_dv = gv.mean;
  g.du_dv_se = gv.std_error;
  g.du_dx = gx.mean;
  g.du_dx_se = gx.std_error;
  const double sv = gv.mean < 0.0 ? -1.0 : 1.0, sx = gx.mean < 0.0 ? -1.0 : 1.0;
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = (sv * (a[j] - b[j]) + sx * (c[j] - d[j])) * 0.5 / h;
  const MeanStat ms = mean_stat(s);
  g.sum = ms.mean;
  g.sum_se = ms.std_error;
  return g;
}

std::vector<ProbePoint> gradient_stencil(std::span<const ProbePoint> grid, double h) {
  std::vector<ProbePoint> pts;
  for (const auto& q : grid) {
    pts.push_back({q.v + h, q.x});
    pts.push_back({q.v - h, q.x});
    pts.push_back({q.v, q.x + h});
    pts.push_back({q.v, q.x - h});
  }
  return pts;
}

}  // namespace

GradientEstimate estimate_gradient(const ResolventProbe& probe, double t, double v, double x, double h) {
  if (!(h > 0.0)) throw ArgumentError("estimate_gradient: step must be positive");
  const ProbePoint q{v, x};
  const auto pts = gradient_stencil(std::span<const ProbePoint>(&q, 1), h);
  return gradient_from(path_functionals(probe, t, pts), 0, t, v, x, h);
}

std::vector<double> doubling_schedule(double lambda0, int count) {
  if (!(lambda0 > 0.0) || count < 1) throw ArgumentError("doubling_schedule: need lambda0 > 0 and count >= 1");
  std::vector<double> s;
  for (int k = 0; k < count; ++k) s.push_back(std::ldexp(lambda0, k));
  return s;
}

GradientBoundReport gradient_bound_report(const ResolventProbe& probe, std::span<const double> lambda_schedule,
                                          std::span<const ProbePoint> probe_grid, const GradientBoundOptions& opt) {
  if (lambda_schedule.empty() || probe_grid.empty())
    throw ArgumentError("check_gradient_bounds: empty schedule or probe grid");
  if (!(opt.fd_step > 0.0)) throw ArgumentError("check_gradient_bounds: step must be positive");
  GradientBoundReport rep;
  rep.infimum = INFINITY;
  // Both step sizes and every lambda share one pass over the noise paths.
  std::vector<ProbePoint> pts = gradient_stencil(probe_grid, opt.fd_step);
  const auto half = gradient_stencil(probe_grid, 0.5 * opt.fd_step);
  pts.insert(pts.end(), half.begin(), half.end());
  const auto f = functionals(probe, opt.t, pts, 0, lambda_schedule);
  const std::size_t ng = probe_grid.size();
  std::size_t last = 0;
  for (std::size_t l = 0; l < lambda_schedule.size(); ++l) {
    last = l;
    LambdaRow row{lambda_schedule[l], 0.0, 0.0, true};
    rep.points.clear();
    for (std::size_t i = 0; i < ng; ++i) {
      const GradientEstimate g = gradient_from(f[l], i, opt.t, probe_grid[i].v, probe_grid[i].x, opt.fd_step);
      if (g.sum > row.sup_grad) {
        row.sup_grad = g.sum;
        row.sup_se = g.sum_se;
      }
      if (g.sum > opt.bound + opt.mc_sigmas * g.sum_se) row.within = false;
      rep.points.push_back(g);
    }
    rep.infimum = std::min(rep.infimum, row.sup_grad);
    rep.rows.push_back(row);
    if (row.within) {
      rep.achieving_lambda = row.lambda;
      break;
    }
  }
  rep.step_halving_consistent = true;
  for (std::size_t i = 0; i < ng; ++i) {
    const GradientEstimate b =
        gradient_from(f[last], ng + i, opt.t, probe_grid[i].v, probe_grid[i].x, 0.5 * opt.fd_step);
    const GradientEstimate& a = rep.points[i];
    const double tv = opt.mc_sigmas * std::hypot(a.du_dv_se, b.du_dv_se);
    const double tx = opt.mc_sigmas * std::hypot(a.du_dx_se, b.du_dx_se);
    if (std::fabs(a.du_dv - b.du_dv) > tv + 1e-12 || std::fabs(a.du_dx - b.du_dx) > tx + 1e-12)
      rep.step_halving_consistent = false;
    rep.half_step.push_back(b);
  }
  rep.lambda_monotone = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const auto &a = rep.rows[k - 1], &b = rep.rows[k];
    if (b.sup_grad > a.sup_grad + opt.mc_sigmas * std::hypot(a.sup_se, b.sup_se) + 1e-12) rep.lambda_monotone = false;
  }
  return rep;
}

GradientBoundReport check_gradient_bounds(const ResolventProbe& probe, std::span<const double> lambda_schedule,
                                          std::span<const ProbePoint> probe_grid, const GradientBoundOptions& opt) {
  GradientBoundReport rep = gradient_bound_report(probe, lambda_schedule, probe_grid, opt);
  if (!rep.achieving_lambda) {
    std::ostringstream os;
    os << "gradient bound " << opt.bound << " not reached up to lambda " << lambda_schedule.back()
       << "; smallest measured sup " << rep.infimum;
    throw CheckFailure(os.str());
  }
  return rep;
}

HolderFit check_holder_gradient(const ResolventProbe& probe, double t, double v,
                                std::span<const std::pair<double, double>> x_pairs, const HolderOptions& opt) {
  if (x_pairs.size() < 3) throw ArgumentError("check_holder_gradient: need at least 3 pairs");
  double smin = INFINITY, smax = 0.0;
  for (const auto& [a, b] : x_pairs) {
    const double s = std::fabs(a - b);
    if (!(s > 0.0)) throw ArgumentError("check_holder_gradient: pairs must be distinct");
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  if (smax < 100.0 * smin * (1.0 - 1e-12))
    throw ArgumentError("check_holder_gradient: separations must span two decades");
  const double h = opt.fd_step;
  std::vector<ProbePoint> pts;
  for (const auto& [a, b] : x_pairs) {
    pts.push_back({v + h, a});
    pts.push_back({v - h, a});
    pts.push_back({v + h, b});
    pts.push_back({v - h, b});
  }
  const auto f = path_functionals(probe, t, pts);
  const std::size_t n = f[0].size();
  if (n < 2) throw NumericError("check_holder_gradient: fewer than two usable paths");
  HolderFit fit;
  std::vector<double> lx, ly, w;
  for (std::size_t i = 0; i < x_pairs.size(); ++i) {
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j)
      d[j] = ((f[4 * i][j] - f[4 * i + 1][j]) - (f[4 * i + 2][j] - f[4 * i + 3][j])) * 0.5 / h;
    const MeanStat m = mean_stat(d);
    HolderRow r{x_pairs[i].first, x_pairs[i].second, std::fabs(x_pairs[i].first - x_pairs[i].second), m.mean,
                m.std_error, false};
    r.resolved = std::fabs(m.mean) > 2.0 * m.std_error && m.mean != 0.0;
    if (r.resolved) {
      lx.push_back(std::log(r.separation));
      ly.push_back(std::log(std::fabs(r.diff)));
      const double rel = r.std_error / std::fabs(r.diff);
      w.push_back(1.0 / std::max(rel * rel, 1e-12));
    }
    fit.rows.push_back(r);
  }
  const double span = lx.empty() ? 0.0 : *std::max_element(lx.begin(), lx.end()) - *std::min_element(lx.begin(), lx.end());
  if (lx.size() < 3 || span < std::log(10.0) * (1.0 - 1e-12)) return fit;
  // Weighted least squares; the slope error follows from the per-point delta-method variances.
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sw += w[i];
    sx += w[i] * lx[i];
    sy += w[i] * ly[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
    sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
  }
  fit.exponent = sxy / sxx;
  fit.exponent_se = std::sqrt(1.0 / sxx);
  fit.intercept = my - fit.exponent * mx;
  fit.inconclusive = false;
  fit.pass = fit.exponent >= opt.target - opt.tol;
  return fit;
}

LemmaReport check_phi_h_lemma(const ResolventProbe& probe, std::span<const LemmaSample> samples, double mc_sigmas) {
  LemmaReport rep;
  rep.pass = true;
  for (const auto& s : samples) {
    const double sig = probe.spec.sigma(s.t, scalar_vec(s.v))(0, 0);
    const double vw = s.v + sig * s.w;
    const ProbePoint pts[] = {{s.v, s.x}, {s.v, s.x2}, {vw, s.x}, {vw, s.x2}};
    const auto f = path_functionals(probe, s.t, pts);
    const std::size_t n = f[0].size();
    if (n < 2) throw NumericError("check_phi_h_lemma: fewer than two usable paths");
    std::vector<double> phi(n), hm(n), sum(n);
    for (std::size_t j = 0; j < n; ++j) {
      phi[j] = s.x - s.x2 + f[0][j] - f[1][j];
      hm[j] = f[2][j] - f[0][j] - f[3][j] + f[1][j];
      sum[j] = phi[j] + hm[j];
    }
    const MeanStat mp = mean_stat(phi), mh = mean_stat(hm), ms = mean_stat(sum);
    LemmaRow r;
    r.s = s;
    r.phi = mp.mean;
    r.phi_se = mp.std_error;
    r.h = mh.mean;
    r.h_se = mh.std_error;
    const double dx = std::fabs(s.x - s.x2);
    const double scale = std::fabs(s.w) * std::min(1.0, std::sqrt(dx));
    r.kappa_ratio = scale > 0.0 ? std::fabs(r.h) / scale : 0.0;
    r.phi_bound = dx <= 2.0 * (std::fabs(r.phi) + mc_sigmas * mp.std_error);
    r.phi_h_bound = dx <= 2.0 * (std::fabs(ms.mean) + mc_sigmas * ms.std_error);
    const double slack = std::min(2.0 * std::fabs(r.phi) - dx, 2.0 * std::fabs(ms.mean) - dx);
    r.inconclusive = dx > 0.0 && 2.0 * mc_sigmas * std::max(mp.std_error, ms.std_error) > 0.5 * std::fabs(slack);
    if (r.inconclusive)
      ++rep.inconclusive;
    else if (!r.phi_bound || !r.phi_h_bound)
      rep.pass = false;
    rep.kappa = std::max(rep.kappa, r.kappa_ratio);
    rep.rows.push_back(r);
  }
  return rep;
}

CrnComparison crn_variance(const ResolventProbe& probe, double t, double v, double x, double h) {
  const ProbePoint plus{v, x + h}, minus{v, x - h};
  const auto a = functionals(probe, t, std::span<const ProbePoint>(&plus, 1), 0);
  const auto b = functionals(probe, t, std::span<const ProbePoint>(&minus, 1), 0);
  const auto c = functionals(probe, t, std::span<const ProbePoint>(&minus, 1), probe.paths);
  const std::size_t n = std::min({a[0].size(), b[0].size(), c[0].size()});
  std::vector<double> d1(n), d2(n);
  for (std::size_t j = 0; j < n; ++j) {
    d1[j] = a[0][j] - b[0][j];
    d2[j] = a[0][j] - c[0][j];
  }
  return {mean_stat(d1).variance, mean_stat(d2).variance};
}

}  // namespace krbn
