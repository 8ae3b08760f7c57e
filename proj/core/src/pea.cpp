#include "krbn/pea.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "krbn/density.hpp"
#include "krbn/errors.hpp"
#include "krbn/parallel.hpp"
#include "krbn/quadrature.hpp"
#include "krbn/rng.hpp"

namespace krbn {

void PeaProbe::validate() const {
  moll.validate();
  if (!(lambda > 0.0)) throw ParameterError("pea probe: lambda must be positive");
  for (double e : eps_list)
    if (!(e > 0.0)) throw ParameterError("pea probe: every eps must be positive");
  for (const auto& [t, s] : time_pairs)
    if (!(s > t)) throw ArgumentError("pea probe: every time pair needs t < s");
  for (const auto& th : theta_grid)
    if (th.size() != model.dim()) throw ArgumentError("pea probe: theta has the wrong dimension");
}

namespace {

// Points where the mollified gradient changes character: singular centers and
// the edges of their eps-neighbourhoods, per axis.
std::vector<std::vector<double>> axis_breaks(const DriftModel& model, double scale) {
  const int d = model.dim();
  std::vector<std::vector<double>> out(d);
  std::vector<Vec> centers;
  if (d == 1) {
    for (double b : drift_breakpoints(model)) centers.push_back(scalar_vec(b));
  } else if (auto p = model.as<PeanoPower>()) {
    centers.push_back(p->center);
  } else if (auto m = model.as<MultiSingularity>()) {
    for (const auto& t : m->terms) centers.push_back(t.center);
  }
  for (const auto& c : centers)
    for (int i = 0; i < d; ++i)
      for (double off : {-scale, 0.0, scale}) out[i].push_back(c[i] + off);
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    // Breaks closer than scale/4 add nothing but initial intervals.
    std::vector<double> thin;
    for (double x : v)
      if (thin.empty() || x - thin.back() >= 0.25 * scale) thin.push_back(x);
    v = std::move(thin);
  }
  return out;
}

double gamma_1d(double var, double y) { return gaussian_density(var, y); }

PeaValue weighted_1d(const std::function<double(double)>& g, double var, double theta, const PeaBudget& b,
                     std::vector<double> breaks) {
  const double sd = std::sqrt(var);
  const double lo = theta - b.half_width_sigmas * sd, hi = theta + b.half_width_sigmas * sd;
  breaks.push_back(theta);
  AdaptiveOptions opt{b.abs_tol, b.rel_tol, b.max_intervals};
  const QuadResult q = integrate_gk15([&](double y) { return g(y) * gamma_1d(var, y - theta); }, lo, hi, opt, breaks);
  return {q.value, q.error, q.evaluations};
}

PeaValue weighted_2d(const std::function<double(const Vec&)>& g, double var, const Vec& theta, const PeaBudget& b,
                     const std::vector<std::vector<double>>& breaks) {
  const double sd = std::sqrt(var);
  const double L = b.half_width_sigmas * sd;
  AdaptiveOptions opt{b.abs_tol, b.rel_tol, b.max_intervals};
  AdaptiveOptions inner_opt{0.1 * b.abs_tol, 0.1 * b.rel_tol, b.max_intervals};
  std::vector<double> b0 = breaks.size() > 0 ? breaks[0] : std::vector<double>{};
  std::vector<double> b1 = breaks.size() > 1 ? breaks[1] : std::vector<double>{};
  b0.push_back(theta[0]);
  b1.push_back(theta[1]);
  long evals = 0;
  double inner_err = 0.0;
  auto outer = [&](double y0) {
    Vec y(2);
    y[0] = y0;
    auto inner = [&](double y1) {
      y[1] = y1;
      return g(y) * gaussian_density(var, y - theta);
    };
    const QuadResult q = integrate_gk15(inner, theta[1] - L, theta[1] + L, inner_opt, b1);
    evals += q.evaluations;
    inner_err = std::max(inner_err, q.error);
    return q.value;
  };
  const QuadResult q = integrate_gk15(outer, theta[0] - L, theta[0] + L, opt, b0);
  return {q.value, q.error + inner_err * 2.0 * L, evals};
}

PeaValue weighted_mc(const std::function<double(const Vec&)>& g, int dim, double var, const Vec& theta,
                     const PeaBudget& b) {
  if (b.mc_samples < 2) throw ArgumentError("pea: Monte Carlo budget must be >= 2 samples");
  const double sd = std::sqrt(var);
  std::vector<double> vals(b.mc_samples);
  parallel_for(b.mc_samples, b.workers, [&](std::size_t i) {
    Rng rng(b.seed, i);
    Vec y(dim);
    for (int k = 0; k < dim; ++k) y[k] = theta[k] + sd * rng.normal();
    vals[i] = g(y);
  });
  const MeanStat m = mean_stat(vals);
  return {m.mean, m.std_error, static_cast<long>(b.mc_samples)};
}

}  // namespace

PeaValue gaussian_weighted_integral(const std::function<double(const Vec&)>& g, int dim, double var,
                                    const Vec& theta, const PeaBudget& budget, std::span<const double> breaks) {
  if (!(var > 0.0)) throw ArgumentError("gaussian_weighted_integral: variance must be positive");
  if (theta.size() != dim) throw ArgumentError("gaussian_weighted_integral: theta has the wrong dimension");
  if (dim == 1) {
    return weighted_1d([&](double y) { return g(scalar_vec(y)); }, var, theta[0], budget,
                       {breaks.begin(), breaks.end()});
  }
  if (dim == 2) return weighted_2d(g, var, theta, budget, {});
  return weighted_mc(g, dim, var, theta, budget);
}

PeaValue pea_integral(const PeaProbe& probe, double eps, double t, double s, const Vec& theta) {
  if (!(s > t)) throw ArgumentError("pea_integral: need t < s, got t=" + std::to_string(t) + " s=" + std::to_string(s));
  if (!(eps > 0.0)) throw ParameterError("pea_integral: eps must be positive");
  probe.moll.validate();
  const int d = probe.model.dim();
  if (theta.size() != d) throw ArgumentError("pea_integral: theta has the wrong dimension");
  const double var = probe.lambda * std::pow(s - t, 3.0);
  const auto field = make_drift_field(probe.model, eps, FieldMode::Direct, probe.moll);
  const auto breaks = axis_breaks(probe.model, eps * probe.moll.bump_radius);
  try {
    if (d == 1) {
      auto g = [&](double y) { return std::abs(field->jacobian(s, scalar_vec(y))(0, 0)); };
      return weighted_1d(g, var, theta[0], probe.budget, breaks[0]);
    }
    auto g = [&](const Vec& y) { return operator_norm(field->jacobian(s, y)); };
    if (d == 2) return weighted_2d(g, var, theta, probe.budget, breaks);
    return weighted_mc(g, d, var, theta, probe.budget);
  } catch (const NumericError& e) {
    throw NumericError("pea_integral(model=" + probe.model.kind() + ", eps=" + std::to_string(eps) +
                       ", t=" + std::to_string(t) + ", s=" + std::to_string(s) + "): " + e.what());
  }
}

namespace {

struct Ols {
  double slope, intercept, slope_se;
};

Ols least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericError("decay fit: degenerate regression (no spread in s - t)");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - icpt - slope * x[i];
    ssr += r * r;
  }
  const double se = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  if (!std::isfinite(slope) || !std::isfinite(se)) throw NumericError("decay fit: non-finite regression");
  return {slope, icpt, se};
}

}  // namespace

std::vector<DecayFit> fit_decay_exponent(const PeaProbe& probe) {
  probe.validate();
  if (probe.time_pairs.size() < 4) throw ArgumentError("fit_decay_exponent: need at least 4 time pairs");
  if (probe.theta_grid.empty()) throw ArgumentError("fit_decay_exponent: empty theta grid");
  if (probe.eps_list.empty()) throw ArgumentError("fit_decay_exponent: empty eps list");
  double dmin = INFINITY, dmax = 0.0;
  for (const auto& [t, s] : probe.time_pairs) {
    dmin = std::min(dmin, s - t);
    dmax = std::max(dmax, s - t);
  }
  if (dmax / dmin < 100.0 * (1.0 - 1e-12))
    throw ArgumentError("fit_decay_exponent: time pairs must span at least two decades of s - t");
  std::vector<DecayFit> out;
  for (double eps : probe.eps_list) {
    DecayFit f;
    f.eps = eps;
    f.lambda = probe.lambda;
    std::vector<double> lx;
    std::vector<std::vector<double>> per_theta(probe.theta_grid.size());
    for (const auto& [t, s] : probe.time_pairs) {
      double best = 0.0;
      for (std::size_t k = 0; k < probe.theta_grid.size(); ++k) {
        const double v = pea_integral(probe, eps, t, s, probe.theta_grid[k]).value;
        per_theta[k].push_back(v);
        best = std::max(best, v);
      }
      if (!(best > 0.0)) throw NumericError("decay fit: integral vanishes; log-log regression undefined");
      f.dt.push_back(s - t);
      f.values.push_back(best);
      lx.push_back(std::log(s - t));
    }
    std::vector<double> ly;
    for (double v : f.values) ly.push_back(std::log(v));
    const Ols o = least_squares(lx, ly);
    f.slope = o.slope;
    f.intercept = o.intercept;
    f.slope_se = o.slope_se;
    f.ci_lo = o.slope - 2.0 * o.slope_se;
    f.ci_hi = o.slope + 2.0 * o.slope_se;
    for (const auto& vals : per_theta) {
      std::vector<double> lv;
      bool ok = true;
      for (double v : vals) {
        if (!(v > 0.0)) ok = false;
        lv.push_back(std::log(std::max(v, 1e-300)));
      }
      f.theta_slopes.push_back(ok ? least_squares(lx, lv).slope : NAN);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<PeaRow> pea_table(const PeaProbe& probe) {
  probe.validate();
  std::vector<PeaRow> rows;
  for (double eps : probe.eps_list)
    for (const auto& [t, s] : probe.time_pairs)
      for (const auto& th : probe.theta_grid) {
        const PeaValue v = pea_integral(probe, eps, t, s, th);
        rows.push_back({probe.model.kind(), eps, probe.lambda, t, s, th[0], v.value, v.std_error});
      }
  return rows;
}

RhoInterval rho_interval(int d, double beta) {
  if (d < 1) throw ArgumentError("rho_interval: d must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw ArgumentError("rho_interval: beta must lie in (0, 1]");
  const double den = d + beta - 1.0;
  if (!(den > 0.0)) throw DomainError("rho_interval: d + beta - 1 must be positive");
  RhoInterval r;
  r.lo = (1.5 * d - 1.0) / den;
  r.hi = beta == 1.0 ? INFINITY : 1.0 / (1.0 - beta);
  r.nonempty = r.lo < r.hi;
  return r;
}

Rational::Rational(long long n, long long d) {
  if (d == 0) throw DomainError("rational: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const long long g = std::gcd(n < 0 ? -n : n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

RhoIntervalExact rho_interval_exact(int d, const Rational& beta) {
  if (d < 1) throw ArgumentError("rho_interval_exact: d must be >= 1");
  if (!(Rational(0) < beta) || Rational(1) < beta) throw ArgumentError("rho_interval_exact: beta must lie in (0, 1]");
  // lo = (3d - 2) / (2 (d + beta - 1)) = (3d - 2) den / (2 (d den + num - den))
  const long long lden = 2 * (d * beta.den + beta.num - beta.den);
  if (lden <= 0) throw DomainError("rho_interval_exact: d + beta - 1 must be positive");
  RhoIntervalExact r;
  r.lo = Rational((3LL * d - 2) * beta.den, lden);
  if (beta.num != beta.den) r.hi = Rational(beta.den, beta.den - beta.num);
  r.nonempty = !r.hi || r.lo < *r.hi;
  return r;
}

std::vector<double> accumulating_partial_sums(double beta, int N) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ArgumentError("partial sums: beta must lie in (0, 1]");
  if (N < 1) throw ArgumentError("partial sums: N must be >= 1");
  std::vector<double> out(N);
  // Neumaier-compensated running sum of gap^beta with gap = n^{-1/beta}.
  double s = 0.0, c = 0.0;
  for (int n = 1; n <= N; ++n) {
    const double term = std::pow(std::pow(static_cast<double>(n), -1.0 / beta), beta);
    const double u = s + term;
    c += std::abs(s) >= std::abs(term) ? (s - u) + term : (term - u) + s;
    s = u;
    out[n - 1] = s + c;
  }
  return out;
}

CounterexampleReport counterexample_divergence(double beta, int N, const CounterexampleOptions& opt) {
  CounterexampleReport rep;
  rep.partial_sums = accumulating_partial_sums(beta, N);
  std::vector<double> eps = opt.eps_list;
  if (eps.empty())
    for (int j = 2; j <= 8; ++j) eps.push_back(std::ldexp(1.0, -j));
  PeaProbe probe;
  probe.model = DriftModel(Accumulating::standard(beta, opt.anchors), 1);
  probe.moll = opt.moll;
  probe.lambda = opt.lambda;
  probe.budget = opt.budget;
  const double a_inf = probe.model.as<Accumulating>()->anchors.back();
  rep.theta = opt.theta.value_or(a_inf - 0.2);
  for (double e : eps) {
    const PeaValue v = pea_integral(probe, e, opt.t, opt.s, scalar_vec(rep.theta));
    rep.eps.push_back(e);
    rep.integrals.push_back(v.value);
    rep.std_errors.push_back(v.std_error);
  }
  for (std::size_t j = 0; j + 1 < rep.integrals.size(); ++j) rep.ratios.push_back(rep.integrals[j + 1] / rep.integrals[j]);
  return rep;
}

}  // namespace krbn
