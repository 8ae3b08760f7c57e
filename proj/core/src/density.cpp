#include "krbn/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "krbn/errors.hpp"
#include "krbn/parallel.hpp"

namespace krbn {

void GaussianKernel::validate() const {
  if (!(lambda > 0.0)) throw ParameterError("gaussian kernel: lambda must be positive");
  if (dim < 1) throw ParameterError("gaussian kernel: dim must be >= 1");
}

double eval_g_lambda(const GaussianKernel& k, double t, const Vec& v, const Vec& x) {
  k.validate();
  if (!(t > 0.0)) throw DomainError("g_lambda: t must be positive");
  if (v.size() != k.dim || x.size() != k.dim) throw ArgumentError("g_lambda: dimension mismatch");
  const double d = k.dim;
  const double q = v.squaredNorm() / t + x.squaredNorm() / (t * t * t);
  return std::pow(2.0 * std::numbers::pi * k.lambda, -d) * std::pow(t, -2.0 * d) * std::exp(-q / (2.0 * k.lambda));
}

double gaussian_density(double var, const Vec& x) {
  if (!(var > 0.0)) throw DomainError("gaussian_density: variance must be positive");
  return std::pow(2.0 * std::numbers::pi * var, -0.5 * static_cast<double>(x.size())) *
         std::exp(-x.squaredNorm() / (2.0 * var));
}

double gaussian_density(double var, double x) {
  if (!(var > 0.0)) throw DomainError("gaussian_density: variance must be positive");
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= s.size()) return s.back();
  const double f = pos - static_cast<double>(i);
  return s[i] + f * (s[i + 1] - s[i]);
}

KdeResult kde_on_window(const std::vector<double>& sorted, double lo, double hi, double h, int points) {
  KdeResult r;
  r.bandwidth = h;
  r.xs.resize(points);
  r.density.assign(points, 0.0);
  r.spacing = (hi - lo) / (points - 1);
  const double n = static_cast<double>(sorted.size());
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  const double reach = 8.0 * h;
  for (int i = 0; i < points; ++i) {
    const double x = lo + r.spacing * i;
    r.xs[i] = x;
    auto a = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
    auto b = std::upper_bound(sorted.begin(), sorted.end(), x + reach);
    double acc = 0.0;
    for (auto it = a; it != b; ++it) {
      const double u = (x - *it) / h;
      acc += std::exp(-0.5 * u * u);
    }
    r.density[i] = acc * norm;
  }
  double m = 0.0;
  for (int i = 0; i + 1 < points; ++i) m += 0.5 * (r.density[i] + r.density[i + 1]) * r.spacing;
  r.mass = m;
  const auto inside_lo = std::lower_bound(sorted.begin(), sorted.end(), lo);
  const auto inside_hi = std::upper_bound(sorted.begin(), sorted.end(), hi);
  r.covered_fraction = static_cast<double>(inside_hi - inside_lo) / n;
  r.mode = r.xs[std::max_element(r.density.begin(), r.density.end()) - r.density.begin()];
  return r;
}

}  // namespace

KdeResult kde_marginal(std::span<const double> samples, const KdeOptions& opt) {
  if (samples.size() < opt.min_samples)
    throw StatisticalError("kde_marginal: " + std::to_string(samples.size()) + " samples, need at least " +
                           std::to_string(opt.min_samples));
  if (opt.points < 32) throw ArgumentError("kde_marginal: need at least 32 grid points");
  std::vector<double> s(samples.begin(), samples.end());
  for (double x : s)
    if (!std::isfinite(x)) throw StatisticalError("kde_marginal: non-finite sample");
  std::sort(s.begin(), s.end());
  const MeanStat ms = mean_stat(s);
  const double sd = std::sqrt(ms.variance);
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  const double silverman = 0.9 * spread * std::pow(static_cast<double>(s.size()), -0.2) * opt.bandwidth_scale;

  double lo, hi, h;
  if (opt.window) {
    lo = opt.window->first;
    hi = opt.window->second;
    if (!(hi > lo)) throw ArgumentError("kde_marginal: empty window");
    const double floor = 2.0 * (hi - lo) / (opt.points - 1);
    h = opt.bandwidth > 0.0 ? opt.bandwidth : std::max(silverman, floor);
  } else {
    lo = quantile_sorted(s, opt.lo_quantile);
    hi = quantile_sorted(s, opt.hi_quantile);
    double w0 = hi - lo;
    if (!(w0 > 0.0)) {
      w0 = 1e-3 * std::max(1.0, std::abs(lo));
      lo -= 0.5 * w0;
      hi += 0.5 * w0;
    }
    // Fixed point of h = max(silverman, 2 (w0 + 8 h) / (points - 1)).
    const double floor = 2.0 * w0 / (opt.points - 1 - 16);
    h = opt.bandwidth > 0.0 ? opt.bandwidth : std::max(silverman, floor);
    lo -= 4.0 * h;
    hi += 4.0 * h;
  }
  KdeResult r = kde_on_window(s, lo, hi, h, opt.points);
  if (opt.window && r.covered_fraction < 0.999)
    throw WindowError("kde_marginal: window [" + std::to_string(lo) + ", " + std::to_string(hi) + "] covers " +
                      std::to_string(100.0 * r.covered_fraction) + "% of samples (< 99.9%)");
  return r;
}

KdeResult kde_marginal(const Ensemble& ens, double s, int comp, const KdeOptions& opt) {
  const auto it = std::find_if(ens.times.begin(), ens.times.end(),
                               [&](double t) { return std::abs(t - s) <= 1e-9 * std::max(1.0, std::abs(s)); });
  if (it == ens.times.end()) throw ArgumentError("kde_marginal: time is not an ensemble snapshot");
  return kde_marginal(ens.x_component(static_cast<std::size_t>(it - ens.times.begin()), comp), opt);
}

std::vector<double> lambda_log_grid(double lambda0) {
  if (!(lambda0 > 0.0)) throw ArgumentError("lambda_log_grid: lambda0 must be positive");
  std::vector<double> g;
  for (int k = -12; k <= 12; ++k) g.push_back(lambda0 * std::pow(2.0, k / 4.0));
  return g;
}

namespace {

double envelope_constant(const KdeResult& k, double center, double var, double cutoff) {
  double c = 0.0;
  for (std::size_t i = 0; i < k.xs.size(); ++i) {
    if (k.density[i] < cutoff) continue;
    c = std::max(c, k.density[i] / gaussian_density(var, k.xs[i] - center));
  }
  return c;
}

}  // namespace

EnvelopeResult envelope_check(std::span<const double> samples, double center, double t, double s,
                              std::span<const double> lambda_grid, const KdeOptions& opt) {
  if (!(s > t)) throw ArgumentError("envelope_check: need s > t");
  if (lambda_grid.empty()) throw ArgumentError("envelope_check: empty lambda grid");
  const KdeResult k = kde_marginal(samples, opt);
  const double peak = *std::max_element(k.density.begin(), k.density.end());
  const double cutoff = 1e-3 * peak;
  const double dt3 = std::pow(s - t, 3.0);
  EnvelopeResult r;
  r.center = center;
  r.bandwidth = k.bandwidth;
  r.mode_gap = std::abs(k.mode - center);
  r.c_fit = INFINITY;
  for (double lam : lambda_grid) {
    if (!(lam > 0.0)) throw ArgumentError("envelope_check: lambda must be positive");
    const double c = envelope_constant(k, center, lam * dt3, cutoff);
    r.per_lambda.emplace_back(lam, c);
    if (c < r.c_fit) {
      r.c_fit = c;
      r.lambda_star = lam;
    }
  }
  const double var = r.lambda_star * dt3;
  for (std::size_t i = 0; i < k.xs.size(); ++i) {
    const double g = gaussian_density(var, k.xs[i] - center);
    r.rows.push_back({k.xs[i], k.density[i], r.c_fit * g, k.density[i] / g});
  }
  KdeOptions half = opt;
  half.bandwidth = 0.5 * k.bandwidth;
  half.window = std::pair{k.xs.front(), k.xs.back()};
  const KdeResult kh = kde_marginal(samples, half);
  const double peak_h = *std::max_element(kh.density.begin(), kh.density.end());
  r.c_half_bandwidth = envelope_constant(kh, center, var, 1e-3 * peak_h);
  return r;
}

EnvelopeResult envelope_check(const Ensemble& ens, const SystemSpec& spec, double eps, double t, double s,
                              const Vec& v, const Vec& x, std::span<const double> lambda_grid,
                              const KdeOptions& opt) {
  if (!(s > t)) throw ArgumentError("envelope_check: need s > t");
  if (spec.dim() != 1) throw UnsupportedError("envelope_check: d = 1 only");
  const State c = flow_theta(spec, eps, t, s, v, x);
  const auto it = std::find_if(ens.times.begin(), ens.times.end(),
                               [&](double u) { return std::abs(u - s) <= 1e-9 * std::max(1.0, std::abs(s)); });
  if (it == ens.times.end()) throw ArgumentError("envelope_check: s is not an ensemble snapshot");
  const auto xs = ens.x_component(static_cast<std::size_t>(it - ens.times.begin()));
  return envelope_check(xs, c.x[0], t, s, lambda_grid, opt);
}

}  // namespace krbn
