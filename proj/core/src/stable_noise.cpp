#include "krbn/stable_noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "krbn/errors.hpp"
#include "krbn/parallel.hpp"

namespace krbn {

StableNoiseSpec StableNoiseSpec::make(double alpha, int dim) {
  StableNoiseSpec s{alpha, dim, 1.0};
  s.validate();
  s.convention_constant = kernel_convention_constant(dim, alpha);
  return s;
}

void StableNoiseSpec::validate() const {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw ParameterError("stable noise: alpha must lie in (1, 2], got " + std::to_string(alpha));
  if (dim < 1 || dim > kMaxDim)
    throw ParameterError("stable noise: dim must lie in [1, " + std::to_string(kMaxDim) + "], got " +
                         std::to_string(dim));
  if (!(convention_constant > 0.0) || !std::isfinite(convention_constant))
    throw ParameterError("stable noise: convention_constant must be positive");
}

double kernel_convention_constant(int dim, double alpha) {
  if (alpha == 2.0) return 1.0;
  const double d = dim;
  const double a = std::pow(std::numbers::pi, d / 2.0) * std::abs(std::tgamma(-alpha / 2.0)) /
                   (std::pow(2.0, alpha) * std::tgamma((d + alpha) / 2.0));
  return std::pow(a, 1.0 / alpha);
}

double positive_stable(double a, Rng& rng) {
  const double u = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  const double num = std::pow(std::sin(a * u), a) * std::pow(std::sin((1.0 - a) * u), 1.0 - a);
  const double zolotarev = std::pow(num / std::sin(u), 1.0 / (1.0 - a));
  return std::pow(zolotarev / e, (1.0 - a) / a);
}

Vec sample_increment(const StableNoiseSpec& spec, double dt, Rng& rng) {
  spec.validate();
  if (dt < 0.0) throw ArgumentError("sample_increment: dt must be >= 0");
  Vec out(spec.dim);
  if (dt == 0.0) {
    out.setZero();
    return out;
  }
  const double a = spec.alpha;
  if (a == 2.0) {
    const double s = std::sqrt(dt);
    for (int i = 0; i < spec.dim; ++i) out[i] = s * rng.normal();
    return out;
  }
  if (spec.dim == 1) {
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double x = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
                     std::pow(std::cos((1.0 - a) * v) / w, (1.0 - a) / a);
    out[0] = std::pow(dt, 1.0 / a) * x;
    return out;
  }
  const double s = positive_stable(a / 2.0, rng);
  const double scale = std::sqrt(std::pow(dt, 2.0 / a) * s) * std::numbers::sqrt2;
  for (int i = 0; i < spec.dim; ++i) out[i] = scale * rng.normal();
  return out;
}

double exact_cf(const StableNoiseSpec& spec, double t, const Vec& xi) {
  if (!(t >= 0.0)) throw DomainError("exact_cf: t must be >= 0");
  const double r = xi.norm();
  return spec.alpha == 2.0 ? std::exp(-0.5 * t * r * r) : std::exp(-t * std::pow(r, spec.alpha));
}

CfEstimate empirical_cf_full(std::span<const Vec> samples, const Vec& xi) {
  if (samples.empty()) throw ArgumentError("empirical_cf: empty sample set");
  std::vector<double> c(samples.size()), s(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != xi.size())
      throw ArgumentError("empirical_cf: dimension mismatch between samples and xi");
    const double p = samples[i].dot(xi);
    c[i] = std::cos(p);
    s[i] = std::sin(p);
  }
  const MeanStat mc = mean_stat(c), ms = mean_stat(s);
  return {mc.mean, ms.mean, mc.std_error, ms.std_error};
}

double empirical_cf(std::span<const Vec> samples, const Vec& xi) {
  return empirical_cf_full(samples, xi).re;
}

void validate_grid(std::span<const double> grid) {
  if (grid.size() < 2) throw ArgumentError("time grid needs at least two points");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!(grid[i + 1] > grid[i]))
      throw ArgumentError("time grid is not strictly increasing at index " + std::to_string(i + 1));
  }
}

std::vector<double> uniform_grid(double t0, double t1, int n) {
  if (n < 1 || !(t1 > t0)) throw ArgumentError("uniform_grid: need n >= 1 and t1 > t0");
  std::vector<double> g(n + 1);
  for (int k = 0; k <= n; ++k) g[k] = t0 + (t1 - t0) * k / n;
  g[n] = t1;
  return g;
}

NoiseIncrementStream sample_stream(const StableNoiseSpec& spec, std::span<const double> grid,
                                   std::uint64_t seed, std::uint64_t substream) {
  spec.validate();
  validate_grid(grid);
  NoiseIncrementStream s{spec, {grid.begin(), grid.end()}, seed, substream, {}};
  s.increments.reserve(grid.size() - 1);
  Rng rng(seed, substream);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    s.increments.push_back(sample_increment(spec, grid[k + 1] - grid[k], rng));
  return s;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  KsResult r;
  r.statistic = d;
  r.critical_1pct = 1.628 * std::sqrt((n + m) / (n * m));
  r.pass = d < r.critical_1pct;
  return r;
}

KsResult self_similarity_test(const StableNoiseSpec& spec, double dt, int n, std::uint64_t seed) {
  if (n < 1 || !(dt > 0.0)) throw ArgumentError("self_similarity_test: need n >= 1 and dt > 0");
  Rng r1(seed, 0), r2(seed, 1);
  std::vector<double> a(n), b(n);
  const double s1 = std::pow(dt, -1.0 / spec.alpha);
  const double s2 = std::pow(2.0 * dt, -1.0 / spec.alpha);
  for (int i = 0; i < n; ++i) {
    a[i] = s1 * sample_increment(spec, dt, r1)[0];
    b[i] = s2 * sample_increment(spec, 2.0 * dt, r2)[0];
  }
  return ks_two_sample(std::move(a), std::move(b));
}

}  // namespace krbn
