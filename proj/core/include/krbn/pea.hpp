#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "krbn/drift.hpp"
#include "krbn/linalg.hpp"

namespace krbn {

struct PeaBudget {
  double abs_tol = 1e-11;
  double rel_tol = 1e-8;
  int max_intervals = 40000;
  double half_width_sigmas = 10.0;  // integration window theta +- k sigma
  std::size_t mc_samples = 20000;   // d >= 3
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

// Probe of the Gaussian-weighted gradient integral
//   I(eps; t, s, theta) = int |grad F^(eps)(s, y)| Gamma(lambda (s-t)^3, y - theta) dy,
// |.| the operator norm.
struct PeaProbe {
  DriftModel model;
  MollifierSpec moll;  // eps is taken from eps_list
  double lambda = 1.0;
  std::vector<double> eps_list;
  std::vector<std::pair<double, double>> time_pairs;
  std::vector<Vec> theta_grid;
  PeaBudget budget;

  void validate() const;  // throws ParameterError / ArgumentError
};

struct PeaValue {
  double value = 0.0;
  double std_error = 0.0;  // quadrature error estimate (d <= 2) or Monte Carlo standard error
  long evaluations = 0;
};

// Adaptive Gauss-Kronrod (d = 1, nested for d = 2) or importance sampling with
// Gamma as proposal (d >= 3). Throws ArgumentError if s <= t and NumericError
// (with the interval diagnostics) if the quadrature does not converge.
PeaValue pea_integral(const PeaProbe& probe, double eps, double t, double s, const Vec& theta);

// int g(y) Gamma(var, y - theta) dy with the same machinery; `breaks` are
// extra split points for d = 1.
PeaValue gaussian_weighted_integral(const std::function<double(const Vec&)>& g, int dim, double var,
                                    const Vec& theta, const PeaBudget& budget, std::span<const double> breaks = {});

struct DecayFit {
  double eps = 0.0;
  double lambda = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double ci_lo = 0.0;  // slope -+ 2 standard errors
  double ci_hi = 0.0;
  double intercept = 0.0;
  std::vector<double> dt;      // s - t per pair
  std::vector<double> values;  // max over theta per pair
  std::vector<double> theta_slopes;  // slope for each theta separately
};

// Least squares of log(max_theta I) against log(s - t), one fit per eps.
// Needs >= 4 time pairs spanning >= 2 decades (ArgumentError); degenerate
// regressions throw NumericError.
std::vector<DecayFit> fit_decay_exponent(const PeaProbe& probe);

struct PeaRow {
  std::string model;
  double eps, lambda, t, s, theta, integral, std_error;
};

// Every (eps, pair, theta) combination; theta reported by its first component.
std::vector<PeaRow> pea_table(const PeaProbe& probe);

struct RhoInterval {
  double lo = 0.0;
  double hi = 0.0;  // +inf when beta = 1
  bool nonempty = false;
  bool contains(double rho) const { return rho > lo && rho < hi; }
};

// ((3d/2 - 1)/(d + beta - 1), 1/(1 - beta)). Throws DomainError if
// d + beta - 1 <= 0 and ArgumentError outside d >= 1, beta in (0, 1].
RhoInterval rho_interval(int d, double beta);

// Exact rational arithmetic, always in lowest terms with den > 0.
struct Rational {
  long long num = 0;
  long long den = 1;
  Rational() = default;
  Rational(long long n, long long d = 1);
  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct RhoIntervalExact {
  Rational lo;
  std::optional<Rational> hi;  // empty means +inf
  bool nonempty = false;
};

RhoIntervalExact rho_interval_exact(int d, const Rational& beta);

// Partial sums sum_{n <= k} (a_{n+1} - a_n)^beta, k = 1..N, for gaps n^{-1/beta}.
std::vector<double> accumulating_partial_sums(double beta, int N);

struct CounterexampleOptions {
  int anchors = 256;
  double lambda = 0.1;
  double t = 0.0;
  double s = 1.0;
  std::optional<double> theta;  // default: limit of the anchors minus 0.2
  std::vector<double> eps_list; // default 2^-2 .. 2^-8
  MollifierSpec moll;
  PeaBudget budget;
};

struct CounterexampleReport {
  std::vector<double> partial_sums;
  double theta = 0.0;
  std::vector<double> eps;
  std::vector<double> integrals;
  std::vector<double> std_errors;
  std::vector<double> ratios;  // integrals[j+1] / integrals[j]
};

// Harmonic partial sums plus the probe integral of the Accumulating drift
// along the decreasing eps list.
CounterexampleReport counterexample_divergence(double beta, int N, const CounterexampleOptions& opt = {});

}  // namespace krbn
