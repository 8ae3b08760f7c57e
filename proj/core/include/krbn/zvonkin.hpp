#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "krbn/drift.hpp"
#include "krbn/kinetic.hpp"

namespace krbn {

// Source term f(t, v, x) of the resolvent equation. CutoffDrift is F * chi_m
// built from the probe's drift model.
struct Source {
  enum class Kind { Constant, CutoffDrift, Custom };
  Kind kind = Kind::CutoffDrift;
  double value = 1.0;
  int cutoff = 10;
  std::function<double(double t, double v, double x)> custom;
  bool depends_on_x = true;  // false for Constant; set by the caller for Custom

  static Source constant(double c);
  static Source cutoff_drift(int m = 10);
  static Source from_function(std::function<double(double, double, double)> f, bool depends_on_x = true);
};

// u(t, v, x) = E int_t^T e^{-lambda (s - t)} f(s, V_s, X_s) ds along the kinetic
// system started at (t, v, x), estimated by Monte Carlo with the Euler scheme.
struct ResolventProbe {
  SystemSpec spec;
  Source source;
  double lambda = 1.0;
  double horizon = 1.0;
  std::size_t paths = 10000;
  std::size_t steps = 200;  // Euler steps over [0, T]; a start at t uses ceil(steps (T - t) / T)
  std::uint64_t seed = 1;
  unsigned workers = 1;
  double drift_eps = 0.0;  // 0 runs the dynamics with the raw drift
  SimOptions sim;

  // d = 1, lambda > 0, horizon > 0, paths >= 1; ArgumentError or ParameterError.
  void validate() const;
};

struct UEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
};

struct ProbePoint {
  double v = 0.0;
  double x = 0.0;
};

// Per-path discounted functionals for start points sharing one noise path
// each (path j draws from Rng(seed, j) for every point). Paths that trip the
// overflow guard are dropped for all points. Result is [point][path].
std::vector<std::vector<double>> path_functionals(const ResolventProbe& probe, double t,
                                                  std::span<const ProbePoint> points);

UEstimate estimate_u(const ResolventProbe& probe, double t, double v, double x);
// f = 1: (1 - e^{-lambda (T - t)}) / lambda.
double resolvent_constant_source(double lambda, double horizon, double t);

struct GradientEstimate {
  double t = 0.0, v = 0.0, x = 0.0;
  double du_dv = 0.0, du_dv_se = 0.0;
  double du_dx = 0.0, du_dx_se = 0.0;
  double sum = 0.0, sum_se = 0.0;  // |du_dv| + |du_dx| with its standard error
};

// Central differences with common random numbers across the four shifted starts.
GradientEstimate estimate_gradient(const ResolventProbe& probe, double t, double v, double x, double h);

struct LambdaRow {
  double lambda = 0.0;
  double sup_grad = 0.0;  // max over the probe grid of |du_dv| + |du_dx|
  double sup_se = 0.0;
  bool within = false;    // sup_grad <= bound + mc_sigmas * sup_se at every point
};

struct GradientBoundOptions {
  double bound = 0.5;
  double fd_step = 0.02;
  double mc_sigmas = 3.0;
  double t = 0.0;
};

struct GradientBoundReport {
  std::vector<LambdaRow> rows;
  std::optional<double> achieving_lambda;
  double infimum = 0.0;  // smallest sup_grad seen
  std::vector<GradientEstimate> points;       // at the achieving (or last) lambda
  std::vector<GradientEstimate> half_step;    // same points with fd_step / 2
  bool step_halving_consistent = false;
  bool lambda_monotone = false;  // sup_grad nonincreasing within mc_sigmas combined errors
};

// Walks the lambda schedule until the bound holds on the probe grid.
GradientBoundReport gradient_bound_report(const ResolventProbe& probe, std::span<const double> lambda_schedule,
                                          std::span<const ProbePoint> probe_grid,
                                          const GradientBoundOptions& opt = {});
// As the report, throwing CheckFailure with the measured infimum when the schedule is exhausted.
GradientBoundReport check_gradient_bounds(const ResolventProbe& probe, std::span<const double> lambda_schedule,
                                          std::span<const ProbePoint> probe_grid,
                                          const GradientBoundOptions& opt = {});
// lambda0 * 2^k, k = 0..count-1.
std::vector<double> doubling_schedule(double lambda0, int count);

struct HolderRow {
  double x = 0.0, x2 = 0.0;
  double separation = 0.0;
  double diff = 0.0;  // du_dv(x) - du_dv(x2)
  double std_error = 0.0;
  bool resolved = false;  // |diff| > 2 std_error
};

struct HolderFit {
  std::vector<HolderRow> rows;
  double exponent = 0.0;
  double exponent_se = 0.0;
  double intercept = 0.0;
  bool inconclusive = true;  // fewer than 3 resolved separations spanning a decade
  bool pass = false;         // !inconclusive && exponent >= target - tol
};

struct HolderOptions {
  double fd_step = 0.1;
  double target = 0.5;
  double tol = 0.1;
};

// Weighted log-log fit of |du_dv(t,v,x) - du_dv(t,v,x2)| against |x - x2|.
// Requires separations spanning two decades (ArgumentError).
HolderFit check_holder_gradient(const ResolventProbe& probe, double t, double v,
                                std::span<const std::pair<double, double>> x_pairs, const HolderOptions& opt = {});

struct LemmaSample {
  double t = 0.0, v = 0.0, x = 0.0, x2 = 0.0, w = 0.0;
};

struct LemmaRow {
  LemmaSample s;
  double phi = 0.0, phi_se = 0.0;      // x - x2 + u(x) - u(x2)
  double h = 0.0, h_se = 0.0;          // u(v+sw,x) - u(v,x) - u(v+sw,x2) + u(v,x2)
  double kappa_ratio = 0.0;            // |h| / (|w| (1 ^ |x - x2|^{1/2})), 0 when undefined
  bool phi_bound = false;              // |x - x2| <= 2 (|phi| + k se)
  bool phi_h_bound = false;            // |x - x2| <= 2 (|phi + h| + k se)
  bool inconclusive = false;           // k se exceeds half the slack
};

struct LemmaReport {
  std::vector<LemmaRow> rows;
  double kappa = 0.0;  // fitted: max kappa_ratio
  bool pass = false;   // every conclusive row satisfies both bounds
  std::size_t inconclusive = 0;
};

LemmaReport check_phi_h_lemma(const ResolventProbe& probe, std::span<const LemmaSample> samples,
                              double mc_sigmas = 3.0);

struct CrnComparison {
  double var_crn = 0.0;
  double var_independent = 0.0;
};

// Variance of the per-path difference Phi(v, x + h) - Phi(v, x - h) with shared
// versus independent noise (the second point shifted to fresh substreams).
CrnComparison crn_variance(const ResolventProbe& probe, double t, double v, double x, double h);

}  // namespace krbn
