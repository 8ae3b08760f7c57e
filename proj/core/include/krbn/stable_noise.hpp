#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "krbn/linalg.hpp"
#include "krbn/rng.hpp"

namespace krbn {

// Driving noise: isotropic symmetric alpha-stable process in R^d.
//
// The sampler uses E exp(i<xi, L_t>) = exp(-t |xi|^alpha) for alpha < 2 and
// standard Brownian motion for alpha = 2. The generator written with the
// un-normalized jump kernel (1/2) |w|^{-d-alpha} corresponds to the process
// c * L with c = convention_constant; the constant is metadata only and is
// absorbed into sigma by callers that care.
struct StableNoiseSpec {
  double alpha = 2.0;
  int dim = 1;
  double convention_constant = 1.0;

  // Spec with convention_constant set from kernel_convention_constant.
  static StableNoiseSpec make(double alpha, int dim);
  // Throws ParameterError unless 1 < alpha <= 2, 1 <= dim <= kMaxDim, c > 0.
  void validate() const;
};

// c_{d,alpha} = A^{1/alpha} with
//   A = pi^{d/2} |Gamma(-alpha/2)| / (2^alpha Gamma((d+alpha)/2)),
// the symbol of the un-normalized kernel. Returns 1 for alpha = 2.
double kernel_convention_constant(int dim, double alpha);

// Positive a-stable variable, 0 < a < 1, with E exp(-s S) = exp(-s^a)
// (Kanter's representation).
double positive_stable(double a, Rng& rng);

// One increment over an interval of length dt >= 0.
// d = 1, alpha < 2: Chambers-Mallows-Stuck. d >= 2, alpha < 2: sqrt(A) G with
// G ~ N(0, 2 I) and A = dt^{2/alpha} S, S positive (alpha/2)-stable.
Vec sample_increment(const StableNoiseSpec& spec, double dt, Rng& rng);

struct CfEstimate {
  double re = 1.0;
  double im = 0.0;
  double re_se = 0.0;
  double im_se = 0.0;
};

// E exp(i<xi, L_t>): exp(-t |xi|^alpha) for alpha < 2, exp(-t |xi|^2 / 2) for
// the Brownian case.
double exact_cf(const StableNoiseSpec& spec, double t, const Vec& xi);

// Mean of cos(<xi, X>) and sin(<xi, X>) with standard errors.
CfEstimate empirical_cf_full(std::span<const Vec> samples, const Vec& xi);
// Real part only (the law is symmetric).
double empirical_cf(std::span<const Vec> samples, const Vec& xi);

struct NoiseIncrementStream {
  StableNoiseSpec spec;
  std::vector<double> grid;
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;
  std::vector<Vec> increments;  // one per grid interval
};

// Increments for `grid` drawn from Rng(seed, substream). Throws ArgumentError
// unless the grid is strictly increasing with at least two points.
NoiseIncrementStream sample_stream(const StableNoiseSpec& spec, std::span<const double> grid,
                                   std::uint64_t seed, std::uint64_t substream = 0);

// n+1 equispaced points on [t0, t1].
std::vector<double> uniform_grid(double t0, double t1, int n);
void validate_grid(std::span<const double> grid);

struct KsResult {
  double statistic = 0.0;
  double critical_1pct = 0.0;  // 1.628 sqrt((n+m)/(nm)), asymptotic
  bool pass = false;
};

// Two-sample Kolmogorov-Smirnov test at the 1% level.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Self-similarity check: increments over dt and 2 dt (first coordinate), each
// rescaled by step^{-1/alpha}, compared by ks_two_sample with n draws each.
KsResult self_similarity_test(const StableNoiseSpec& spec, double dt, int n, std::uint64_t seed);

}  // namespace krbn
