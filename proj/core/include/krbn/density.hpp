#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "krbn/kinetic.hpp"
#include "krbn/linalg.hpp"

namespace krbn {

// g_lambda(t, v, x) = (2 pi lambda)^{-d} t^{-2d} exp(-(|v|^2/t + |x|^2/t^3) / (2 lambda)).
struct GaussianKernel {
  double lambda = 1.0;
  int dim = 1;
  void validate() const;  // throws ParameterError
};

// Throws DomainError for t <= 0.
double eval_g_lambda(const GaussianKernel& k, double t, const Vec& v, const Vec& x);

// Gamma(var, x) = (2 pi var)^{-d/2} exp(-|x|^2 / (2 var)); var > 0.
double gaussian_density(double var, const Vec& x);
double gaussian_density(double var, double x);

struct KdeOptions {
  int points = 512;
  double lo_quantile = 0.0005;
  double hi_quantile = 0.9995;
  double bandwidth = 0.0;        // > 0 overrides the rule (and the floor)
  double bandwidth_scale = 1.0;  // multiplies the rule-of-thumb value
  std::optional<std::pair<double, double>> window;  // overrides the quantile window
  std::size_t min_samples = 100;
};

struct KdeResult {
  std::vector<double> xs;
  std::vector<double> density;
  double bandwidth = 0.0;
  double spacing = 0.0;
  double mass = 0.0;              // trapezoid integral over the window
  double covered_fraction = 0.0;  // share of samples inside the window
  double mode = 0.0;
};

// Gaussian-kernel estimate on an equispaced window. Bandwidth: Silverman's
// rule with a floor of twice the grid spacing; the quantile window is padded
// by four bandwidths. Throws StatisticalError below min_samples and
// WindowError if a user window covers less than 99.9% of the samples.
KdeResult kde_marginal(std::span<const double> samples, const KdeOptions& opt = {});
// X component `comp` of ensemble snapshot at time s.
KdeResult kde_marginal(const Ensemble& ens, double s, int comp = 0, const KdeOptions& opt = {});

struct EnvelopeRow {
  double xi = 0.0;
  double kde = 0.0;
  double envelope = 0.0;  // C_fit * Gamma(lambda_star (s-t)^3, xi - center)
  double ratio = 0.0;     // kde / Gamma
};

struct EnvelopeResult {
  double c_fit = 0.0;
  double lambda_star = 0.0;
  double c_half_bandwidth = 0.0;  // same lambda_star, KDE at half bandwidth
  double center = 0.0;
  double bandwidth = 0.0;
  double mode_gap = 0.0;          // |KDE mode - center|
  std::vector<std::pair<double, double>> per_lambda;  // (lambda, C)
  std::vector<EnvelopeRow> rows;
};

// lambda0 * 2^{k/4}, k = -12..12 (lambda0/8 .. 8 lambda0).
std::vector<double> lambda_log_grid(double lambda0);

// Smallest C with KDE <= C Gamma(lambda (s-t)^3, . - center) over the grid
// points where the KDE exceeds 1e-3 of its peak, minimized over lambda_grid.
// d = 1 samples. Throws ArgumentError unless s > t.
EnvelopeResult envelope_check(std::span<const double> samples, double center, double t, double s,
                              std::span<const double> lambda_grid, const KdeOptions& opt = {});

// Ensemble variant: the center is [theta^(eps)_{s,t}(v, x)]_2 from flow_theta.
EnvelopeResult envelope_check(const Ensemble& ens, const SystemSpec& spec, double eps, double t, double s,
                              const Vec& v, const Vec& x, std::span<const double> lambda_grid,
                              const KdeOptions& opt = {});

}  // namespace krbn
