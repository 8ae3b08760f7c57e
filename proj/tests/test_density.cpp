#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "krbn/density.hpp"
#include "krbn/errors.hpp"
#include "krbn/quadrature.hpp"

using namespace krbn;

namespace {

const StableNoiseSpec kBm = StableNoiseSpec::make(2.0, 1);

Ensemble free_ensemble(double s, std::size_t paths, double v0 = 0.0, double x0 = 0.0) {
  const auto spec = SystemSpec::standard(kBm, DriftModel::zero());
  const auto field = make_drift_field(spec.drift, 0.0);
  EnsembleOptions eo;
  eo.paths = paths;
  eo.seed = 17;
  eo.snapshot_times = {s};
  return simulate_ensemble(spec, *field, State{scalar_vec(v0), scalar_vec(x0)}, uniform_grid(0.0, s, 40), eo);
}

}  // namespace

TEST_CASE("kinetic Gaussian kernel") {
  const GaussianKernel k{2.0, 1};
  const double t = 0.5;
  CHECK(eval_g_lambda(k, t, scalar_vec(0.0), scalar_vec(0.0)) ==
        Catch::Approx(1.0 / (2 * std::numbers::pi * 2.0 * t * t)));
  CHECK(eval_g_lambda(k, t, scalar_vec(0.3), scalar_vec(-0.1)) == eval_g_lambda(k, t, scalar_vec(-0.3), scalar_vec(0.1)));
  const double mass = integrate_gk15(
                          [&](double v) {
                            return integrate_gk15(
                                       [&](double x) { return eval_g_lambda(k, t, scalar_vec(v), scalar_vec(x)); }, -6.0,
                                       6.0)
                                .value;
                          },
                          -12.0, 12.0)
                          .value;
  CHECK(std::fabs(mass - 1.0) <= 1e-8);
  for (double tt : {0.25, 2.0, 3.7}) {
    const double v = 0.4, x = -0.7;
    CHECK(eval_g_lambda(k, tt, scalar_vec(std::sqrt(tt) * v), scalar_vec(std::pow(tt, 1.5) * x)) ==
          Catch::Approx(std::pow(tt, -2.0) * eval_g_lambda(k, 1.0, scalar_vec(v), scalar_vec(x))).epsilon(1e-13));
  }
  const GaussianKernel k2{1.0, 2};
  CHECK(eval_g_lambda(k2, 1.0, Vec::Zero(2), Vec::Zero(2)) == Catch::Approx(1.0 / std::pow(2 * std::numbers::pi, 2)));
  CHECK_THROWS_AS(eval_g_lambda(k, 0.0, scalar_vec(0.0), scalar_vec(0.0)), DomainError);
  CHECK_THROWS_AS((GaussianKernel{0.0, 1}.validate()), ParameterError);
}

TEST_CASE("KDE of identical samples is a unit spike") {
  const std::vector<double> xs(500, 0.3);
  const KdeResult r = kde_marginal(xs);
  CHECK(r.mass == Catch::Approx(1.0).margin(1e-3));
  CHECK(r.mode == Catch::Approx(0.3).margin(r.spacing));
  CHECK(r.bandwidth > 0.0);
  CHECK_THROWS_AS(kde_marginal(std::vector<double>(50, 1.0)), StatisticalError);
}

TEST_CASE("KDE of integrated Brownian motion") {
  const double s = 1.0, v0 = 0.5, x0 = -0.2;
  const Ensemble e = free_ensemble(s, 100000, v0, x0);
  const KdeResult r = kde_marginal(e, s);
  CHECK(r.mass >= 0.99);
  CHECK(r.mass <= 1.0);
  CHECK(r.covered_fraction >= 0.999);
  const double var = s * s * s / 3;
  double gap = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < r.xs.size(); ++i) {
    const double exact = gaussian_density(var, r.xs[i] - x0 - v0 * s);
    gap = std::max(gap, std::fabs(r.density[i] - exact));
    peak = std::max(peak, exact);
  }
  CHECK(gap <= 0.05 * peak);
}

TEST_CASE("window covering too little is rejected") {
  const Ensemble e = free_ensemble(1.0, 2000);
  KdeOptions o;
  o.window = std::pair{0.0, 0.1};
  CHECK_THROWS_AS(kde_marginal(e, 1.0, 0, o), WindowError);
}

TEST_CASE("Gaussian envelope for the exact case") {
  const double s = 1.0;
  const Ensemble e = free_ensemble(s, 100000);
  const auto spec = SystemSpec::standard(kBm, DriftModel::zero());
  const EnvelopeResult r =
      envelope_check(e, spec, 0.1, 0.0, s, scalar_vec(0.0), scalar_vec(0.0), lambda_log_grid(1.0 / 3.0));
  CHECK(r.c_fit >= 1.0);
  CHECK(r.c_fit <= 1.3);
  CHECK(r.lambda_star == Catch::Approx(1.0 / 3.0).epsilon(0.2));
  CHECK(r.mode_gap <= r.bandwidth);
  for (const auto& row : r.rows) CHECK(row.kde <= row.envelope * (1 + 1e-12));
  CHECK_THROWS_AS(
      envelope_check(e, spec, 0.1, s, s, scalar_vec(0.0), scalar_vec(0.0), lambda_log_grid(1.0 / 3.0)),
      ArgumentError);
}

TEST_CASE("envelope center follows the regularized flow") {
  const auto spec = SystemSpec::standard(kBm, DriftModel::peano(0.5));
  const auto field = make_drift_field(spec.drift, 0.05, FieldMode::Tabulated);
  EnsembleOptions eo;
  eo.paths = 20000;
  eo.snapshot_times = {1.0};
  const State x0{scalar_vec(1.0), scalar_vec(0.5)};
  const Ensemble e = simulate_ensemble(spec, *field, x0, uniform_grid(0.0, 1.0, 100), eo);
  const EnvelopeResult r = envelope_check(e, spec, 0.05, 0.0, 1.0, x0.v, x0.x, lambda_log_grid(1.0 / 3.0));
  CHECK(r.center == Catch::Approx(flow_theta(spec, 0.05, 0.0, 1.0, x0.v, x0.x).x[0]));
  CHECK(r.mode_gap <= r.bandwidth + 0.05);
  CHECK(r.per_lambda.size() == 25);
}
