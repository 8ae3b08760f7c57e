#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "krbn/errors.hpp"
#include "krbn/zvonkin.hpp"

using namespace krbn;

namespace {

ResolventProbe peano_probe(std::size_t paths, double lambda = 1.0) {
  ResolventProbe p;
  p.spec = SystemSpec::standard(StableNoiseSpec::make(2.0, 1), DriftModel::peano(0.5));
  p.source = Source::cutoff_drift();
  p.lambda = lambda;
  p.paths = paths;
  p.steps = 50;
  p.seed = 11;
  return p;
}

}  // namespace

TEST_CASE("constant source reproduces the analytic resolvent") {
  for (double lambda : {0.5, 1.0, 4.0}) {
    ResolventProbe p = peano_probe(500, lambda);
    p.source = Source::constant(1.0);
    for (double t : {0.0, 0.3, 0.9}) {
      const UEstimate u = estimate_u(p, t, 0.4, -0.2);
      const double exact = resolvent_constant_source(lambda, p.horizon, t);
      CHECK(std::fabs(u.value - exact) <= std::max(3 * u.std_error, 1e-12));
    }
    CHECK(estimate_u(p, p.horizon, 0.0, 0.0).value == 0.0);
  }
  CHECK(resolvent_constant_source(2.0, 1.0, 1.0) == 0.0);
  CHECK(resolvent_constant_source(2.0, 1.0, 0.0) == Catch::Approx((1 - std::exp(-2.0)) / 2));
}

TEST_CASE("resolvent is bounded by sup f over lambda") {
  const ResolventProbe p = peano_probe(800, 8.0);
  // |F chi_m| <= |x|^{1/2} stays below 2 on the region the paths visit.
  const UEstimate u = estimate_u(p, 0.0, 0.0, 0.5);
  CHECK(std::fabs(u.value) <= 2.0 / p.lambda);
  CHECK(u.std_error > 0.0);
}

TEST_CASE("probe validation") {
  ResolventProbe p = peano_probe(10);
  p.lambda = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = peano_probe(0);
  CHECK_THROWS_AS(estimate_u(p, 0, 0, 0), ArgumentError);
  p = peano_probe(10);
  p.spec = SystemSpec::standard(StableNoiseSpec::make(2.0, 2), DriftModel::zero(2));
  CHECK_THROWS(p.validate());
}

TEST_CASE("doubling schedule") {
  const auto s = doubling_schedule(0.25, 5);
  REQUIRE(s.size() == 5);
  CHECK(s.front() == 0.25);
  CHECK(s.back() == 4.0);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] == 2 * s[i - 1]);
}

TEST_CASE("constant source has vanishing gradients at every lambda") {
  ResolventProbe p = peano_probe(200);
  p.source = Source::constant(1.0);
  const std::vector<ProbePoint> grid{{0.0, 0.0}, {1.0, -0.5}};
  const auto sched = doubling_schedule(0.25, 3);
  const auto rep = gradient_bound_report(p, sched, grid);
  REQUIRE(rep.achieving_lambda.has_value());
  CHECK(*rep.achieving_lambda == 0.25);
  for (const auto& g : rep.points) CHECK(g.sum <= 1e-9);
}

TEST_CASE("gradient search on the Peano source terminates") {
  const ResolventProbe p = peano_probe(1500);
  const std::vector<ProbePoint> grid{{-1.0, -0.5}, {0.0, 0.5}, {1.0, 0.5}};
  const auto rep = check_gradient_bounds(p, doubling_schedule(0.25, 8), grid);
  REQUIRE(rep.achieving_lambda.has_value());
  CHECK(rep.rows.back().within);
  CHECK(rep.infimum <= rep.rows.front().sup_grad);
  CHECK(rep.points.size() == grid.size());
  CHECK(rep.half_step.size() == grid.size());

  GradientBoundOptions tight;
  tight.bound = 1e-6;
  tight.mc_sigmas = 0.0;
  CHECK_THROWS_AS(check_gradient_bounds(p, doubling_schedule(0.25, 2), grid, tight), CheckFailure);
}

TEST_CASE("common random numbers shrink difference variance") {
  const ResolventProbe p = peano_probe(1500);
  for (double x : {-0.5, 0.5}) {
    const CrnComparison c = crn_variance(p, 0.0, 0.0, x, 0.05);
    CHECK(c.var_crn < c.var_independent);
  }
}

TEST_CASE("holder fit of the velocity gradient") {
  std::vector<std::pair<double, double>> pairs;
  for (double d : {0.002, 0.01, 0.05, 0.2}) pairs.push_back({0.0, -d});

  SECTION("x-independent source is flagged") {
    ResolventProbe p = peano_probe(200);
    p.source = Source::constant(1.0);
    const HolderFit f = check_holder_gradient(p, 0.0, 0.0, pairs);
    CHECK(f.inconclusive);
    CHECK_FALSE(f.pass);
  }
  SECTION("separations must span two decades") {
    const ResolventProbe p = peano_probe(50);
    const std::vector<std::pair<double, double>> narrow{{0.0, -0.01}, {0.0, -0.03}, {0.0, -0.1}};
    CHECK_THROWS_AS(check_holder_gradient(p, 0.0, 0.0, narrow), ArgumentError);
  }
  SECTION("Peano source") {
    const ResolventProbe p = peano_probe(4000);
    const HolderFit f = check_holder_gradient(p, 0.0, 0.0, pairs);
    REQUIRE(f.rows.size() == pairs.size());
    if (!f.inconclusive) CHECK(f.exponent >= 0.4);
  }
  SECTION("exponent error follows the square-root law") {
    const HolderFit a = check_holder_gradient(peano_probe(2000), 0.0, 0.0, pairs);
    const HolderFit b = check_holder_gradient(peano_probe(8000), 0.0, 0.0, pairs);
    REQUIRE(a.exponent_se > 0.0);
    const double ratio = b.exponent_se / a.exponent_se;
    INFO("se ratio " << ratio);
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.7);
  }
}

TEST_CASE("phi/h lemma") {
  const ResolventProbe p = peano_probe(1500, 4.0);
  const std::vector<LemmaSample> samples{
      {0.0, 0.0, 0.3, 0.3, 0.5},   // x = x'
      {0.0, 0.5, 0.4, 0.2, 0.0},   // w = 0
      {0.0, 0.0, 0.5, 0.4, 0.5},
  };
  const LemmaReport r = check_phi_h_lemma(p, samples);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].phi == 0.0);
  CHECK(r.rows[0].h == 0.0);
  CHECK(r.rows[1].h == 0.0);
  CHECK(r.rows[1].h_se == 0.0);
  // |x - x'| = 0.1 needs |phi| >= 0.05.
  CHECK(std::fabs(r.rows[2].phi) + 3 * r.rows[2].phi_se >= 0.05);
  CHECK(r.kappa >= 0.0);
}
