#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "krbn/errors.hpp"
#include "krbn/pea.hpp"

using namespace krbn;

namespace {

PeaProbe decay_probe(double beta, std::vector<double> thetas = {0.0}) {
  PeaProbe p;
  p.model = DriftModel::peano(beta);
  p.eps_list = {1e-8};
  for (double d : {0.01, 0.0316227766016838, 0.1, 0.316227766016838, 1.0}) p.time_pairs.push_back({0.0, d});
  for (double th : thetas) p.theta_grid.push_back(scalar_vec(th));
  return p;
}

}  // namespace

TEST_CASE("constant and affine drifts") {
  PeaProbe p;
  p.model = DriftModel::constant(scalar_vec(2.0));
  CHECK(pea_integral(p, 0.1, 0.0, 1.0, scalar_vec(0.3)).value == Catch::Approx(0.0).margin(1e-12));
  Mat a(1, 1);
  a << -2.5;
  p.model = DriftModel::lipschitz(a, scalar_vec(1.0));
  for (double s : {0.1, 0.5, 1.0})
    for (double th : {-1.0, 0.0, 3.0}) {
      const double v = pea_integral(p, 0.1, 0.0, s, scalar_vec(th)).value;
      CHECK(v <= 2.5 + 1e-8);
      CHECK(v == Catch::Approx(2.5).epsilon(1e-6));
    }
}

TEST_CASE("the Gaussian weight integrates to one") {
  PeaBudget b;
  for (int d : {1, 2}) {
    Vec th = Vec::Constant(d, 0.3);
    const PeaValue v = gaussian_weighted_integral([](const Vec&) { return 1.0; }, d, 0.02, th, b);
    CHECK(std::fabs(v.value - 1.0) <= 1e-6);
  }
  b.mc_samples = 4000;
  const PeaValue v3 = gaussian_weighted_integral([](const Vec&) { return 1.0; }, 3, 0.5, Vec::Zero(3), b);
  CHECK(v3.value == Catch::Approx(1.0));
}

TEST_CASE("Peano decay exponents") {
  struct Case {
    double beta, expect;
  };
  for (Case c : {Case{0.5, -0.75}, Case{1.0, 0.0}, Case{0.4, -0.9}, Case{0.75, -0.375}}) {
    const auto fits = fit_decay_exponent(decay_probe(c.beta));
    REQUIRE(fits.size() == 1);
    INFO("beta " << c.beta << " slope " << fits[0].slope);
    CHECK(fits[0].slope == Catch::Approx(c.expect).margin(0.05));
    CHECK(fits[0].ci_lo <= fits[0].slope);
    CHECK(fits[0].ci_hi >= fits[0].slope);
  }
}

TEST_CASE("sup over theta is carried by the singular point") {
  const auto fits = fit_decay_exponent(decay_probe(0.5, {0.0, 0.05, -0.2, 0.5}));
  CHECK(fits[0].slope == Catch::Approx(-0.75).margin(0.05));
  REQUIRE(fits[0].theta_slopes.size() == 4);
  CHECK(fits[0].theta_slopes[0] == Catch::Approx(-0.75).margin(0.05));
  // Away from the singularity the kernel eventually sees a smooth drift and the decay flattens.
  for (std::size_t k = 1; k < 4; ++k) CHECK(fits[0].theta_slopes[k] > fits[0].theta_slopes[0]);
}

TEST_CASE("decay fit preconditions") {
  PeaProbe p = decay_probe(0.5);
  p.time_pairs.resize(3);
  CHECK_THROWS_AS(fit_decay_exponent(p), ArgumentError);
  p = decay_probe(0.5);
  p.time_pairs = {{0.0, 0.1}, {0.0, 0.2}, {0.0, 0.3}, {0.0, 0.4}};
  CHECK_THROWS_AS(fit_decay_exponent(p), ArgumentError);
  CHECK_THROWS_AS(pea_integral(decay_probe(0.5), 0.1, 1.0, 1.0, scalar_vec(0.0)), ArgumentError);
}

TEST_CASE("eps-uniformity of the Peano integral") {
  for (double beta : {0.4, 0.5, 0.75}) {
    PeaProbe p;
    p.model = DriftModel::peano(beta);
    double lo = 1e300, hi = 0.0;
    for (double e : {0.1, 0.05, 0.025}) {
      const double v = pea_integral(p, e, 0.0, 1.0, scalar_vec(1.0)).value;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    INFO("beta " << beta);
    CHECK((hi - lo) / lo < 0.1);
  }
}

TEST_CASE("Monte Carlo route in three dimensions") {
  PeaProbe p;
  p.model = DriftModel::peano(0.5, 1.0, 3);
  p.budget.mc_samples = 5000;
  const PeaValue v = pea_integral(p, 0.1, 0.0, 0.5, Vec::Zero(3));
  CHECK(v.value > 0.0);
  CHECK(v.std_error > 0.0);
  CHECK(v.std_error < 0.1 * v.value);
}

TEST_CASE("rho interval arithmetic") {
  const RhoInterval a = rho_interval(1, 0.5);
  CHECK(a.lo == 1.0);
  CHECK(a.hi == 2.0);
  CHECK(a.nonempty);
  CHECK(a.contains(1.5));
  const RhoInterval b = rho_interval(1, 1.0 / 3.0);
  CHECK(b.lo == Catch::Approx(1.5));
  CHECK(b.hi == Catch::Approx(1.5));
  const RhoInterval c = rho_interval(2, 1.0);
  CHECK(c.lo == 1.0);
  CHECK(std::isinf(c.hi));
  CHECK(c.nonempty);
  for (int k = 1; k <= 50; ++k) {
    const double beta = k / 50.0;
    CHECK(rho_interval(1, beta).nonempty == (beta > 1.0 / 3.0));
  }
  CHECK_THROWS_AS(rho_interval(1, 0.0), ArgumentError);
  CHECK_THROWS_AS(rho_interval(0, 0.5), ArgumentError);
}

TEST_CASE("exact rational rho interval") {
  const RhoIntervalExact t = rho_interval_exact(1, Rational(1, 3));
  CHECK(t.lo == Rational(3, 2));
  REQUIRE(t.hi.has_value());
  CHECK(*t.hi == Rational(3, 2));
  CHECK_FALSE(t.nonempty);
  const RhoIntervalExact h = rho_interval_exact(1, Rational(2, 4));
  CHECK(h.lo == Rational(1));
  CHECK(*h.hi == Rational(2));
  CHECK(h.nonempty);
  CHECK_FALSE(rho_interval_exact(2, Rational(1)).hi.has_value());
  CHECK(Rational(6, -4) == Rational(-3, 2));
}

TEST_CASE("harmonic partial sums") {
  CHECK(accumulating_partial_sums(0.5, 1).back() == 1.0);
  const auto h = accumulating_partial_sums(0.5, 10000);
  REQUIRE(h.size() == 10000);
  CHECK(h.back() == Catch::Approx(9.79).margin(0.01));
  CHECK(h.back() == Catch::Approx(std::log(10000.0) + 0.5772156649).margin(1e-4));
}

TEST_CASE("counterexample integral grows under eps-halving") {
  const CounterexampleReport r = counterexample_divergence(0.5, 100);
  REQUIRE(r.ratios.size() == 6);
  for (double q : r.ratios) CHECK(q >= 1.2);
  CHECK(r.theta == Catch::Approx(DriftModel::accumulating(0.5).as<Accumulating>()->anchors.back() - 0.2));
}

TEST_CASE("pea table rows") {
  PeaProbe p = decay_probe(0.5);
  p.eps_list = {0.1, 0.05};
  p.time_pairs = {{0.0, 0.5}, {0.2, 1.0}};
  const auto rows = pea_table(p);
  CHECK(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.model == "peano");
}
