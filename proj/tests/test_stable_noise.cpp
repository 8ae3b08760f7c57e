#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "krbn/errors.hpp"
#include "krbn/parallel.hpp"
#include "krbn/stable_noise.hpp"

using namespace krbn;

namespace {

std::vector<Vec> draws(const StableNoiseSpec& s, double dt, int n, std::uint64_t seed) {
  std::vector<Vec> out;
  out.reserve(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) out.push_back(sample_increment(s, dt, rng));
  return out;
}

}  // namespace

TEST_CASE("zero-length interval gives the zero vector") {
  Rng rng(1);
  for (double a : {1.3, 2.0})
    for (int d : {1, 3}) CHECK(sample_increment(StableNoiseSpec::make(a, d), 0.0, rng).isZero(0.0));
}

TEST_CASE("Brownian increments have variance dt") {
  const auto xs = draws(StableNoiseSpec::make(2.0, 1), 0.5, 100000, 2);
  std::vector<double> sq;
  for (const auto& x : xs) sq.push_back(x[0] * x[0]);
  const MeanStat m = mean_stat(sq);
  CHECK(std::fabs(m.mean - 0.5) <= 3 * m.std_error);
}

TEST_CASE("characteristic function of the 1-d sampler") {
  struct Case {
    double alpha, dt, xi;
  };
  for (Case c : {Case{1.5, 1.0, 1.0}, Case{1.2, 1.0, 2.0}, Case{1.8, 0.3, 1.5}}) {
    const auto spec = StableNoiseSpec::make(c.alpha, 1);
    const auto xs = draws(spec, c.dt, 100000, 3);
    const CfEstimate e = empirical_cf_full(xs, scalar_vec(c.xi));
    const double exact = std::exp(-c.dt * std::pow(c.xi, c.alpha));
    INFO("alpha " << c.alpha << " xi " << c.xi);
    CHECK(exact == Catch::Approx(exact_cf(spec, c.dt, scalar_vec(c.xi))));
    CHECK(std::fabs(e.re - exact) <= 3 * e.re_se);
    CHECK(std::fabs(e.im) <= 3 * e.im_se);
  }
  CHECK(std::exp(-std::pow(2.0, 1.2)) == Catch::Approx(0.10052).epsilon(1e-4));
}

TEST_CASE("isotropic sampler in two dimensions") {
  const auto spec = StableNoiseSpec::make(1.5, 2);
  const auto xs = draws(spec, 1.0, 100000, 4);
  for (double ang : {0.0, 0.7, 2.0}) {
    Vec xi(2);
    xi << std::cos(ang), std::sin(ang);
    const CfEstimate e = empirical_cf_full(xs, xi);
    CHECK(std::fabs(e.re - std::exp(-1.0)) <= 3 * e.re_se);
    CHECK(std::fabs(e.im) <= 3 * e.im_se);
  }
}

TEST_CASE("empirical_cf edge cases") {
  const auto xs = draws(StableNoiseSpec::make(1.4, 2), 1.0, 100, 5);
  CHECK(empirical_cf(xs, Vec::Zero(2)) == 1.0);
  const std::vector<Vec> zero(10, Vec::Zero(1));
  CHECK(empirical_cf(zero, scalar_vec(3.0)) == 1.0);
  CHECK_THROWS_AS(empirical_cf(std::vector<Vec>{}, scalar_vec(1.0)), ArgumentError);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(StableNoiseSpec::make(1.0, 1).validate(), ParameterError);
  CHECK_THROWS_AS(StableNoiseSpec::make(2.5, 1).validate(), ParameterError);
  StableNoiseSpec s = StableNoiseSpec::make(1.5, 1);
  s.convention_constant = 0.0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  CHECK(kernel_convention_constant(3, 2.0) == 1.0);
  CHECK(kernel_convention_constant(1, 1.5) > 0.0);
}

TEST_CASE("streams are deterministic and sized by the grid") {
  const auto spec = StableNoiseSpec::make(1.5, 2);
  const auto grid = uniform_grid(0.0, 1.0, 50);
  const auto a = sample_stream(spec, grid, 99, 4);
  const auto b = sample_stream(spec, grid, 99, 4);
  REQUIRE(a.increments.size() == 50);
  for (std::size_t i = 0; i < 50; ++i) CHECK((a.increments[i].array() == b.increments[i].array()).all());
  CHECK(sample_stream(spec, std::vector<double>{0.0, 0.3}, 1).increments.size() == 1);
  CHECK_THROWS_AS(sample_stream(spec, std::vector<double>{0.0, 0.5, 0.4}, 1), ArgumentError);
  CHECK_THROWS_AS(sample_stream(spec, std::vector<double>{0.0}, 1), ArgumentError);
}

TEST_CASE("self-similarity across alpha") {
  for (double a : {1.2, 1.5, 1.8, 2.0}) {
    const KsResult r = self_similarity_test(StableNoiseSpec::make(a, 1), 0.1, 10000, 6);
    INFO("alpha " << a << " D " << r.statistic << " crit " << r.critical_1pct);
    CHECK(r.pass);
  }
}

TEST_CASE("KS detects a genuine scale mismatch") {
  Rng rng(8);
  const auto spec = StableNoiseSpec::make(1.5, 1);
  std::vector<double> a, b;
  for (int i = 0; i < 10000; ++i) {
    a.push_back(sample_increment(spec, 1.0, rng)[0]);
    b.push_back(sample_increment(spec, 2.0, rng)[0]);  // not rescaled
  }
  CHECK_FALSE(ks_two_sample(a, b).pass);
}
