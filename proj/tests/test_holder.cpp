#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "krbn/errors.hpp"
#include "krbn/holder.hpp"

using namespace krbn;

TEST_CASE("Zygmund seminorm of simple functions") {
  const auto lin = GridFunction1D::sample([](double x) { return x; }, -1.0, 1.0, 201);
  constexpr auto classical = ZygmundConvention::Classical;
  CHECK(zygmund_seminorm(lin, 1.0, classical).seminorm <= 1e-12);
  CHECK(zygmund_seminorm(lin, 1.0).seminorm == Catch::Approx(1.0));

  const auto absx = GridFunction1D::sample([](double x) { return std::fabs(x); }, -1.0, 1.0, 201);
  const ZygmundResult r = zygmund_seminorm(absx, 1.0, classical);
  CHECK(r.order == 2);
  CHECK(r.seminorm == Catch::Approx(2.0));
  CHECK(r.witness_x == Catch::Approx(-r.witness_h));
  CHECK(r.sup == Catch::Approx(1.0));
  CHECK(r.norm == Catch::Approx(3.0));

  const auto sq = GridFunction1D::sample([](double x) { return x * x; }, -1.0, 1.0, 201);
  CHECK(zygmund_seminorm(sq, 2.0).seminorm == Catch::Approx(2.0));
}

TEST_CASE("difference order conventions") {
  CHECK(zygmund_order(0.5) == 1);
  CHECK(zygmund_order(1.0) == 1);
  CHECK(zygmund_order(1.0, ZygmundConvention::Classical) == 2);
  CHECK(zygmund_order(2.0) == 2);
  CHECK(zygmund_order(2.5) == 3);
}

TEST_CASE("grid too small for the difference order") {
  const auto f = GridFunction1D::sample([](double x) { return x; }, 0.0, 1.0, 2);
  CHECK_THROWS_AS(zygmund_seminorm(f, 2.5), ArgumentError);
}

TEST_CASE("seminorm scales exactly and grows with the step set") {
  const auto f = GridFunction1D::sample([](double x) { return std::sin(3 * x) + std::sqrt(std::fabs(x)); }, -1.0, 1.0, 161);
  GridFunction1D g = f;
  for (double& v : g.values) v *= -2.5;
  for (double beta : {0.5, 1.0, 1.5}) {
    CHECK(zygmund_seminorm(g, beta).seminorm == Catch::Approx(2.5 * zygmund_seminorm(f, beta).seminorm).epsilon(1e-14));
    double prev = 0.0;
    for (int s : {1, 2, 5, 20, 0}) {
      const double v = zygmund_seminorm(f, beta, ZygmundConvention::StrictFloor, s).seminorm;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("two-dimensional marginal norms") {
  const auto f = GridFunction2D::sample([](double x, double y) { return x * x + std::fabs(y); }, -1, 1, -1, 1, 0.05);
  CHECK(zygmund_seminorm(f, 2.0, 0).seminorm == Catch::Approx(2.0));
  CHECK(zygmund_seminorm(f, 1.0, 1, ZygmundConvention::Classical).seminorm == Catch::Approx(2.0));
  CHECK(zygmund_seminorm(f, 1.0, 1).seminorm == Catch::Approx(1.0));
}

TEST_CASE("interpolation inequality") {
  const std::vector<double> deltas = {0.5, 0.25, 0.125};
  const auto zero = GridFunction1D::sample([](double) { return 0.0; }, -1.0, 1.0, 101);
  CHECK(check_interpolation(zero, 0.0, 1.0, 2.0, deltas).c_max == 0.0);

  const auto s = GridFunction1D::sample([](double x) { return std::sin(x); }, -3.0, 3.0, 301);
  const InterpolationReport r = check_interpolation(s, 0.0, 1.0, 2.0, deltas);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.c_max <= 10.0);
  for (const auto& row : r.rows)
    CHECK(row.lhs <= row.delta * row.norm_t + row.c_min * std::pow(row.delta, -1.0) * row.norm_s + 1e-12);

  const auto aff = GridFunction1D::sample([](double x) { return 2 * x - 1; }, -1.0, 1.0, 101);
  for (const auto& row : check_interpolation(aff, 0.0, 1.5, 2.0, deltas).rows)
    CHECK(row.lhs <= row.delta * row.norm_t + row.c_min * std::pow(row.delta, -3.0) * row.norm_s + 1e-12);

  CHECK_THROWS_AS(check_interpolation(s, 1.0, 0.5, 2.0, deltas), ArgumentError);
  CHECK_THROWS_AS(check_interpolation(s, 0.0, 1.0, 2.0, std::vector<double>{1.5}), ArgumentError);
}
