#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "krbn/errors.hpp"
#include "krbn/transport.hpp"

using namespace krbn;

namespace {

const StableNoiseSpec kBm = StableNoiseSpec::make(2.0, 1);

FrozenTrajectory brownian_trajectory(std::uint64_t seed, Interpolation mode = Interpolation::Linear) {
  const auto spec = SystemSpec::standard(kBm, DriftModel::peano(0.5));
  const auto grid = uniform_grid(0.0, 1.0, 200);
  return FrozenTrajectory::from_path(simulate(spec, State{scalar_vec(0.0), scalar_vec(0.0)},
                                              sample_stream(kBm, grid, seed), 0.0),
                                     mode);
}

// Trapezoid integral of the linear interpolant of V over [t, tau].
double integral_v(const FrozenTrajectory& tr, double t, double tau) {
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double a = t + (tau - t) * i / n, b = t + (tau - t) * (i + 1) / n;
    acc += 0.5 * (tr.at(a)[0] + tr.at(b)[0]) * (b - a);
  }
  return acc;
}

}  // namespace

TEST_CASE("frozen trajectory interpolation") {
  const FrozenTrajectory lin({0.0, 1.0, 2.0}, {scalar_vec(0.0), scalar_vec(2.0), scalar_vec(-2.0)});
  CHECK(lin.at(0.5)[0] == 1.0);
  CHECK(lin.at(1.5)[0] == 0.0);
  CHECK(lin.at(2.0)[0] == -2.0);
  const FrozenTrajectory con({0.0, 1.0, 2.0}, {scalar_vec(0.0), scalar_vec(2.0), scalar_vec(-2.0)},
                             Interpolation::Constant);
  CHECK(con.at(0.5)[0] == 0.0);
  CHECK(con.at(1.5)[0] == 2.0);
  CHECK_THROWS_AS(FrozenTrajectory({0.0, 1.0}, {scalar_vec(0.0)}), ArgumentError);
  KineticPath bad;
  bad.grid = {0.0, 1.0};
  bad.V = {scalar_vec(0.0), scalar_vec(1.0)};
  bad.X = bad.V;
  bad.truncated = true;
  CHECK_THROWS_AS(FrozenTrajectory::from_path(bad), ArgumentError);
}

TEST_CASE("characteristic without drift") {
  const auto tr = brownian_trajectory(1);
  const CharacteristicResult r = characteristic(DriftModel::zero(), 0.1, tr, 0.2, scalar_vec(0.3), 0.9);
  CHECK(r.end().position[0] == Catch::Approx(0.3 + integral_v(tr, 0.2, 0.9)).margin(1e-7));
  for (const auto& st : r.path) CHECK(st.jacobian(0, 0) == 1.0);
  const CharacteristicResult z = characteristic(DriftModel::peano(0.5), 0.1, tr, 0.4, scalar_vec(0.3), 0.4);
  CHECK(z.end().position[0] == 0.3);
  CHECK(z.end().jacobian(0, 0) == 1.0);
  CHECK_THROWS_AS(characteristic(DriftModel::zero(), 0.0, tr, 0.2, scalar_vec(0.3), 0.9), ParameterError);
  CHECK_THROWS_AS(characteristic(DriftModel::zero(), 0.1, tr, 0.5, scalar_vec(0.3), 0.4), ArgumentError);
  CHECK_THROWS_AS(characteristic(DriftModel::zero(), 0.1, tr, 0.5, scalar_vec(0.3), 1.5), ArgumentError);
}

TEST_CASE("jacobian against finite differences of the position map") {
  const auto tr = brownian_trajectory(2);
  const CharacteristicSolver sol(make_drift_field(DriftModel::peano(0.5), 0.1), tr);
  const double h = 1e-4;
  for (double x : {-0.6, -0.05, 0.0, 0.2, 1.1})
    for (double t : {0.0, 0.33}) {
      const double fd = (sol.characteristic(t, scalar_vec(x + h), 1.0).end().position[0] -
                         sol.characteristic(t, scalar_vec(x - h), 1.0).end().position[0]) /
                        (2 * h);
      CHECK(std::fabs(fd - sol.characteristic(t, scalar_vec(x), 1.0).end().jacobian(0, 0)) <= 1e-6);
    }
}

TEST_CASE("transport solution") {
  const auto tr = brownian_trajectory(3);
  CHECK(u_eps(DriftModel::peano(0.5), 0.1, tr, 0.7, scalar_vec(0.2), 0.7)[0] == 0.0);
  for (double x : {-2.0, 0.0, 5.0}) CHECK(u_eps(DriftModel::peano(0.5), 0.1, tr, 1.0, scalar_vec(x), 1.0)[0] == 0.0);
  const auto c = DriftModel::constant(scalar_vec(1.75));
  CHECK(u_eps(c, 0.1, tr, 0.25, scalar_vec(0.4), 0.9)[0] == Catch::Approx(-1.75 * 0.65).epsilon(1e-12));

  const CharacteristicSolver sol(make_drift_field(DriftModel::peano(0.5), 0.05), tr);
  for (double t : {0.1, 0.2, 0.2025, 0.5, 0.77})
    for (double x : {-0.4, 0.0, 0.1, 0.5}) CHECK(sol.transport_residual(t, scalar_vec(x), 0.9) <= 1e-4);
}

TEST_CASE("gradient identity and Gronwall bound") {
  const auto tr = brownian_trajectory(4);
  const GradIdentityReport r = grad_identity_check(DriftModel::peano(0.5), 0.05, tr, 0.0, scalar_vec(0.5), 0.9);
  CHECK(r.max_gap <= 1e-4);
  CHECK(r.identity_ok);
  CHECK(r.gronwall_ok);

  const GradIdentityReport z = grad_identity_check(DriftModel::zero(), 0.05, tr, 0.0, scalar_vec(0.5), 0.9);
  CHECK(z.grad_fd(0, 0) == Catch::Approx(0.0).margin(1e-9));
  CHECK(z.identity_form(0, 0) == 0.0);
  CHECK(z.jacobian_norm == 1.0);
  CHECK(z.gronwall_bound == 1.0);

  const double L = 1.3;
  Mat a(1, 1);
  a << L;
  const GradIdentityReport l =
      grad_identity_check(DriftModel::lipschitz(a, scalar_vec(0.2)), 0.05, tr, 0.1, scalar_vec(0.5), 0.9);
  CHECK(l.jacobian_norm == Catch::Approx(std::exp(L * 0.8)).epsilon(1e-10));
  CHECK(l.gronwall_bound == Catch::Approx(std::exp(L * 0.8)).epsilon(1e-10));

  const CharacteristicSolver sol(make_drift_field(DriftModel::peano(0.5), 0.05), tr);
  CHECK_THROWS_AS(sol.grad_identity_check(0.0, scalar_vec(0.5), 0.9, 1e-4, 1e-14), CheckFailure);
}

TEST_CASE("flow composition") {
  for (auto mode : {Interpolation::Linear, Interpolation::Constant}) {
    const CharacteristicSolver sol(make_drift_field(DriftModel::peano(0.5), 0.05), brownian_trajectory(5, mode));
    for (double r : {0.3, 0.4025, 0.61}) {
      const auto whole = sol.characteristic(0.1, scalar_vec(-0.2), 0.9);
      const auto a = sol.characteristic(0.1, scalar_vec(-0.2), r);
      const auto b = sol.characteristic(r, a.end().position, 0.9);
      CHECK(std::fabs(whole.end().position[0] - b.end().position[0]) <= 1e-10);
      CHECK(std::fabs(whole.end().jacobian(0, 0) - b.end().jacobian(0, 0) * a.end().jacobian(0, 0)) <= 1e-10);
    }
  }
}

TEST_CASE("gradient moments") {
  const auto spec = SystemSpec::standard(kBm, DriftModel::peano(0.5));
  MomentOptions mo;
  mo.x0 = State{scalar_vec(0.0), scalar_vec(-1.0)};
  const std::vector<double> eps = {0.1, 0.05, 0.025};

  for (const auto& r : grad_moments(spec, eps, 0.0, 0.5, 1.0, 50, 1, mo)) CHECK(r.moment == 1.0);
  const auto zero = SystemSpec::standard(kBm, DriftModel::zero());
  for (const auto& r : grad_moments(zero, eps, 2.0, 0.5, 1.0, 50, 1, mo)) CHECK(r.moment == 0.0);

  const auto rows = grad_moments(spec, eps, 2.0, 0.5, 1.0, 2000, 7, mo);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      CHECK(std::fabs(rows[i].moment - rows[j].moment) <= 2 * std::hypot(rows[i].std_error, rows[j].std_error));
  for (const auto& r : rows) {
    CHECK(r.khasminskii_delta > 0.0);
    CHECK(r.exp_moment >= 1.0);
  }

  const auto stable = SystemSpec::standard(StableNoiseSpec::make(1.5, 1), DriftModel::peano(0.5));
  CHECK_THROWS_AS(grad_moments(stable, eps, 2.0, 0.5, 1.0, 10, 1, mo), UnsupportedError);
  CHECK_THROWS_AS(grad_moments(spec, eps, 2.0, 1.0, 1.0, 10, 1, mo), ArgumentError);
}

TEST_CASE("accumulating drift moments grow as eps shrinks") {
  const auto spec = SystemSpec::standard(kBm, DriftModel::accumulating(0.5));
  MomentOptions mo;
  mo.x0 = State{scalar_vec(0.0), scalar_vec(1.5)};
  const std::vector<double> eps = {0.05, 0.0125};
  const auto rows = grad_moments(spec, eps, 2.0, 0.5, 1.0, 2000, 7, mo);
  CHECK(rows[1].moment - rows[0].moment > 2 * std::hypot(rows[0].std_error, rows[1].std_error));
}
