#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "krbn/drift.hpp"
#include "krbn/errors.hpp"
#include "krbn/rng.hpp"

using namespace krbn;

TEST_CASE("pointwise Peano drift") {
  const auto m = DriftModel::peano(0.5);
  CHECK(eval_F(m, 0.0, scalar_vec(4.0))[0] == 2.0);
  CHECK(eval_F(m, 0.0, scalar_vec(-9.0))[0] == 3.0);
  CHECK(eval_F(m, 0.0, scalar_vec(0.0))[0] == 0.0);
  const auto m2 = DriftModel::peano(0.5, 2.0, 2);
  Vec x(2);
  x << 3.0, 4.0;
  const Vec f = eval_F(m2, 0.3, x);
  CHECK(f[0] == Catch::Approx(2.0 * std::sqrt(5.0)));
  CHECK(f[1] == 0.0);
}

TEST_CASE("accumulating drift vanishes at anchors and peaks at midpoints") {
  const double beta = 0.5;
  const auto m = DriftModel::accumulating(beta, 64);
  const auto& an = m.as<Accumulating>()->anchors;
  for (std::size_t n = 0; n + 1 < an.size(); ++n) {
    CHECK(eval_F(m, 0.0, scalar_vec(an[n]))[0] == 0.0);
    const double mid = 0.5 * (an[n] + an[n + 1]);
    CHECK(eval_F(m, 0.0, scalar_vec(mid))[0] == Catch::Approx(std::pow(0.5 * (an[n + 1] - an[n]), beta)));
  }
  CHECK(eval_F(m, 0.0, scalar_vec(an.front() - 0.5))[0] == 0.0);
  CHECK(an[1] - an[0] == Catch::Approx(1.0));
  CHECK(an[2] - an[1] == Catch::Approx(std::pow(2.0, -1.0 / beta)));
  CHECK_THROWS_AS(DriftModel(Accumulating::standard(0.5), 2), UnsupportedError);
}

TEST_CASE("model invariants are enforced") {
  CHECK_THROWS_AS(DriftModel::peano(0.0), ParameterError);
  CHECK_THROWS_AS(DriftModel::peano(1.5), ParameterError);
  CHECK_THROWS_AS(DriftModel(Accumulating{0.5, {1.0, 0.5, 2.0}}), ParameterError);
  MollifierSpec bad;
  bad.quadrature_order = 1;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = MollifierSpec{};
  bad.eps = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("bump integrates to one") {
  for (int d : {1, 2, 3}) CHECK(std::fabs(bump_mass(d, MollifierSpec{}) - 1.0) <= 1e-10);
}

TEST_CASE("two-dimensional mollification against a doubled-order rule") {
  const auto m = DriftModel::peano(0.5, 1.0, 2);
  MollifierSpec lo, hi;
  lo.eps = hi.eps = 0.1;
  hi.quadrature_order = 64;
  for (double a : {0.05, 0.3, 1.0}) {
    Vec x(2);
    x << a, -0.5 * a;
    CHECK((mollify(m, lo, 0.0, x) - mollify(m, hi, 0.0, x)).cwiseAbs().maxCoeff() <= 1e-3);
  }
}

TEST_CASE("mollifying a constant or affine drift") {
  Vec c(2);
  c << 1.5, -0.25;
  const auto cm = DriftModel::constant(c);
  Mat a(2, 2);
  a << 1.0, 2.0, -0.5, 3.0;
  const auto lm = DriftModel::lipschitz(a, c);
  MollifierSpec moll;
  moll.eps = 0.3;
  Rng rng(1);
  for (int i = 0; i < 5; ++i) {
    Vec x(2);
    x << 4 * rng.uniform() - 2, 4 * rng.uniform() - 2;
    CHECK((mollify(cm, moll, 0.0, x) - c).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(grad_mollified(cm, moll, 0.0, x).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((grad_mollified(lm, moll, 0.0, x) - a).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((mollify(lm, moll, 0.0, x) - (a * x + c)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("mollifier gap obeys the Holder bound and converges at rate beta") {
  const double beta = 0.5;
  const auto m = DriftModel::peano(beta);
  std::vector<double> gaps;
  for (int k = 1; k <= 6; ++k) {
    MollifierSpec moll;
    moll.eps = std::ldexp(1.0, -k);
    double gap = 0.0;
    for (int i = -200; i <= 200; ++i) {
      const double x = i * 0.01;
      gap = std::max(gap, std::fabs(mollify(m, moll, 0.0, scalar_vec(x))[0] - std::sqrt(std::fabs(x))));
    }
    CHECK(gap <= std::pow(moll.bump_radius * moll.eps, beta));
    gaps.push_back(gap);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < gaps[i - 1]);
  const double rate = std::log2(gaps.front() / gaps.back()) / 5.0;
  CHECK(rate == Catch::Approx(beta).margin(0.02));
}

TEST_CASE("mollified Peano gradient away from the singularity") {
  const double beta = 0.5;
  const auto m = DriftModel::peano(beta);
  MollifierSpec moll;
  moll.eps = 0.05;
  double k_fit = 0.0;
  for (double y = 2 * moll.eps; y <= 3.0; y *= 1.15)
    for (double s : {-1.0, 1.0}) {
      const double g = std::fabs(grad_mollified(m, moll, 0.0, scalar_vec(s * y))(0, 0));
      k_fit = std::max(k_fit, g / std::pow(y, beta - 1.0));
    }
  CHECK(k_fit >= beta);
  CHECK(k_fit <= beta * std::pow(2.0, 1.0 - beta));
}

TEST_CASE("gradient matches finite differences of the mollified drift") {
  const double h = 2e-5;
  MollifierSpec moll;
  moll.eps = 0.1;
  for (const auto& model : {DriftModel::peano(0.5), DriftModel::peano(0.75), DriftModel::accumulating(0.5, 32)}) {
    double gap = 0.0;
    for (double x = -1.0; x <= 2.5; x += 0.0625) {
      const double fd =
          (mollify(model, moll, 0.0, scalar_vec(x + h))[0] - mollify(model, moll, 0.0, scalar_vec(x - h))[0]) / (2 * h);
      gap = std::max(gap, std::fabs(fd - grad_mollified(model, moll, 0.0, scalar_vec(x))(0, 0)));
    }
    INFO(model.kind());
    CHECK(gap <= 1e-6);
  }
  const auto m2 = DriftModel::peano(0.5, 1.0, 2);
  Vec x(2);
  x << 0.3, -0.2;
  const Mat j = grad_mollified(m2, moll, 0.0, x);
  for (int c = 0; c < 2; ++c) {
    Vec e = Vec::Zero(2);
    e[c] = h;
    const Vec fd = (mollify(m2, moll, 0.0, x + e) - mollify(m2, moll, 0.0, x - e)) / (2 * h);
    // The tensor rule carries its own ~1e-6 error, so the two routes agree less tightly in d = 2.
    CHECK((fd - j.col(c)).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("cutoff function") {
  for (int m : {1, 3, 10}) {
    CHECK(cutoff_chi(m, static_cast<double>(m)) == 1.0);
    CHECK(cutoff_chi(m, m + 1.5) == 0.0);
    CHECK(cutoff_chi(m, -(m + 1.0)) == 0.0);
    const double mid = cutoff_chi(m, m + 0.5);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    double prev = 1.0;
    for (double r = m; r <= m + 1.0; r += 0.01) {
      const double v = cutoff_chi(m, r);
      CHECK(v <= prev);
      prev = v;
    }
  }
  Vec x(2);
  x << 3.0, 4.0;
  CHECK(cutoff_chi(4, x) == Catch::Approx(cutoff_chi(4, 5.0)));
  CHECK_THROWS_AS(cutoff_chi(0, 0.5), ParameterError);
}

TEST_CASE("Holder quotient of the Peano drift is bounded by its amplitude") {
  const double a = 1.7, beta = 0.5;
  const auto m = DriftModel::peano(beta, a);
  Rng rng(3);
  double q_small = 0.0, q_large = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double x = 4 * rng.uniform() - 2, y = 4 * rng.uniform() - 2;
    if (x == y) continue;
    const double q =
        std::fabs(eval_F(m, 0.0, scalar_vec(x))[0] - eval_F(m, 0.0, scalar_vec(y))[0]) / std::pow(std::fabs(x - y), beta);
    (i < 1000 ? q_small : q_large) = std::max(i < 1000 ? q_small : q_large, q);
  }
  CHECK(q_small <= a + 1e-12);
  CHECK(q_large <= a + 1e-12);
  CHECK(std::max(q_small, q_large) >= 0.9 * a);
  const auto h = m.holder();
  REQUIRE(h.has_value());
  CHECK(h->first == Catch::Approx(a));
  CHECK(h->second == beta);
}

TEST_CASE("tabulated field agrees with direct quadrature") {
  const auto m = DriftModel::peano(0.5);
  const auto direct = make_drift_field(m, 0.05, FieldMode::Direct);
  const auto tab = make_drift_field(m, 0.05, FieldMode::Tabulated);
  double gv = 0.0, gj = 0.0;
  for (double x = -3.0; x <= 3.0; x += 0.0137) {
    gv = std::max(gv, std::fabs(direct->value(0.0, scalar_vec(x))[0] - tab->value(0.0, scalar_vec(x))[0]));
    gj = std::max(gj, std::fabs(direct->jacobian(0.0, scalar_vec(x))(0, 0) - tab->jacobian(0.0, scalar_vec(x))(0, 0)));
  }
  CHECK(gv <= 1e-8);
  CHECK(gj <= 1e-5);
  const auto raw = make_drift_field(m, 0.0);
  CHECK(raw->value(0.0, scalar_vec(0.25))[0] == 0.5);
  CHECK_THROWS_AS(make_drift_field(m, -1.0), ParameterError);
}
