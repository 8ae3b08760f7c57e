#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "krbn/parallel.hpp"
#include "krbn/rng.hpp"

using namespace krbn;

TEST_CASE("substreams are addressed by index") {
  Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  const auto x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
  CHECK(x != d.next());
}

TEST_CASE("copying a stream forks it") {
  Rng a(1, 3);
  a.next();
  Rng b = a;
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("uniform draws stay in the open unit interval") {
  Rng r(9);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("normal and exponential moments") {
  Rng r(5);
  const int n = 200000;
  std::vector<double> z(n), e(n), z2(n);
  for (int i = 0; i < n; ++i) {
    z[i] = r.normal();
    z2[i] = z[i] * z[i];
    e[i] = r.exponential();
  }
  const MeanStat mz = mean_stat(z), m2 = mean_stat(z2), me = mean_stat(e);
  CHECK(std::fabs(mz.mean) < 3 * mz.std_error);
  CHECK(std::fabs(m2.mean - 1.0) < 3 * m2.std_error);
  CHECK(std::fabs(me.mean - 1.0) < 3 * me.std_error);
}

TEST_CASE("parallel_for output does not depend on the worker count") {
  auto run = [](unsigned workers) {
    std::vector<double> out(1000);
    parallel_for(out.size(), workers, [&](std::size_t i) {
      Rng r(77, i);
      out[i] = r.normal();
    });
    return out;
  };
  const auto one = run(1);
  CHECK(one == run(3));
  CHECK(one == run(8));
}

TEST_CASE("parallel_for rethrows worker exceptions") {
  CHECK_THROWS_AS(parallel_for(10, 4,
                               [](std::size_t i) {
                                 if (i == 6) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("pairwise summation is exact on representable sums") {
  std::vector<double> xs(1 << 12, 0.125);
  CHECK(pairwise_sum(xs) == 512.0);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  const MeanStat m = mean_stat(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.variance == Catch::Approx(5.0 / 3.0));
}
