#include "krbn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace krbn {

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t w = std::min<std::size_t>(std::max(workers, 1u), n);
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t lo = n * k / w;
    const std::size_t hi = n * (k + 1) / w;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

double pairwise_sum(std::span<const double> xs) {
  constexpr std::size_t kLeaf = 32;
  if (xs.size() <= kLeaf) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

MeanStat mean_stat(std::span<const double> xs) {
  MeanStat m;
  m.n = xs.size();
  if (m.n == 0) return m;
  m.mean = pairwise_sum(xs) / static_cast<double>(m.n);
  if (m.n < 2) return m;
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - m.mean;
    sq[i] = d * d;
  }
  m.variance = pairwise_sum(sq) / static_cast<double>(m.n - 1);
  m.std_error = std::sqrt(m.variance / static_cast<double>(m.n));
  return m;
}

}  // namespace krbn
