#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace krbn {

// Runs fn(i) for i in [0, n) on `workers` threads (0 or 1 means inline).
// Indices are split into contiguous blocks; callers write results into
// index-addressed storage, so output never depends on scheduling.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

// Fixed-order pairwise summation. Result depends only on the input order.
double pairwise_sum(std::span<const double> xs);

struct MeanStat {
  double mean = 0.0;
  double std_error = 0.0;  // standard error of the mean
  double variance = 0.0;   // unbiased sample variance
  std::size_t n = 0;
};

// Mean and spread computed with pairwise sums (two passes).
MeanStat mean_stat(std::span<const double> xs);

}  // namespace krbn
