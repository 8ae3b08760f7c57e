#pragma once

#include <functional>
#include <span>
#include <vector>

namespace krbn {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Gauss-Legendre rule with n nodes. Computed once per n and cached.
const GaussRule& gauss_legendre(int n);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  long evaluations = 0;
  int intervals = 0;
};

struct AdaptiveOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_intervals = 20000;
};

// Globally adaptive Gauss-Kronrod 7/15 on [a, b]. `breaks` (any order, values
// outside (a, b) ignored) seed the initial partition. Throws NumericError when
// the interval budget is exhausted before the tolerance is met.
QuadResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opt = {}, std::span<const double> breaks = {});

// Recursive adaptive Simpson with Richardson correction. Throws NumericError
// if the recursion depth limit is reached with the local tolerance unmet.
double integrate_simpson(const std::function<double(double)>& f, double a, double b,
                         double tol = 1e-13, int max_depth = 48);

}  // namespace krbn
