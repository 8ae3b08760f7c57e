#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace krbn {

// a_n = exp(-n(n+1)), n >= 0. Underflows to 0 near n = 26.
double a_seq(int n);
// ln a_n = -n(n+1), exact for all representable n.
double log_a_seq(int n);

// One member of the approximating sequence phi_n of |x|.
//
// psi(y) = 2 / (3 n y) * h(ln y) with h the unit trapezoid on
// [ln a_n, ln a_{n-1}] (length 2n, ramps of length n/2). Then
// 0 <= psi <= 1 / (n y) and the mass is exactly 1.
// phi(x) = int_0^{|x|} int_0^eta psi(y) dy d eta.
class YwElement {
 public:
  explicit YwElement(int n);  // ArgumentError unless n >= 1

  int n() const { return n_; }
  double a_lo() const { return a_seq(n_); }
  double a_hi() const { return a_seq(n_ - 1); }

  double psi(double y) const;
  // int_0^y psi, closed form; exactly 1 for y >= a_{n-1}.
  double psi_cdf(double y) const;
  // Closed form via integration by parts. Even in x.
  double phi(double x) const;
  double phi_prime(double x) const;   // sign(x) * psi_cdf(|x|)
  double phi_second(double x) const;  // psi(|x|)
  // d_n with phi(x) = |x| - d_n for |x| >= a_{n-1}.
  double tail_offset() const;

 private:
  double cdf_log(double l) const;  // psi_cdf(e^l)
  int n_;
  double lo_, hi_, ramp_, c_;
};

double psi_n(int n, double y);
double psi_cdf(int n, double y);
double phi_n(int n, double x);
// Independent route: adaptive Simpson of psi_cdf in the log variable, with
// the linear tail beyond a_{n-1} added in closed form.
double phi_n_quadrature(int n, double x);
// Adaptive Gauss-Kronrod mass of psi_n in the log variable.
double psi_integral(int n);

// 0 together with +-10^s for 1000 values of s evenly spaced in [-36, 0]: 2001 points.
std::vector<double> yw_default_grid();

struct YwViolation {
  int n = 0;
  std::string property;  // "i", "ii", "iii" or "iv"
  double x = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct YwRow {
  int n = 0;
  bool prop_i = true;
  bool prop_ii = true;
  bool prop_iii = true;
  bool prop_iv = true;
  double max_tail_gap = 0.0;      // max over the grid of |x| - phi_n(x)
  double max_prime = 0.0;         // max |phi_n'|
  std::size_t support_points = 0; // grid points strictly inside (a_n, a_{n-1})
};

struct YwReport {
  std::vector<YwRow> rows;
  std::vector<YwViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Evaluates (i) phi_n >= 0, phi_n(0) = 0; (ii) |phi_n'| <= 1; (iii)
// |phi_n''(x)| = psi_n(|x|) <= 1/(n|x|), zero off (a_n, a_{n-1}); (iv)
// phi_n <= phi_{n+1} <= |x| and |x| - phi_n <= a_{n-1} at every grid point.
YwReport yw_property_report(std::span<const int> n_list, std::span<const double> grid);
// As the report, throwing CheckFailure naming the first witness.
YwReport check_yw_properties(std::span<const int> n_list, std::span<const double> grid);

}  // namespace krbn
