#include "krbn/yw.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "krbn/errors.hpp"
#include "krbn/quadrature.hpp"

namespace krbn {

double log_a_seq(int n) {
  if (n < 0) throw ArgumentError("a_seq: n must be >= 0");
  return -static_cast<double>(n) * static_cast<double>(n + 1);
}

double a_seq(int n) { return std::exp(log_a_seq(n)); }

YwElement::YwElement(int n) : n_(n) {
  if (n < 1) throw ArgumentError("yw: n must be >= 1");
  lo_ = log_a_seq(n);
  hi_ = log_a_seq(n - 1);
  ramp_ = 0.5 * n;
  c_ = 2.0 / (3.0 * n);
}

double YwElement::psi(double y) const {
  if (!(y > 0.0)) return 0.0;
  const double l = std::log(y);
  if (l <= lo_ || l >= hi_) return 0.0;
  const double h = std::min({1.0, (l - lo_) / ramp_, (hi_ - l) / ramp_});
  return c_ * h / y;
}

// int_lo^l c h(s) ds: ramp u^2 / n, plateau n/4 + (u - n/2), then 1 minus the mirror ramp.
double YwElement::cdf_log(double l) const {
  if (l <= lo_) return 0.0;
  if (l >= hi_) return 1.0;
  const double u = l - lo_;
  if (u <= ramp_) return c_ * u * u / n_;
  const double w = hi_ - l;
  if (w <= ramp_) return 1.0 - c_ * w * w / n_;
  return c_ * (0.25 * n_ + (u - ramp_));
}

double YwElement::psi_cdf(double y) const {
  if (!(y > 0.0)) return 0.0;
  return cdf_log(std::log(y));
}

namespace {

// e^u (u^2 - 2u + 2) - 2 = sum_{k>=3} (k-1)(k-2) u^k / k!, summed directly
// for small u to avoid cancellation.
double ramp_kernel(double u) {
  if (u > 1.0) return std::exp(u) * (u * u - 2.0 * u + 2.0) - 2.0;
  double term = u * u * u / 6.0, sum = 0.0;
  for (int k = 3; k < 40; ++k) {
    sum += (k - 1.0) * (k - 2.0) * term;
    term *= u / (k + 1.0);
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

double YwElement::phi(double x) const {
  const double z = std::fabs(x);
  if (!(z > 0.0)) return 0.0;
  const double lz = std::log(z);
  if (lz <= lo_) return 0.0;
  const double m = std::min(lz, hi_);
  const double u = m - lo_;
  double inner;
  if (u <= ramp_) {
    inner = c_ / n_ * std::exp(lo_) * ramp_kernel(u);
  } else {
    // Z cdf(Z) - int_lo^m c h(s) e^s ds, the second term piecewise in closed form.
    const double e_lo = std::exp(lo_), e_r1 = std::exp(lo_ + ramp_), e_m = std::exp(m);
    double moment = 2.0 * c_ / n_ * (e_r1 * (ramp_ - 1.0) + e_lo);
    const double r2 = hi_ - ramp_;
    if (m <= r2) {
      moment += c_ * (e_m - e_r1);
    } else {
      const double e_r2 = std::exp(r2);
      moment += c_ * (e_r2 - e_r1);
      moment += 2.0 * c_ / n_ * (e_m * (hi_ - m + 1.0) - e_r2 * (ramp_ + 1.0));
    }
    inner = e_m * cdf_log(m) - moment;
  }
  if (lz <= hi_) return inner;
  return inner + (z - std::exp(hi_));
}

double YwElement::phi_prime(double x) const {
  const double p = psi_cdf(std::fabs(x));
  return x < 0.0 ? -p : p;
}

double YwElement::phi_second(double x) const { return psi(std::fabs(x)); }

double YwElement::tail_offset() const {
  const double a = std::exp(hi_);
  return a - phi(a);
}

double psi_n(int n, double y) { return YwElement(n).psi(y); }
double psi_cdf(int n, double y) { return YwElement(n).psi_cdf(y); }
double phi_n(int n, double x) { return YwElement(n).phi(x); }

double phi_n_quadrature(int n, double x) {
  const YwElement e(n);
  const double z = std::fabs(x);
  const double lo = log_a_seq(n), hi = log_a_seq(n - 1);
  if (!(z > 0.0) || std::log(z) <= lo) return 0.0;
  const double m = std::min(std::log(z), hi);
  // d eta = e^s ds; split at the trapezoid corners where the integrand has kinks.
  auto g = [&](double s) { return e.psi_cdf(std::exp(s)) * std::exp(s); };
  const double ramp = 0.5 * n;
  const double cuts[] = {lo, lo + ramp, hi - ramp, hi};
  double sum = 0.0;
  for (int i = 0; i + 1 < 4; ++i) {
    const double a = cuts[i], b = std::min(cuts[i + 1], m);
    if (b <= a) break;
    sum += integrate_simpson(g, a, b, 1e-14 * std::exp(b));
  }
  if (std::log(z) > hi) sum += z - std::exp(hi);
  return sum;
}

double psi_integral(int n) {
  const YwElement e(n);
  const double lo = log_a_seq(n), hi = log_a_seq(n - 1), ramp = 0.5 * n;
  auto g = [&](double s) {
    const double y = std::exp(s);
    return e.psi(y) * y;
  };
  const double breaks[] = {lo + ramp, hi - ramp};
  AdaptiveOptions opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-13;
  return integrate_gk15(g, lo, hi, opt, breaks).value;
}

std::vector<double> yw_default_grid() {
  std::vector<double> g;
  g.reserve(2001);
  for (int i = 999; i >= 0; --i) g.push_back(-std::pow(10.0, -36.0 + 36.0 * i / 999.0));
  g.push_back(0.0);
  for (int i = 0; i < 1000; ++i) g.push_back(std::pow(10.0, -36.0 + 36.0 * i / 999.0));
  return g;
}

YwReport yw_property_report(std::span<const int> n_list, std::span<const double> grid) {
  YwReport rep;
  for (int n : n_list) {
    const YwElement e(n), next(n + 1);
    const double a_lo = e.a_lo(), a_hi = e.a_hi();
    YwRow row;
    row.n = n;
    auto fail = [&](bool& flag, const char* prop, double x, double lhs, double rhs) {
      flag = false;
      rep.violations.push_back({n, prop, x, lhs, rhs});
    };
    const double p0 = e.phi(0.0);
    if (p0 != 0.0) fail(row.prop_i, "i", 0.0, p0, 0.0);
    for (double x : grid) {
      const double ax = std::fabs(x);
      const double p = e.phi(x), pn = next.phi(x);
      if (p < 0.0) fail(row.prop_i, "i", x, p, 0.0);
      const double d1 = std::fabs(e.phi_prime(x));
      row.max_prime = std::max(row.max_prime, d1);
      if (d1 > 1.0) fail(row.prop_ii, "ii", x, d1, 1.0);
      const double d2 = std::fabs(e.phi_second(x));
      const bool inside = ax > a_lo && ax < a_hi;
      if (inside) ++row.support_points;
      if (inside ? d2 * n * ax > 1.0 : d2 != 0.0) fail(row.prop_iii, "iii", x, d2, inside ? 1.0 / (n * ax) : 0.0);
      if (p > pn) fail(row.prop_iv, "iv", x, p, pn);
      if (pn > ax) fail(row.prop_iv, "iv", x, pn, ax);
      const double gap = ax - p;
      row.max_tail_gap = std::max(row.max_tail_gap, gap);
      if (gap > a_hi) fail(row.prop_iv, "iv", x, gap, a_hi);
    }
    rep.rows.push_back(row);
  }
  return rep;
}

YwReport check_yw_properties(std::span<const int> n_list, std::span<const double> grid) {
  YwReport rep = yw_property_report(n_list, grid);
  if (!rep.ok()) {
    const auto& v = rep.violations.front();
    std::ostringstream os;
    os.precision(17);
    os << "yw property (" << v.property << ") violated for n=" << v.n << " at x=" << v.x << ": " << v.lhs
       << " vs " << v.rhs << " (" << rep.violations.size() << " violations)";
    throw CheckFailure(os.str());
  }
  return rep;
}

}  // namespace krbn
