#include "krbn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <string>

#include "krbn/errors.hpp"

namespace krbn {

namespace {

// Legendre P_n and its derivative at x by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

GaussRule build_gauss_legendre(int n) {
  GaussRule r;
  if (n == 1) {
    r.nodes = {0.0};
    r.weights = {2.0};
    return r;
  }
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

// Kronrod 15 nodes (positive half) and weights; Gauss 7 weights on the
// shared odd-indexed nodes.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    resk += kWgk[j] * s;
    if (j % 2 == 1) resg += kWg[j / 2] * s;
  }
  return {a, b, resk * h, std::abs((resk - resg) * h)};
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw ParameterError("gauss_legendre: order must be >= 1, got " + std::to_string(n));
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

QuadResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opt, std::span<const double> breaks) {
  QuadResult out;
  if (a == b) return out;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // The heap is only used to pick the worst segment; the final sum runs over
  // a position-sorted list so the result is independent of heap order.
  std::priority_queue<Segment> heap;
  double total = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    Segment s = gk15(f, pts[i], pts[i + 1]);
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  out.evaluations = 15L * static_cast<long>(heap.size());
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (static_cast<int>(heap.size()) >= opt.max_intervals) {
      throw NumericError("integrate_gk15: no convergence on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "] after " + std::to_string(heap.size()) +
                         " intervals; estimate " + std::to_string(total) + ", error " +
                         std::to_string(err));
    }
    Segment s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    if (!(m > s.a && m < s.b)) {
      throw NumericError("integrate_gk15: interval collapsed near " + std::to_string(s.a));
    }
    Segment l = gk15(f, s.a, m), r = gk15(f, m, s.b);
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
    out.evaluations += 30;
  }
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  double v = 0.0, e = 0.0;
  for (const auto& s : segs) {
    v += s.value;
    e += s.error;
  }
  out.value = sign * v;
  out.error = e;
  out.intervals = static_cast<int>(segs.size());
  return out;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) {
    throw NumericError("integrate_simpson: depth limit reached near [" + std::to_string(a) + ", " +
                       std::to_string(b) + "]");
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                         int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace krbn
