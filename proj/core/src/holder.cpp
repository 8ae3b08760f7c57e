#include "krbn/holder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "krbn/errors.hpp"

namespace krbn {

GridFunction1D GridFunction1D::sample(const std::function<double(double)>& f, double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw ArgumentError("GridFunction1D::sample: need n >= 2 and hi > lo");
  GridFunction1D g{lo, (hi - lo) / (n - 1), {}};
  g.values.resize(n);
  for (int i = 0; i < n; ++i) g.values[i] = f(g.x(i));
  return g;
}

void GridFunction1D::validate() const {
  if (!(h0 > 0.0)) throw ArgumentError("grid function: spacing must be positive");
  if (values.empty()) throw ArgumentError("grid function: empty box");
}

GridFunction2D GridFunction2D::sample(const std::function<double(double, double)>& f, double xlo, double xhi,
                                      double ylo, double yhi, double h) {
  if (!(h > 0.0) || !(xhi > xlo) || !(yhi > ylo)) throw ArgumentError("GridFunction2D::sample: bad box");
  GridFunction2D g;
  g.x0 = xlo;
  g.y0 = ylo;
  g.h0 = h;
  g.nx = static_cast<int>(std::floor((xhi - xlo) / h + 1e-9)) + 1;
  g.ny = static_cast<int>(std::floor((yhi - ylo) / h + 1e-9)) + 1;
  g.values.resize(static_cast<std::size_t>(g.nx) * g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) g.values[static_cast<std::size_t>(j) * g.nx + i] = f(xlo + i * h, ylo + j * h);
  return g;
}

void GridFunction2D::validate() const {
  if (!(h0 > 0.0)) throw ArgumentError("grid function: spacing must be positive");
  if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * ny)
    throw ArgumentError("grid function: inconsistent 2-d shape");
}

int zygmund_order(double beta, ZygmundConvention conv) {
  if (!(beta > 0.0)) throw ArgumentError("zygmund_order: beta must be positive");
  if (conv == ZygmundConvention::Classical) return static_cast<int>(std::floor(beta)) + 1;
  return static_cast<int>(std::ceil(beta));
}

namespace {

// Seminorm of a strided 1-d sequence v[k * stride], k = 0..n-1.
void seminorm_line(const double* v, std::size_t n, std::size_t stride, double h0, double beta, int m,
                   int max_step, ZygmundResult& res, double x0) {
  if (n < static_cast<std::size_t>(m) + 1)
    throw ArgumentError("zygmund_seminorm: grid has " + std::to_string(n) + " points, order " +
                        std::to_string(m) + " differences need at least " + std::to_string(m + 1));
  std::vector<double> binom(m + 1);
  binom[0] = 1.0;
  for (int k = 1; k <= m; ++k) binom[k] = binom[k - 1] * (m - k + 1) / k;
  const std::size_t jmax_fit = (n - 1) / m;
  const std::size_t jmax = max_step > 0 ? std::min<std::size_t>(max_step, jmax_fit) : jmax_fit;
  for (std::size_t j = 1; j <= jmax; ++j) {
    const double h = h0 * static_cast<double>(j);
    const double scale = std::pow(h, -beta);
    for (std::size_t i = 0; i + m * j < n; ++i) {
      double d = 0.0;
      for (int k = 0; k <= m; ++k) {
        const double sgn = ((m - k) % 2 == 0) ? 1.0 : -1.0;
        d += sgn * binom[k] * v[(i + k * j) * stride];
      }
      const double q = std::abs(d) * scale;
      if (q > res.seminorm) {
        res.seminorm = q;
        res.witness_x = x0 + h0 * static_cast<double>(i);
        res.witness_h = h;
      }
    }
  }
}

}  // namespace

ZygmundResult zygmund_seminorm(const GridFunction1D& f, double beta, ZygmundConvention conv, int max_step) {
  f.validate();
  if (beta < 0.0) throw ArgumentError("zygmund_seminorm: beta must be >= 0");
  ZygmundResult r;
  for (double v : f.values) r.sup = std::max(r.sup, std::abs(v));
  if (beta == 0.0) {
    r.norm = r.sup;
    return r;
  }
  r.order = zygmund_order(beta, conv);
  seminorm_line(f.values.data(), f.values.size(), 1, f.h0, beta, r.order, max_step, r, f.x0);
  r.norm = r.sup + r.seminorm;
  return r;
}

ZygmundResult zygmund_seminorm(const GridFunction2D& f, double beta, int axis, ZygmundConvention conv,
                               int max_step) {
  f.validate();
  if (axis != 0 && axis != 1) throw ArgumentError("zygmund_seminorm: axis must be 0 or 1");
  ZygmundResult r;
  for (double v : f.values) r.sup = std::max(r.sup, std::abs(v));
  if (beta == 0.0) {
    r.norm = r.sup;
    return r;
  }
  r.order = zygmund_order(beta, conv);
  if (axis == 0) {
    for (int j = 0; j < f.ny; ++j)
      seminorm_line(&f.values[static_cast<std::size_t>(j) * f.nx], f.nx, 1, f.h0, beta, r.order, max_step, r, f.x0);
  } else {
    for (int i = 0; i < f.nx; ++i)
      seminorm_line(&f.values[i], f.ny, f.nx, f.h0, beta, r.order, max_step, r, f.y0);
  }
  r.norm = r.sup + r.seminorm;
  return r;
}

InterpolationReport check_interpolation(const GridFunction1D& f, double s, double r, double t,
                                        std::span<const double> deltas, ZygmundConvention conv) {
  if (!(s >= 0.0 && s < r && r < t)) throw ArgumentError("check_interpolation: need 0 <= s < r < t");
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0)) throw ArgumentError("check_interpolation: every delta must lie in (0, 1)");
  const double ns = zygmund_seminorm(f, s, conv).norm;
  const double nr = zygmund_seminorm(f, r, conv).norm;
  const double nt = zygmund_seminorm(f, t, conv).norm;
  InterpolationReport rep;
  for (double d : deltas) {
    InterpolationRow row{d, nr, nt, ns, 0.0};
    const double excess = std::max(0.0, nr - d * nt);
    if (excess > 0.0) row.c_min = ns > 0.0 ? excess / (std::pow(d, (s - r) / (t - r)) * ns) : INFINITY;
    rep.c_max = std::max(rep.c_max, row.c_min);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace krbn
