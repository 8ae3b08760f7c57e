#pragma once

#include <functional>
#include <span>
#include <vector>

namespace krbn {

// Samples of f on the uniform lattice x0 + i h0, i = 0..n-1.
struct GridFunction1D {
  double x0 = 0.0;
  double h0 = 1.0;
  std::vector<double> values;

  static GridFunction1D sample(const std::function<double(double)>& f, double lo, double hi, int n);
  void validate() const;
  double x(std::size_t i) const { return x0 + h0 * static_cast<double>(i); }
};

// Samples on x0 + i h0 (axis 0, fastest), y0 + j h0 (axis 1); row-major in j.
struct GridFunction2D {
  double x0 = 0.0, y0 = 0.0, h0 = 1.0;
  int nx = 0, ny = 0;
  std::vector<double> values;

  static GridFunction2D sample(const std::function<double(double, double)>& f, double xlo, double xhi,
                               double ylo, double yhi, double h);
  void validate() const;
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
};

// Which integer part fixes the difference order m = floor(beta) + 1.
//   StrictFloor: floor(beta) is the greatest integer strictly below beta, so
//                m = ceil(beta) (the Hoelder-Zygmund convention; m = 2 at beta = 2).
//   Classical:   m = floor(beta) + 1 with the usual floor (m = 2 at beta = 1).
enum class ZygmundConvention { StrictFloor, Classical };

int zygmund_order(double beta, ZygmundConvention conv = ZygmundConvention::StrictFloor);

struct ZygmundResult {
  double seminorm = 0.0;  // max |delta_h^m f(x)| / |h|^beta over lattice x, h
  double sup = 0.0;       // max |f|
  double norm = 0.0;      // sup + seminorm
  int order = 0;
  double witness_x = 0.0;
  double witness_h = 0.0;
};

// Forward differences delta_h^m f(x) = sum_k (-1)^{m-k} C(m,k) f(x + k h) over
// lattice steps h = j h0, 1 <= j <= max_step (0 means the largest step that
// fits the box). Negative steps are the same set of differences reflected and
// are covered by x ranging over the whole lattice. beta = 0 returns the sup norm.
// Throws ArgumentError if the grid has fewer than m + 1 points.
ZygmundResult zygmund_seminorm(const GridFunction1D& f, double beta,
                               ZygmundConvention conv = ZygmundConvention::StrictFloor, int max_step = 0);

// Marginal norms of a 2-d function: sup over the other coordinate of the
// 1-d norm along `axis` (0 = first coordinate, 1 = second).
ZygmundResult zygmund_seminorm(const GridFunction2D& f, double beta, int axis,
                               ZygmundConvention conv = ZygmundConvention::StrictFloor, int max_step = 0);

struct InterpolationRow {
  double delta = 0.0;
  double lhs = 0.0;      // ||f||_r
  double norm_t = 0.0;   // ||f||_t
  double norm_s = 0.0;   // ||f||_s
  double c_min = 0.0;    // smallest admissible C
};

struct InterpolationReport {
  std::vector<InterpolationRow> rows;
  double c_max = 0.0;    // max over delta
};

// For each delta, the smallest C with ||f||_r <= delta ||f||_t + C delta^{(s-r)/(t-r)} ||f||_s,
// using full discrete norms. Throws ArgumentError unless 0 <= s < r < t and
// every delta lies in (0, 1).
InterpolationReport check_interpolation(const GridFunction1D& f, double s, double r, double t,
                                        std::span<const double> deltas,
                                        ZygmundConvention conv = ZygmundConvention::StrictFloor);

}  // namespace krbn
