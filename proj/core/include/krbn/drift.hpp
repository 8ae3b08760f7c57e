#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "krbn/linalg.hpp"

namespace krbn {

using TimeFunction = std::function<double(double)>;

// Bounded measurable amplitude a(t). Constant unless `fn` is set, in which
// case `bound` must dominate |fn| on the horizon.
struct TimeProfile {
  double constant = 1.0;
  TimeFunction fn;
  double bound = 0.0;

  double operator()(double t) const { return fn ? fn(t) : constant; }
  double sup() const { return fn ? bound : std::abs(constant); }
};

// How a scalar power law |x - c|^beta becomes an R^d-valued drift.
//   Axis:          F(t,x) = a(t) |x - c|^beta * u,  u a fixed unit vector
//   Componentwise: F_i(t,x) = a(t) |x_i - c_i|^beta
enum class PeanoShape { Axis, Componentwise };

struct PeanoPower {
  TimeProfile a;
  double beta = 0.5;
  Vec center;     // empty means the origin
  PeanoShape shape = PeanoShape::Axis;
  Vec direction;  // empty means the first basis vector
};

struct PowerTerm {
  TimeProfile a;
  double beta = 0.5;
  Vec center;
};

// F(t,x) = sum_n a_n(t) |x - b_n|^{beta_n}, composed with `shape` as above.
struct MultiSingularity {
  std::vector<PowerTerm> terms;
  PeanoShape shape = PeanoShape::Axis;
  Vec direction;
};

// d = 1 only. On [a_n, a_{n+1}) the drift is the tent
// min(x - a_n, a_{n+1} - x)^beta; zero outside [a_1, a_N).
struct Accumulating {
  double beta = 0.5;
  std::vector<double> anchors;

  // a_1 = first, a_{n+1} - a_n = n^{-1/beta}, `count` anchors.
  static Accumulating standard(double beta, int count = 256, double first = 1.0);
};

// F(t,x) = matrix * x + offset.
struct LipschitzTest {
  Mat matrix;
  Vec offset;
};

struct ZeroDrift {
  int dim = 1;
};

// Arbitrary evaluator. `breakpoints` (d = 1) are treated as singular points
// by the mollifier quadrature.
struct CustomDrift {
  std::function<Vec(double, const Vec&)> evaluator;
  int dim = 1;
  std::vector<double> breakpoints;
  double holder_constant = 0.0;  // 0 = unknown
};

class DriftModel {
 public:
  using Variant =
      std::variant<PeanoPower, MultiSingularity, Accumulating, LipschitzTest, ZeroDrift, CustomDrift>;

  DriftModel() : DriftModel(ZeroDrift{1}) {}
  // Normalizes defaults (center, direction) for the given dimension and
  // validates invariants; throws ParameterError.
  DriftModel(Variant v, int dim = 1);

  static DriftModel peano(double beta, double a = 1.0, int dim = 1);
  static DriftModel accumulating(double beta, int count = 256);
  static DriftModel lipschitz(const Mat& m, const Vec& offset);
  static DriftModel constant(const Vec& c);
  static DriftModel zero(int dim = 1);

  const Variant& variant() const { return v_; }
  int dim() const { return dim_; }
  std::string kind() const;

  // Uniform beta-Hoelder seminorm of F(t, .) with its exponent, when known.
  std::optional<std::pair<double, double>> holder() const;

  template <class T>
  const T* as() const { return std::get_if<T>(&v_); }

 private:
  Variant v_;
  int dim_ = 1;
};

// Exact pointwise value of F(t, x). Accumulating requires dim 1.
Vec eval_F(const DriftModel& model, double t, const Vec& x);

// d = 1: positions where F fails to be smooth (power-law centers, anchors and
// tent peaks, custom breakpoints), ascending. Empty for d > 1.
std::vector<double> drift_breakpoints(const DriftModel& model);

// Pointwise Jacobian of the raw drift where it exists. At a singular point
// of a power law with beta < 1 the entries are infinite.
Mat eval_grad_F(const DriftModel& model, double t, const Vec& x);

struct MollifierSpec {
  double eps = 0.1;
  double bump_radius = 1.0;
  int quadrature_order = 32;
  // Gauss-Legendre panels per axis over the bump support; 0 chooses 4 for
  // d = 1 and 1 otherwise.
  int panels = 0;

  void validate() const;  // throws ParameterError
  int panels_for(int dim) const { return panels > 0 ? panels : (dim == 1 ? 4 : 1); }
};

// Normalizing constant of exp(-1/(1-|z|^2)) on the unit ball of R^d.
double bump_normalizer(int dim);
// Un-normalized bump exp(-1/(1-z^2)) on (-1, 1), zero elsewhere.
double bump(double z);
// Integral of the normalized bump under the quadrature rule used by mollify.
double bump_mass(int dim, const MollifierSpec& moll);

// F^(eps)(t,x) = int Phi_eps(x - y) F(t,y) dy with Phi_eps(u) = Phi(u/(eps r)) / (eps r)^d.
Vec mollify(const DriftModel& model, const MollifierSpec& moll, double t, const Vec& x);
// Jacobian of F^(eps): F convolved with the differentiated bump.
Mat grad_mollified(const DriftModel& model, const MollifierSpec& moll, double t, const Vec& x);
// d = 1: second derivative of F^(eps).
double second_derivative_mollified(const DriftModel& model, const MollifierSpec& moll, double t,
                                   double x);

// Smooth cutoff: 1 for |x| <= m, 0 for |x| >= m + 1, monotone in |x|,
// built from the integrated bump.
double cutoff_chi(int m, const Vec& x);
double cutoff_chi(int m, double x);

// Drift evaluation interface consumed by the simulators.
class DriftField {
 public:
  virtual ~DriftField() = default;
  virtual int dim() const = 0;
  virtual Vec value(double t, const Vec& x) const = 0;
  virtual Mat jacobian(double t, const Vec& x) const = 0;
};

using DriftFieldPtr = std::shared_ptr<const DriftField>;

enum class FieldMode {
  Direct,     // quadrature at every call
  Tabulated,  // d = 1: cubic Hermite tables of F^(eps), F^(eps)', F^(eps)''
};

struct TabulationOptions {
  double lo = -8.0;
  double hi = 8.0;
  int nodes_per_eps = 64;  // table spacing eps * r / nodes_per_eps
};

// eps = 0: raw F. eps > 0: F^(eps). Affine and zero drifts are returned
// exactly (the symmetric bump preserves affine maps). Tabulation applies to
// d = 1 time-separable models; others fall back to direct quadrature, as do
// points outside the table range.
DriftFieldPtr make_drift_field(const DriftModel& model, double eps, FieldMode mode = FieldMode::Direct,
                               const MollifierSpec& base = {}, const TabulationOptions& tab = {});

}  // namespace krbn
