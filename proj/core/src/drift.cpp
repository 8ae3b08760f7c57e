#include "krbn/drift.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "krbn/errors.hpp"
#include "krbn/quadrature.hpp"

namespace krbn {

// ---------------------------------------------------------------------------
// Model construction
// ---------------------------------------------------------------------------

Accumulating Accumulating::standard(double beta, int count, double first) {
  if (count < 2) throw ParameterError("accumulating: need at least two anchors");
  Accumulating a;
  a.beta = beta;
  a.anchors.resize(count);
  a.anchors[0] = first;
  for (int n = 1; n < count; ++n) a.anchors[n] = a.anchors[n - 1] + std::pow(n, -1.0 / beta);
  return a;
}

namespace {

Vec unit_or_default(Vec v, int dim, const char* what) {
  if (v.size() == 0) {
    v = Vec::Zero(dim);
    v[0] = 1.0;
    return v;
  }
  if (v.size() != dim) throw ParameterError(std::string(what) + ": direction has wrong dimension");
  const double n = v.norm();
  if (!(n > 0.0)) throw ParameterError(std::string(what) + ": direction must be nonzero");
  return v / n;
}

Vec center_or_origin(Vec c, int dim, const char* what) {
  if (c.size() == 0) return Vec::Zero(dim);
  if (c.size() != dim) throw ParameterError(std::string(what) + ": center has wrong dimension");
  return c;
}

void check_profile(const TimeProfile& a, const char* what) {
  if (a.fn && !(a.bound > 0.0 && std::isfinite(a.bound)))
    throw ParameterError(std::string(what) + ": time profile needs a finite positive bound");
  if (!std::isfinite(a.constant)) throw ParameterError(std::string(what) + ": amplitude not finite");
}

void check_beta(double beta, const char* what) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw ParameterError(std::string(what) + ": beta must lie in (0, 1], got " + std::to_string(beta));
}

}  // namespace

DriftModel::DriftModel(Variant v, int dim) : v_(std::move(v)), dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw ParameterError("drift: dimension out of range");
  std::visit(
      [&](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PeanoPower>) {
          check_beta(m.beta, "peano");
          check_profile(m.a, "peano");
          m.center = center_or_origin(m.center, dim_, "peano");
          m.direction = unit_or_default(m.direction, dim_, "peano");
        } else if constexpr (std::is_same_v<T, MultiSingularity>) {
          if (m.terms.empty()) throw ParameterError("multi-singularity: no terms");
          for (auto& t : m.terms) {
            check_beta(t.beta, "multi-singularity");
            check_profile(t.a, "multi-singularity");
            t.center = center_or_origin(t.center, dim_, "multi-singularity");
          }
          m.direction = unit_or_default(m.direction, dim_, "multi-singularity");
        } else if constexpr (std::is_same_v<T, Accumulating>) {
          check_beta(m.beta, "accumulating");
          if (dim_ != 1) throw UnsupportedError("accumulating drift is defined for d = 1 only");
          if (m.anchors.size() < 2) throw ParameterError("accumulating: need at least two anchors");
          for (std::size_t i = 0; i + 1 < m.anchors.size(); ++i)
            if (!(m.anchors[i + 1] > m.anchors[i]))
              throw ParameterError("accumulating: anchors must be strictly increasing");
          if (!std::isfinite(m.anchors.back())) throw ParameterError("accumulating: anchors unbounded");
        } else if constexpr (std::is_same_v<T, LipschitzTest>) {
          if (m.matrix.rows() != dim_ || m.matrix.cols() != dim_)
            throw ParameterError("lipschitz: matrix must be d x d");
          if (m.offset.size() == 0) m.offset = Vec::Zero(dim_);
          if (m.offset.size() != dim_) throw ParameterError("lipschitz: offset has wrong dimension");
        } else if constexpr (std::is_same_v<T, ZeroDrift>) {
          m.dim = dim_;
        } else if constexpr (std::is_same_v<T, CustomDrift>) {
          if (!m.evaluator) throw ParameterError("custom drift: evaluator missing");
          m.dim = dim_;
          std::sort(m.breakpoints.begin(), m.breakpoints.end());
        }
      },
      v_);
}

DriftModel DriftModel::peano(double beta, double a, int dim) {
  PeanoPower p;
  p.a.constant = a;
  p.beta = beta;
  return DriftModel(p, dim);
}

DriftModel DriftModel::accumulating(double beta, int count) {
  return DriftModel(Accumulating::standard(beta, count), 1);
}

DriftModel DriftModel::lipschitz(const Mat& m, const Vec& offset) {
  return DriftModel(LipschitzTest{m, offset}, static_cast<int>(m.rows()));
}

DriftModel DriftModel::constant(const Vec& c) {
  const int d = static_cast<int>(c.size());
  return DriftModel(LipschitzTest{Mat::Zero(d, d), c}, d);
}

DriftModel DriftModel::zero(int dim) { return DriftModel(ZeroDrift{dim}, dim); }

std::string DriftModel::kind() const {
  static const char* names[] = {"peano", "multi_singularity", "accumulating", "lipschitz", "zero", "custom"};
  return names[v_.index()];
}

std::optional<std::pair<double, double>> DriftModel::holder() const {
  if (auto p = as<PeanoPower>()) {
    // ||x|^b - |y|^b| <= |x - y|^b; componentwise adds sqrt(d)^{1-b}.
    double c = p->a.sup();
    if (p->shape == PeanoShape::Componentwise) c *= std::pow(std::sqrt(double(dim_)), 1.0 - p->beta);
    return std::pair{c, p->beta};
  }
  if (auto m = as<MultiSingularity>()) {
    double bmin = 1.0, c = 0.0;
    for (const auto& t : m->terms) bmin = std::min(bmin, t.beta);
    // on |x - y| <= 1 each term is bmin-Hoelder with its own constant
    for (const auto& t : m->terms) c += t.a.sup();
    return std::pair{c, bmin};
  }
  if (auto a = as<Accumulating>()) return std::pair{1.0, a->beta};
  if (auto l = as<LipschitzTest>()) return std::pair{operator_norm(l->matrix), 1.0};
  if (as<ZeroDrift>()) return std::pair{0.0, 1.0};
  if (auto c = as<CustomDrift>(); c && c->holder_constant > 0.0) return std::pair{c->holder_constant, 1.0};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Pointwise evaluation
// ---------------------------------------------------------------------------

namespace {

inline double accumulating_value(const Accumulating& m, double x) {
  const auto& a = m.anchors;
  if (x < a.front() || x >= a.back()) return 0.0;
  const auto it = std::upper_bound(a.begin(), a.end(), x);
  const double lo = *(it - 1), hi = *it;
  return std::pow(std::min(x - lo, hi - x), m.beta);
}

inline double accumulating_slope(const Accumulating& m, double x) {
  const auto& a = m.anchors;
  if (x < a.front() || x >= a.back()) return 0.0;
  const auto it = std::upper_bound(a.begin(), a.end(), x);
  const double lo = *(it - 1), hi = *it;
  const double mid = 0.5 * (lo + hi);
  if (x < mid) return m.beta * std::pow(x - lo, m.beta - 1.0);
  return -m.beta * std::pow(hi - x, m.beta - 1.0);
}

void add_power(Vec& out, double amp, double beta, const Vec& center, PeanoShape shape, const Vec& dir,
               const Vec& x) {
  if (shape == PeanoShape::Axis) {
    out += amp * std::pow((x - center).norm(), beta) * dir;
  } else {
    for (int i = 0; i < x.size(); ++i) out[i] += amp * std::pow(std::abs(x[i] - center[i]), beta);
  }
}

void add_power_grad(Mat& out, double amp, double beta, const Vec& center, PeanoShape shape, const Vec& dir,
                    const Vec& x) {
  const Vec r = x - center;
  if (shape == PeanoShape::Axis) {
    const double n = r.norm();
    // d/dx |r|^b = b |r|^{b-2} r
    const double c = amp * beta * std::pow(n, beta - 2.0);
    if (n == 0.0) {
      out += Mat::Constant(x.size(), x.size(), beta < 1.0 ? INFINITY : 0.0);
      return;
    }
    out += c * dir * r.transpose();
  } else {
    for (int i = 0; i < x.size(); ++i) {
      const double a = std::abs(r[i]);
      out(i, i) += amp * beta * std::pow(a, beta - 1.0) * (r[i] >= 0 ? 1.0 : -1.0);
    }
  }
}

void check_dim(const DriftModel& m, const Vec& x) {
  if (x.size() != m.dim())
    throw ArgumentError("drift evaluation: point has dimension " + std::to_string(x.size()) +
                        ", model has " + std::to_string(m.dim()));
}

}  // namespace

Vec eval_F(const DriftModel& model, double t, const Vec& x) {
  check_dim(model, x);
  const int d = model.dim();
  Vec out = Vec::Zero(d);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PeanoPower>) {
          add_power(out, m.a(t), m.beta, m.center, m.shape, m.direction, x);
        } else if constexpr (std::is_same_v<T, MultiSingularity>) {
          for (const auto& term : m.terms) add_power(out, term.a(t), term.beta, term.center, m.shape, m.direction, x);
        } else if constexpr (std::is_same_v<T, Accumulating>) {
          out[0] = accumulating_value(m, x[0]);
        } else if constexpr (std::is_same_v<T, LipschitzTest>) {
          out = m.matrix * x + m.offset;
        } else if constexpr (std::is_same_v<T, ZeroDrift>) {
        } else if constexpr (std::is_same_v<T, CustomDrift>) {
          out = m.evaluator(t, x);
        }
      },
      model.variant());
  return out;
}

Mat eval_grad_F(const DriftModel& model, double t, const Vec& x) {
  check_dim(model, x);
  const int d = model.dim();
  Mat out = Mat::Zero(d, d);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PeanoPower>) {
          add_power_grad(out, m.a(t), m.beta, m.center, m.shape, m.direction, x);
        } else if constexpr (std::is_same_v<T, MultiSingularity>) {
          for (const auto& term : m.terms)
            add_power_grad(out, term.a(t), term.beta, term.center, m.shape, m.direction, x);
        } else if constexpr (std::is_same_v<T, Accumulating>) {
          out(0, 0) = accumulating_slope(m, x[0]);
        } else if constexpr (std::is_same_v<T, LipschitzTest>) {
          out = m.matrix;
        } else if constexpr (std::is_same_v<T, ZeroDrift>) {
        } else if constexpr (std::is_same_v<T, CustomDrift>) {
          const double h = 1e-6;
          for (int j = 0; j < d; ++j) {
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            out.col(j) = (m.evaluator(t, xp) - m.evaluator(t, xm)) / (2 * h);
          }
        }
      },
      model.variant());
  return out;
}

// ---------------------------------------------------------------------------
// Bump and quadrature rules
// ---------------------------------------------------------------------------

void MollifierSpec::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("mollifier: eps must be positive");
  if (!(bump_radius > 0.0)) throw ParameterError("mollifier: bump_radius must be positive");
  if (quadrature_order < 2)
    throw ParameterError("mollifier: quadrature order must be >= 2, got " + std::to_string(quadrature_order));
  if (panels < 0) throw ParameterError("mollifier: panels must be >= 0");
}

double bump(double z) {
  const double q = 1.0 - z * z;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double bump_normalizer(int dim) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(dim); it != cache.end()) return it->second;
  // radial integral times the area of the unit sphere S^{d-1}
  AdaptiveOptions opt{1e-16, 1e-14, 4000};
  const double radial =
      integrate_gk15([dim](double r) { return std::pow(r, dim - 1) * bump(r); }, 0.0, 1.0, opt).value;
  const double area = 2.0 * std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0);
  const double z = (dim == 1 ? 2.0 * radial : area * radial);
  cache.emplace(dim, z);
  return z;
}

namespace {

struct Brk {
  double pos;
  bool singular;
};

struct Node {
  double z;
  double w;
};

// Breakpoints of a d = 1 model in ascending position.
std::vector<Brk> model_breaks(const DriftModel& model) {
  std::vector<Brk> b;
  if (auto p = model.as<PeanoPower>()) {
    b.push_back({p->center[0], true});
  } else if (auto m = model.as<MultiSingularity>()) {
    for (const auto& t : m->terms) b.push_back({t.center[0], true});
  } else if (auto a = model.as<Accumulating>()) {
    const auto& x = a->anchors;
    for (std::size_t i = 0; i < x.size(); ++i) {
      b.push_back({x[i], true});
      if (i + 1 < x.size()) b.push_back({0.5 * (x[i] + x[i + 1]), false});
    }
  } else if (auto c = model.as<CustomDrift>()) {
    for (double x : c->breakpoints) b.push_back({x, true});
  }
  std::sort(b.begin(), b.end(), [](const Brk& l, const Brk& r) { return l.pos < r.pos; });
  return b;
}

constexpr std::size_t kMaxBreaks = 1024;

// Composite Gauss-Legendre rule on z in [-1, 1] for integrands that are
// smooth except at the images z = (x - b)/s of the breakpoints. Panel ends at
// singular breakpoints are graded (u^4 one-sided, a degree-7 polynomial
// two-sided) so the |z - z0|^beta behaviour is integrated accurately.
void build_rule_1d(double x, double s, const std::vector<Brk>& breaks, int order, int panels,
                   std::vector<Node>& out) {
  out.clear();
  const auto lo = std::lower_bound(breaks.begin(), breaks.end(), x - s,
                                   [](const Brk& b, double v) { return b.pos < v; });
  const auto hi = std::upper_bound(breaks.begin(), breaks.end(), x + s,
                                   [](double v, const Brk& b) { return v < b.pos; });
  thread_local std::vector<Brk> zs;
  zs.clear();
  for (auto it = hi; it != lo;) {
    --it;
    const double z = (x - it->pos) / s;
    if (z > -1.0 && z < 1.0) zs.push_back({z, it->singular});
  }
  if (zs.size() > kMaxBreaks) {
    const std::size_t stride = (zs.size() + kMaxBreaks - 1) / kMaxBreaks;
    std::size_t k = 0;
    for (std::size_t i = 0; i < zs.size(); i += stride) zs[k++] = zs[i];
    zs.resize(k);
  }
  // Panel boundaries: base grid minus points that nearly coincide with a
  // breakpoint (a sliver panel would leave the singularity nearly unresolved
  // in its neighbour).
  thread_local std::vector<Brk> pts;
  pts.clear();
  pts.push_back({-1.0, false});
  const double merge_tol = 0.5 / panels;
  for (int k = 1; k < panels; ++k) {
    const double b = -1.0 + 2.0 * k / panels;
    bool near = false;
    for (const auto& z : zs)
      if (std::abs(z.pos - b) < merge_tol) near = true;
    if (!near) pts.push_back({b, false});
  }
  for (const auto& z : zs) pts.push_back(z);
  pts.push_back({1.0, false});
  std::sort(pts.begin(), pts.end(), [](const Brk& l, const Brk& r) { return l.pos < r.pos; });
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (k > 0 && pts[i].pos - pts[k - 1].pos < 1e-14) {
      pts[k - 1].singular = pts[k - 1].singular || pts[i].singular;
      continue;
    }
    pts[k++] = pts[i];
  }
  pts.resize(k);

  // A panel with exactly one singular end is halved; only the half touching
  // the singularity is graded, so nodes are not starved at the far end.
  thread_local std::vector<Brk> split;
  split.clear();
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    split.push_back(pts[p]);
    if (pts[p].singular != pts[p + 1].singular) split.push_back({0.5 * (pts[p].pos + pts[p + 1].pos), false});
  }
  split.push_back(pts.back());

  const GaussRule& g = gauss_legendre(order);
  for (std::size_t p = 0; p + 1 < split.size(); ++p) {
    const double a = split[p].pos, b = split[p + 1].pos;
    const bool ls = split[p].singular, rs = split[p + 1].singular;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < order; ++i) {
      const double u = g.nodes[i], w = g.weights[i];
      double z, jac;
      if (ls && rs) {
        const double u2 = u * u;
        const double gm = 35.0 / 16.0 * u * (1.0 - u2 + 0.6 * u2 * u2 - u2 * u2 * u2 / 7.0);
        const double q = 1.0 - u2;
        z = mid + half * gm;
        jac = half * 35.0 / 16.0 * q * q * q;
      } else if (ls) {
        const double v = 0.5 * (u + 1.0);
        const double v3 = v * v * v;
        z = a + (b - a) * v3 * v;
        jac = half * 4.0 * v3;
      } else if (rs) {
        const double v = 0.5 * (1.0 - u);
        const double v3 = v * v * v;
        z = b - (b - a) * v3 * v;
        jac = half * 4.0 * v3;
      } else {
        z = mid + half * u;
        jac = half;
      }
      out.push_back({z, w * jac});
    }
  }
}

struct Moll1D {
  double f = 0.0, f1 = 0.0, f2 = 0.0;
};

// Bump-weighted sums for value (and optionally first/second derivatives).
template <class Fn>
Moll1D mollify_1d(Fn&& f, const std::vector<Brk>& breaks, double x, double s, int order, int panels,
                  int derivs) {
  thread_local std::vector<Node> nodes;
  build_rule_1d(x, s, breaks, order, panels, nodes);
  const double zinv = 1.0 / bump_normalizer(1);
  double v = 0.0, d1 = 0.0, d2 = 0.0;
  for (const Node& n : nodes) {
    const double q = 1.0 - n.z * n.z;
    if (q <= 0.0) continue;
    const double phi = std::exp(-1.0 / q);
    if (phi == 0.0) continue;
    const double fy = f(x - s * n.z);
    const double wf = n.w * phi * fy;
    v += wf;
    if (derivs >= 1) {
      const double iq2 = 1.0 / (q * q);
      d1 += wf * (-2.0 * n.z * iq2);
      if (derivs >= 2) d2 += wf * (4.0 * n.z * n.z * iq2 * iq2 - 2.0 * iq2 - 8.0 * n.z * n.z * iq2 / q);
    }
  }
  return {v * zinv, d1 * zinv / s, d2 * zinv / (s * s)};
}

struct TensorNode {
  Vec z;
  double wphi;
  Vec wgrad;
};

// Tensor rule on [-1,1]^d restricted to the unit ball, weights normalized so
// the discrete bump mass is exactly 1.
const std::vector<TensorNode>& tensor_rule(int dim, int order, int panels) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::vector<TensorNode>> cache;
  std::lock_guard lock(mu);
  const auto key = std::tuple{dim, order, panels};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const GaussRule& g = gauss_legendre(order);
  std::vector<double> z1, w1;
  for (int p = 0; p < panels; ++p) {
    const double a = -1.0 + 2.0 * p / panels, b = -1.0 + 2.0 * (p + 1) / panels;
    for (int i = 0; i < order; ++i) {
      z1.push_back(0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i]);
      w1.push_back(0.5 * (b - a) * g.weights[i]);
    }
  }
  const std::size_t m = z1.size();
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= m;
  std::vector<TensorNode> nodes;
  double mass = 0.0;
  std::vector<std::size_t> idx(dim, 0);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t r = c;
    Vec z(dim);
    double w = 1.0;
    for (int k = 0; k < dim; ++k) {
      idx[k] = r % m;
      r /= m;
      z[k] = z1[idx[k]];
      w *= w1[idx[k]];
    }
    const double q = 1.0 - z.squaredNorm();
    if (q <= 0.0) continue;
    const double phi = std::exp(-1.0 / q);
    if (phi == 0.0) continue;
    nodes.push_back({z, w * phi, (w * phi * (-2.0 / (q * q))) * z});
    mass += w * phi;
  }
  // The ball boundary cuts through the tensor cells, so calibrate the
  // gradient weights separately: sum z wgrad^T = -I makes affine drifts exact.
  // By the symmetry of the grid that sum is a multiple of the identity.
  double moment = 0.0;
  for (const auto& n : nodes) moment += n.z[0] * n.wgrad[0];
  for (auto& n : nodes) {
    n.wphi /= mass;
    n.wgrad /= -moment;
  }
  return cache.emplace(key, std::move(nodes)).first->second;
}

}  // namespace

std::vector<double> drift_breakpoints(const DriftModel& model) {
  std::vector<double> out;
  if (model.dim() != 1) return out;
  for (const auto& b : model_breaks(model)) out.push_back(b.pos);
  return out;
}

namespace {

void check_point(const DriftModel& model, const MollifierSpec& moll, const Vec& x) {
  moll.validate();
  check_dim(model, x);
}

}  // namespace

double bump_mass(int dim, const MollifierSpec& moll) {
  moll.validate();
  if (dim == 1) {
    std::vector<Brk> none;
    return mollify_1d([](double) { return 1.0; }, none, 0.0, 1.0, moll.quadrature_order, moll.panels_for(1), 0).f;
  }
  double mass = 0.0;
  for (const auto& n : tensor_rule(dim, moll.quadrature_order, moll.panels_for(dim))) mass += n.wphi;
  return mass;
}

Vec mollify(const DriftModel& model, const MollifierSpec& moll, double t, const Vec& x) {
  check_point(model, moll, x);
  const int d = model.dim();
  const double s = moll.eps * moll.bump_radius;
  if (d == 1) {
    const auto breaks = model_breaks(model);
    auto f = [&](double y) { return eval_F(model, t, scalar_vec(y))[0]; };
    return scalar_vec(mollify_1d(f, breaks, x[0], s, moll.quadrature_order, moll.panels_for(1), 0).f);
  }
  Vec out = Vec::Zero(d);
  for (const auto& n : tensor_rule(d, moll.quadrature_order, moll.panels_for(d)))
    out += n.wphi * eval_F(model, t, x - s * n.z);
  return out;
}

Mat grad_mollified(const DriftModel& model, const MollifierSpec& moll, double t, const Vec& x) {
  check_point(model, moll, x);
  const int d = model.dim();
  const double s = moll.eps * moll.bump_radius;
  if (d == 1) {
    const auto breaks = model_breaks(model);
    auto f = [&](double y) { return eval_F(model, t, scalar_vec(y))[0]; };
    Mat m(1, 1);
    m(0, 0) = mollify_1d(f, breaks, x[0], s, moll.quadrature_order, moll.panels_for(1), 1).f1;
    return m;
  }
  Mat out = Mat::Zero(d, d);
  for (const auto& n : tensor_rule(d, moll.quadrature_order, moll.panels_for(d)))
    out += eval_F(model, t, x - s * n.z) * n.wgrad.transpose();
  return out / s;
}

double second_derivative_mollified(const DriftModel& model, const MollifierSpec& moll, double t, double x) {
  moll.validate();
  if (model.dim() != 1) throw UnsupportedError("second_derivative_mollified: d = 1 only");
  const double s = moll.eps * moll.bump_radius;
  const auto breaks = model_breaks(model);
  auto f = [&](double y) { return eval_F(model, t, scalar_vec(y))[0]; };
  return mollify_1d(f, breaks, x, s, moll.quadrature_order, moll.panels_for(1), 2).f2;
}

// ---------------------------------------------------------------------------
// Cutoff
// ---------------------------------------------------------------------------

double cutoff_chi(int m, double x) {
  if (m < 1) throw ParameterError("cutoff_chi: m must be >= 1");
  const double u = std::abs(x) - m;
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  // S(u) = int_0^u rho / int_0^1 rho with rho(w) = bump(2w - 1)
  auto rho = [](double w) { return bump(2.0 * w - 1.0); };
  static const double total = 0.5 * bump_normalizer(1);
  AdaptiveOptions opt{1e-15, 1e-13, 2000};
  const double part = integrate_gk15(rho, 0.0, u, opt).value;
  return std::clamp(1.0 - part / total, 0.0, 1.0);
}

double cutoff_chi(int m, const Vec& x) { return cutoff_chi(m, x.norm()); }

// ---------------------------------------------------------------------------
// Drift fields
// ---------------------------------------------------------------------------

namespace {

class RawField final : public DriftField {
 public:
  explicit RawField(DriftModel m) : m_(std::move(m)) {}
  int dim() const override { return m_.dim(); }
  Vec value(double t, const Vec& x) const override { return eval_F(m_, t, x); }
  Mat jacobian(double t, const Vec& x) const override { return eval_grad_F(m_, t, x); }

 private:
  DriftModel m_;
};

class DirectField final : public DriftField {
 public:
  DirectField(DriftModel m, MollifierSpec s) : m_(std::move(m)), s_(s) {
    s_.validate();
    if (m_.dim() == 1) breaks_ = model_breaks(m_);
  }
  int dim() const override { return m_.dim(); }
  Vec value(double t, const Vec& x) const override {
    if (m_.dim() != 1) return mollify(m_, s_, t, x);
    auto f = [&](double y) { return eval_F(m_, t, scalar_vec(y))[0]; };
    return scalar_vec(mollify_1d(f, breaks_, x[0], scale(), s_.quadrature_order, s_.panels_for(1), 0).f);
  }
  Mat jacobian(double t, const Vec& x) const override {
    if (m_.dim() != 1) return grad_mollified(m_, s_, t, x);
    auto f = [&](double y) { return eval_F(m_, t, scalar_vec(y))[0]; };
    Mat j(1, 1);
    j(0, 0) = mollify_1d(f, breaks_, x[0], scale(), s_.quadrature_order, s_.panels_for(1), 1).f1;
    return j;
  }

 private:
  double scale() const { return s_.eps * s_.bump_radius; }
  DriftModel m_;
  MollifierSpec s_;
  std::vector<Brk> breaks_;
};

// One time-separable term a(t) G(x) of a d = 1 model.
struct Term1D {
  TimeProfile a;
  std::function<double(double)> g;
  std::vector<Brk> breaks;
};

std::optional<std::vector<Term1D>> separate_terms(const DriftModel& model) {
  if (model.dim() != 1) return std::nullopt;
  std::vector<Term1D> out;
  auto power = [](double beta, double c, double dir) {
    return [beta, c, dir](double y) { return dir * std::pow(std::abs(y - c), beta); };
  };
  if (auto p = model.as<PeanoPower>()) {
    const double dir = p->shape == PeanoShape::Axis ? p->direction[0] : 1.0;
    out.push_back({p->a, power(p->beta, p->center[0], dir), {{p->center[0], true}}});
  } else if (auto m = model.as<MultiSingularity>()) {
    const double dir = m->shape == PeanoShape::Axis ? m->direction[0] : 1.0;
    for (const auto& t : m->terms) out.push_back({t.a, power(t.beta, t.center[0], dir), {{t.center[0], true}}});
  } else if (auto a = model.as<Accumulating>()) {
    Accumulating copy = *a;
    out.push_back({TimeProfile{}, [copy](double y) { return accumulating_value(copy, y); }, model_breaks(model)});
  } else {
    return std::nullopt;
  }
  return out;
}

class TabulatedField final : public DriftField {
 public:
  TabulatedField(std::vector<Term1D> terms, MollifierSpec s, const TabulationOptions& opt)
      : terms_(std::move(terms)), s_(s) {
    s_.validate();
    if (!(opt.hi > opt.lo) || opt.nodes_per_eps < 4)
      throw ParameterError("tabulation: need hi > lo and nodes_per_eps >= 4");
    const double sc = s_.eps * s_.bump_radius;
    h_ = sc / opt.nodes_per_eps;
    lo_ = opt.lo;
    n_ = static_cast<std::size_t>(std::ceil((opt.hi - opt.lo) / h_)) + 1;
    constexpr std::size_t kMaxNodes = 50'000'000;
    if (n_ * terms_.size() > kMaxNodes) throw ParameterError("tabulation: table too large; narrow the range");
    hi_ = lo_ + h_ * static_cast<double>(n_ - 1);
    tables_.resize(terms_.size());
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      auto& tab = tables_[k];
      tab.resize(3 * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        const double x = lo_ + h_ * static_cast<double>(i);
        const Moll1D r = mollify_1d(terms_[k].g, terms_[k].breaks, x, sc, s_.quadrature_order, s_.panels_for(1), 2);
        tab[3 * i] = r.f;
        tab[3 * i + 1] = r.f1;
        tab[3 * i + 2] = r.f2;
      }
    }
  }

  int dim() const override { return 1; }

  Vec value(double t, const Vec& x) const override { return scalar_vec(eval(t, x[0], 0)); }
  Mat jacobian(double t, const Vec& x) const override {
    Mat j(1, 1);
    j(0, 0) = eval(t, x[0], 1);
    return j;
  }

 private:
  // which = 0: value from (f, f'); which = 1: derivative from (f', f'').
  double eval(double t, double x, int which) const {
    double out = 0.0;
    const bool inside = x >= lo_ && x < hi_;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const double a = terms_[k].a(t);
      if (a == 0.0) continue;
      if (!inside) {
        const Moll1D r = mollify_1d(terms_[k].g, terms_[k].breaks, x, s_.eps * s_.bump_radius,
                                    s_.quadrature_order, s_.panels_for(1), which);
        out += a * (which == 0 ? r.f : r.f1);
        continue;
      }
      const double u = (x - lo_) / h_;
      std::size_t i = static_cast<std::size_t>(u);
      if (i >= n_ - 1) i = n_ - 2;
      const double s = u - static_cast<double>(i);
      const double* p = &tables_[k][3 * i + which];
      const double f0 = p[0], m0 = p[1], f1 = p[3], m1 = p[4];
      const double s2 = s * s, s3 = s2 * s;
      out += a * ((2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * h_ * m0 + (-2 * s3 + 3 * s2) * f1 +
                  (s3 - s2) * h_ * m1);
    }
    return out;
  }

  std::vector<Term1D> terms_;
  MollifierSpec s_;
  double lo_ = 0.0, hi_ = 0.0, h_ = 0.0;
  std::size_t n_ = 0;
  std::vector<std::vector<double>> tables_;
};

}  // namespace

DriftFieldPtr make_drift_field(const DriftModel& model, double eps, FieldMode mode, const MollifierSpec& base,
                               const TabulationOptions& tab) {
  if (eps < 0.0) throw ParameterError("drift field: eps must be >= 0");
  if (eps == 0.0 || model.as<LipschitzTest>() || model.as<ZeroDrift>())
    return std::make_shared<RawField>(model);
  MollifierSpec s = base;
  s.eps = eps;
  if (mode == FieldMode::Tabulated) {
    if (auto terms = separate_terms(model)) return std::make_shared<TabulatedField>(std::move(*terms), s, tab);
  }
  return std::make_shared<DirectField>(model, s);
}

}  // namespace krbn
