#include "krbn/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "krbn/errors.hpp"
#include "krbn/parallel.hpp"

namespace krbn {

FrozenTrajectory::FrozenTrajectory(std::vector<double> grid, std::vector<Vec> v, Interpolation mode)
    : grid_(std::move(grid)), v_(std::move(v)), mode_(mode) {
  validate_grid(grid_);
  if (v_.size() != grid_.size()) throw ArgumentError("frozen trajectory: one velocity per grid node required");
  for (const auto& x : v_)
    if (!x.allFinite() || x.size() != v_.front().size())
      throw ArgumentError("frozen trajectory: velocities must be finite and of equal dimension");
}

FrozenTrajectory FrozenTrajectory::from_path(const KineticPath& path, Interpolation mode) {
  if (path.truncated) throw ArgumentError("frozen trajectory: path was truncated");
  return FrozenTrajectory(path.grid, path.V, mode);
}

Vec FrozenTrajectory::at(double s, std::size_t k) const {
  if (mode_ == Interpolation::Constant || k + 1 >= grid_.size()) return v_[k];
  const double w = (s - grid_[k]) / (grid_[k + 1] - grid_[k]);
  return (1.0 - w) * v_[k] + w * v_[k + 1];
}

Vec FrozenTrajectory::at(double s) const {
  if (s <= grid_.front()) return v_.front();
  if (s >= grid_.back()) return v_.back();
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), s);
  return at(s, static_cast<std::size_t>(it - grid_.begin()) - 1);
}

CharacteristicSolver::CharacteristicSolver(DriftFieldPtr field, FrozenTrajectory traj, CharacteristicOptions opt)
    : field_(std::move(field)), traj_(std::move(traj)), opt_(opt) {
  if (!field_) throw ArgumentError("characteristic solver: null drift field");
  if (field_->dim() != traj_.dim()) throw ArgumentError("characteristic solver: dimension mismatch");
}

CharacteristicResult CharacteristicSolver::characteristic(double t, const Vec& x, double tau, bool record) const {
  const auto& g = traj_.grid();
  if (!(t >= g.front() && t <= tau && tau <= g.back() * (1.0 + 1e-15)))
    throw ArgumentError("characteristic: need grid start <= t <= tau <= horizon");
  if (x.size() != traj_.dim()) throw ArgumentError("characteristic: dimension mismatch");
  if (!(opt_.max_step > 0.0)) throw NumericError("characteristic: step size must be positive");
  const int d = traj_.dim();
  CharacteristicResult res;
  Vec pos = x;
  Mat jac = Mat::Identity(d, d);
  Vec intf = Vec::Zero(d);
  double intg = 0.0;
  if (record) res.path.push_back({t, pos, jac});
  if (tau > t) {
    std::size_t k = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), t) - g.begin());
    k = k == 0 ? 0 : k - 1;
    if (k + 1 >= g.size()) k = g.size() - 2;
    double a = t;
    Vec fv, dx1, dx2, dx3, dx4, df1, df2, df3, df4;
    Mat gm, dj1, dj2, dj3, dj4;
    double dg1, dg2, dg3, dg4;
    auto rhs = [&](double r, std::size_t kk, const Vec& p, const Mat& j, Vec& dx, Mat& dj, Vec& df, double& dg) {
      fv = field_->value(r, p);
      gm = field_->jacobian(r, p);
      dx = traj_.at(r, kk) + fv;
      dj = gm * j;
      df = fv;
      dg = operator_norm(gm);
    };
    while (a < tau && k + 1 < g.size()) {
      const double b = std::min(tau, g[k + 1]);
      if (b > a) {
        const double n = std::ceil((b - a) / opt_.max_step);
        if (n > 1e8) throw NumericError("characteristic: step size underflow");
        const long steps = std::max(1L, static_cast<long>(n));
        const double h = (b - a) / static_cast<double>(steps);
        if (!(h > 0.0) || a + h == a) throw NumericError("characteristic: step size underflow");
        for (long i = 0; i < steps; ++i) {
          const double r = a + h * static_cast<double>(i);
          rhs(r, k, pos, jac, dx1, dj1, df1, dg1);
          rhs(r + 0.5 * h, k, pos + 0.5 * h * dx1, jac + 0.5 * h * dj1, dx2, dj2, df2, dg2);
          rhs(r + 0.5 * h, k, pos + 0.5 * h * dx2, jac + 0.5 * h * dj2, dx3, dj3, df3, dg3);
          rhs(r + h, k, pos + h * dx3, jac + h * dj3, dx4, dj4, df4, dg4);
          pos += h / 6.0 * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4);
          jac += h / 6.0 * (dj1 + 2.0 * dj2 + 2.0 * dj3 + dj4);
          intf += h / 6.0 * (df1 + 2.0 * df2 + 2.0 * df3 + df4);
          intg += h / 6.0 * (dg1 + 2.0 * dg2 + 2.0 * dg3 + dg4);
          if (record) res.path.push_back({i + 1 == steps ? b : r + h, pos, jac});
        }
      }
      a = b;
      ++k;
    }
  }
  if (!record) res.path.push_back({tau, pos, jac});
  res.integral_F = intf;
  res.integral_grad = intg;
  return res;
}

Vec CharacteristicSolver::u_eps(double t, const Vec& x, double tau) const {
  return -characteristic(t, x, tau).integral_F;
}

Mat CharacteristicSolver::grad_u_fd(double t, const Vec& x, double tau, double h) const {
  const int d = traj_.dim();
  Mat g(d, d);
  for (int j = 0; j < d; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g.col(j) = (u_eps(t, xp, tau) - u_eps(t, xm, tau)) / (2.0 * h);
  }
  return g;
}

GradIdentityReport CharacteristicSolver::grad_identity_report(double t, const Vec& x, double tau, double fd_step,
                                                              double tol) const {
  const int d = traj_.dim();
  const CharacteristicResult c = characteristic(t, x, tau);
  GradIdentityReport r;
  r.grad_fd = grad_u_fd(t, x, tau, fd_step);
  r.identity_form = Mat::Identity(d, d) - c.end().jacobian;
  r.max_gap = (r.grad_fd - r.identity_form).cwiseAbs().maxCoeff();
  r.jacobian_norm = operator_norm(c.end().jacobian);
  r.gronwall_bound = std::exp(c.integral_grad);
  r.identity_ok = r.max_gap <= tol;
  r.gronwall_ok = r.jacobian_norm <= r.gronwall_bound * (1.0 + 1e-8);
  return r;
}

GradIdentityReport CharacteristicSolver::grad_identity_check(double t, const Vec& x, double tau, double fd_step,
                                                             double tol) const {
  GradIdentityReport r = grad_identity_report(t, x, tau, fd_step, tol);
  if (!r.identity_ok || !r.gronwall_ok) {
    std::ostringstream os;
    os << "grad identity check failed at t=" << t << " tau=" << tau << ": max gap " << r.max_gap << " (tol " << tol
       << "), |grad X| " << r.jacobian_norm << " vs bound " << r.gronwall_bound;
    throw CheckFailure(os.str());
  }
  return r;
}

double CharacteristicSolver::transport_residual(double t, const Vec& x, double tau, double ht, double hx) const {
  // d_t u is continuous but the linear V has kinks at nodes; keep the stencil
  // inside one grid interval so the difference stays second order.
  const auto& g = traj_.grid();
  const auto kink = std::upper_bound(g.begin(), g.end(), t - ht);
  const bool straddles = kink != g.end() && *kink < t + ht;
  Vec dudt;
  if (!straddles)
    dudt = (u_eps(t + ht, x, tau) - u_eps(t - ht, x, tau)) / (2.0 * ht);
  else if (*kink <= t && t + 2.0 * ht <= tau)
    dudt = (-3.0 * u_eps(t, x, tau) + 4.0 * u_eps(t + ht, x, tau) - u_eps(t + 2.0 * ht, x, tau)) / (2.0 * ht);
  else
    dudt = (3.0 * u_eps(t, x, tau) - 4.0 * u_eps(t - ht, x, tau) + u_eps(t - 2.0 * ht, x, tau)) / (2.0 * ht);
  const Mat gu = grad_u_fd(t, x, tau, hx);
  const Vec f = field_->value(t, x);
  const Vec r = dudt + gu * (traj_.at(t) + f) - f;
  return r.cwiseAbs().maxCoeff();
}

CharacteristicResult characteristic(const DriftModel& model, double eps, const FrozenTrajectory& traj, double t,
                                    const Vec& x, double tau, bool record) {
  if (!(eps > 0.0)) throw ParameterError("characteristic: eps must be positive");
  return CharacteristicSolver(make_drift_field(model, eps), traj).characteristic(t, x, tau, record);
}

Vec u_eps(const DriftModel& model, double eps, const FrozenTrajectory& traj, double t, const Vec& x, double tau) {
  if (!(eps > 0.0)) throw ParameterError("u_eps: eps must be positive");
  return CharacteristicSolver(make_drift_field(model, eps), traj).u_eps(t, x, tau);
}

GradIdentityReport grad_identity_check(const DriftModel& model, double eps, const FrozenTrajectory& traj, double t,
                                       const Vec& x, double tau) {
  if (!(eps > 0.0)) throw ParameterError("grad_identity_check: eps must be positive");
  return CharacteristicSolver(make_drift_field(model, eps), traj).grad_identity_check(t, x, tau);
}

std::vector<MomentRow> grad_moments(const SystemSpec& spec, std::span<const double> eps_list, double q, double t,
                                    double tau, std::size_t paths, std::uint64_t seed, const MomentOptions& opt) {
  if (spec.noise.alpha != 2.0) throw UnsupportedError("grad_moments: requires Brownian noise (alpha = 2)");
  if (!(q >= 0.0)) throw ArgumentError("grad_moments: q must be >= 0");
  if (!(tau > t && t >= 0.0)) throw ArgumentError("grad_moments: need 0 <= t < tau");
  if (paths < 2) throw ArgumentError("grad_moments: need at least 2 paths");
  spec.validate(tau);
  const int d = spec.dim();
  State x0 = opt.x0;
  if (x0.v.size() == 0) x0.v = Vec::Zero(d);
  if (x0.x.size() == 0) x0.x = Vec::Zero(d);
  const std::vector<double> grid = uniform_grid(0.0, tau, static_cast<int>(opt.steps));
  const std::size_t kt = grid_index(grid, t);
  std::vector<double> starts = opt.start_times.empty() ? std::vector<double>{t} : opt.start_times;
  std::vector<std::size_t> start_idx;
  for (double s0 : starts) start_idx.push_back(grid_index(grid, s0));

  const auto raw = make_drift_field(spec.drift, 0.0);
  std::vector<FrozenTrajectory> trajs;
  std::vector<std::vector<Vec>> xs(paths);
  std::vector<std::vector<Vec>> vs(paths);
  std::vector<std::uint8_t> bad(paths, 0);
  parallel_for(paths, opt.workers, [&](std::size_t p) {
    Rng rng(seed, p);
    State s = x0;
    vs[p].reserve(grid.size());
    xs[p].reserve(grid.size());
    vs[p].push_back(s.v);
    xs[p].push_back(s.x);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double dt = grid[k + 1] - grid[k];
      const Vec dl = sample_increment(spec.noise, dt, rng);
      if (!bad[p] && !euler_step(spec, *raw, grid[k], dt, dl, s, 1e8)) bad[p] = 1;
      vs[p].push_back(s.v);
      xs[p].push_back(s.x);
    }
  });

  std::vector<MomentRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw ParameterError("grad_moments: eps must be positive");
    const auto field = make_drift_field(spec.drift, eps, opt.mode, opt.moll, opt.tab);
    std::vector<double> mom(paths, 0.0), ex(paths, 0.0);
    std::vector<std::vector<double>> gnorm(paths);
    parallel_for(paths, opt.workers, [&](std::size_t p) {
      if (bad[p]) return;
      CharacteristicSolver solver(field, FrozenTrajectory(grid, vs[p]), opt.characteristic);
      const CharacteristicResult c = solver.characteristic(t, xs[p][kt], tau);
      const double gu = operator_norm(Mat::Identity(d, d) - c.end().jacobian);
      mom[p] = q == 0.0 ? 1.0 : std::pow(gu, q);
      ex[p] = std::exp(q * c.integral_grad);
      gnorm[p].resize(grid.size());
      for (std::size_t k = 0; k < grid.size(); ++k) gnorm[p][k] = operator_norm(field->jacobian(grid[k], xs[p][k]));
    });
    std::vector<double> mk, ek;
    for (std::size_t p = 0; p < paths; ++p)
      if (!bad[p]) {
        mk.push_back(mom[p]);
        ek.push_back(ex[p]);
      }
    if (mk.size() < 2) throw NumericError("grad_moments: fewer than two untruncated paths");
    const MeanStat ms = mean_stat(mk), es = mean_stat(ek);
    MomentRow row;
    row.eps = eps;
    row.q = q;
    row.moment = ms.mean;
    row.std_error = ms.std_error;
    row.exp_moment = es.mean;
    row.exp_std_error = es.std_error;
    row.paths = mk.size();

    // E |grad F^(eps)(s, X_s)| per grid node, then the largest window delta
    // (a multiple of the step) with q * int_{t0}^{t0+delta} <= level for every start t0.
    std::vector<double> m(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<double> col;
      col.reserve(mk.size());
      for (std::size_t p = 0; p < paths; ++p)
        if (!bad[p]) col.push_back(gnorm[p][k]);
      m[k] = mean_stat(col).mean;
    }
    std::vector<double> cum(grid.size(), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) cum[k] = cum[k - 1] + 0.5 * (m[k - 1] + m[k]) * (grid[k] - grid[k - 1]);
    // Windows are clipped at tau; a start whose clipped window never exceeds the level imposes no limit.
    std::size_t best = grid.size() - 1;
    for (std::size_t i0 : start_idx) {
      std::size_t w = 0;
      while (i0 + w + 1 < grid.size() && q * (cum[i0 + w + 1] - cum[i0]) <= opt.khasminskii_level) ++w;
      if (i0 + w + 1 < grid.size()) best = std::min(best, w);
    }
    row.khasminskii_delta = grid[best] - grid[0];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace krbn
