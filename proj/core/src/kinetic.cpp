#include "krbn/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "krbn/errors.hpp"
#include "krbn/parallel.hpp"
#include "krbn/quadrature.hpp"

namespace krbn {

SystemSpec SystemSpec::standard(const StableNoiseSpec& noise, const DriftModel& drift, double sigma_scale) {
  SystemSpec s;
  const int d = noise.dim;
  s.mu = [d](double, const Vec&) { return Vec::Zero(d).eval(); };
  s.sigma = [d, sigma_scale](double, const Vec&) { return (sigma_scale * Mat::Identity(d, d)).eval(); };
  s.drift = drift;
  s.noise = noise;
  if (sigma_scale != 0.0) {
    const double q = sigma_scale * sigma_scale;
    s.coercivity = std::max(q, 1.0 / q);
  }
  return s;
}

void SystemSpec::validate(double horizon, int samples, std::uint64_t seed) const {
  noise.validate();
  if (!mu || !sigma) throw ModelError("system: mu and sigma must be set");
  if (drift.dim() != noise.dim)
    throw ModelError("system: drift dimension " + std::to_string(drift.dim()) + " differs from noise dimension " +
                     std::to_string(noise.dim));
  if (!coercivity) return;
  const double lam = *coercivity;
  if (!(lam >= 1.0)) throw ModelError("system: coercivity constant must be >= 1");
  Rng rng(seed, 0);
  const int d = dim();
  for (int k = 0; k < samples; ++k) {
    const double t = horizon * rng.uniform();
    Vec v(d), eta(d);
    for (int i = 0; i < d; ++i) {
      v[i] = 3.0 * rng.normal();
      eta[i] = rng.normal();
    }
    const Mat sg = sigma(t, v);
    if (sg.rows() != d || sg.cols() != d) throw ModelError("system: sigma must be d x d");
    const double q = (sg.transpose() * eta).squaredNorm();
    const double e2 = eta.squaredNorm();
    const double slack = 1e-12 * e2;
    if (q < e2 / lam - slack || q > lam * e2 + slack) {
      throw ModelError("system: coercivity violated at t=" + std::to_string(t) + ": <ss*eta,eta>/|eta|^2 = " +
                       std::to_string(q / e2) + " outside [1/Lambda, Lambda] with Lambda=" + std::to_string(lam));
    }
  }
}

bool euler_step(const SystemSpec& spec, const DriftField& field, double t, double dt, const Vec& dl, State& s,
                double overflow) {
  const Vec f = field.value(t, s.x);
  const Vec vn = s.v + spec.mu(t, s.v) * dt + spec.sigma(t, s.v) * dl;
  s.x += 0.5 * (s.v + vn) * dt + f * dt;
  s.v = vn;
  return s.v.allFinite() && s.x.allFinite() && s.v.lpNorm<Eigen::Infinity>() <= overflow &&
         s.x.lpNorm<Eigen::Infinity>() <= overflow;
}

namespace {

void check_state(const SystemSpec& spec, const State& s) {
  if (s.v.size() != spec.dim() || s.x.size() != spec.dim())
    throw ArgumentError("initial state dimension does not match the system");
}

}  // namespace

KineticPath simulate(const SystemSpec& spec, const DriftField& field, const State& x0,
                     const NoiseIncrementStream& stream, const SimOptions& opt) {
  check_state(spec, x0);
  validate_grid(stream.grid);
  if (stream.increments.size() + 1 != stream.grid.size())
    throw ArgumentError("simulate: stream has " + std::to_string(stream.increments.size()) + " increments for " +
                        std::to_string(stream.grid.size() - 1) + " intervals");
  KineticPath p;
  p.grid = stream.grid;
  p.noise_ref = stream;
  p.V.reserve(p.grid.size());
  p.X.reserve(p.grid.size());
  State s = x0;
  p.V.push_back(s.v);
  p.X.push_back(s.x);
  for (std::size_t k = 0; k + 1 < p.grid.size(); ++k) {
    const double dt = p.grid[k + 1] - p.grid[k];
    if (!euler_step(spec, field, p.grid[k], dt, stream.increments[k], s, opt.overflow)) {
      p.truncated = true;
      break;
    }
    p.V.push_back(s.v);
    p.X.push_back(s.x);
  }
  return p;
}

KineticPath simulate(const SystemSpec& spec, const State& x0, const NoiseIncrementStream& stream, double eps,
                     const SimOptions& opt) {
  spec.validate(stream.grid.back());
  const auto field = make_drift_field(spec.drift, eps);
  return simulate(spec, *field, x0, stream, opt);
}

std::size_t grid_index(std::span<const double> grid, double t) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-9 * std::max(1.0, std::abs(t)));
  if (it == grid.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw ArgumentError("time " + std::to_string(t) + " is not a grid node");
  return static_cast<std::size_t>(it - grid.begin());
}

std::vector<double> Ensemble::x_component(std::size_t k, int comp) const {
  std::vector<double> out;
  out.reserve(states.at(k).size());
  for (std::size_t p = 0; p < states[k].size(); ++p)
    if (!truncated[p]) out.push_back(states[k][p].x[comp]);
  return out;
}

std::vector<double> Ensemble::v_component(std::size_t k, int comp) const {
  std::vector<double> out;
  out.reserve(states.at(k).size());
  for (std::size_t p = 0; p < states[k].size(); ++p)
    if (!truncated[p]) out.push_back(states[k][p].v[comp]);
  return out;
}

Ensemble simulate_ensemble(const SystemSpec& spec, const DriftField& field, const State& x0,
                           std::span<const double> grid, const EnsembleOptions& opt) {
  spec.validate(grid.back());
  check_state(spec, x0);
  validate_grid(grid);
  if (opt.paths == 0) throw ArgumentError("simulate_ensemble: paths must be >= 1");
  Ensemble e;
  e.times = opt.snapshot_times;
  if (e.times.empty()) e.times.push_back(grid.back());
  std::vector<std::size_t> idx;
  for (double t : e.times) idx.push_back(grid_index(grid, t));
  e.states.assign(e.times.size(), std::vector<State>(opt.paths));
  e.truncated.assign(opt.paths, 0);
  parallel_for(opt.paths, opt.workers, [&](std::size_t p) {
    Rng rng(opt.seed, p);
    State s = x0;
    bool ok = true;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (std::size_t j = 0; j < idx.size(); ++j)
        if (idx[j] == k) e.states[j][p] = s;
      if (k + 1 == grid.size()) break;
      const double dt = grid[k + 1] - grid[k];
      const Vec dl = sample_increment(spec.noise, dt, rng);
      if (ok && !euler_step(spec, field, grid[k], dt, dl, s, opt.sim.overflow)) ok = false;
    }
    if (!ok) e.truncated[p] = 1;
  });
  e.truncated_count = static_cast<std::size_t>(std::count(e.truncated.begin(), e.truncated.end(), 1));
  return e;
}

State flow_theta(const SystemSpec& spec, const DriftField& field, double t, double s, const Vec& v, const Vec& x,
                 const FlowOptions& opt) {
  if (s < t) throw ArgumentError("flow_theta: need t <= s");
  if (v.size() != spec.dim() || x.size() != spec.dim()) throw ArgumentError("flow_theta: dimension mismatch");
  State st{v, x};
  if (s == t) return st;
  if (!(opt.max_step > 0.0)) throw NumericError("flow_theta: step size must be positive");
  const double steps_d = std::ceil((s - t) / opt.max_step);
  if (steps_d > 1e8) throw NumericError("flow_theta: step size underflow (more than 1e8 steps)");
  const long steps = static_cast<long>(steps_d);
  const double h = (s - t) / static_cast<double>(steps);
  if (!(h > 0.0) || t + h == t) throw NumericError("flow_theta: step size underflow");
  auto rhs = [&](double r, const Vec& vv, const Vec& xx, Vec& dv, Vec& dx) {
    dv = spec.mu(r, vv);
    dx = vv + field.value(r, xx);
  };
  Vec k1v, k1x, k2v, k2x, k3v, k3x, k4v, k4x;
  for (long i = 0; i < steps; ++i) {
    const double r = t + h * static_cast<double>(i);
    rhs(r, st.v, st.x, k1v, k1x);
    rhs(r + 0.5 * h, st.v + 0.5 * h * k1v, st.x + 0.5 * h * k1x, k2v, k2x);
    rhs(r + 0.5 * h, st.v + 0.5 * h * k2v, st.x + 0.5 * h * k2x, k3v, k3x);
    rhs(r + h, st.v + h * k3v, st.x + h * k3x, k4v, k4x);
    st.v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    st.x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  }
  return st;
}

State flow_theta(const SystemSpec& spec, double eps, double t, double s, const Vec& v, const Vec& x,
                 const FlowOptions& opt) {
  if (!(eps > 0.0)) throw ParameterError("flow_theta: eps must be positive");
  const auto field = make_drift_field(spec.drift, eps);
  return flow_theta(spec, *field, t, s, v, x, opt);
}

GapStats uniqueness_gap(const SystemSpec& spec, const State& x0, std::pair<double, double> eps_pair,
                        std::size_t paths, std::uint64_t seed, std::span<const double> grid, const GapOptions& opt) {
  if (paths < 1) throw ArgumentError("uniqueness_gap: paths must be >= 1");
  spec.validate(grid.back());
  check_state(spec, x0);
  validate_grid(grid);
  const auto f1 = make_drift_field(spec.drift, eps_pair.first, opt.mode, opt.moll, opt.tab);
  const auto f2 = eps_pair.second == eps_pair.first
                      ? f1
                      : make_drift_field(spec.drift, eps_pair.second, opt.mode, opt.moll, opt.tab);
  std::vector<double> gap(paths, 0.0);
  std::vector<std::uint8_t> bad(paths, 0);
  parallel_for(paths, opt.workers, [&](std::size_t p) {
    Rng rng(seed, p);
    State a = x0, b = x0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double dt = grid[k + 1] - grid[k];
      const Vec dl = sample_increment(spec.noise, dt, rng);
      const bool ok1 = euler_step(spec, *f1, grid[k], dt, dl, a, opt.sim.overflow);
      const bool ok2 = euler_step(spec, *f2, grid[k], dt, dl, b, opt.sim.overflow);
      if (!ok1 || !ok2) {
        bad[p] = 1;
        return;
      }
    }
    gap[p] = (a.x - b.x).norm();
  });
  std::vector<double> kept;
  for (std::size_t p = 0; p < paths; ++p)
    if (!bad[p]) kept.push_back(gap[p]);
  GapStats g;
  g.paths = kept.size();
  g.truncated = paths - kept.size();
  if (kept.empty()) return g;
  const MeanStat m = mean_stat(kept);
  g.mean = m.mean;
  g.mean_se = m.std_error;
  g.max = *std::max_element(kept.begin(), kept.end());
  return g;
}

BranchingReport peano_branching(double beta, double T, int points) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("peano_branching: beta must lie in (0, 1)");
  if (!(T > 0.0) || points < 1) throw ArgumentError("peano_branching: need T > 0 and points >= 1");
  BranchingReport r;
  r.beta = beta;
  const double p = 1.0 / (1.0 - beta);
  auto branch = [&](double t) { return std::pow((1.0 - beta) * t, p); };
  AdaptiveOptions opt{1e-15, 1e-13, 4000};
  for (int i = 1; i <= points; ++i) {
    const double t = T * i / points;
    BranchRow row;
    row.t = t;
    row.branch = branch(t);
    row.integral = integrate_gk15([&](double s) { return std::pow(std::abs(branch(s)), beta); }, 0.0, t, opt).value;
    row.residual = std::abs(row.branch - row.integral);
    r.max_residual = std::max(r.max_residual, row.residual);
    r.rows.push_back(row);
  }
  r.zero_residual =
      std::abs(integrate_gk15([&](double) { return std::pow(0.0, beta); }, 0.0, T, opt).value);
  return r;
}

}  // namespace krbn
