#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "krbn/drift.hpp"
#include "krbn/kinetic.hpp"
#include "krbn/linalg.hpp"

namespace krbn {

enum class Interpolation { Linear, Constant };

// A velocity path V_s(omega) treated as data. Constant mode uses the left
// node value on [t_k, t_{k+1}).
class FrozenTrajectory {
 public:
  FrozenTrajectory(std::vector<double> grid, std::vector<Vec> v, Interpolation mode = Interpolation::Linear);
  static FrozenTrajectory from_path(const KineticPath& path, Interpolation mode = Interpolation::Linear);

  // Velocity at s inside interval k (grid[k] <= s <= grid[k+1]).
  Vec at(double s, std::size_t k) const;
  Vec at(double s) const;
  const std::vector<double>& grid() const { return grid_; }
  double horizon() const { return grid_.back(); }
  int dim() const { return static_cast<int>(v_.front().size()); }
  Interpolation mode() const { return mode_; }

 private:
  std::vector<double> grid_;
  std::vector<Vec> v_;
  Interpolation mode_;
};

// Position X_s^{eps,t,x} and Jacobian grad_x X_s (identity at s = t).
struct CharacteristicState {
  double s = 0.0;
  Vec position;
  Mat jacobian;
};

struct CharacteristicResult {
  std::vector<CharacteristicState> path;  // every RK node when recorded, else only the end point
  Vec integral_F;             // int_t^tau F^(eps)(s, X_s) ds
  double integral_grad = 0.0; // int_t^tau |grad F^(eps)(s, X_s)| ds, spectral norm
  const CharacteristicState& end() const { return path.back(); }
};

struct CharacteristicOptions {
  double max_step = 1e-3;
};

struct GradIdentityReport {
  Mat grad_fd;        // central differences of u_eps
  Mat identity_form;  // I - grad_x X_tau
  double max_gap = 0.0;
  double jacobian_norm = 0.0;   // |grad_x X_tau|
  double gronwall_bound = 0.0;  // exp(int |grad F^(eps)|)
  bool identity_ok = false;
  bool gronwall_ok = false;
};

// d/ds f = V_s + F^(eps)(s, f), integrated with RK4 jointly with the
// variational equation d/ds J = grad F^(eps) J and the running integrals of
// F^(eps) and |grad F^(eps)|. Steps are aligned to the trajectory grid.
class CharacteristicSolver {
 public:
  CharacteristicSolver(DriftFieldPtr field, FrozenTrajectory traj, CharacteristicOptions opt = {});

  // Throws ArgumentError unless t <= tau <= horizon, NumericError on step underflow.
  CharacteristicResult characteristic(double t, const Vec& x, double tau, bool record = false) const;
  // u_eps(t, x) = -int_t^tau F^(eps)(s, X_s^{t,x}) ds.
  Vec u_eps(double t, const Vec& x, double tau) const;
  // Central differences of u_eps in x; column j is d/dx_j.
  Mat grad_u_fd(double t, const Vec& x, double tau, double h = 1e-4) const;
  GradIdentityReport grad_identity_report(double t, const Vec& x, double tau, double fd_step = 1e-4,
                                          double tol = 1e-4) const;
  // As the report, throwing CheckFailure with the gap diagnostics on failure.
  GradIdentityReport grad_identity_check(double t, const Vec& x, double tau, double fd_step = 1e-4,
                                         double tol = 1e-4) const;
  // Max over components of |d_t u + grad u (V(t) + F^(eps)(t,x)) - F^(eps)(t,x)| by central differences.
  double transport_residual(double t, const Vec& x, double tau, double ht = 1e-4, double hx = 1e-4) const;

  const DriftField& field() const { return *field_; }
  const FrozenTrajectory& trajectory() const { return traj_; }

 private:
  DriftFieldPtr field_;
  FrozenTrajectory traj_;
  CharacteristicOptions opt_;
};

// Convenience forms with a directly mollified drift (eps > 0).
CharacteristicResult characteristic(const DriftModel& model, double eps, const FrozenTrajectory& traj, double t,
                                    const Vec& x, double tau, bool record = true);
Vec u_eps(const DriftModel& model, double eps, const FrozenTrajectory& traj, double t, const Vec& x, double tau);
GradIdentityReport grad_identity_check(const DriftModel& model, double eps, const FrozenTrajectory& traj, double t,
                                       const Vec& x, double tau);

struct MomentOptions {
  State x0;                         // start of the simulated system at time 0
  std::size_t steps = 200;          // Euler grid on [0, tau]
  std::vector<double> start_times;  // Khasminskii start grid (default t)
  double khasminskii_level = 0.5;
  unsigned workers = 1;
  FieldMode mode = FieldMode::Tabulated;
  MollifierSpec moll;
  TabulationOptions tab;
  CharacteristicOptions characteristic;
};

struct MomentRow {
  double eps = 0.0;
  double q = 0.0;
  double moment = 0.0;      // E |grad u_eps(t, X_t)|^q
  double std_error = 0.0;
  double exp_moment = 0.0;  // E exp(q int_t^tau |grad F^(eps)| ds) along the characteristic
  double exp_std_error = 0.0;
  double khasminskii_delta = 0.0;
  std::size_t paths = 0;
};

// Simulates (V, X) with the raw drift, freezes each V path, and evaluates
// grad u_eps(t, X_t) = I - grad_x X_tau per path. All eps share the same noise
// paths. Requires alpha = 2 (UnsupportedError otherwise).
std::vector<MomentRow> grad_moments(const SystemSpec& spec, std::span<const double> eps_list, double q, double t,
                                    double tau, std::size_t paths, std::uint64_t seed, const MomentOptions& opt);

}  // namespace krbn
