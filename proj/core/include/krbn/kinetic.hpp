#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "krbn/drift.hpp"
#include "krbn/linalg.hpp"
#include "krbn/stable_noise.hpp"

namespace krbn {

using VelocityDrift = std::function<Vec(double t, const Vec& v)>;
using Diffusion = std::function<Mat(double t, const Vec& v)>;

// dV = mu(t, V) dt + sigma(t, V-) dL,   dX = (V + F(t, X)) dt.
struct SystemSpec {
  VelocityDrift mu;
  Diffusion sigma;
  DriftModel drift;
  StableNoiseSpec noise;
  // Lambda in Lambda^{-1}|eta|^2 <= <sigma sigma^T eta, eta> <= Lambda |eta|^2.
  // Empty disables the check (degenerate controls such as sigma = 0).
  std::optional<double> coercivity;

  // mu = 0, sigma = sigma_scale * I, coercivity max(s^2, s^-2) unless sigma_scale = 0.
  static SystemSpec standard(const StableNoiseSpec& noise, const DriftModel& drift, double sigma_scale = 1.0);

  int dim() const { return noise.dim; }
  // Dimension consistency plus a coercivity spot check on random (t, v, eta)
  // triples over [0, horizon]; throws ModelError.
  void validate(double horizon = 1.0, int samples = 64, std::uint64_t seed = 0xC0E5) const;
};

struct State {
  Vec v;
  Vec x;
};

struct KineticPath {
  std::vector<double> grid;
  std::vector<Vec> V;
  std::vector<Vec> X;
  NoiseIncrementStream noise_ref;
  bool truncated = false;  // overflow guard fired; V, X stop at the last finite node
};

struct SimOptions {
  double overflow = 1e8;  // |V| or |X| beyond this aborts the path
};

// Euler scheme: V gets the left-endpoint drift plus the exact-in-law noise
// increment; X moves by the trapezoid (V_k + V_{k+1}) dt / 2 plus F(t_k, X_k) dt.
KineticPath simulate(const SystemSpec& spec, const DriftField& field, const State& x0,
                     const NoiseIncrementStream& stream, const SimOptions& opt = {});
// eps = 0 uses raw F, eps > 0 the mollified drift (direct quadrature).
KineticPath simulate(const SystemSpec& spec, const State& x0, const NoiseIncrementStream& stream, double eps,
                     const SimOptions& opt = {});

// One Euler step; exposed for callers that run their own path loops.
// Returns false when the overflow guard fires.
bool euler_step(const SystemSpec& spec, const DriftField& field, double t, double dt, const Vec& dl, State& s,
                double overflow);

struct EnsembleOptions {
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::vector<double> snapshot_times;  // each must be a grid node
  SimOptions sim;
};

// Snapshots of many independent paths. Path p draws its increments from
// Rng(seed, p), identical to sample_stream(spec.noise, grid, seed, p).
struct Ensemble {
  std::vector<double> times;
  std::vector<std::vector<State>> states;  // [snapshot][path]
  std::vector<std::uint8_t> truncated;     // per path
  std::size_t truncated_count = 0;

  // Component `comp` of X at snapshot k over non-truncated paths.
  std::vector<double> x_component(std::size_t k, int comp = 0) const;
  std::vector<double> v_component(std::size_t k, int comp = 0) const;
};

Ensemble simulate_ensemble(const SystemSpec& spec, const DriftField& field, const State& x0,
                           std::span<const double> grid, const EnsembleOptions& opt);

// Index of t in grid (within 1e-9 relative); throws ArgumentError if absent.
std::size_t grid_index(std::span<const double> grid, double t);

struct FlowOptions {
  double max_step = 1e-3;
};

// theta_{s,t}(v, x): d/dr theta = (mu(r, theta_1), theta_1 + F^(eps)(r, theta_2)),
// theta_{t,t} = (v, x), classical RK4 with a fixed step <= max_step.
State flow_theta(const SystemSpec& spec, const DriftField& field, double t, double s, const Vec& v, const Vec& x,
                 const FlowOptions& opt = {});
State flow_theta(const SystemSpec& spec, double eps, double t, double s, const Vec& v, const Vec& x,
                 const FlowOptions& opt = {});

struct GapStats {
  double mean = 0.0;
  double mean_se = 0.0;
  double max = 0.0;
  std::size_t paths = 0;
  std::size_t truncated = 0;
};

struct GapOptions {
  unsigned workers = 1;
  FieldMode mode = FieldMode::Tabulated;
  MollifierSpec moll;
  TabulationOptions tab;
  SimOptions sim;
};

// Two X-solutions per noise path sharing one V trajectory, with drifts
// mollified at eps_pair.first and eps_pair.second (0 = raw F).
// Statistics of |X_T - X'_T| at the final grid node.
GapStats uniqueness_gap(const SystemSpec& spec, const State& x0, std::pair<double, double> eps_pair,
                        std::size_t paths, std::uint64_t seed, std::span<const double> grid,
                        const GapOptions& opt = {});

struct BranchRow {
  double t = 0.0;
  double branch = 0.0;    // ((1 - beta) t)^{1/(1 - beta)}
  double integral = 0.0;  // int_0^t branch(s)^beta ds
  double residual = 0.0;
};

struct BranchingReport {
  double beta = 0.0;
  double zero_residual = 0.0;  // for x = 0, exactly 0
  double max_residual = 0.0;   // for the nontrivial branch
  std::vector<BranchRow> rows;
};

// Two solutions of x' = |x|^beta, x(0) = 0 on [0, T] checked against the
// integral equation at `points` times by adaptive quadrature.
BranchingReport peano_branching(double beta, double T, int points = 20);

}  // namespace krbn
