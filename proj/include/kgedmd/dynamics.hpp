#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kgedmd/signal.hpp"
#include "kgedmd/types.hpp"

namespace kgedmd {

/// f(x, out): writes a state-space vector field evaluated at x into out.
using VectorField =
    std::function<void(const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out)>;
/// f(x, out): writes the n x s diffusion coefficient at x into out.
using MatrixField =
    std::function<void(const Eigen::Ref<const Vector>& x, Eigen::Ref<Matrix> out)>;

/// Control-affine SDE dX = (b(X) + sum_i G_i(X) u_i) dt + sigma(X) dW.
///
/// All callbacks must be pure; they are invoked concurrently by the simulator.
struct SdeModel {
  Index state_dim = 1;
  Index input_dim = 0;
  Index noise_dim = 1;
  VectorField drift;
  std::vector<VectorField> control_fields;
  MatrixField diffusion;
  /// When false the noise term is dropped (deterministic Euler integration).
  bool diffusion_enabled = true;
  std::string name;

  Vector drift_at(const Vector& x) const;
  Matrix diffusion_at(const Vector& x) const;
  /// Sigma(x) = sigma(x) sigma(x)^T; zero when diffusion is disabled.
  Matrix diffusion_matrix(const Vector& x) const;

  /// Throws ArgumentError when dimensions or callbacks are inconsistent.
  void validate() const;
};

/// b(x) + sum_i G_i(x) u_i.
Vector drift_controlled(const SdeModel& model, const Vector& x, const Vector& u);

struct DoubleWellParams {
  double k_dw = 1.0;
  double k_bias = 3.0;
  double beta = 1.0;
};

/// dX = -(V'(X) + K_bias (X - u)) dt + sqrt(2/beta) dW with V(x) = K_dw (x^2 - 1)^2.
SdeModel double_well(const DoubleWellParams& params);
/// dX = -k X dt + sqrt(2/beta) dW, no input.
SdeModel ornstein_uhlenbeck(double k, double beta);

double double_well_potential(const DoubleWellParams& params, double x);
/// Quadratic bias energies centred at -1 and +1.
double bias_energy_left(const DoubleWellParams& params, double x);
double bias_energy_right(const DoubleWellParams& params, double x);

/// Full Euler-Maruyama sample paths.
struct TrajectoryEnsemble {
  std::vector<double> time_grid;
  Index n_traj = 0;
  Index state_dim = 0;
  std::uint64_t seed = 0;
  /// states[i] is a state_dim x (K+1) matrix for trajectory i.
  std::vector<Matrix> states;

  Index steps() const { return static_cast<Index>(time_grid.size()) - 1; }
};

struct SimulationOptions {
  unsigned threads = 1;
  /// Any |x_j| beyond this aborts the run.
  double divergence_bound = 1e6;
};

using Observable = std::function<double(const Eigen::Ref<const Vector>&)>;

/// Pointwise-in-time sample statistics of several observables.
struct EnsembleStatistics {
  std::vector<double> time_grid;
  Index n_traj = 0;
  Matrix mean;      // n_obs x (K+1)
  Matrix variance;  // unbiased sample variance, n_obs x (K+1)

  /// Monte-Carlo standard error of mean(obs, k).
  double standard_error(Index obs, Index k) const;
};

/// X_{k+1} = X_k + drift_controlled(X_k, u(t_k)) dt + sigma(X_k) sqrt(dt) xi_k.
/// Every trajectory owns its own random stream, so the result depends only on
/// the arguments and not on the thread count.
TrajectoryEnsemble simulate_ensemble(const SdeModel& model, const InputSignal& signal,
                                     const Vector& x0, double dt, Index n_steps, Index n_traj,
                                     std::uint64_t seed, const SimulationOptions& options = {});

/// Same paths as simulate_ensemble, reduced to observable statistics on the fly
/// instead of being stored. Intended for large oracle ensembles.
EnsembleStatistics simulate_statistics(const SdeModel& model, const InputSignal& signal,
                                       const Vector& x0, double dt, Index n_steps, Index n_traj,
                                       std::uint64_t seed, const std::vector<Observable>& observables,
                                       const SimulationOptions& options = {});

/// Sample mean of the observable over trajectories at every grid time.
std::vector<double> empirical_expectation(const TrajectoryEnsemble& ensemble,
                                          const Observable& observable);

}  // namespace kgedmd
