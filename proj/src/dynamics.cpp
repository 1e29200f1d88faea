#include "kgedmd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kgedmd/errors.hpp"
#include "kgedmd/parallel.hpp"
#include "kgedmd/random.hpp"

namespace kgedmd {

Vector SdeModel::drift_at(const Vector& x) const {
  Vector out(state_dim);
  drift(x, out);
  return out;
}

Matrix SdeModel::diffusion_at(const Vector& x) const {
  Matrix out = Matrix::Zero(state_dim, noise_dim);
  if (diffusion_enabled) diffusion(x, out);
  return out;
}

Matrix SdeModel::diffusion_matrix(const Vector& x) const {
  Matrix s = diffusion_at(x);
  return s * s.transpose();
}

void SdeModel::validate() const {
  if (state_dim < 1 || noise_dim < 1 || input_dim < 0) {
    throw ArgumentError("SdeModel: dimensions must be positive");
  }
  if (!drift || !diffusion) throw ArgumentError("SdeModel: drift and diffusion are required");
  if (static_cast<Index>(control_fields.size()) != input_dim) {
    throw ArgumentError("SdeModel: number of control fields does not match input_dim");
  }
  for (const auto& g : control_fields) {
    if (!g) throw ArgumentError("SdeModel: empty control field");
  }
}

Vector drift_controlled(const SdeModel& model, const Vector& x, const Vector& u) {
  if (x.size() != model.state_dim) {
    throw ArgumentError("drift_controlled: state has dimension " + std::to_string(x.size()) +
                        ", model expects " + std::to_string(model.state_dim));
  }
  if (u.size() != model.input_dim) {
    throw ArgumentError("drift_controlled: input has dimension " + std::to_string(u.size()) +
                        ", model expects " + std::to_string(model.input_dim));
  }
  Vector out(model.state_dim);
  model.drift(x, out);
  Vector g(model.state_dim);
  for (Index i = 0; i < model.input_dim; ++i) {
    model.control_fields[static_cast<std::size_t>(i)](x, g);
    out += g * u(i);
  }
  return out;
}

SdeModel double_well(const DoubleWellParams& p) {
  if (!(p.k_dw > 0.0) || !(p.k_bias > 0.0) || !(p.beta > 0.0)) {
    throw ArgumentError("double_well: K_dw, K_bias and beta must be positive");
  }
  SdeModel m;
  m.state_dim = 1;
  m.input_dim = 1;
  m.noise_dim = 1;
  m.drift = [p](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) {
    const double y = x(0);
    out(0) = -4.0 * p.k_dw * y * (y * y - 1.0) - p.k_bias * y;
  };
  m.control_fields.push_back(
      [p](const Eigen::Ref<const Vector>&, Eigen::Ref<Vector> out) { out(0) = p.k_bias; });
  const double sigma = std::sqrt(2.0 / p.beta);
  m.diffusion = [sigma](const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix> out) {
    out(0, 0) = sigma;
  };
  std::ostringstream name;
  name << "double_well(K_dw=" << p.k_dw << ", K_bias=" << p.k_bias << ", beta=" << p.beta << ")";
  m.name = name.str();
  return m;
}

SdeModel ornstein_uhlenbeck(double k, double beta) {
  if (!(beta > 0.0)) throw ArgumentError("ornstein_uhlenbeck: beta must be positive");
  SdeModel m;
  m.state_dim = 1;
  m.input_dim = 0;
  m.noise_dim = 1;
  m.drift = [k](const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> out) { out(0) = -k * x(0); };
  const double sigma = std::sqrt(2.0 / beta);
  m.diffusion = [sigma](const Eigen::Ref<const Vector>&, Eigen::Ref<Matrix> out) {
    out(0, 0) = sigma;
  };
  m.name = "ornstein_uhlenbeck";
  return m;
}

double double_well_potential(const DoubleWellParams& p, double x) {
  const double s = x * x - 1.0;
  return p.k_dw * s * s;
}

double bias_energy_left(const DoubleWellParams& p, double x) {
  return 0.5 * p.k_bias * (x + 1.0) * (x + 1.0);
}

double bias_energy_right(const DoubleWellParams& p, double x) {
  return 0.5 * p.k_bias * (x - 1.0) * (x - 1.0);
}

double EnsembleStatistics::standard_error(Index obs, Index k) const {
  if (n_traj < 2) return 0.0;
  return std::sqrt(variance(obs, k) / static_cast<double>(n_traj));
}

namespace {

void check_simulation_args(const SdeModel& model, const InputSignal& signal, const Vector& x0,
                           double dt, Index n_steps, Index n_traj) {
  model.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("simulate: dt must be positive");
  if (n_steps < 1 || n_traj < 1) throw ArgumentError("simulate: n_steps and n_traj must be positive");
  if (x0.size() != model.state_dim) throw ArgumentError("simulate: x0 has wrong dimension");
  if (signal.input_dim() != model.input_dim) {
    throw ArgumentError("simulate: signal input dimension does not match the model");
  }
  const double horizon = dt * static_cast<double>(n_steps);
  if (signal.horizon() < horizon * (1.0 - 1e-12)) {
    throw ArgumentError("simulate: signal horizon is shorter than n_steps * dt");
  }
}

std::vector<double> uniform_grid(double dt, Index n_steps) {
  std::vector<double> grid(static_cast<std::size_t>(n_steps) + 1);
  for (Index k = 0; k <= n_steps; ++k) grid[static_cast<std::size_t>(k)] = dt * static_cast<double>(k);
  return grid;
}

/// Integrates one path and hands every visited state (including x0) to `visit(k, x)`.
template <typename Visit>
void run_path(const SdeModel& model, const Matrix& inputs_per_step, const Vector& x0, double dt,
              Index n_steps, std::uint64_t seed, std::size_t traj, double bound, Visit&& visit) {
  auto rng = make_stream(seed, traj);
  StandardNormal normal;
  const Index n = model.state_dim;
  const Index s = model.noise_dim;
  const double sqrt_dt = std::sqrt(dt);
  Vector x = x0;
  Vector b(n), g(n), xi(s);
  Matrix sigma = Matrix::Zero(n, s);
  visit(Index{0}, x);
  for (Index k = 0; k < n_steps; ++k) {
    model.drift(x, b);
    for (Index i = 0; i < model.input_dim; ++i) {
      model.control_fields[static_cast<std::size_t>(i)](x, g);
      b += g * inputs_per_step(i, k);
    }
    if (model.diffusion_enabled) {
      model.diffusion(x, sigma);
      for (Index j = 0; j < s; ++j) xi(j) = normal(rng);
      x += b * dt + sigma * xi * sqrt_dt;
    } else {
      x += b * dt;
    }
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > bound) {
      throw SimulationDiverged("simulation diverged in trajectory " + std::to_string(traj) +
                                   " at step " + std::to_string(k + 1),
                               traj, static_cast<std::size_t>(k + 1));
    }
    visit(k + 1, x);
  }
}

Matrix inputs_per_step(const InputSignal& signal, double dt, Index n_steps) {
  Matrix u(signal.input_dim(), n_steps);
  for (Index k = 0; k < n_steps; ++k) u.col(k) = signal.at(dt * static_cast<double>(k));
  return u;
}

}  // namespace

TrajectoryEnsemble simulate_ensemble(const SdeModel& model, const InputSignal& signal,
                                     const Vector& x0, double dt, Index n_steps, Index n_traj,
                                     std::uint64_t seed, const SimulationOptions& options) {
  check_simulation_args(model, signal, x0, dt, n_steps, n_traj);
  TrajectoryEnsemble ens;
  ens.time_grid = uniform_grid(dt, n_steps);
  ens.n_traj = n_traj;
  ens.state_dim = model.state_dim;
  ens.seed = seed;
  ens.states.assign(static_cast<std::size_t>(n_traj), Matrix(model.state_dim, n_steps + 1));
  const Matrix u = inputs_per_step(signal, dt, n_steps);
  parallel_for(static_cast<std::size_t>(n_traj), options.threads, [&](std::size_t i) {
    Matrix& path = ens.states[i];
    run_path(model, u, x0, dt, n_steps, seed, i, options.divergence_bound,
             [&](Index k, const Vector& x) { path.col(k) = x; });
  });
  return ens;
}

EnsembleStatistics simulate_statistics(const SdeModel& model, const InputSignal& signal,
                                       const Vector& x0, double dt, Index n_steps, Index n_traj,
                                       std::uint64_t seed, const std::vector<Observable>& observables,
                                       const SimulationOptions& options) {
  check_simulation_args(model, signal, x0, dt, n_steps, n_traj);
  const auto n_obs = static_cast<Index>(observables.size());
  const Matrix u = inputs_per_step(signal, dt, n_steps);

  // Welford accumulation inside fixed-size blocks, then an ordered Chan merge:
  // the floating-point result is independent of the worker count.
  constexpr Index kBlock = 256;
  const Index n_blocks = (n_traj + kBlock - 1) / kBlock;
  struct Block {
    Index count = 0;
    Matrix mean, m2;
  };
  std::vector<Block> blocks(static_cast<std::size_t>(n_blocks));
  parallel_for(static_cast<std::size_t>(n_blocks), options.threads, [&](std::size_t b) {
    Block& blk = blocks[b];
    blk.mean = Matrix::Zero(n_obs, n_steps + 1);
    blk.m2 = Matrix::Zero(n_obs, n_steps + 1);
    const Index first = static_cast<Index>(b) * kBlock;
    const Index last = std::min(n_traj, first + kBlock);
    for (Index i = first; i < last; ++i) {
      const double count = static_cast<double>(++blk.count);
      run_path(model, u, x0, dt, n_steps, seed, static_cast<std::size_t>(i),
               options.divergence_bound, [&](Index k, const Vector& x) {
                 for (Index o = 0; o < n_obs; ++o) {
                   const double v = observables[static_cast<std::size_t>(o)](x);
                   const double delta = v - blk.mean(o, k);
                   blk.mean(o, k) += delta / count;
                   blk.m2(o, k) += delta * (v - blk.mean(o, k));
                 }
               });
    }
  });

  EnsembleStatistics stats;
  stats.time_grid = uniform_grid(dt, n_steps);
  stats.n_traj = n_traj;
  Matrix mean = Matrix::Zero(n_obs, n_steps + 1);
  Matrix m2 = Matrix::Zero(n_obs, n_steps + 1);
  double count = 0.0;
  for (const Block& blk : blocks) {
    const double nb = static_cast<double>(blk.count);
    const double total = count + nb;
    Matrix delta = blk.mean - mean;
    mean += delta * (nb / total);
    m2 += blk.m2 + delta.cwiseProduct(delta) * (count * nb / total);
    count = total;
  }
  if (!mean.allFinite()) throw NumericalError("simulate_statistics: non-finite observable value");
  stats.mean = std::move(mean);
  stats.variance = n_traj > 1 ? Matrix(m2 / (count - 1.0)) : Matrix::Zero(n_obs, n_steps + 1);
  return stats;
}

std::vector<double> empirical_expectation(const TrajectoryEnsemble& ensemble,
                                          const Observable& observable) {
  if (ensemble.n_traj < 1 || ensemble.states.empty()) {
    throw ArgumentError("empirical_expectation: empty ensemble");
  }
  const std::size_t nt = ensemble.time_grid.size();
  std::vector<double> out(nt, 0.0);
  for (const Matrix& path : ensemble.states) {
    for (std::size_t k = 0; k < nt; ++k) {
      out[k] += observable(path.col(static_cast<Index>(k)));
    }
  }
  const double inv = 1.0 / static_cast<double>(ensemble.n_traj);
  for (std::size_t k = 0; k < nt; ++k) {
    out[k] *= inv;
    if (!std::isfinite(out[k])) {
      throw NumericalError("empirical_expectation: non-finite observable value at step " +
                           std::to_string(k));
    }
  }
  return out;
}

}  // namespace kgedmd
