#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kgedmd/features.hpp"
#include "kgedmd/gedmd.hpp"
#include "kgedmd/nelder_mead.hpp"
#include "kgedmd/propagation.hpp"
#include "kgedmd/signal.hpp"

namespace kgedmd {

struct WeightedObservable {
  ObservableCoeffs observable;
  double weight = 1.0;
};

/// weight * u_i(t) * E[phi(X_t)]; carries the cross term of a bias-energy penalty.
struct InputCoupling {
  ObservableCoeffs observable;
  double weight = 1.0;
  Index component = 0;
};

/// weight * (E[phi(X_t)] - reference(t))^2.
struct TrackingTerm {
  ObservableCoeffs observable;
  std::function<double(double)> reference;
  double weight = 1.0;
};

/// weight * (target - E[phi(X_T)])^2.
struct TerminalTarget {
  ObservableCoeffs observable;
  double target = 0.0;
  double weight = 1.0;
};

/// J(u) = int_0^T [ sum_j w_j E phi_j + c |u|^2 + sum_i w_i u_i E phi_i + w (E phi - r)^2 ] dt
///        + sum_j w_j E phi_j(X_T) + w (target - E phi(X_T))^2,
/// with expectations taken from the surrogate.
struct CostSpec {
  std::vector<WeightedObservable> running_state;
  double input_penalty = 0.0;
  std::vector<InputCoupling> input_coupling;
  std::optional<TrackingTerm> tracking;
  std::vector<WeightedObservable> terminal_expectation;
  std::optional<TerminalTarget> terminal_target;
};

/// int |E[X_t] - reference(t)|^2 dt.
CostSpec tracking_cost(const ObservableCoeffs& state, std::function<double(double)> reference);
/// int E[V(X_t)] + c |u|^2 dt + (target - E[X_T])^2.
CostSpec well_cost(const ObservableCoeffs& potential, const ObservableCoeffs& state, double c,
                   double target = 1.0);
/// int E[V(X_t)] + c (E[X_t^2] - 2 u E[X_t] + u^2) dt + (target - E[X_T])^2,
/// i.e. c E|X_t - u(t)|^2 expanded into moments.
CostSpec bias_cost(const ObservableCoeffs& potential, const ObservableCoeffs& state,
                   const ObservableCoeffs& second_moment, double c, double target = 1.0);

/// Nodes used by the trapezoidal rule.
enum class Quadrature {
  control,   // control-grid nodes t_0..t_K
  substeps,  // every propagation substep node
};

struct OptimizerConfig {
  int max_evaluations = 20000;  // per restart
  int restarts = 3;
  std::uint64_t seed = 0;
  double x_tolerance = 1e-6;
  double f_tolerance = 1e-10;
  double initial_step = 0.25;
  /// Standard deviation of the perturbation applied before each restart.
  double restart_perturbation = 0.1;
};

struct OcpProblem {
  double horizon = 1.0;
  Index intervals = 50;
  Vector x0;
  CostSpec cost;
  Vector lower;
  Vector upper;
  InputSignal initial_guess;
  OptimizerConfig optimizer;
  PropagationOptions propagation;
  Quadrature quadrature = Quadrature::control;

  double step() const { return horizon / static_cast<double>(intervals); }
  Index input_dim() const { return lower.size(); }
  /// Throws ConfigError on inconsistent fields.
  void validate() const;
};

struct CostBreakdown {
  double total = 0.0;
  double running_state = 0.0;
  double input = 0.0;
  double coupling = 0.0;
  double tracking = 0.0;
  double terminal = 0.0;
  bool diverged = false;
  std::string diagnostic;
};

/// One adjoint propagation, trapezoidal quadrature of the running terms and the
/// terminal terms at t_K. A diverging propagation yields total = +inf.
CostBreakdown evaluate_cost(const OcpProblem& problem, const GeneratorModel& model,
                            const InputSignal& signal);

struct TracePoint {
  int restart = 0;
  int iteration = 0;
  int evaluations = 0;
  /// Best cost seen so far over all restarts.
  double best = 0.0;
};

struct OcpSolution {
  InputSignal control;
  double cost = 0.0;
  CostBreakdown breakdown;
  std::vector<TracePoint> trace;
  int evaluations = 0;
};

/// Nelder-Mead over the stacked piecewise-constant input with box constraints
/// applied by clamping inside the objective. The first run starts from the
/// initial guess, later restarts from the incumbent plus a seeded perturbation.
OcpSolution solve_ocp(const OcpProblem& problem, const GeneratorModel& model);

}  // namespace kgedmd
