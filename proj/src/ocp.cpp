#include "kgedmd/ocp.hpp"

#include <cmath>
#include <limits>

#include "kgedmd/errors.hpp"
#include "kgedmd/random.hpp"

namespace kgedmd {

CostSpec tracking_cost(const ObservableCoeffs& state, std::function<double(double)> reference) {
  CostSpec cost;
  cost.tracking = TrackingTerm{state, std::move(reference), 1.0};
  return cost;
}

CostSpec well_cost(const ObservableCoeffs& potential, const ObservableCoeffs& state, double c,
                   double target) {
  CostSpec cost;
  cost.running_state.push_back({potential, 1.0});
  cost.input_penalty = c;
  cost.terminal_target = TerminalTarget{state, target, 1.0};
  return cost;
}

CostSpec bias_cost(const ObservableCoeffs& potential, const ObservableCoeffs& state,
                   const ObservableCoeffs& second_moment, double c, double target) {
  CostSpec cost;
  cost.running_state.push_back({potential, 1.0});
  cost.running_state.push_back({second_moment, c});
  cost.input_coupling.push_back({state, -2.0 * c, 0});
  cost.input_penalty = c;
  cost.terminal_target = TerminalTarget{state, target, 1.0};
  return cost;
}

void OcpProblem::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("OCP: horizon must be positive");
  if (intervals < 1) throw ConfigError("OCP: need at least one control interval");
  if (lower.size() != upper.size() || lower.size() < 1) {
    throw ConfigError("OCP: bounds must be given for every input component");
  }
  for (Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) < upper(i))) throw ConfigError("OCP: lower bound must be below upper bound");
  }
  if (initial_guess.intervals() != intervals || initial_guess.input_dim() != lower.size()) {
    throw ConfigError("OCP: initial guess does not match the control grid");
  }
  if (std::abs(initial_guess.step() - step()) > 1e-12 * step()) {
    throw ConfigError("OCP: initial guess step does not match horizon / intervals");
  }
  for (Index k = 0; k < intervals; ++k) {
    const Vector u = initial_guess.value(k);
    if ((u.array() < lower.array()).any() || (u.array() > upper.array()).any()) {
      throw ConfigError("OCP: initial guess violates the bounds");
    }
  }
  if (cost.input_penalty < 0.0) throw ConfigError("OCP: input penalty must be non-negative");
  for (const auto& c : cost.input_coupling) {
    if (c.component < 0 || c.component >= lower.size()) {
      throw ConfigError("OCP: input coupling refers to a non-existent input component");
    }
  }
  if (cost.tracking && !cost.tracking->reference) throw ConfigError("OCP: tracking term needs a reference");
}

CostBreakdown evaluate_cost(const OcpProblem& problem, const GeneratorModel& model,
                            const InputSignal& signal) {
  if (signal.intervals() != problem.intervals || signal.input_dim() != model.input_dim() ||
      std::abs(signal.step() - problem.step()) > 1e-12 * problem.step()) {
    throw ArgumentError("evaluate_cost: signal does not match the problem's control grid");
  }
  const CostSpec& cost = problem.cost;

  std::vector<ObservableCoeffs> observables;
  observables.reserve(cost.running_state.size() + cost.input_coupling.size() +
                      cost.terminal_expectation.size() + 2);
  for (const auto& t : cost.running_state) observables.push_back(t.observable);
  for (const auto& t : cost.input_coupling) observables.push_back(t.observable);
  for (const auto& t : cost.terminal_expectation) observables.push_back(t.observable);
  if (cost.tracking) observables.push_back(cost.tracking->observable);
  if (cost.terminal_target) observables.push_back(cost.terminal_target->observable);

  CostBreakdown out;
  const double h = signal.step();
  for (Index k = 0; k < signal.intervals(); ++k) {
    out.input += cost.input_penalty * h * signal.values().col(k).squaredNorm();
  }
  if (observables.empty()) {
    out.total = out.input;
    return out;
  }

  PropagationOptions options = problem.propagation;
  options.record_substeps = problem.quadrature == Quadrature::substeps;
  ExpectationPrediction pred;
  try {
    pred = predict_expectations(model, signal, problem.x0, observables, options);
  } catch (const PropagationDiverged& e) {
    out.diverged = true;
    out.diagnostic = e.what();
    out.total = std::numeric_limits<double>::infinity();
    return out;
  }

  const auto nt = static_cast<Index>(pred.times.size());
  Index row = 0;
  auto trapezoid = [&](auto&& integrand) {
    double sum = 0.0;
    for (Index j = 0; j + 1 < nt; ++j) {
      const double t0 = pred.times[static_cast<std::size_t>(j)];
      const double t1 = pred.times[static_cast<std::size_t>(j + 1)];
      const Index interval = signal.interval_at(0.5 * (t0 + t1));
      sum += 0.5 * (t1 - t0) * (integrand(j, t0, interval) + integrand(j + 1, t1, interval));
    }
    return sum;
  };

  for (const auto& term : cost.running_state) {
    const Index r = row++;
    out.running_state += term.weight * trapezoid([&](Index j, double, Index) { return pred.values(r, j); });
  }
  for (const auto& term : cost.input_coupling) {
    const Index r = row++;
    out.coupling += term.weight * trapezoid([&](Index j, double, Index interval) {
      return signal.values()(term.component, interval) * pred.values(r, j);
    });
  }
  for (const auto& term : cost.terminal_expectation) {
    out.terminal += term.weight * pred.values(row++, nt - 1);
  }
  if (cost.tracking) {
    const Index r = row++;
    const auto& ref = cost.tracking->reference;
    out.tracking = cost.tracking->weight * trapezoid([&](Index j, double t, Index) {
      const double d = pred.values(r, j) - ref(t);
      return d * d;
    });
  }
  if (cost.terminal_target) {
    const double d = cost.terminal_target->target - pred.values(row++, nt - 1);
    out.terminal += cost.terminal_target->weight * d * d;
  }
  out.total = out.running_state + out.input + out.coupling + out.tracking + out.terminal;
  if (!std::isfinite(out.total)) {
    out.diverged = true;
    out.diagnostic = "non-finite cost";
    out.total = std::numeric_limits<double>::infinity();
  }
  return out;
}

OcpSolution solve_ocp(const OcpProblem& problem, const GeneratorModel& model) {
  problem.validate();
  if (problem.input_dim() != model.input_dim()) {
    throw ConfigError("solve_ocp: bounds dimension does not match the generator model");
  }
  const Index p = problem.input_dim();
  const double h = problem.step();
  const Index n_vars = p * problem.intervals;
  Vector lower(n_vars), upper(n_vars);
  for (Index k = 0; k < problem.intervals; ++k) {
    lower.segment(k * p, p) = problem.lower;
    upper.segment(k * p, p) = problem.upper;
  }
  auto clamp = [&](const Vector& z) -> Vector { return z.cwiseMax(lower).cwiseMin(upper); };
  // Fix the substep count once for the whole admissible box instead of per evaluation.
  OcpProblem fixed = problem;
  if (fixed.propagation.auto_substeps) {
    fixed.propagation.substeps = stable_substeps(model, problem.lower, problem.upper, h,
                                                 problem.propagation.substeps,
                                                 problem.propagation.stability_limit);
    fixed.propagation.auto_substeps = false;
  }
  auto objective = [&](const Vector& z) {
    return evaluate_cost(fixed, model, InputSignal::unflatten(clamp(z), p, h)).total;
  };

  OcpSolution out;
  Vector best = clamp(problem.initial_guess.flatten());
  double best_value = std::numeric_limits<double>::infinity();
  auto rng = make_stream(problem.optimizer.seed, 0);
  StandardNormal normal;

  NelderMeadOptions nm;
  nm.max_evaluations = problem.optimizer.max_evaluations;
  nm.x_tolerance = problem.optimizer.x_tolerance;
  nm.f_tolerance = problem.optimizer.f_tolerance;
  nm.initial_step = problem.optimizer.initial_step;

  const int runs = std::max(1, problem.optimizer.restarts);
  for (int r = 0; r < runs; ++r) {
    Vector start = best;
    if (r > 0) {
      for (Index i = 0; i < n_vars; ++i) start(i) += problem.optimizer.restart_perturbation * normal(rng);
      start = clamp(start);
    }
    const NelderMeadResult res = nelder_mead(objective, start, nm);
    for (std::size_t it = 0; it < res.best_history.size(); ++it) {
      out.trace.push_back({r, static_cast<int>(it + 1), out.evaluations + res.evaluation_history[it],
                           std::min(best_value, res.best_history[it])});
    }
    out.evaluations += res.evaluations;
    if (res.value < best_value) {
      best_value = res.value;
      best = clamp(res.x);
    }
  }
  if (!std::isfinite(best_value)) {
    throw OptimizationFailed("solve_ocp: every restart ended with an infinite cost");
  }
  out.control = InputSignal::unflatten(best, p, h);
  out.breakdown = evaluate_cost(fixed, model, out.control);
  out.cost = out.breakdown.total;
  return out;
}

}  // namespace kgedmd
