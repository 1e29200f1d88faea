#include "kgedmd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kgedmd/errors.hpp"
#include "kgedmd/parallel.hpp"

namespace kgedmd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
/// Tracking errors are reported after the catch-up phase.
constexpr double kTrackingSkip = 0.1;

double state_x(const Eigen::Ref<const Vector>& x) { return x(0); }

Index steps_for(double horizon, double dt) {
  const auto n = static_cast<Index>(std::llround(horizon / dt));
  if (n < 1 || std::abs(static_cast<double>(n) * dt - horizon) > 1e-9 * horizon) {
    throw ConfigError("horizon " + std::to_string(horizon) + " is not a multiple of oracle.dt");
  }
  return n;
}

PropagationOptions propagation_options(const ExperimentConfig& config) {
  PropagationOptions opt;
  opt.substeps = config.propagation.substeps;
  opt.auto_substeps = config.propagation.auto_substeps;
  return opt;
}

Vector oracle_mean(const ExperimentConfig& config, const SdeModel& model, const InputSignal& signal,
                   const Vector& x0, Index steps, double* max_standard_error = nullptr) {
  SimulationOptions sim;
  sim.threads = default_thread_count();
  const EnsembleStatistics stats = simulate_statistics(model, signal, x0, config.oracle.dt, steps,
                                                       config.oracle.trajectories, config.oracle.seed,
                                                       {state_x}, sim);
  if (max_standard_error) {
    double se = 0.0;
    for (Index k = 0; k <= steps; ++k) se = std::max(se, stats.standard_error(0, k));
    *max_standard_error = se;
  }
  return stats.mean.row(0).transpose().array() + config.oracle.offset;
}

struct RepetitionResult {
  bool failed = false;
  double mean_err = kNaN;
  double sup_err = kNaN;
  Vector model;
  double constant_drift = 0.0;
  double max_imaginary = 0.0;
  std::string diagnostic;
};

RepetitionResult evaluate_repetition(const ExperimentConfig& config, const InputSignal& signal,
                                     const Vector& x0, const Vector& oracle) {
  RepetitionResult out;
  try {
    const FittedSurrogate fs = fit_surrogate(config);
    const ExpectationPrediction pred =
        predict_expectations(fs.generator, signal, x0, {fs.state, fs.constant}, propagation_options(config));
    out.model = pred.values.row(0).transpose();
    out.constant_drift = (pred.values.row(1).array() - 1.0).abs().maxCoeff();
    out.max_imaginary = pred.max_imaginary;
    const Vector err = (out.model - oracle).cwiseAbs();
    if (!err.allFinite()) {
      out.failed = true;
      out.diagnostic = "non-finite prediction";
      return out;
    }
    out.sup_err = err.maxCoeff();
    out.mean_err = err.mean();
    out.failed = !(out.sup_err < kFailureThreshold);
    if (out.failed) out.diagnostic = "sup |e(t)| = " + std::to_string(out.sup_err);
  } catch (const PropagationDiverged& e) {
    out.failed = true;
    out.diagnostic = e.what();
  } catch (const NumericalError& e) {
    out.failed = true;
    out.diagnostic = e.what();
  }
  return out;
}

ExperimentConfig repetition_config(const ExperimentConfig& config, Index rep) {
  ExperimentConfig rc = config;
  rc.dictionary.seed += static_cast<std::uint64_t>(rep);
  rc.data.seed += static_cast<std::uint64_t>(rep);
  return rc;
}

struct Validation {
  Vector times;
  Vector mc;
  Vector model;
  Vector control;
  double constant_drift = 0.0;
  double max_imaginary = 0.0;
};

/// MC and surrogate expectations of X_t under a piecewise-constant control, on the oracle grid.
Validation validate_control(const ExperimentConfig& config, const SdeModel& model, const FittedSurrogate& fs,
                            const InputSignal& control, const Vector& x0) {
  const double dt = config.oracle.dt;
  const Index steps = steps_for(control.horizon(), dt);
  const InputSignal fine = InputSignal::sampled(steps, dt, [&](double t) { return control.at(t); });
  Validation v;
  v.mc = oracle_mean(config, model, fine, x0, steps);
  const ExpectationPrediction pred =
      predict_expectations(fs.generator, fine, x0, {fs.state, fs.constant}, propagation_options(config));
  v.model = pred.values.row(0).transpose();
  v.constant_drift = (pred.values.row(1).array() - 1.0).abs().maxCoeff();
  v.max_imaginary = pred.max_imaginary;
  v.times.resize(steps + 1);
  v.control.resize(steps + 1);
  for (Index k = 0; k <= steps; ++k) {
    v.times(k) = dt * static_cast<double>(k);
    v.control(k) = control.at(v.times(k))(0);
  }
  return v;
}

OcpProblem base_problem(const ExperimentConfig& config, double horizon, Index intervals, double x0) {
  OcpProblem pr;
  pr.horizon = horizon;
  pr.intervals = intervals;
  pr.x0 = Vector::Constant(1, x0);
  pr.lower = Vector::Constant(1, config.optimizer.lower);
  pr.upper = Vector::Constant(1, config.optimizer.upper);
  pr.optimizer.max_evaluations = config.optimizer.max_evaluations;
  pr.optimizer.restarts = config.optimizer.restarts;
  pr.optimizer.seed = config.optimizer.seed;
  pr.optimizer.x_tolerance = config.optimizer.x_tolerance;
  pr.optimizer.f_tolerance = config.optimizer.f_tolerance;
  pr.optimizer.initial_step = config.optimizer.initial_step;
  pr.optimizer.restart_perturbation = config.optimizer.restart_perturbation;
  pr.propagation = propagation_options(config);
  return pr;
}

}  // namespace

DoubleWellParams well_params(const ExperimentConfig& config) {
  return DoubleWellParams{config.model.k_dw, config.model.k_bias, config.model.beta};
}

SdeModel build_model(const ExperimentConfig& config) {
  SdeModel model = double_well(well_params(config));
  model.diffusion_enabled = config.model.diffusion;
  return model;
}

FittedSurrogate fit_surrogate(const ExperimentConfig& config) {
  config.validate();
  const SdeModel model = build_model(config);
  const DoubleWellParams params = well_params(config);
  FittedSurrogate fs;
  fs.dictionary = std::make_shared<RffDictionary>(sample_dictionary(
      1, config.dictionary.features, config.dictionary.bandwidth, config.dictionary.seed, config.dictionary.sampling));
  fs.data = uniform_samples(1, config.data.m, config.data.lo, config.data.hi, config.data.seed);
  std::vector<Vector> inputs;
  for (double u : config.data.training_inputs) inputs.push_back(Vector::Constant(1, u));
  fs.generator = fit_control_affine(fs.dictionary, model, inputs, fs.data, config.lambda);
  const double ridge = config.ridge();
  fs.state = fit_observable(*fs.dictionary, fs.data, state_x, ridge, "x");
  fs.second = fit_observable(
      *fs.dictionary, fs.data, [](const Eigen::Ref<const Vector>& x) { return x(0) * x(0); }, ridge, "x^2");
  fs.potential = fit_observable(
      *fs.dictionary, fs.data,
      [params](const Eigen::Ref<const Vector>& x) { return double_well_potential(params, x(0)); }, ridge, "V");
  fs.constant = fit_observable(
      *fs.dictionary, fs.data, [](const Eigen::Ref<const Vector>&) { return 1.0; }, ridge, "1");
  return fs;
}

PredictionRun run_prediction(const ExperimentConfig& config) {
  config.validate();
  const SdeModel model = build_model(config);
  const double dt = config.oracle.dt;
  const Index steps = config.predict.steps;
  const InputSignal signal = InputSignal::sampled_scalar(
      steps, dt, [&](double t) { return config.predict.signal(t); }, config.predict.signal.describe());
  const Vector x0 = Vector::Constant(1, config.predict.x0);

  PredictionRun run;
  const Vector oracle = oracle_mean(config, model, signal, x0, steps, &run.oracle_standard_error);
  const Index reps = config.predict.repetitions;
  run.repetitions = reps;

  std::vector<RepetitionResult> results(static_cast<std::size_t>(reps));
  if (config.predict.surrogate) {
    parallel_for(results.size(), default_thread_count(), [&](std::size_t r) {
      results[r] = evaluate_repetition(repetition_config(config, static_cast<Index>(r)), signal, x0, oracle);
    });
  }

  run.table.schema = kPredictionSchema;
  run.table.config_digest = config_digest(config);
  run.table.columns = {"rep", "t", "e_model", "e_mc", "abs_err", "failed"};
  double err_sum = 0.0;
  for (Index r = 0; r < reps; ++r) {
    const RepetitionResult& res = results[static_cast<std::size_t>(r)];
    run.failed.push_back(res.failed);
    run.rep_mean_err.push_back(res.mean_err);
    run.rep_sup_err.push_back(res.sup_err);
    run.diagnostics.push_back(res.diagnostic);
    if (config.predict.surrogate && !res.failed) {
      ++run.successes;
      err_sum += res.mean_err;
      run.constant_drift = std::max(run.constant_drift, res.constant_drift);
      run.max_imaginary = std::max(run.max_imaginary, res.max_imaginary);
    }
    const bool has_model = config.predict.surrogate && res.model.size() == steps + 1;
    for (Index k = 0; k <= steps; ++k) {
      if (k % config.predict.output_stride != 0 && k != steps) continue;
      const double e_model = has_model ? res.model(k) : kNaN;
      const double abs_err = has_model ? std::abs(e_model - oracle(k)) : kNaN;
      run.table.add_row({static_cast<double>(r), dt * static_cast<double>(k), e_model, oracle(k), abs_err,
                         res.failed ? 1.0 : 0.0});
    }
  }
  run.mean_abs_err = run.successes > 0 ? err_sum / static_cast<double>(run.successes) : kNaN;
  return run;
}

SweepRun run_success_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepRun run;
  run.table.schema = kSweepSchema;
  run.table.config_digest = config_digest(config);
  run.table.columns = {"K_dw", "K_bias", "lambda", "m", "delta", "mean_abs_err"};

  const double dt = config.oracle.dt;
  const Index steps = config.predict.steps;
  const InputSignal signal = InputSignal::sampled_scalar(
      steps, dt, [&](double t) { return config.predict.signal(t); }, config.predict.signal.describe());
  const Vector x0 = Vector::Constant(1, config.predict.x0);
  const Index reps = config.sweep.repetitions;
  const auto n_m = static_cast<Index>(config.sweep.m.size());

  for (double k_dw : config.sweep.k_dw) {
    for (const SweepCell& cell : config.sweep.cells) {
      ExperimentConfig cc = config;
      cc.model.k_dw = k_dw;
      cc.model.k_bias = cell.k_bias;
      cc.lambda = cell.lambda;
      const Vector oracle = oracle_mean(cc, build_model(cc), signal, x0, steps);

      std::vector<RepetitionResult> results(static_cast<std::size_t>(n_m * reps));
      parallel_for(results.size(), default_thread_count(), [&](std::size_t i) {
        const Index mi = static_cast<Index>(i) / reps;
        const Index r = static_cast<Index>(i) % reps;
        ExperimentConfig rc = repetition_config(cc, r);
        rc.data.m = config.sweep.m[static_cast<std::size_t>(mi)];
        results[i] = evaluate_repetition(rc, signal, x0, oracle);
      });

      for (Index mi = 0; mi < n_m; ++mi) {
        Index successes = 0;
        double sum = 0.0;
        for (Index r = 0; r < reps; ++r) {
          const RepetitionResult& res = results[static_cast<std::size_t>(mi * reps + r)];
          if (!res.failed) {
            ++successes;
            sum += res.mean_err;
          }
        }
        SweepRun::Cell out;
        out.k_dw = k_dw;
        out.k_bias = cell.k_bias;
        out.lambda = cell.lambda;
        out.m = config.sweep.m[static_cast<std::size_t>(mi)];
        out.delta = static_cast<double>(successes) / static_cast<double>(reps);
        out.mean_abs_err = successes > 0 ? sum / static_cast<double>(successes) : kNaN;
        run.cells.push_back(out);
        run.table.add_row({out.k_dw, out.k_bias, out.lambda, static_cast<double>(out.m), out.delta,
                           out.mean_abs_err});
      }
    }
  }
  return run;
}

OcpProblem tracking_problem(const ExperimentConfig& config, const FittedSurrogate& surrogate) {
  const TrackSettings& ts = config.track;
  OcpProblem pr = base_problem(config, ts.horizon, ts.intervals, ts.x0);
  const SignalSpec reference = ts.reference;
  pr.cost = tracking_cost(surrogate.state, [reference](double t) { return reference(t); });
  const double lo = config.optimizer.lower;
  const double hi = config.optimizer.upper;
  pr.initial_guess = InputSignal::sampled_scalar(
      ts.intervals, pr.step(), [&](double t) { return std::clamp(reference(t), lo, hi); }, reference.describe());
  return pr;
}

OcpProblem sampling_problem(const ExperimentConfig& config, const FittedSurrogate& surrogate, double c) {
  const SampleSettings& ss = config.sample;
  OcpProblem pr = base_problem(config, ss.horizon, ss.intervals, ss.x0);
  pr.cost = ss.running_cost == RunningCost::well
                ? well_cost(surrogate.potential, surrogate.state, c, ss.target)
                : bias_cost(surrogate.potential, surrogate.state, surrogate.second, c, ss.target);
  pr.initial_guess = InputSignal::constant(ss.intervals, pr.step(), Vector::Zero(1));
  return pr;
}

TrackingRun run_tracking(const ExperimentConfig& config) {
  config.validate();
  const SdeModel model = build_model(config);
  const FittedSurrogate fs = fit_surrogate(config);
  const OcpProblem problem = tracking_problem(config, fs);

  TrackingRun run;
  run.substeps = problem.propagation.auto_substeps
                     ? stable_substeps(fs.generator, problem.lower, problem.upper, problem.step(),
                                       problem.propagation.substeps, problem.propagation.stability_limit)
                     : problem.propagation.substeps;
  run.solution = solve_ocp(problem, fs.generator);
  const Validation v = validate_control(config, model, fs, run.solution.control, problem.x0);
  run.constant_drift = v.constant_drift;
  run.max_imaginary = v.max_imaginary;

  run.table.schema = kTrackingSchema;
  run.table.config_digest = config_digest(config);
  run.table.columns = {"t", "u_star", "e_model", "e_mc", "x_ref", "abs_track_err"};
  Index counted = 0;
  Index within = 0;
  for (Index k = 0; k < v.times.size(); ++k) {
    const double t = v.times(k);
    const double ref = config.track.reference(t);
    const double err = std::abs(v.mc(k) - ref);
    run.table.add_row({t, v.control(k), v.model(k), v.mc(k), ref, err});
    if (t >= kTrackingSkip - 1e-12) {
      ++counted;
      if (err < 0.01) ++within;
      run.sup_track_err = std::max(run.sup_track_err, err);
      run.sup_model_err = std::max(run.sup_model_err, std::abs(v.model(k) - v.mc(k)));
    }
  }
  run.fraction_within_1pct = counted > 0 ? static_cast<double>(within) / static_cast<double>(counted) : 0.0;
  return run;
}

SamplingRun run_sampling(const ExperimentConfig& config) {
  config.validate();
  const SdeModel model = build_model(config);
  const FittedSurrogate fs = fit_surrogate(config);

  SamplingRun run;
  run.cases.resize(config.sample.c.size());
  std::vector<Validation> checks(config.sample.c.size());
  parallel_for(run.cases.size(), default_thread_count(), [&](std::size_t i) {
    SamplingCase& sc = run.cases[i];
    sc.c = config.sample.c[i];
    const OcpProblem problem = sampling_problem(config, fs, sc.c);
    sc.solution = solve_ocp(problem, fs.generator);
    checks[i] = validate_control(config, model, fs, sc.solution.control, problem.x0);
    const Validation& v = checks[i];
    sc.terminal_mc = v.mc(v.mc.size() - 1);
    sc.terminal_model = v.model(v.model.size() - 1);
    sc.sup_model_err = (v.model - v.mc).cwiseAbs().maxCoeff();
    sc.constant_drift = v.constant_drift;
    sc.max_imaginary = v.max_imaginary;
  });

  run.table.schema = kSamplingSchema;
  run.table.config_digest = config_digest(config);
  run.table.columns = {"c", "t", "u_star", "e_model", "e_mc"};
  for (std::size_t i = 0; i < run.cases.size(); ++i) {
    const Validation& v = checks[i];
    for (Index k = 0; k < v.times.size(); ++k) {
      run.table.add_row({run.cases[i].c, v.times(k), v.control(k), v.model(k), v.mc(k)});
    }
  }
  return run;
}

ResultTable trace_table(const OcpSolution& solution, const std::string& config_digest) {
  ResultTable table;
  table.schema = kTraceSchema;
  table.config_digest = config_digest;
  table.columns = {"restart", "iteration", "evaluations", "best"};
  for (const TracePoint& p : solution.trace) {
    table.add_row({static_cast<double>(p.restart), static_cast<double>(p.iteration),
                   static_cast<double>(p.evaluations), p.best});
  }
  return table;
}

ResultTable run_validation(const ExperimentConfig& config, const InputSignal& signal, double x0) {
  config.validate();
  if (signal.input_dim() != 1) throw ConfigError("validate: the double-well model takes a scalar input");
  const SdeModel model = build_model(config);
  const double dt = config.oracle.dt;
  const Index steps = steps_for(signal.horizon(), dt);
  const InputSignal fine = InputSignal::sampled(steps, dt, [&](double t) { return signal.at(t); });
  const Vector mc = oracle_mean(config, model, fine, Vector::Constant(1, x0), steps);
  ResultTable table;
  table.schema = kValidationSchema;
  table.config_digest = config_digest(config);
  table.columns = {"t", "u", "e_mc"};
  for (Index k = 0; k <= steps; ++k) {
    const double t = dt * static_cast<double>(k);
    table.add_row({t, signal.at(t)(0), mc(k)});
  }
  return table;
}

}  // namespace kgedmd
