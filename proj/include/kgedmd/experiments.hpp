#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kgedmd/config.hpp"
#include "kgedmd/dynamics.hpp"
#include "kgedmd/gedmd.hpp"
#include "kgedmd/ocp.hpp"
#include "kgedmd/table.hpp"

namespace kgedmd {

inline constexpr const char* kPredictionSchema = "kgedmd/prediction/1";
inline constexpr const char* kTrackingSchema = "kgedmd/tracking/1";
inline constexpr const char* kSamplingSchema = "kgedmd/sampling/1";
inline constexpr const char* kSweepSchema = "kgedmd/sweep/1";
inline constexpr const char* kValidationSchema = "kgedmd/validation/1";
inline constexpr const char* kTraceSchema = "kgedmd/trace/1";

/// A prediction counts as failed when |e(t)| reaches this value anywhere.
inline constexpr double kFailureThreshold = 1.0;

DoubleWellParams well_params(const ExperimentConfig& config);
SdeModel build_model(const ExperimentConfig& config);

/// Surrogate and the observables every experiment reports on.
struct FittedSurrogate {
  std::shared_ptr<const RffDictionary> dictionary;
  Matrix data;
  GeneratorModel generator;
  ObservableCoeffs state;      // x
  ObservableCoeffs second;     // x^2
  ObservableCoeffs potential;  // V(x)
  ObservableCoeffs constant;   // 1
};

/// Dictionary, data and observables from the config's seeds.
FittedSurrogate fit_surrogate(const ExperimentConfig& config);

struct PredictionRun {
  ResultTable table;
  Index repetitions = 0;
  Index successes = 0;
  /// Mean of the per-repetition mean |e(t)| over successful repetitions; NaN if none.
  double mean_abs_err = 0.0;
  std::vector<bool> failed;
  std::vector<double> rep_mean_err;
  std::vector<double> rep_sup_err;
  std::vector<std::string> diagnostics;
  /// Over successful repetitions: max |E[1] - 1| and the imaginary-part diagnostic.
  double constant_drift = 0.0;
  double max_imaginary = 0.0;
  /// Largest oracle standard error on E[X_t].
  double oracle_standard_error = 0.0;
};

/// Repetition r uses dictionary seed + r and data seed + r; one oracle is shared.
PredictionRun run_prediction(const ExperimentConfig& config);

struct SweepRun {
  ResultTable table;
  struct Cell {
    double k_dw = 0.0;
    double k_bias = 0.0;
    double lambda = 0.0;
    Index m = 0;
    double delta = 0.0;
    double mean_abs_err = 0.0;
  };
  std::vector<Cell> cells;
};

/// Success rate and mean error over successes for every (K_dw, cell, m).
SweepRun run_success_sweep(const ExperimentConfig& config);

struct TrackingRun {
  ResultTable table;
  OcpSolution solution;
  /// Share of oracle nodes in [0.1, T] with |E_MC[X_t] - x_ref(t)| < 0.01.
  double fraction_within_1pct = 0.0;
  /// max over [0.1, T] of |E_MC[X_t] - x_ref(t)|.
  double sup_track_err = 0.0;
  double sup_model_err = 0.0;
  double constant_drift = 0.0;
  double max_imaginary = 0.0;
  int substeps = 0;
};

TrackingRun run_tracking(const ExperimentConfig& config);

struct SamplingCase {
  double c = 0.0;
  OcpSolution solution;
  double terminal_mc = 0.0;
  double terminal_model = 0.0;
  double sup_model_err = 0.0;
  double constant_drift = 0.0;
  double max_imaginary = 0.0;
};

struct SamplingRun {
  ResultTable table;
  std::vector<SamplingCase> cases;
};

SamplingRun run_sampling(const ExperimentConfig& config);

/// Monte-Carlo mean of X_t under a stored signal, from the config's model and oracle.
ResultTable run_validation(const ExperimentConfig& config, const InputSignal& signal, double x0);

/// Optimizer convergence log: restart, iteration, evaluations, best.
ResultTable trace_table(const OcpSolution& solution, const std::string& config_digest);

/// Tracking and sampling problems as assembled by the experiments.
OcpProblem tracking_problem(const ExperimentConfig& config, const FittedSurrogate& surrogate);
OcpProblem sampling_problem(const ExperimentConfig& config, const FittedSurrogate& surrogate, double c);

}  // namespace kgedmd
