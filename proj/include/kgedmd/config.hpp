#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kgedmd/features.hpp"
#include "kgedmd/serialization.hpp"

namespace kgedmd {

enum class ExperimentKind { predict, track, sample, sweep };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

/// Scalar time function: offset + amplitude * cos(frequency * t + phase) for
/// kind "cos", offset for "constant", piecewise-constant `samples` of width
/// `sample_step` for "samples" (last value held).
struct SignalSpec {
  std::string kind = "cos";
  double amplitude = 1.0;
  double frequency = 2.0;
  double phase = 0.0;
  double offset = 0.0;
  std::vector<double> samples;
  double sample_step = 0.0;

  double operator()(double t) const;
  std::string describe() const;
  void validate(const std::string& where) const;
  bool operator==(const SignalSpec&) const = default;
};

struct ModelSettings {
  double k_dw = 1.0;
  double k_bias = 3.0;
  double beta = 1.0;
  bool diffusion = true;
  bool operator==(const ModelSettings&) const = default;
};

struct DictionarySettings {
  Index features = 50;
  double bandwidth = 0.5;
  std::uint64_t seed = 1;
  FrequencySampling sampling = FrequencySampling::antithetic;
  bool operator==(const DictionarySettings&) const = default;
};

struct DataSettings {
  Index m = 1000;
  double lo = -2.0;
  double hi = 2.0;
  std::uint64_t seed = 2;
  std::vector<double> training_inputs{-1.0, 1.0};
  bool operator==(const DataSettings&) const = default;
};

struct OracleSettings {
  Index trajectories = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 3;
  /// Added to every oracle mean; a test hook for forced failures.
  double offset = 0.0;
  bool operator==(const OracleSettings&) const = default;
};

struct PropagationSettings {
  int substeps = 10;
  bool auto_substeps = true;
  bool operator==(const PropagationSettings&) const = default;
};

struct OptimizerSettings {
  int max_evaluations = 20000;
  int restarts = 3;
  std::uint64_t seed = 4;
  double x_tolerance = 1e-6;
  double f_tolerance = 1e-10;
  double initial_step = 0.25;
  double restart_perturbation = 0.1;
  double lower = -2.0;
  double upper = 2.0;
  bool operator==(const OptimizerSettings&) const = default;
};

struct PredictSettings {
  double x0 = 0.5;
  Index steps = 5000;
  SignalSpec signal;
  Index repetitions = 1;
  /// false: oracle-only run, model columns left empty.
  bool surrogate = true;
  /// Every n-th oracle time node is written to the table.
  Index output_stride = 10;
  bool operator==(const PredictSettings&) const = default;
};

struct TrackSettings {
  double x0 = 0.5;
  double horizon = 2.0;
  Index intervals = 50;
  SignalSpec reference;
  bool operator==(const TrackSettings&) const = default;
};

enum class RunningCost { well, bias };

struct SampleSettings {
  double x0 = -1.0;
  double horizon = 1.0;
  Index intervals = 20;
  RunningCost running_cost = RunningCost::well;
  double target = 1.0;
  std::vector<double> c;
  bool operator==(const SampleSettings&) const = default;
};

struct SweepCell {
  double k_bias = 3.0;
  double lambda = 0.0;
  bool operator==(const SweepCell&) const = default;
};

struct SweepSettings {
  std::vector<Index> m{100, 316, 1000, 3162, 10000};
  std::vector<double> k_dw{1.0, 2.0, 3.0};
  std::vector<SweepCell> cells{{3.0, 0.0}, {4.0, 1e-10}};
  Index repetitions = 20;
  bool operator==(const SweepSettings&) const = default;
};

inline constexpr const char* kConfigSchema = "kgedmd/config/1";

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::predict;
  ModelSettings model;
  DictionarySettings dictionary;
  DataSettings data;
  double lambda = 0.0;
  /// Ridge for observable fits; defaults to lambda.
  std::optional<double> observable_ridge;
  OracleSettings oracle;
  PropagationSettings propagation;
  OptimizerSettings optimizer;
  PredictSettings predict;
  TrackSettings track;
  SampleSettings sample;
  SweepSettings sweep;
  /// Not part of the digest.
  std::string output_dir = "results";

  double ridge() const { return observable_ridge.value_or(lambda); }
  /// Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults per kind: prediction and sweeps use 1 RK4 substep at the oracle
/// step; sampling caps Nelder-Mead at 3000 evaluations per restart.
ExperimentConfig default_config(ExperimentKind kind);

/// Nine log-spaced points from 1e-3 to 2.
std::vector<double> default_c_grid();

Json config_to_json(const ExperimentConfig& config);
/// `kind` and `model.k_dw`, `model.k_bias` are required; everything else falls back
/// to default_config(kind). Unknown keys are rejected.
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// FNV-1a of the canonical JSON dump without the output directory.
std::string config_digest(const ExperimentConfig& config);

/// Overrides every seed: dictionary = s, data = s + 1, oracle = s + 2, optimizer = s + 3.
void apply_seed(ExperimentConfig& config, std::uint64_t seed);

}  // namespace kgedmd
