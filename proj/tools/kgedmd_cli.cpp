#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kgedmd/config.hpp"
#include "kgedmd/errors.hpp"
#include "kgedmd/experiments.hpp"
#include "kgedmd/serialization.hpp"

namespace fs = std::filesystem;
using namespace kgedmd;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (default: config output_dir)");
  cmd->add_option("--seed", c.seed, "override every seed (s, s+1, s+2, s+3)");
  cmd->add_option("--threads", c.threads, "worker threads (default: KGEDMD_THREADS or all cores)");
}

// Without a kind (fit, validate) the config is used as loaded.
ExperimentConfig resolve(const Common& c, std::optional<ExperimentKind> kind) {
  ExperimentConfig cfg = c.config.empty() ? default_config(kind.value_or(ExperimentKind::predict))
                                          : load_config(c.config);
  if (c.config.empty()) cfg.validate();
  if (kind && cfg.kind != *kind) {
    std::cerr << "note: config kind '" << to_string(cfg.kind) << "' run as '" << to_string(*kind) << "'\n";
    cfg.kind = *kind;
  }
  if (c.seed) apply_seed(cfg, *c.seed);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.threads) setenv("KGEDMD_THREADS", std::to_string(*c.threads).c_str(), 1);
  return cfg;
}

void write_meta(const fs::path& dir, const ExperimentConfig& cfg, double seconds, const Json& summary) {
  Json meta{{"config_digest", config_digest(cfg)}, {"runtime_seconds", seconds}, {"summary", summary}};
  save_json(dir / "meta.json", meta);
  save_config(dir / "config.json", cfg);
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_predict(const Common& c) {
  const ExperimentConfig cfg = resolve(c, ExperimentKind::predict);
  const auto t0 = std::chrono::steady_clock::now();
  const PredictionRun run = run_prediction(cfg);
  const fs::path dir = cfg.output_dir;
  export_results(run.table, dir / "prediction.csv");
  Json summary{{"repetitions", run.repetitions},
               {"successes", run.successes},
               {"mean_abs_err", std::isnan(run.mean_abs_err) ? Json(nullptr) : Json(run.mean_abs_err)},
               {"failed", run.successes < run.repetitions},
               {"constant_drift", run.constant_drift},
               {"max_imaginary", run.max_imaginary}};
  write_meta(dir, cfg, since(t0), summary);
  std::cout << "prediction: " << run.successes << "/" << run.repetitions << " successful, mean |e| = "
            << run.mean_abs_err << "\n";
  for (std::size_t r = 0; r < run.diagnostics.size(); ++r) {
    if (!run.diagnostics[r].empty()) std::cout << "  rep " << r << ": " << run.diagnostics[r] << "\n";
  }
  return 0;
}

int run_sweep(const Common& c) {
  const ExperimentConfig cfg = resolve(c, ExperimentKind::sweep);
  const auto t0 = std::chrono::steady_clock::now();
  const SweepRun run = run_success_sweep(cfg);
  const fs::path dir = cfg.output_dir;
  export_results(run.table, dir / "sweep.csv");
  write_meta(dir, cfg, since(t0), Json{{"cells", run.cells.size()}});
  for (const auto& cell : run.cells) {
    std::cout << "K_dw=" << cell.k_dw << " K_bias=" << cell.k_bias << " lambda=" << cell.lambda
              << " m=" << cell.m << " delta=" << cell.delta << " mean|e|=" << cell.mean_abs_err << "\n";
  }
  return 0;
}

int run_track(const Common& c) {
  const ExperimentConfig cfg = resolve(c, ExperimentKind::track);
  const auto t0 = std::chrono::steady_clock::now();
  const TrackingRun run = run_tracking(cfg);
  const fs::path dir = cfg.output_dir;
  const std::string digest = config_digest(cfg);
  export_results(run.table, dir / "tracking.csv");
  export_results(trace_table(run.solution, digest), dir / "tracking_trace.csv");
  Json signal = signal_to_json(run.solution.control);
  signal["x0"] = cfg.track.x0;
  save_json(dir / "tracking_signal.json", signal);
  Json summary{{"cost", run.solution.cost},
               {"evaluations", run.solution.evaluations},
               {"fraction_within_1pct", run.fraction_within_1pct},
               {"sup_track_err", run.sup_track_err},
               {"sup_model_err", run.sup_model_err},
               {"constant_drift", run.constant_drift},
               {"max_imaginary", run.max_imaginary}};
  write_meta(dir, cfg, since(t0), summary);
  std::cout << "tracking: J* = " << run.solution.cost << ", |e_t| < 0.01 on " << 100.0 * run.fraction_within_1pct
            << "% of [0.1, T], sup |e_t| = " << run.sup_track_err << "\n";
  return 0;
}

int run_sample(const Common& c) {
  const ExperimentConfig cfg = resolve(c, ExperimentKind::sample);
  const auto t0 = std::chrono::steady_clock::now();
  const SamplingRun run = run_sampling(cfg);
  const fs::path dir = cfg.output_dir;
  const std::string digest = config_digest(cfg);
  export_results(run.table, dir / "sampling.csv");
  Json cases = Json::array();
  for (std::size_t i = 0; i < run.cases.size(); ++i) {
    const SamplingCase& sc = run.cases[i];
    export_results(trace_table(sc.solution, digest), dir / ("sampling_trace_" + std::to_string(i) + ".csv"));
    Json signal = signal_to_json(sc.solution.control);
    signal["x0"] = cfg.sample.x0;
    signal["c"] = sc.c;
    save_json(dir / ("sampling_signal_" + std::to_string(i) + ".json"), signal);
    cases.push_back({{"c", sc.c},
                     {"cost", sc.solution.cost},
                     {"terminal_mc", sc.terminal_mc},
                     {"terminal_model", sc.terminal_model},
                     {"sup_model_err", sc.sup_model_err}});
    std::cout << "c = " << sc.c << ": J* = " << sc.solution.cost << ", E_MC[X_T] = " << sc.terminal_mc
              << ", surrogate " << sc.terminal_model << ", sup |model - MC| = " << sc.sup_model_err << "\n";
  }
  write_meta(dir, cfg, since(t0), Json{{"cases", cases}});
  return 0;
}

int run_fit(const Common& c) {
  const ExperimentConfig cfg = resolve(c, std::nullopt);
  const FittedSurrogate surrogate = fit_surrogate(cfg);
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  Json j = generator_to_json(surrogate.generator);
  j["observables"] = Json::array({observable_to_json(surrogate.state), observable_to_json(surrogate.second),
                                  observable_to_json(surrogate.potential), observable_to_json(surrogate.constant)});
  j["config_digest"] = config_digest(cfg);
  save_json(dir / "generator.json", j);
  save_config(dir / "config.json", cfg);
  std::cout << "generator: N = " << surrogate.generator.size() << ", effective rank "
            << surrogate.generator.effective_rank() << ", written to " << (dir / "generator.json").string() << "\n";
  return 0;
}

int run_validate(const Common& c, const std::string& signal_path, std::optional<double> x0) {
  const ExperimentConfig cfg = resolve(c, std::nullopt);
  const Json j = load_json(signal_path);
  const InputSignal signal = signal_from_json(j);
  double start = cfg.predict.x0;
  if (x0) {
    start = *x0;
  } else if (j.contains("x0")) {
    start = j.at("x0").get<double>();
  }
  const ResultTable table = run_validation(cfg, signal, start);
  const fs::path dir = cfg.output_dir;
  export_results(table, dir / "validation.csv");
  std::cout << "validation: E_MC[X_T] = " << table.rows.back()[2] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilinear Koopman-generator surrogates for control-affine SDEs"};
  app.require_subcommand(1);
  Common common;
  std::string signal_path;
  std::optional<double> x0;

  auto* predict = app.add_subcommand("predict", "surrogate prediction of E[X_t] vs Monte-Carlo");
  auto* track = app.add_subcommand("track", "tracking optimal control with MC validation");
  auto* sample = app.add_subcommand("sample", "barrier-crossing control over a grid of c");
  auto* sweep = app.add_subcommand("sweep", "success rate over data sizes and settings");
  auto* fit = app.add_subcommand("fit", "fit a generator model and write it as JSON");
  auto* validate = app.add_subcommand("validate", "Monte-Carlo re-check of a stored signal");
  for (auto* cmd : {predict, track, sample, sweep, fit, validate}) add_common(cmd, common);
  validate->add_option("--signal", signal_path, "signal JSON written by track or sample")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--x0", x0, "initial state (default: from the signal file)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (predict->parsed()) return run_predict(common);
    if (track->parsed()) return run_track(common);
    if (sample->parsed()) return run_sample(common);
    if (sweep->parsed()) return run_sweep(common);
    if (fit->parsed()) return run_fit(common);
    if (validate->parsed()) return run_validate(common, signal_path, x0);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
