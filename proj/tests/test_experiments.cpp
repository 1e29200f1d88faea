#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "kgedmd/errors.hpp"
#include "kgedmd/experiments.hpp"

using namespace kgedmd;

namespace {

ExperimentConfig small_prediction() {
  ExperimentConfig c = default_config(ExperimentKind::predict);
  c.predict.steps = 500;
  c.predict.repetitions = 2;
  c.predict.output_stride = 50;
  c.oracle.trajectories = 400;
  c.data.m = 300;
  return c;
}

bool every_row_ends_with_digest(const ResultTable& t) {
  std::istringstream in(to_csv(t));
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.size() < t.config_digest.size() ||
        line.compare(line.size() - t.config_digest.size(), std::string::npos, t.config_digest) != 0 ||
        line[line.size() - t.config_digest.size() - 1] != ',') {
      return false;
    }
  }
  return rows == t.rows.size();
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("empty training data is a configuration error") {
  ExperimentConfig c = small_prediction();
  c.data.m = 0;
  CHECK_THROWS_AS(fit_surrogate(c), ConfigError);
  CHECK_THROWS_AS(run_prediction(c), ConfigError);
  ExperimentConfig s = default_config(ExperimentKind::sweep);
  s.sweep.m = {100, 0};
  CHECK_THROWS_AS(run_success_sweep(s), ConfigError);
}

TEST_CASE("oracle-only prediction leaves the model columns empty") {
  ExperimentConfig c = small_prediction();
  c.predict.surrogate = false;
  c.predict.repetitions = 1;
  const PredictionRun a = run_prediction(c);
  CHECK(a.successes == 0);
  CHECK(std::isnan(a.mean_abs_err));
  REQUIRE(!a.table.rows.empty());
  CHECK(std::isnan(a.table.rows[0][2]));
  CHECK(a.table.rows[0][3] == doctest::Approx(0.5));
  CHECK(a.table.rows.size() == 11);
  CHECK(a.table == run_prediction(c).table);
}

TEST_CASE("prediction agrees with the oracle and is reproducible") {
  const ExperimentConfig c = small_prediction();
  const PredictionRun a = run_prediction(c);
  CHECK(a.repetitions == 2);
  CHECK(a.successes == 2);
  CHECK(a.mean_abs_err < 0.1);
  CHECK(a.constant_drift < 1e-3);
  CHECK(a.max_imaginary < kImaginaryTolerance);
  CHECK(a.oracle_standard_error > 0.0);
  CHECK(a.table.rows.size() == 22);
  CHECK(every_row_ends_with_digest(a.table));

  setenv("KGEDMD_THREADS", "3", 1);
  const PredictionRun b = run_prediction(c);
  unsetenv("KGEDMD_THREADS");
  CHECK(to_csv(a.table) == to_csv(b.table));
}

TEST_CASE("forced failures give a zero success rate and no mean") {
  ExperimentConfig c = small_prediction();
  c.oracle.offset = 5.0;
  const PredictionRun r = run_prediction(c);
  CHECK(r.successes == 0);
  CHECK(std::isnan(r.mean_abs_err));
  for (bool f : r.failed) CHECK(f);
  for (const auto& d : r.diagnostics) CHECK_FALSE(d.empty());
  for (const auto& row : r.table.rows) CHECK(row[5] == 1.0);
}

TEST_CASE("sweep table layout") {
  ExperimentConfig c = default_config(ExperimentKind::sweep);
  c.predict.steps = 200;
  c.oracle.trajectories = 200;
  c.sweep.m = {200, 400};
  c.sweep.k_dw = {1.0};
  c.sweep.cells = {{3.0, 0.0}};
  c.sweep.repetitions = 2;
  const SweepRun r = run_success_sweep(c);
  REQUIRE(r.cells.size() == 2);
  CHECK(r.table.rows.size() == 2);
  CHECK(r.cells[1].m == 400);
  for (const auto& cell : r.cells) {
    CHECK(cell.delta >= 0.0);
    CHECK(cell.delta <= 1.0);
  }
  CHECK(every_row_ends_with_digest(r.table));
}

TEST_CASE("noise-free tracking of a resting state") {
  // At x = 1 the well is flat, so u = 1 cancels the bias force exactly.
  ExperimentConfig c = default_config(ExperimentKind::track);
  c.model.diffusion = false;
  c.oracle.trajectories = 1;
  c.track.x0 = 1.0;
  c.track.horizon = 0.5;
  c.track.intervals = 5;
  c.track.reference.kind = "constant";
  c.track.reference.offset = 1.0;
  c.optimizer.max_evaluations = 1500;
  c.optimizer.restarts = 1;
  const TrackingRun r = run_tracking(c);
  CHECK((r.solution.control.values().array() - 1.0).abs().maxCoeff() < 0.05);
  CHECK(r.sup_track_err < 0.01);
  CHECK(r.fraction_within_1pct == doctest::Approx(1.0));
  CHECK(r.table.rows.size() == 501);
  CHECK(every_row_ends_with_digest(r.table));
  const ResultTable trace = trace_table(r.solution, r.table.config_digest);
  CHECK(trace.rows.size() == r.solution.trace.size());
  CHECK(trace.schema == kTraceSchema);
}

TEST_CASE("expensive input keeps the system in the left well") {
  ExperimentConfig c = default_config(ExperimentKind::sample);
  c.sample.c = {1e3};
  c.sample.intervals = 5;
  c.oracle.trajectories = 1000;
  c.optimizer.max_evaluations = 600;
  c.optimizer.restarts = 1;
  const SamplingRun r = run_sampling(c);
  REQUIRE(r.cases.size() == 1);
  CHECK(r.cases[0].solution.control.values().cwiseAbs().maxCoeff() < 0.02);
  CHECK(r.cases[0].terminal_mc < 0.0);
  CHECK(r.cases[0].terminal_model < 0.0);
  CHECK(r.table.rows.size() == 1001);
  CHECK(every_row_ends_with_digest(r.table));
}

TEST_CASE("horizons must fit the oracle grid") {
  ExperimentConfig c = default_config(ExperimentKind::track);
  c.oracle.trajectories = 10;
  c.optimizer.max_evaluations = 10;
  c.optimizer.restarts = 1;
  c.track.horizon = 0.12345;
  c.track.intervals = 1;
  CHECK_THROWS_AS(run_tracking(c), ConfigError);
  CHECK_THROWS_AS(run_validation(c, InputSignal::constant(3, 0.00033, Vector::Zero(1)), 0.0), ConfigError);
}

TEST_CASE("validation replays a stored signal") {
  ExperimentConfig c = default_config(ExperimentKind::track);
  c.oracle.trajectories = 200;
  const InputSignal u = InputSignal::sampled_scalar(4, 0.05, [](double t) { return t * 10.0; });
  const ResultTable t = run_validation(c, u, 0.5);
  REQUIRE(t.rows.size() == 201);
  CHECK(t.rows[0][2] == 0.5);
  CHECK(t.rows[60][1] == doctest::Approx(0.5));
  CHECK(t == run_validation(c, u, 0.5));
}

}
