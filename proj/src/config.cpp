#include "kgedmd/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "kgedmd/digest.hpp"
#include "kgedmd/errors.hpp"

namespace kgedmd {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::predict: return "predict";
    case ExperimentKind::track: return "track";
    case ExperimentKind::sample: return "sample";
    case ExperimentKind::sweep: return "sweep";
  }
  return "predict";
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "predict") return ExperimentKind::predict;
  if (name == "track") return ExperimentKind::track;
  if (name == "sample") return ExperimentKind::sample;
  if (name == "sweep") return ExperimentKind::sweep;
  throw ConfigError("field 'kind': unknown experiment kind '" + name + "'");
}

double SignalSpec::operator()(double t) const {
  if (kind == "constant") return offset;
  if (kind == "samples") {
    if (samples.empty()) return offset;
    auto k = static_cast<std::size_t>(std::max(0.0, std::floor(t / sample_step + 1e-9)));
    return samples[std::min(k, samples.size() - 1)];
  }
  return offset + amplitude * std::cos(frequency * t + phase);
}

std::string SignalSpec::describe() const {
  std::ostringstream out;
  if (kind == "constant") {
    out << offset;
  } else if (kind == "samples") {
    out << "samples(" << samples.size() << ")";
  } else {
    if (offset != 0.0) out << offset << " + ";
    if (amplitude != 1.0) out << amplitude << " * ";
    out << "cos(" << frequency << "t";
    if (phase != 0.0) out << " + " << phase;
    out << ")";
  }
  return out.str();
}

void SignalSpec::validate(const std::string& where) const {
  if (kind != "cos" && kind != "constant" && kind != "samples") {
    throw ConfigError("field '" + where + ".kind': expected cos, constant or samples");
  }
  if (kind == "samples" && (samples.empty() || !(sample_step > 0.0))) {
    throw ConfigError("field '" + where + ".samples': needs values and a positive sample_step");
  }
}

std::vector<double> default_c_grid() {
  std::vector<double> c(9);
  const double lo = std::log10(1e-3);
  const double hi = std::log10(2.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / 8.0);
  }
  c.front() = 1e-3;
  c.back() = 2.0;
  return c;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.sample.c = default_c_grid();
  if (kind == ExperimentKind::predict || kind == ExperimentKind::sweep) cfg.propagation.substeps = 1;
  if (kind == ExperimentKind::sample) cfg.optimizer.max_evaluations = 3000;
  return cfg;
}

namespace {

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("field '") + field + "' must be positive");
}

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw ConfigError(std::string("field '") + field + "' must be finite");
}

}  // namespace

void ExperimentConfig::validate() const {
  require_positive(model.k_dw, "model.k_dw");
  require_positive(model.k_bias, "model.k_bias");
  require_positive(model.beta, "model.beta");
  if (dictionary.features < 1) throw ConfigError("field 'dictionary.features' must be >= 1");
  require_positive(dictionary.bandwidth, "dictionary.bandwidth");
  if (data.m < 1) throw ConfigError("field 'data.m' must be >= 1 (empty training data)");
  if (!(data.lo < data.hi)) throw ConfigError("field 'data.domain' must satisfy lo < hi");
  if (data.training_inputs.size() < 2) {
    throw ConfigError("field 'data.training_inputs' needs at least two distinct values");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("field 'lambda' must be non-negative");
  if (observable_ridge && !(*observable_ridge >= 0.0)) {
    throw ConfigError("field 'observable_ridge' must be non-negative");
  }
  if (oracle.trajectories < 1) throw ConfigError("field 'oracle.trajectories' must be >= 1");
  require_positive(oracle.dt, "oracle.dt");
  require_finite(oracle.offset, "oracle.offset");
  if (propagation.substeps < 1) throw ConfigError("field 'propagation.substeps' must be >= 1");
  if (optimizer.max_evaluations < 1) throw ConfigError("field 'optimizer.max_evaluations' must be >= 1");
  if (optimizer.restarts < 1) throw ConfigError("field 'optimizer.restarts' must be >= 1");
  if (!(optimizer.lower < optimizer.upper)) throw ConfigError("field 'optimizer.lower' must be below 'optimizer.upper'");
  require_finite(predict.x0, "predict.x0");
  if (predict.steps < 1) throw ConfigError("field 'predict.steps' must be >= 1");
  if (predict.repetitions < 1) throw ConfigError("field 'predict.repetitions' must be >= 1");
  if (predict.output_stride < 1) throw ConfigError("field 'predict.output_stride' must be >= 1");
  predict.signal.validate("predict.signal");
  require_positive(track.horizon, "track.horizon");
  if (track.intervals < 1) throw ConfigError("field 'track.intervals' must be >= 1");
  track.reference.validate("track.reference");
  require_positive(sample.horizon, "sample.horizon");
  if (sample.intervals < 1) throw ConfigError("field 'sample.intervals' must be >= 1");
  if (sample.c.empty()) throw ConfigError("field 'sample.c' must list at least one value");
  for (double c : sample.c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("field 'sample.c' values must be non-negative");
  }
  if (sweep.m.empty() || sweep.k_dw.empty() || sweep.cells.empty()) {
    throw ConfigError("field 'sweep': m, k_dw and cells must be non-empty");
  }
  for (Index m : sweep.m) {
    if (m < 1) throw ConfigError("field 'sweep.m' values must be >= 1 (empty training data)");
  }
  if (sweep.repetitions < 1) throw ConfigError("field 'sweep.repetitions' must be >= 1");
}

namespace {

Json signal_spec_to_json(const SignalSpec& s) {
  Json j{{"kind", s.kind}, {"offset", s.offset}};
  if (s.kind == "cos") {
    j["amplitude"] = s.amplitude;
    j["frequency"] = s.frequency;
    j["phase"] = s.phase;
  } else if (s.kind == "samples") {
    j["samples"] = s.samples;
    j["sample_step"] = s.sample_step;
  }
  return j;
}

std::string sampling_name(FrequencySampling s) {
  return s == FrequencySampling::iid ? "iid" : "antithetic";
}

/// Field reader that reports dotted paths and rejects unknown keys.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("field '" + display() + "' must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ConfigError("field '" + name(key) + "' has the wrong type");
    }
  }

  template <typename T>
  void require(const char* key, T& out) {
    if (!j_.contains(key)) throw ConfigError("missing required field '" + name(key) + "'");
    get(key, out);
  }

  Reader child(const char* key) {
    used_.insert(key);
    return Reader(j_.at(key), name(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown field '" + name(key.c_str()) + "'");
    }
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

SignalSpec read_signal(Reader r, SignalSpec s) {
  r.get("kind", s.kind);
  r.get("amplitude", s.amplitude);
  r.get("frequency", s.frequency);
  r.get("phase", s.phase);
  r.get("offset", s.offset);
  r.get("samples", s.samples);
  r.get("sample_step", s.sample_step);
  r.finish();
  return s;
}

}  // namespace

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["schema"] = kConfigSchema;
  j["kind"] = to_string(c.kind);
  j["model"] = {{"k_dw", c.model.k_dw}, {"k_bias", c.model.k_bias}, {"beta", c.model.beta},
                {"diffusion", c.model.diffusion}};
  j["dictionary"] = {{"features", c.dictionary.features},
                     {"bandwidth", c.dictionary.bandwidth},
                     {"seed", c.dictionary.seed},
                     {"sampling", sampling_name(c.dictionary.sampling)}};
  j["data"] = {{"m", c.data.m},
               {"domain", {c.data.lo, c.data.hi}},
               {"seed", c.data.seed},
               {"training_inputs", c.data.training_inputs}};
  j["lambda"] = c.lambda;
  j["observable_ridge"] = c.observable_ridge ? Json(*c.observable_ridge) : Json(nullptr);
  j["oracle"] = {{"trajectories", c.oracle.trajectories},
                 {"dt", c.oracle.dt},
                 {"seed", c.oracle.seed},
                 {"offset", c.oracle.offset}};
  j["propagation"] = {{"substeps", c.propagation.substeps}, {"auto_substeps", c.propagation.auto_substeps}};
  j["optimizer"] = {{"max_evaluations", c.optimizer.max_evaluations},
                    {"restarts", c.optimizer.restarts},
                    {"seed", c.optimizer.seed},
                    {"x_tolerance", c.optimizer.x_tolerance},
                    {"f_tolerance", c.optimizer.f_tolerance},
                    {"initial_step", c.optimizer.initial_step},
                    {"restart_perturbation", c.optimizer.restart_perturbation},
                    {"lower", c.optimizer.lower},
                    {"upper", c.optimizer.upper}};
  j["predict"] = {{"x0", c.predict.x0},
                  {"steps", c.predict.steps},
                  {"signal", signal_spec_to_json(c.predict.signal)},
                  {"repetitions", c.predict.repetitions},
                  {"surrogate", c.predict.surrogate},
                  {"output_stride", c.predict.output_stride}};
  j["track"] = {{"x0", c.track.x0},
                {"horizon", c.track.horizon},
                {"intervals", c.track.intervals},
                {"reference", signal_spec_to_json(c.track.reference)}};
  j["sample"] = {{"x0", c.sample.x0},
                 {"horizon", c.sample.horizon},
                 {"intervals", c.sample.intervals},
                 {"running_cost", c.sample.running_cost == RunningCost::well ? "dw" : "bias"},
                 {"target", c.sample.target},
                 {"c", c.sample.c}};
  Json cells = Json::array();
  for (const auto& cell : c.sweep.cells) cells.push_back({{"k_bias", cell.k_bias}, {"lambda", cell.lambda}});
  j["sweep"] = {{"m", c.sweep.m}, {"k_dw", c.sweep.k_dw}, {"cells", cells}, {"repetitions", c.sweep.repetitions}};
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  Reader root(j, "");
  std::string kind_name;
  root.require("kind", kind_name);
  ExperimentConfig c = default_config(parse_kind(kind_name));

  std::string schema = kConfigSchema;
  root.get("schema", schema);
  if (schema != kConfigSchema) throw ConfigError("field 'schema': unsupported version '" + schema + "'");

  if (!root.has("model")) throw ConfigError("missing required field 'model'");
  {
    Reader r = root.child("model");
    r.require("k_dw", c.model.k_dw);
    r.require("k_bias", c.model.k_bias);
    r.get("beta", c.model.beta);
    r.get("diffusion", c.model.diffusion);
    r.finish();
  }
  if (root.has("dictionary")) {
    Reader r = root.child("dictionary");
    r.get("features", c.dictionary.features);
    r.get("bandwidth", c.dictionary.bandwidth);
    r.get("seed", c.dictionary.seed);
    std::string sampling = sampling_name(c.dictionary.sampling);
    r.get("sampling", sampling);
    if (sampling == "iid") {
      c.dictionary.sampling = FrequencySampling::iid;
    } else if (sampling == "antithetic") {
      c.dictionary.sampling = FrequencySampling::antithetic;
    } else {
      throw ConfigError("field 'dictionary.sampling': expected iid or antithetic");
    }
    r.finish();
  }
  if (root.has("data")) {
    Reader r = root.child("data");
    r.get("m", c.data.m);
    std::vector<double> domain{c.data.lo, c.data.hi};
    r.get("domain", domain);
    if (domain.size() != 2) throw ConfigError("field 'data.domain' must be [lo, hi]");
    c.data.lo = domain[0];
    c.data.hi = domain[1];
    r.get("seed", c.data.seed);
    r.get("training_inputs", c.data.training_inputs);
    r.finish();
  }
  root.get("lambda", c.lambda);
  if (root.has("observable_ridge")) {
    Json ridge;
    root.get("observable_ridge", ridge);
    if (ridge.is_null()) {
      c.observable_ridge.reset();
    } else if (ridge.is_number()) {
      c.observable_ridge = ridge.get<double>();
    } else {
      throw ConfigError("field 'observable_ridge' has the wrong type");
    }
  }
  if (root.has("oracle")) {
    Reader r = root.child("oracle");
    r.get("trajectories", c.oracle.trajectories);
    r.get("dt", c.oracle.dt);
    r.get("seed", c.oracle.seed);
    r.get("offset", c.oracle.offset);
    r.finish();
  }
  if (root.has("propagation")) {
    Reader r = root.child("propagation");
    r.get("substeps", c.propagation.substeps);
    r.get("auto_substeps", c.propagation.auto_substeps);
    r.finish();
  }
  if (root.has("optimizer")) {
    Reader r = root.child("optimizer");
    r.get("max_evaluations", c.optimizer.max_evaluations);
    r.get("restarts", c.optimizer.restarts);
    r.get("seed", c.optimizer.seed);
    r.get("x_tolerance", c.optimizer.x_tolerance);
    r.get("f_tolerance", c.optimizer.f_tolerance);
    r.get("initial_step", c.optimizer.initial_step);
    r.get("restart_perturbation", c.optimizer.restart_perturbation);
    r.get("lower", c.optimizer.lower);
    r.get("upper", c.optimizer.upper);
    r.finish();
  }
  if (root.has("predict")) {
    Reader r = root.child("predict");
    r.get("x0", c.predict.x0);
    r.get("steps", c.predict.steps);
    if (r.has("signal")) c.predict.signal = read_signal(r.child("signal"), c.predict.signal);
    r.get("repetitions", c.predict.repetitions);
    r.get("surrogate", c.predict.surrogate);
    r.get("output_stride", c.predict.output_stride);
    r.finish();
  }
  if (root.has("track")) {
    Reader r = root.child("track");
    r.get("x0", c.track.x0);
    r.get("horizon", c.track.horizon);
    r.get("intervals", c.track.intervals);
    if (r.has("reference")) c.track.reference = read_signal(r.child("reference"), c.track.reference);
    r.finish();
  }
  if (root.has("sample")) {
    Reader r = root.child("sample");
    r.get("x0", c.sample.x0);
    r.get("horizon", c.sample.horizon);
    r.get("intervals", c.sample.intervals);
    std::string cost = c.sample.running_cost == RunningCost::well ? "dw" : "bias";
    r.get("running_cost", cost);
    if (cost == "dw") {
      c.sample.running_cost = RunningCost::well;
    } else if (cost == "bias") {
      c.sample.running_cost = RunningCost::bias;
    } else {
      throw ConfigError("field 'sample.running_cost': expected dw or bias");
    }
    r.get("target", c.sample.target);
    r.get("c", c.sample.c);
    r.finish();
  }
  if (root.has("sweep")) {
    Reader r = root.child("sweep");
    r.get("m", c.sweep.m);
    r.get("k_dw", c.sweep.k_dw);
    if (r.has("cells")) {
      Json cells;
      r.get("cells", cells);
      if (!cells.is_array()) throw ConfigError("field 'sweep.cells' must be an array");
      c.sweep.cells.clear();
      for (const auto& cell : cells) {
        Reader cr(cell, "sweep.cells[]");
        SweepCell sc;
        cr.require("k_bias", sc.k_bias);
        cr.require("lambda", sc.lambda);
        cr.finish();
        c.sweep.cells.push_back(sc);
      }
    }
    r.get("repetitions", c.sweep.repetitions);
    r.finish();
  }
  root.get("output_dir", c.output_dir);
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(load_json(path)); }

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_json(path, config_to_json(config));
}

std::string config_digest(const ExperimentConfig& config) {
  Json j = config_to_json(config);
  j.erase("output_dir");
  return digest_hex(j.dump());
}

void apply_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.dictionary.seed = seed;
  config.data.seed = seed + 1;
  config.oracle.seed = seed + 2;
  config.optimizer.seed = seed + 3;
}

}  // namespace kgedmd
