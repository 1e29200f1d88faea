#include "kgedmd/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "kgedmd/errors.hpp"

namespace kgedmd {

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("missing required field '") + key + "'");
  }
  return j.at(key);
}

Json vector_to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

Json matrix_to_json(const ComplexMatrix& m) {
  std::vector<double> re(static_cast<std::size_t>(m.size())), im(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.size(); ++i) {
    re[static_cast<std::size_t>(i)] = m.data()[i].real();
    im[static_cast<std::size_t>(i)] = m.data()[i].imag();
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

ComplexMatrix matrix_from_json(const Json& j) {
  const auto rows = require(j, "rows").get<Index>();
  const auto cols = require(j, "cols").get<Index>();
  const auto re = require(j, "re").get<std::vector<double>>();
  const auto im = require(j, "im").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Index>(re.size()) != rows * cols || re.size() != im.size()) {
    throw ConfigError("matrix: shape header does not match the data length");
  }
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < re.size(); ++i) m.data()[i] = Complex(re[i], im[i]);
  return m;
}

Json dictionary_to_json(const Dictionary& dict) {
  if (const auto* rff = dynamic_cast<const RffDictionary*>(&dict)) {
    Json freqs = Json::array();
    for (Index j = 0; j < rff->size(); ++j) freqs.push_back(vector_to_json(rff->frequencies().col(j)));
    return Json{{"schema", kDictionarySchema}, {"kind", "rff"},          {"state_dim", rff->state_dim()},
                {"bandwidth", rff->bandwidth()}, {"seed", rff->seed()}, {"frequencies", freqs}};
  }
  if (const auto* mono = dynamic_cast<const MonomialDictionary*>(&dict)) {
    return Json{{"schema", kDictionarySchema}, {"kind", "monomial"}, {"degree", mono->size() - 1}};
  }
  throw ArgumentError("dictionary_to_json: unsupported dictionary type " + dict.describe());
}

std::shared_ptr<const Dictionary> dictionary_from_json(const Json& j) {
  const auto kind = require(j, "kind").get<std::string>();
  if (kind == "rff") {
    const auto n = require(j, "state_dim").get<Index>();
    const auto& freqs = require(j, "frequencies");
    Matrix w(n, static_cast<Index>(freqs.size()));
    for (std::size_t c = 0; c < freqs.size(); ++c) {
      const Vector col = vector_from_json(freqs[c]);
      if (col.size() != n) throw ConfigError("dictionary: frequency has wrong dimension");
      w.col(static_cast<Index>(c)) = col;
    }
    return std::make_shared<RffDictionary>(std::move(w), require(j, "bandwidth").get<double>(),
                                           require(j, "seed").get<std::uint64_t>());
  }
  if (kind == "monomial") return std::make_shared<MonomialDictionary>(require(j, "degree").get<int>());
  throw ConfigError("dictionary: unknown kind '" + kind + "'");
}

Json observable_to_json(const ObservableCoeffs& obs) {
  return Json{{"label", obs.label}, {"fit_residual", obs.fit_residual}, {"coeffs", matrix_to_json(obs.coeffs)}};
}

ObservableCoeffs observable_from_json(const Json& j) {
  ObservableCoeffs obs;
  obs.label = require(j, "label").get<std::string>();
  obs.fit_residual = require(j, "fit_residual").get<double>();
  const ComplexMatrix c = matrix_from_json(require(j, "coeffs"));
  if (c.cols() != 1) throw ConfigError("observable: coefficients must be a column vector");
  obs.coeffs = c.col(0);
  return obs;
}

Json generator_to_json(const GeneratorModel& model) {
  Json inputs = Json::array();
  for (const auto& u : model.training_inputs()) inputs.push_back(vector_to_json(u));
  Json trained = Json::array();
  for (const auto& m : model.trained()) trained.push_back(matrix_to_json(m));
  Json slopes = Json::array();
  for (const auto& m : model.slopes()) slopes.push_back(matrix_to_json(m));
  return Json{{"schema", kGeneratorSchema},
              {"dictionary", dictionary_to_json(model.dictionary())},
              {"lambda", model.lambda()},
              {"effective_rank", model.effective_rank()},
              {"data_digest", model.data_digest()},
              {"training_inputs", inputs},
              {"trained", trained},
              {"base", matrix_to_json(model.base())},
              {"slopes", slopes},
              {"mass", matrix_to_json(model.mass())}};
}

GeneratorModel generator_from_json(const Json& j) {
  const auto schema = require(j, "schema").get<std::string>();
  if (schema != kGeneratorSchema) throw ConfigError("generator: unsupported schema '" + schema + "'");
  std::vector<Vector> inputs;
  for (const auto& u : require(j, "training_inputs")) inputs.push_back(vector_from_json(u));
  std::vector<ComplexMatrix> trained;
  for (const auto& m : require(j, "trained")) trained.push_back(matrix_from_json(m));
  std::vector<ComplexMatrix> slopes;
  for (const auto& m : require(j, "slopes")) slopes.push_back(matrix_from_json(m));
  return GeneratorModel(dictionary_from_json(require(j, "dictionary")), std::move(inputs), std::move(trained),
                        matrix_from_json(require(j, "base")), std::move(slopes),
                        matrix_from_json(require(j, "mass")), require(j, "lambda").get<double>(),
                        require(j, "effective_rank").get<Index>(), require(j, "data_digest").get<std::string>());
}

Json signal_to_json(const InputSignal& signal) {
  return Json{{"step", signal.step()},
              {"input_dim", signal.input_dim()},
              {"values", vector_to_json(signal.flatten())},
              {"descriptor", signal.descriptor()}};
}

InputSignal signal_from_json(const Json& j) {
  const Vector flat = vector_from_json(require(j, "values"));
  const InputSignal raw =
      InputSignal::unflatten(flat, require(j, "input_dim").get<Index>(), require(j, "step").get<double>());
  return InputSignal(raw.step(), raw.values(), j.value("descriptor", std::string()));
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t pos = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    throw ParseError("parse error at line " + std::to_string(line) + ": " + e.what(), line);
  }
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

void save_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace kgedmd
