#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>

#include "kgedmd/config.hpp"
#include "kgedmd/digest.hpp"
#include "kgedmd/errors.hpp"
#include "kgedmd/gedmd.hpp"
#include "kgedmd/serialization.hpp"
#include "kgedmd/table.hpp"

using namespace kgedmd;

namespace {

GeneratorModel small_model() {
  auto dict = std::make_shared<RffDictionary>(sample_dictionary(1, 8, 0.5, 5, FrequencySampling::antithetic));
  const Matrix x = uniform_samples(1, 200, -2.0, 2.0, 6);
  return fit_control_affine(dict, double_well({1.0, 3.0, 1.0}),
                            {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)}, x, 1e-8);
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("complex matrix round trip is exact") {
  ComplexMatrix m(2, 3);
  m << Complex(1.0 / 3.0, -2.5e-300), Complex(0.0, 1e300), Complex(-0.0, 7.1),
      Complex(std::nextafter(1.0, 2.0), 0.0), Complex(-1e-17, 3.0), Complex(5.0, -5.0);
  const ComplexMatrix back = matrix_from_json(parse_json(matrix_to_json(m).dump()));
  CHECK(back == m);
}

TEST_CASE("generator round trip reproduces every matrix bit for bit") {
  const GeneratorModel m = small_model();
  const GeneratorModel back = generator_from_json(parse_json(generator_to_json(m).dump()));
  CHECK(back.base() == m.base());
  REQUIRE(back.slopes().size() == 1);
  CHECK(back.slopes()[0] == m.slopes()[0]);
  CHECK(back.mass() == m.mass());
  CHECK(back.lambda() == m.lambda());
  CHECK(back.effective_rank() == m.effective_rank());
  CHECK(back.data_digest() == m.data_digest());
  REQUIRE(back.trained().size() == 2);
  CHECK(back.trained()[1] == m.trained()[1]);
  CHECK(back.generator_at(Vector::Constant(1, 0.3)) == m.generator_at(Vector::Constant(1, 0.3)));
  const auto* dict = dynamic_cast<const RffDictionary*>(&back.dictionary());
  REQUIRE(dict != nullptr);
  CHECK(*dict == dynamic_cast<const RffDictionary&>(m.dictionary()));
  CHECK(dict->conjugate_partners() == m.dictionary().conjugate_partners());
}

TEST_CASE("dictionary and observable round trips") {
  const MonomialDictionary mono(3);
  const auto back = dictionary_from_json(dictionary_to_json(mono));
  CHECK(back->size() == 4);
  CHECK(back->features(Vector::Constant(1, 2.0)) == mono.features(Vector::Constant(1, 2.0)));

  ObservableCoeffs obs;
  obs.coeffs = ComplexVector::Zero(3);
  obs.coeffs << Complex(0.1, 0.2), 3.0, Complex(0.0, -1.0 / 7.0);
  obs.label = "x^2";
  obs.fit_residual = 1.25e-9;
  const ObservableCoeffs o2 = observable_from_json(parse_json(observable_to_json(obs).dump()));
  CHECK(o2.coeffs == obs.coeffs);
  CHECK(o2.label == obs.label);
  CHECK(o2.fit_residual == obs.fit_residual);
}

TEST_CASE("signal round trip") {
  Matrix v(2, 3);
  v << 0.1, -0.2, 1.0 / 3.0, 4.0, 5.0, -6.0;
  const InputSignal s(0.125, v, "two inputs");
  const InputSignal back = signal_from_json(parse_json(signal_to_json(s).dump()));
  CHECK(back == s);
  CHECK(back.descriptor() == "two inputs");
}

TEST_CASE("syntax errors report the line") {
  try {
    parse_json("{\n  \"a\": 1,\n  \"b\": [1, 2,\n  }\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("missing generator fields are named") {
  Json j = generator_to_json(small_model());
  j.erase("base");
  const std::string msg = message_of([&] { generator_from_json(j); });
  CHECK(msg.find("base") != std::string::npos);
  CHECK_THROWS_AS(generator_from_json(j), ConfigError);
}

TEST_CASE("config round trip for every kind") {
  for (ExperimentKind k : {ExperimentKind::predict, ExperimentKind::track, ExperimentKind::sample,
                           ExperimentKind::sweep}) {
    ExperimentConfig c = default_config(k);
    c.model.k_dw = 2.0;
    c.lambda = 1e-10;
    c.observable_ridge = 1e-9;
    c.sample.running_cost = RunningCost::bias;
    c.track.reference.kind = "samples";
    c.track.reference.samples = {0.1, 0.2, 0.3};
    c.track.reference.sample_step = 0.5;
    const ExperimentConfig back = config_from_json(parse_json(config_to_json(c).dump(2)));
    CHECK(back == c);
    CHECK(config_digest(back) == config_digest(c));
  }
}

TEST_CASE("config defaults and required fields") {
  const Json minimal = parse_json(R"({"kind": "track", "model": {"k_dw": 3, "k_bias": 4}})");
  const ExperimentConfig c = config_from_json(minimal);
  CHECK(c.kind == ExperimentKind::track);
  CHECK(c.model.k_dw == 3.0);
  CHECK(c.dictionary.features == 50);
  CHECK(c.dictionary.bandwidth == 0.5);
  CHECK(c.data.m == 1000);

  Json missing = minimal;
  missing["model"].erase("k_bias");
  const std::string msg = message_of([&] { config_from_json(missing); });
  CHECK(msg.find("missing required field 'model.k_bias'") != std::string::npos);
  Json no_kind = minimal;
  no_kind.erase("kind");
  CHECK(message_of([&] { config_from_json(no_kind); }).find("'kind'") != std::string::npos);
}

TEST_CASE("config rejects unknown and invalid fields") {
  Json j = parse_json(R"({"kind": "predict", "model": {"k_dw": 1, "k_bias": 3}, "dictionary": {"features": 50, "bandwith": 0.5}})");
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  CHECK(message_of([&] { config_from_json(j); }).find("dictionary.bandwith") != std::string::npos);

  j = parse_json(R"({"kind": "predict", "model": {"k_dw": 1, "k_bias": 3}, "data": {"m": 0}})");
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = parse_json(R"({"kind": "explore", "model": {"k_dw": 1, "k_bias": 3}})");
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = parse_json(R"({"kind": "predict", "model": {"k_dw": "one", "k_bias": 3}})");
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("config digest ignores the output directory only") {
  ExperimentConfig a = default_config(ExperimentKind::predict);
  ExperimentConfig b = a;
  b.output_dir = "elsewhere";
  CHECK(config_digest(a) == config_digest(b));
  b.dictionary.seed += 1;
  CHECK(config_digest(a) != config_digest(b));
  CHECK(config_digest(a).size() == 16);

  apply_seed(a, 10);
  CHECK(a.dictionary.seed == 10);
  CHECK(a.data.seed == 11);
  CHECK(a.oracle.seed == 12);
  CHECK(a.optimizer.seed == 13);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(digest_hex("") == "cbf29ce484222325");
  CHECK(digest_hex("a") == "af63dc4c8601ec8c");
  CHECK(digest_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("result table round trip with absent values") {
  ResultTable t;
  t.schema = "kgedmd/test/1";
  t.config_digest = "0123456789abcdef";
  t.columns = {"t", "value", "maybe"};
  t.add_row({0.0, 1.0 / 3.0, std::numeric_limits<double>::quiet_NaN()});
  t.add_row({1e-3, -2.5e-300, 7.0});
  const std::string csv = to_csv(t);
  CHECK(csv.rfind("# schema=kgedmd/test/1 config_digest=0123456789abcdef\nt,value,maybe,config_digest\n", 0) == 0);
  CHECK(csv.find("0,0.3333333333333333,,0123456789abcdef\n") != std::string::npos);
  const ResultTable back = from_csv(csv);
  CHECK(back == t);
  CHECK(std::isnan(back.rows[0][2]));
  CHECK(back.column("maybe") == 2);
  CHECK_THROWS_AS(t.add_row({1.0}), ArgumentError);

  const auto path = std::filesystem::temp_directory_path() / "kgedmd_io_test" / "nested" / "t.csv";
  export_results(t, path);
  CHECK(load_results(path) == t);
  std::filesystem::remove_all(path.parent_path().parent_path());
}

TEST_CASE("malformed tables report the line") {
  const std::string head = "# schema=s config_digest=d\na,b,config_digest\n1,2,d\n";
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      from_csv(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of(head + "3,d\n") == 4);
  CHECK(line_of(head + "3,x,d\n") == 4);
  CHECK(line_of(head + "3,4,e\n") == 4);
  CHECK(line_of("a,b\n1,2\n") == 1);
}

}
