#include <doctest.h>

#include <cmath>
#include <memory>

#include "kgedmd/errors.hpp"
#include "kgedmd/propagation.hpp"
#include "kgedmd/random.hpp"

using namespace kgedmd;

namespace {

Vector vec1(double v) { return Vector::Constant(1, v); }

struct DefaultSetup {
  std::shared_ptr<const RffDictionary> dict;
  Matrix data;
  GeneratorModel model;
  InputSignal signal;
  Vector x0 = vec1(0.5);
};

const DefaultSetup& default_setup() {
  static const DefaultSetup s = [] {
    DefaultSetup p;
    p.dict = std::make_shared<RffDictionary>(sample_dictionary(1, 50, 0.5, 1, FrequencySampling::antithetic));
    p.data = uniform_samples(1, 1000, -2.0, 2.0, 2);
    p.model = fit_control_affine(p.dict, double_well({1.0, 3.0, 1.0}), {vec1(-1.0), vec1(1.0)}, p.data, 0.0);
    p.signal = InputSignal::sampled_scalar(5000, 1e-3, [](double t) { return std::cos(2.0 * t); });
    return p;
  }();
  return s;
}

GeneratorModel scalar_model(Complex a, Complex slope = 0.0) {
  auto d = std::make_shared<MonomialDictionary>(0);
  return GeneratorModel::from_matrices(d, ComplexMatrix::Constant(1, 1, a), {ComplexMatrix::Constant(1, 1, slope)});
}

ComplexVector random_coeffs(Index n, std::uint64_t seed) {
  auto rng = make_stream(seed, 0);
  StandardNormal normal;
  ComplexVector v(n);
  for (Index j = 0; j < n; ++j) v(j) = Complex(normal(rng), normal(rng));
  return v;
}

}  // namespace

TEST_SUITE("propagation") {

TEST_CASE("zero generator leaves coefficients unchanged") {
  const auto& p = default_setup();
  const GeneratorModel zero = GeneratorModel::zero(p.dict, 1);
  const InputSignal u = InputSignal::sampled_scalar(20, 0.05, [](double t) { return std::sin(t); });
  const ComplexVector v0 = random_coeffs(50, 3);
  for (const ComplexVector& v : propagate_forward(zero, u, v0).values) CHECK(v == v0);
  const ComplexVector psi = p.dict->features(p.x0);
  for (const ComplexVector& g : propagate_adjoint(zero, u, p.x0).values) CHECK(g == psi);
}

TEST_CASE("scalar closed form") {
  const Complex a(-0.8, 1.5);
  const GeneratorModel m = scalar_model(a);
  const InputSignal u = InputSignal::constant(1000, 1e-3, vec1(0.0));
  PropagationOptions opt;
  opt.substeps = 1;
  const CoeffTrajectory tr = propagate_forward(m, u, ComplexVector::Constant(1, 2.0), opt);
  for (std::size_t k = 0; k < tr.times.size(); k += 100) {
    // V^H evolves with a, so V itself evolves with conj(a).
    const Complex exact = 2.0 * std::exp(std::conj(a) * tr.times[k]);
    CHECK(std::abs(tr.values[k](0) - exact) < 1e-10 * std::abs(exact));
  }
}

TEST_CASE("RK4 converges with fourth order") {
  const Complex a(-2.0, 3.0);
  const GeneratorModel m = scalar_model(a);
  const InputSignal u = InputSignal::constant(1, 1.0, vec1(0.0));
  const Complex exact = std::exp(a);
  std::vector<double> errors;
  for (int n : {8, 16, 32}) {
    PropagationOptions opt;
    opt.substeps = n;
    opt.auto_substeps = false;
    errors.push_back(std::abs(propagate_adjoint(m, u, vec1(0.0), opt).values.back()(0) - exact));
  }
  CHECK(std::log2(errors[0] / errors[1]) >= 3.5);
  CHECK(std::log2(errors[1] / errors[2]) >= 3.5);
}

TEST_CASE("automatic substeps keep stiff scalar problems stable") {
  const GeneratorModel m = scalar_model(-1000.0);
  const InputSignal u = InputSignal::constant(10, 0.1, vec1(0.0));
  const int n = stable_substeps(m, vec1(0.0), vec1(0.0), 0.1, 1);
  CHECK(n >= 44);
  CHECK(n <= 45);
  CHECK(stable_substeps(m, vec1(0.0), vec1(0.0), 0.1, 100) == 100);
  PropagationOptions opt;
  opt.substeps = 1;
  const CoeffTrajectory tr = propagate_adjoint(m, u, vec1(0.0), opt);
  CHECK(std::abs(tr.values.back()(0)) < 1e-12);
  opt.auto_substeps = false;
  CHECK_THROWS_AS(propagate_adjoint(m, u, vec1(0.0), opt), PropagationDiverged);
}

TEST_CASE("blow-up raises with a time stamp") {
  const GeneratorModel m = scalar_model(60.0);
  const InputSignal u = InputSignal::constant(10, 0.1, vec1(0.0));
  try {
    propagate_forward(m, u, ComplexVector::Ones(1));
    FAIL("expected PropagationDiverged");
  } catch (const PropagationDiverged& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= 1.0 + 1e-12);
  }
}

TEST_CASE("time-varying input: forward reads the input backwards") {
  const GeneratorModel m = scalar_model(-1.0, 0.5);
  const InputSignal u = InputSignal::sampled_scalar(2, 0.5, [](double t) { return t < 0.5 ? 2.0 : -2.0; });
  PropagationOptions opt;
  opt.substeps = 200;
  const Complex fwd = propagate_forward(m, u, ComplexVector::Ones(1), opt).values.back()(0);
  const Complex adj = propagate_adjoint(m, u, vec1(0.0), opt).values.back()(0);
  CHECK(std::abs(fwd - std::exp(-1.0)) < 1e-10);
  CHECK(std::abs(adj - std::exp(-1.0)) < 1e-10);
}

TEST_CASE("forward and adjoint propagation are dual") {
  const auto& p = default_setup();
  const ComplexVector psi0 = p.dict->features(p.x0);
  const CoeffTrajectory gamma = propagate_adjoint(p.model, p.signal, p.x0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ComplexVector v0 = random_coeffs(50, 100 + s);
    const CoeffTrajectory fwd = propagate_forward(p.model, p.signal, v0);
    const double lhs = v0.dot(gamma.values.back()).real();
    const double rhs = fwd.values.back().dot(psi0).real();
    CHECK(std::abs(lhs - rhs) < 1e-8 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("forward flow is linear") {
  const auto& p = default_setup();
  const InputSignal u = InputSignal::sampled_scalar(500, 1e-3, [](double t) { return std::cos(2.0 * t); });
  const ComplexVector v = random_coeffs(50, 7), w = random_coeffs(50, 8);
  const Complex alpha(0.3, -1.2);
  const ComplexVector lhs = propagate_forward(p.model, u, alpha * v + w).values.back();
  const ComplexVector rhs =
      alpha * propagate_forward(p.model, u, v).values.back() + propagate_forward(p.model, u, w).values.back();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + rhs.cwiseAbs().maxCoeff()));
}

TEST_CASE("halving the substep barely moves the endpoint") {
  const auto& p = default_setup();
  const ObservableCoeffs x = fit_observable(*p.dict, p.data, [](const Eigen::Ref<const Vector>& v) { return v(0); }, 0.0);
  PropagationOptions coarse, fine;
  coarse.substeps = 1;
  fine.substeps = 2;
  const double a = predict_expectation(p.model, p.signal, p.x0, x, coarse).values(0, 5000);
  const double b = predict_expectation(p.model, p.signal, p.x0, x, fine).values(0, 5000);
  CHECK(std::abs(a - b) < 1e-8);
}

TEST_CASE("constant observable, initial value and imaginary parts") {
  const auto& p = default_setup();
  const ObservableCoeffs one =
      fit_observable(*p.dict, p.data, [](const Eigen::Ref<const Vector>&) { return 1.0; }, 0.0, "1");
  const ObservableCoeffs x =
      fit_observable(*p.dict, p.data, [](const Eigen::Ref<const Vector>& v) { return v(0); }, 0.0, "x");
  const ExpectationPrediction pred = predict_expectations(p.model, p.signal, p.x0, {one, x});
  CHECK((pred.values.row(0).array() - 1.0).abs().maxCoeff() < 1e-4);
  CHECK(std::abs(pred.values(1, 0) - 0.5) <= 1e-3);
  CHECK(pred.max_imaginary < kImaginaryTolerance);
  CHECK_FALSE(pred.imaginary_warning);
  CHECK(pred.times.size() == 5001);
}

TEST_CASE("exactly representable constant is preserved to 1e-6") {
  // An odd antithetic dictionary contains w = 0, so the constant lies in the span.
  auto dict = std::make_shared<RffDictionary>(sample_dictionary(1, 51, 0.5, 1, FrequencySampling::antithetic));
  const Matrix x = uniform_samples(1, 1000, -2.0, 2.0, 2);
  const GeneratorModel m = fit_control_affine(dict, double_well({1.0, 3.0, 1.0}), {vec1(-1.0), vec1(1.0)}, x, 0.0);
  ObservableCoeffs one;
  one.coeffs = ComplexVector::Zero(51);
  Index zero_freq = -1;
  for (Index j = 0; j < 51; ++j) {
    if (dict->frequencies()(0, j) == 0.0) zero_freq = j;
  }
  REQUIRE(zero_freq >= 0);
  one.coeffs(zero_freq) = 1.0;
  const ExpectationPrediction pred = predict_expectation(m, default_setup().signal, vec1(0.5), one);
  CHECK((pred.values.array() - 1.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("argument checks") {
  const auto& p = default_setup();
  CHECK_THROWS_AS(propagate_forward(p.model, p.signal, ComplexVector::Zero(3)), ArgumentError);
  CHECK_THROWS_AS(propagate_adjoint(p.model, InputSignal::constant(3, 0.1, Vector::Zero(2)), p.x0), ArgumentError);
  PropagationOptions bad;
  bad.substeps = 0;
  CHECK_THROWS_AS(propagate_adjoint(p.model, p.signal, p.x0, bad), ArgumentError);
  ObservableCoeffs short_obs;
  short_obs.coeffs = ComplexVector::Zero(2);
  CHECK_THROWS_AS(predict_expectation(p.model, p.signal, p.x0, short_obs), ArgumentError);
}

}
