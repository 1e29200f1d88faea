#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/QR>

#include "kgedmd/errors.hpp"
#include "kgedmd/features.hpp"

using namespace kgedmd;

namespace {

Vector vec1(double v) { return Vector::Constant(1, v); }

double sample_variance(const Matrix& w) {
  const double mean = w.mean();
  return (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
}

RffDictionary fixed_dictionary(std::initializer_list<double> freqs) {
  Matrix w(1, static_cast<Index>(freqs.size()));
  Index j = 0;
  for (double f : freqs) w(0, j++) = f;
  return RffDictionary(w, 0.5, 0);
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("frequency sampling statistics") {
  const RffDictionary d = sample_dictionary(1, 50, 0.5, 1);
  CHECK(d.size() == 50);
  CHECK(d.frequencies().allFinite());
  const double sd = std::sqrt(sample_variance(d.frequencies()));
  CHECK(sd > 2.0 * 0.7);
  CHECK(sd < 2.0 * 1.3);

  CHECK(sample_dictionary(1, 1, 0.5, 123).size() == 1);

  const RffDictionary big = sample_dictionary(1, 100000, 0.5, 2);
  CHECK(std::abs(sample_variance(big.frequencies()) - 4.0) < 0.02 * 4.0);
}

TEST_CASE("frequency sampling is deterministic per seed") {
  CHECK(sample_dictionary(2, 20, 0.5, 9) == sample_dictionary(2, 20, 0.5, 9));
  CHECK_FALSE(sample_dictionary(2, 20, 0.5, 9) == sample_dictionary(2, 20, 0.5, 10));
}

TEST_CASE("antithetic sampling pairs every frequency with its negative") {
  const RffDictionary d = sample_dictionary(1, 51, 0.5, 4, FrequencySampling::antithetic);
  const Matrix& w = d.frequencies();
  for (Index j = 0; j < 25; ++j) CHECK(w(0, j + 25) == -w(0, j));
  CHECK(w(0, 50) == 0.0);
  const auto partners = d.conjugate_partners();
  REQUIRE(partners.has_value());
  const Vector x = vec1(0.37);
  const ComplexVector psi = d.features(x);
  for (Index j = 0; j < d.size(); ++j) {
    CHECK(std::abs(psi((*partners)[static_cast<std::size_t>(j)]) - std::conj(psi(j))) < 1e-15);
  }
  CHECK_FALSE(sample_dictionary(1, 50, 0.5, 4).conjugate_partners().has_value());
}

TEST_CASE("zero frequency and a hand-evaluated feature") {
  const RffDictionary z = fixed_dictionary({0.0});
  const Vector x = vec1(1.3);
  CHECK(z.features(x)(0) == Complex(1.0, 0.0));
  CHECK(z.gradient(x)(0, 0) == Complex(0.0, 0.0));
  CHECK(z.hessian_contract(x, Matrix::Constant(1, 1, 2.0))(0) == Complex(0.0, 0.0));

  const RffDictionary two = fixed_dictionary({2.0});
  const Complex psi = two.features(vec1(std::numbers::pi / 2.0))(0);
  CHECK(psi.real() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(psi.imag()) < 1e-15);
}

TEST_CASE("unit modulus and conjugate evaluation") {
  const RffDictionary d = sample_dictionary(2, 30, 0.5, 5);
  const Matrix xs = uniform_samples(2, 50, -2.0, 2.0, 6);
  for (Index l = 0; l < xs.cols(); ++l) {
    const Vector x = xs.col(l);
    const ComplexVector p = d.features(x);
    const ComplexVector q = d.features(-x);
    for (Index j = 0; j < d.size(); ++j) {
      CHECK(std::abs(std::abs(p(j)) - 1.0) < 1e-14);
      CHECK(std::abs(q(j) - std::conj(p(j))) < 1e-14);
    }
  }
}

TEST_CASE("analytic derivatives match central finite differences") {
  const RffDictionary d = sample_dictionary(2, 20, 0.5, 7);
  const Matrix xs = uniform_samples(2, 100, -2.0, 2.0, 8);
  Matrix sigma(2, 2);
  sigma << 2.0, 0.3, 0.3, 1.0;
  const double h = 1e-5;
  const double h2 = 1e-3;
  double grad_err = 0.0, hess_err = 0.0;
  for (Index l = 0; l < xs.cols(); ++l) {
    const Vector x = xs.col(l);
    const ComplexMatrix g = d.gradient(x);
    const ComplexVector hc = d.hessian_contract(x, sigma);
    ComplexVector fd_h = ComplexVector::Zero(d.size());
    for (Index a = 0; a < 2; ++a) {
      Vector e = Vector::Zero(2);
      e(a) = h;
      const ComplexVector fd = (d.features(x + e) - d.features(x - e)) / (2.0 * h);
      grad_err = std::max(grad_err, (fd - g.col(a)).cwiseAbs().maxCoeff() / g.col(a).cwiseAbs().maxCoeff());
      for (Index b = 0; b < 2; ++b) {
        Vector ea = Vector::Zero(2), eb = Vector::Zero(2);
        ea(a) = h2;
        eb(b) = h2;
        const ComplexVector second = (d.features(x + ea + eb) - d.features(x + ea - eb) -
                                      d.features(x - ea + eb) + d.features(x - ea - eb)) /
                                     (4.0 * h2 * h2);
        fd_h += 0.5 * sigma(a, b) * second;
      }
    }
    hess_err = std::max(hess_err, (fd_h - hc).cwiseAbs().maxCoeff() / hc.cwiseAbs().maxCoeff());
  }
  CHECK(grad_err < 1e-6);
  CHECK(hess_err < 1e-4);
}

TEST_CASE("kernel approximation with 1e4 features") {
  const RffDictionary d = sample_dictionary(1, 10000, 0.5, 10);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const Vector x = vec1(-2.0 + 4.0 * i / 19.0);
      const Vector y = vec1(-2.0 + 4.0 * j / 19.0);
      worst = std::max(worst, std::abs(d.kernel_estimate(x, y) - gaussian_kernel(x, y, 0.5)));
    }
  }
  CHECK(worst < 0.05);
}

TEST_CASE("generator action annihilates the constant feature") {
  const RffDictionary d = fixed_dictionary({0.0, 1.5});
  const SdeModel m = double_well({1.0, 3.0, 1.0});
  const ComplexMatrix a = d.generator_apply(m, vec1(0.4), uniform_samples(1, 30, -2.0, 2.0, 1));
  CHECK(a.row(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generator action at the stationary point is pure diffusion") {
  const RffDictionary d = sample_dictionary(1, 10, 0.5, 3);
  const SdeModel m = double_well({1.0, 3.0, 1.0});
  const ComplexMatrix a = d.generator_apply(m, vec1(1.0), Matrix::Constant(1, 1, 1.0));
  const ComplexVector psi = d.features(vec1(1.0));
  for (Index j = 0; j < d.size(); ++j) {
    const double w = d.frequencies()(0, j);
    const Complex expected = -0.5 * 2.0 * w * w * psi(j);
    CHECK(std::abs(a(j, 0) - expected) < 1e-12 * (1.0 + std::abs(expected)));
  }
}

TEST_CASE("generator action matches a finite-difference differential operator") {
  const RffDictionary d = sample_dictionary(1, 10, 0.5, 12);
  const SdeModel ou = ornstein_uhlenbeck(1.3, 2.0);
  const Matrix xs = uniform_samples(1, 20, -2.0, 2.0, 13);
  const ComplexMatrix a = d.generator_apply(ou, Vector(), xs);
  const double h = 1e-4;
  for (Index l = 0; l < xs.cols(); ++l) {
    const Vector x = xs.col(l);
    const ComplexVector f0 = d.features(x), fp = d.features(x + vec1(h)), fm = d.features(x - vec1(h));
    const ComplexVector fd = -1.3 * x(0) * (fp - fm) / (2.0 * h) + 0.5 * (2.0 / 2.0) * (fp - 2.0 * f0 + fm) / (h * h);
    CHECK((fd - a.col(l)).cwiseAbs().maxCoeff() / a.col(l).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("generator action is affine in the constant input") {
  const RffDictionary d = sample_dictionary(1, 20, 0.5, 14);
  const SdeModel m = double_well({3.0, 4.0, 1.0});
  const Matrix xs = uniform_samples(1, 40, -2.0, 2.0, 15);
  const ComplexMatrix l0 = d.generator_apply(m, vec1(0.0), xs);
  const ComplexMatrix l1 = d.generator_apply(m, vec1(1.0), xs);
  const ComplexMatrix lu = d.generator_apply(m, vec1(-0.65), xs);
  CHECK((lu - (l0 + (l1 - l0) * -0.65)).cwiseAbs().maxCoeff() < 1e-12 * l0.cwiseAbs().maxCoeff());
}

TEST_CASE("generator action dimension mismatch") {
  const RffDictionary d = sample_dictionary(1, 5, 0.5, 1);
  const SdeModel m = double_well({1.0, 3.0, 1.0});
  CHECK_THROWS_AS(d.generator_apply(m, Vector::Zero(2), Matrix::Zero(1, 3)), ArgumentError);
  CHECK_THROWS_AS(d.generator_apply(m, vec1(0.0), Matrix::Zero(2, 3)), ArgumentError);
}

TEST_CASE("fitting a member of the span recovers its unit vector") {
  const RffDictionary d = fixed_dictionary({0.5, 1.3, 0.0, -0.5, -1.3});
  const Matrix xs = uniform_samples(1, 1000, -2.0, 2.0, 16);
  const ComplexMatrix psi = d.evaluate(xs);
  // psi_1 = cos + i sin; both parts lie in the span because -1.3 is present too.
  const Vector re = psi.row(1).real().transpose();
  const Vector im = psi.row(1).imag().transpose();
  const ObservableCoeffs a = fit_observable(d, xs, re, 0.0);
  const ObservableCoeffs b = fit_observable(d, xs, im, 0.0);
  const ComplexVector v = a.coeffs + Complex(0.0, -1.0) * b.coeffs;  // conj(i) = -i
  ComplexVector unit = ComplexVector::Zero(5);
  unit(1) = 1.0;
  CHECK((v - unit).cwiseAbs().maxCoeff() < 1e-8);

  const ObservableCoeffs zero = fit_observable(d, xs, Vector::Zero(1000), 0.0);
  CHECK(zero.coeffs.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.fit_residual == 0.0);
}

TEST_CASE("fitting the state observable agrees with an independent QR solve") {
  const RffDictionary d = sample_dictionary(1, 50, 0.5, 1, FrequencySampling::antithetic);
  const Matrix xs = uniform_samples(1, 1000, -2.0, 2.0, 2);
  const Observable phi = [](const Eigen::Ref<const Vector>& x) { return x(0); };
  const ObservableCoeffs fit = fit_observable(d, xs, phi, 0.0, "x");
  CHECK(fit.fit_residual < 1e-3);

  // Real least squares over [cos(w x), sin(w x)] solved by column-pivoting QR.
  const ComplexMatrix psi = d.evaluate(xs);
  Matrix design(xs.cols(), 2 * d.size());
  design << psi.real().transpose(), psi.imag().transpose();
  const Vector target = xs.row(0).transpose();
  const Vector beta = design.colPivHouseholderQr().solve(target);

  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = -1.8 + 3.6 * i / 200.0;
    const ComplexVector p = d.features(vec1(x));
    const double qr = p.real().dot(beta.head(d.size())) + p.imag().dot(beta.tail(d.size()));
    const double ours = fit.evaluate(d, vec1(x)).real();
    worst = std::max(worst, std::abs(ours - x));
    CHECK(std::abs(ours - qr) < 1e-2);
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("fit argument checks") {
  const RffDictionary d = sample_dictionary(1, 5, 0.5, 1);
  CHECK_THROWS(fit_observable(d, Matrix::Zero(1, 0), Vector::Zero(0), 0.0));
  CHECK_THROWS_AS(fit_observable(d, Matrix::Zero(1, 4), Vector::Zero(3), 0.0), ArgumentError);
}

}
