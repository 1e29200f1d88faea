#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kgedmd/dynamics.hpp"
#include "kgedmd/types.hpp"

namespace kgedmd {

/// Finite basis {psi_1, ..., psi_N} with analytic first and second derivatives.
///
/// Implementations provide pointwise evaluation; the generator action
/// L_u psi = (b + sum_i G_i u_i) . grad psi + 1/2 Sigma : hess psi is assembled here.
class Dictionary {
 public:
  virtual ~Dictionary() = default;

  virtual Index size() const = 0;
  virtual Index state_dim() const = 0;
  virtual std::string describe() const = 0;

  /// Psi(x), length N.
  virtual ComplexVector features(const Vector& x) const = 0;
  /// Row j is grad psi_j(x); N x n.
  virtual ComplexMatrix gradient(const Vector& x) const = 0;
  /// Entry j is 1/2 Sigma : hess psi_j(x).
  virtual ComplexVector hessian_contract(const Vector& x, const Matrix& sigma) const = 0;

  /// Permutation p with psi_{p[j]}(x) = conj(psi_j(x)) for all real x, when the
  /// span is closed under complex conjugation. Real observables then have real
  /// expectations, and estimators are projected onto that symmetry.
  virtual std::optional<std::vector<Index>> conjugate_partners() const { return std::nullopt; }

  /// Psi(X) for data columns X; N x m.
  ComplexMatrix evaluate(const Matrix& data) const;
  /// L_u Psi(X) for the model at constant input u; N x m.
  ComplexMatrix generator_apply(const SdeModel& model, const Vector& u, const Matrix& data) const;

 protected:
  void check_state(const Vector& x) const;
};

/// Random Fourier features psi_j(x) = exp(i x^T w_j) for the Gaussian kernel
/// k(x, y) = exp(-|x - y|^2 / (2 bandwidth^2)), i.e. w_j ~ Normal(0, bandwidth^-2 I).
class RffDictionary final : public Dictionary {
 public:
  /// `frequencies` is n x N, one frequency per column.
  RffDictionary(Matrix frequencies, double bandwidth, std::uint64_t seed);

  Index size() const override { return frequencies_.cols(); }
  Index state_dim() const override { return frequencies_.rows(); }
  std::string describe() const override;

  ComplexVector features(const Vector& x) const override;
  ComplexMatrix gradient(const Vector& x) const override;
  ComplexVector hessian_contract(const Vector& x, const Matrix& sigma) const override;
  std::optional<std::vector<Index>> conjugate_partners() const override { return partners_; }

  const Matrix& frequencies() const { return frequencies_; }
  double bandwidth() const { return bandwidth_; }
  std::uint64_t seed() const { return seed_; }

  /// (1/N) Psi(x)^H Psi(y).
  Complex kernel_estimate(const Vector& x, const Vector& y) const;

  bool operator==(const RffDictionary& other) const;

 private:
  Matrix frequencies_;
  double bandwidth_;
  std::uint64_t seed_;
  std::optional<std::vector<Index>> partners_;
};

enum class FrequencySampling {
  /// N independent draws.
  iid,
  /// floor(N/2) independent draws w followed by their negatives -w (plus w = 0
  /// when N is odd). Same marginal law; the feature span becomes closed under conjugation.
  antithetic,
};

/// Draws frequencies from the Gaussian-kernel spectral measure Normal(0, bandwidth^-2 I).
RffDictionary sample_dictionary(Index n_dim, Index n_features, double bandwidth, std::uint64_t seed,
                                FrequencySampling sampling = FrequencySampling::iid);

double gaussian_kernel(const Vector& x, const Vector& y, double bandwidth);

/// Scalar monomials {1, x, ..., x^degree}. Exactly closed under the generator of
/// linear-drift, additive-noise models, which makes analytic generator matrices available.
class MonomialDictionary final : public Dictionary {
 public:
  explicit MonomialDictionary(int degree);

  Index size() const override { return degree_ + 1; }
  Index state_dim() const override { return 1; }
  std::string describe() const override;

  ComplexVector features(const Vector& x) const override;
  ComplexMatrix gradient(const Vector& x) const override;
  ComplexVector hessian_contract(const Vector& x, const Matrix& sigma) const override;
  std::optional<std::vector<Index>> conjugate_partners() const override;

 private:
  int degree_;
};

/// Coefficients V of an observable phi(x) ~ V^H Psi(x).
struct ObservableCoeffs {
  ComplexVector coeffs;
  std::string label;
  /// RMS residual on the fitting data.
  double fit_residual = 0.0;

  Complex evaluate(const Dictionary& dict, const Vector& x) const;
};

/// Minimizes (1/m) sum_l |V^H Psi(x_l) - phi(x_l)|^2 + ridge |V|^2 through the
/// regularized normal equations and the library's cutoff pseudoinverse.
ObservableCoeffs fit_observable(const Dictionary& dict, const Matrix& data, const Vector& values,
                                double ridge, std::string label = {});
ObservableCoeffs fit_observable(const Dictionary& dict, const Matrix& data,
                                const Observable& phi, double ridge, std::string label = {});

/// M <- (M + P conj(M) P^T) / 2 for the partner permutation P.
void enforce_conjugation_symmetry(const std::vector<Index>& partners, ComplexMatrix& m);
void enforce_conjugation_symmetry(const std::vector<Index>& partners, ComplexVector& v);

/// m points i.i.d. uniform on [lo, hi]^n.
Matrix uniform_samples(Index n_dim, Index m, double lo, double hi, std::uint64_t seed);
/// m midpoints of a uniform partition of [lo, hi] (1-d quadrature grid).
Matrix midpoint_grid(Index m, double lo, double hi);

}  // namespace kgedmd
