#include "kgedmd/features.hpp"

#include <cmath>
#include <sstream>

#include "kgedmd/errors.hpp"
#include "kgedmd/linalg.hpp"
#include "kgedmd/random.hpp"

namespace kgedmd {

namespace {
constexpr Complex kI{0.0, 1.0};
}

void Dictionary::check_state(const Vector& x) const {
  if (x.size() != state_dim()) {
    throw ArgumentError("dictionary expects states of dimension " + std::to_string(state_dim()) +
                        ", got " + std::to_string(x.size()));
  }
}

ComplexMatrix Dictionary::evaluate(const Matrix& data) const {
  if (data.rows() != state_dim()) throw ArgumentError("Dictionary::evaluate: data has wrong row count");
  ComplexMatrix out(size(), data.cols());
  for (Index l = 0; l < data.cols(); ++l) out.col(l) = features(data.col(l));
  return out;
}

ComplexMatrix Dictionary::generator_apply(const SdeModel& model, const Vector& u,
                                          const Matrix& data) const {
  if (data.rows() != state_dim() || model.state_dim != state_dim()) {
    throw ArgumentError("generator_apply: state dimension mismatch between data, model and dictionary");
  }
  ComplexMatrix out(size(), data.cols());
  for (Index l = 0; l < data.cols(); ++l) {
    const Vector x = data.col(l);
    const Vector b = drift_controlled(model, x, u);
    out.col(l) = gradient(x) * b.cast<Complex>() + hessian_contract(x, model.diffusion_matrix(x));
  }
  return out;
}

RffDictionary::RffDictionary(Matrix frequencies, double bandwidth, std::uint64_t seed)
    : frequencies_(std::move(frequencies)), bandwidth_(bandwidth), seed_(seed) {
  if (frequencies_.rows() < 1 || frequencies_.cols() < 1) {
    throw ArgumentError("RffDictionary: need at least one frequency of positive dimension");
  }
  if (!frequencies_.allFinite()) throw ArgumentError("RffDictionary: non-finite frequency");
  if (!(bandwidth_ > 0.0)) throw ArgumentError("RffDictionary: bandwidth must be positive");

  // Exact sign-flip matching; frequencies drawn independently never pair up by accident.
  const Index n = frequencies_.cols();
  std::vector<Index> partners(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Index j = 0; j < n; ++j) {
    if (partners[static_cast<std::size_t>(j)] >= 0) continue;
    for (Index k = j; k < n; ++k) {
      if (!used[static_cast<std::size_t>(k)] && frequencies_.col(k) == -frequencies_.col(j)) {
        partners[static_cast<std::size_t>(j)] = k;
        partners[static_cast<std::size_t>(k)] = j;
        used[static_cast<std::size_t>(j)] = used[static_cast<std::size_t>(k)] = true;
        break;
      }
    }
    if (partners[static_cast<std::size_t>(j)] < 0) return;
  }
  partners_ = std::move(partners);
}

std::string RffDictionary::describe() const {
  std::ostringstream os;
  os << "rff(n=" << state_dim() << ", N=" << size() << ", bandwidth=" << bandwidth_
     << ", seed=" << seed_ << ")";
  return os.str();
}

ComplexVector RffDictionary::features(const Vector& x) const {
  check_state(x);
  const Vector phase = frequencies_.transpose() * x;
  ComplexVector out(phase.size());
  for (Index j = 0; j < phase.size(); ++j) out(j) = std::polar(1.0, phase(j));
  return out;
}

ComplexMatrix RffDictionary::gradient(const Vector& x) const {
  const ComplexVector psi = features(x);
  // grad psi_j = i w_j psi_j
  return (kI * psi).asDiagonal() * frequencies_.transpose().cast<Complex>();
}

ComplexVector RffDictionary::hessian_contract(const Vector& x, const Matrix& sigma) const {
  if (sigma.rows() != state_dim() || sigma.cols() != state_dim()) {
    throw ArgumentError("hessian_contract: Sigma must be n x n");
  }
  ComplexVector psi = features(x);
  // hess psi_j = -w_j w_j^T psi_j
  const Vector quad = (frequencies_.transpose() * sigma).cwiseProduct(frequencies_.transpose()).rowwise().sum();
  for (Index j = 0; j < psi.size(); ++j) psi(j) *= -0.5 * quad(j);
  return psi;
}

Complex RffDictionary::kernel_estimate(const Vector& x, const Vector& y) const {
  return features(x).dot(features(y)) / static_cast<double>(size());
}

bool RffDictionary::operator==(const RffDictionary& other) const {
  return bandwidth_ == other.bandwidth_ && seed_ == other.seed_ &&
         frequencies_.rows() == other.frequencies_.rows() &&
         frequencies_.cols() == other.frequencies_.cols() && frequencies_ == other.frequencies_;
}

RffDictionary sample_dictionary(Index n_dim, Index n_features, double bandwidth, std::uint64_t seed,
                                FrequencySampling sampling) {
  if (n_dim < 1 || n_features < 1) throw ArgumentError("sample_dictionary: dimensions must be positive");
  if (!(bandwidth > 0.0)) throw ArgumentError("sample_dictionary: bandwidth must be positive");
  auto rng = make_stream(seed, 0);
  StandardNormal normal;
  Matrix w = Matrix::Zero(n_dim, n_features);
  const Index draws = sampling == FrequencySampling::iid ? n_features : n_features / 2;
  for (Index j = 0; j < draws; ++j)
    for (Index d = 0; d < n_dim; ++d) w(d, j) = normal(rng) / bandwidth;
  if (sampling == FrequencySampling::antithetic) {
    w.middleCols(draws, draws) = -w.leftCols(draws);
  }
  return RffDictionary(std::move(w), bandwidth, seed);
}

void enforce_conjugation_symmetry(const std::vector<Index>& partners, ComplexMatrix& m) {
  const auto n = static_cast<Index>(partners.size());
  if (m.rows() != n || m.cols() != n) throw ArgumentError("enforce_conjugation_symmetry: size mismatch");
  ComplexMatrix out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      out(i, j) = 0.5 * (m(i, j) + std::conj(m(partners[static_cast<std::size_t>(i)],
                                               partners[static_cast<std::size_t>(j)])));
  m = std::move(out);
}

void enforce_conjugation_symmetry(const std::vector<Index>& partners, ComplexVector& v) {
  const auto n = static_cast<Index>(partners.size());
  if (v.size() != n) throw ArgumentError("enforce_conjugation_symmetry: size mismatch");
  ComplexVector out(n);
  for (Index i = 0; i < n; ++i) out(i) = 0.5 * (v(i) + std::conj(v(partners[static_cast<std::size_t>(i)])));
  v = std::move(out);
}

double gaussian_kernel(const Vector& x, const Vector& y, double bandwidth) {
  return std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth * bandwidth));
}

MonomialDictionary::MonomialDictionary(int degree) : degree_(degree) {
  if (degree < 0) throw ArgumentError("MonomialDictionary: degree must be non-negative");
}

std::optional<std::vector<Index>> MonomialDictionary::conjugate_partners() const {
  std::vector<Index> identity(static_cast<std::size_t>(size()));
  for (Index j = 0; j < size(); ++j) identity[static_cast<std::size_t>(j)] = j;
  return identity;
}

std::string MonomialDictionary::describe() const {
  return "monomials(degree=" + std::to_string(degree_) + ")";
}

ComplexVector MonomialDictionary::features(const Vector& x) const {
  check_state(x);
  ComplexVector out(size());
  double p = 1.0;
  for (int j = 0; j <= degree_; ++j, p *= x(0)) out(j) = p;
  return out;
}

ComplexMatrix MonomialDictionary::gradient(const Vector& x) const {
  check_state(x);
  ComplexMatrix out = ComplexMatrix::Zero(size(), 1);
  double p = 1.0;
  for (int j = 1; j <= degree_; ++j, p *= x(0)) out(j, 0) = static_cast<double>(j) * p;
  return out;
}

ComplexVector MonomialDictionary::hessian_contract(const Vector& x, const Matrix& sigma) const {
  check_state(x);
  ComplexVector out = ComplexVector::Zero(size());
  double p = 1.0;
  for (int j = 2; j <= degree_; ++j, p *= x(0)) {
    out(j) = 0.5 * sigma(0, 0) * static_cast<double>(j * (j - 1)) * p;
  }
  return out;
}

Complex ObservableCoeffs::evaluate(const Dictionary& dict, const Vector& x) const {
  return coeffs.dot(dict.features(x));
}

ObservableCoeffs fit_observable(const Dictionary& dict, const Matrix& data, const Vector& values,
                                double ridge, std::string label) {
  const Index m = data.cols();
  if (m < 1) throw ConfigError("fit_observable: no data points");
  if (values.size() != m) throw ArgumentError("fit_observable: one target value per data point required");
  if (!(ridge >= 0.0)) throw ArgumentError("fit_observable: ridge must be non-negative");
  if (!values.allFinite()) throw NumericalError("fit_observable: non-finite target value");

  const ComplexMatrix psi = dict.evaluate(data);
  const double inv_m = 1.0 / static_cast<double>(m);
  // V^H Psi(x) = conj(V)^T Psi(x), hence (C + ridge I) V = (1/m) Psi conj(phi) with real phi.
  ComplexMatrix gram = psi * psi.adjoint() * inv_m;
  gram.diagonal().array() += ridge;
  const ComplexVector rhs = psi * values.cast<Complex>() * inv_m;

  ObservableCoeffs out;
  out.coeffs = hermitian_pseudo_inverse(gram).matrix * rhs;
  if (const auto partners = dict.conjugate_partners()) enforce_conjugation_symmetry(*partners, out.coeffs);
  out.label = std::move(label);
  const ComplexVector fitted = psi.transpose() * out.coeffs.conjugate();
  out.fit_residual = std::sqrt((fitted - values.cast<Complex>()).squaredNorm() * inv_m);
  return out;
}

ObservableCoeffs fit_observable(const Dictionary& dict, const Matrix& data, const Observable& phi,
                                double ridge, std::string label) {
  Vector values(data.cols());
  for (Index l = 0; l < data.cols(); ++l) values(l) = phi(data.col(l));
  return fit_observable(dict, data, values, ridge, std::move(label));
}

Matrix uniform_samples(Index n_dim, Index m, double lo, double hi, std::uint64_t seed) {
  if (m < 0 || n_dim < 1) throw ArgumentError("uniform_samples: bad size");
  if (!(hi > lo)) throw ArgumentError("uniform_samples: empty interval");
  auto rng = make_stream(seed, 1);
  Matrix out(n_dim, m);
  for (Index l = 0; l < m; ++l)
    for (Index d = 0; d < n_dim; ++d) out(d, l) = lo + (hi - lo) * uniform01(rng);
  return out;
}

Matrix midpoint_grid(Index m, double lo, double hi) {
  if (m < 1) throw ArgumentError("midpoint_grid: need at least one point");
  Matrix out(1, m);
  const double h = (hi - lo) / static_cast<double>(m);
  for (Index l = 0; l < m; ++l) out(0, l) = lo + h * (static_cast<double>(l) + 0.5);
  return out;
}

}  // namespace kgedmd
