#include "kgedmd/gedmd.hpp"

#include <cmath>
#include <cstdio>

#include "kgedmd/digest.hpp"
#include "kgedmd/errors.hpp"
#include "kgedmd/linalg.hpp"

namespace kgedmd {

std::string Fnv1a::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string data_digest(const Matrix& data) {
  Fnv1a h;
  const std::int64_t shape[2] = {data.rows(), data.cols()};
  h.update(shape, sizeof shape);
  h.update(data.data(), sizeof(double) * static_cast<std::size_t>(data.size()));
  return h.hex();
}

namespace {

struct SharedGram {
  ComplexMatrix psi;
  ComplexMatrix mass;
  PseudoInverse inverse;
};

SharedGram prepare(const Dictionary& dict, const Matrix& data, double lambda) {
  if (data.cols() < 1) throw ConfigError("gEDMD: the training data set is empty");
  if (data.rows() != dict.state_dim()) throw ArgumentError("gEDMD: data dimension does not match dictionary");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("gEDMD: lambda must be non-negative");
  SharedGram g;
  g.psi = dict.evaluate(data);
  const double inv_m = 1.0 / static_cast<double>(data.cols());
  g.mass = g.psi * g.psi.adjoint() * inv_m;
  ComplexMatrix regularized = g.mass;
  regularized.diagonal().array() += lambda;
  g.inverse = hermitian_pseudo_inverse(regularized);
  return g;
}

GalerkinEstimate estimate_with(const SharedGram& g, const Dictionary& dict, const SdeModel& model,
                               const Vector& u, const Matrix& data) {
  const double inv_m = 1.0 / static_cast<double>(data.cols());
  GalerkinEstimate est;
  est.stiffness = dict.generator_apply(model, u, data) * g.psi.adjoint() * inv_m;
  est.mass = g.mass;
  est.generator = est.stiffness * g.inverse.matrix;
  if (const auto partners = dict.conjugate_partners()) {
    // Holds exactly in exact arithmetic; the ill-conditioned inverse amplifies round-off.
    enforce_conjugation_symmetry(*partners, est.generator);
  }
  est.effective_rank = g.inverse.rank;
  if (!est.generator.allFinite()) throw NumericalError("gEDMD: non-finite generator estimate");
  return est;
}

}  // namespace

GalerkinEstimate estimate_matrices(const Dictionary& dict, const SdeModel& model, const Vector& u,
                                   const Matrix& data, double lambda) {
  return estimate_with(prepare(dict, data, lambda), dict, model, u, data);
}

GeneratorModel::GeneratorModel(std::shared_ptr<const Dictionary> dictionary,
                               std::vector<Vector> training_inputs, std::vector<ComplexMatrix> trained,
                               ComplexMatrix base, std::vector<ComplexMatrix> slopes, ComplexMatrix mass,
                               double lambda, Index effective_rank, std::string data_digest)
    : dictionary_(std::move(dictionary)),
      training_inputs_(std::move(training_inputs)),
      trained_(std::move(trained)),
      base_(std::move(base)),
      slopes_(std::move(slopes)),
      mass_(std::move(mass)),
      lambda_(lambda),
      effective_rank_(effective_rank),
      data_digest_(std::move(data_digest)) {
  if (!dictionary_) throw ArgumentError("GeneratorModel: dictionary is required");
  const Index n = dictionary_->size();
  if (base_.rows() != n || base_.cols() != n) throw ArgumentError("GeneratorModel: base must be N x N");
  for (const auto& s : slopes_) {
    if (s.rows() != n || s.cols() != n) throw ArgumentError("GeneratorModel: slopes must be N x N");
  }
  if (training_inputs_.size() != trained_.size()) {
    throw ArgumentError("GeneratorModel: one trained matrix per training input required");
  }
}

GeneratorModel GeneratorModel::zero(std::shared_ptr<const Dictionary> dictionary, Index input_dim) {
  const Index n = dictionary->size();
  return from_matrices(std::move(dictionary), ComplexMatrix::Zero(n, n),
                       std::vector<ComplexMatrix>(static_cast<std::size_t>(input_dim),
                                                  ComplexMatrix::Zero(n, n)));
}

GeneratorModel GeneratorModel::from_matrices(std::shared_ptr<const Dictionary> dictionary,
                                             ComplexMatrix base, std::vector<ComplexMatrix> slopes) {
  const Index n = base.rows();
  return GeneratorModel(std::move(dictionary), {}, {}, std::move(base), std::move(slopes),
                        ComplexMatrix::Identity(n, n), 0.0, n, {});
}

void GeneratorModel::assemble(const Vector& u, ComplexMatrix& out) const {
  if (u.size() != input_dim()) {
    throw ArgumentError("GeneratorModel: input has dimension " + std::to_string(u.size()) +
                        ", model expects " + std::to_string(input_dim()));
  }
  out = base_;
  for (Index i = 0; i < input_dim(); ++i) out += slopes_[static_cast<std::size_t>(i)] * u(i);
}

ComplexMatrix GeneratorModel::generator_at(const Vector& u) const {
  for (std::size_t k = 0; k < training_inputs_.size(); ++k) {
    if (training_inputs_[k].size() == u.size() && training_inputs_[k] == u) return trained_[k];
  }
  ComplexMatrix out;
  assemble(u, out);
  return out;
}

GeneratorModel fit_control_affine(std::shared_ptr<const Dictionary> dictionary, const SdeModel& model,
                                  const std::vector<Vector>& training_inputs, const Matrix& data,
                                  double lambda) {
  if (!dictionary) throw ArgumentError("fit_control_affine: dictionary is required");
  const Index p = model.input_dim;
  const auto n_inputs = static_cast<Index>(training_inputs.size());
  if (n_inputs < p + 1) {
    throw ConfigError("fit_control_affine: need at least p + 1 = " + std::to_string(p + 1) +
                      " training inputs, got " + std::to_string(n_inputs));
  }
  // Affine design matrix, one row [1, u_k^T] per training input.
  Matrix design(n_inputs, p + 1);
  for (Index k = 0; k < n_inputs; ++k) {
    const Vector& u = training_inputs[static_cast<std::size_t>(k)];
    if (u.size() != p) throw ArgumentError("fit_control_affine: training input has wrong dimension");
    if (!u.allFinite()) throw ArgumentError("fit_control_affine: non-finite training input");
    design(k, 0) = 1.0;
    design.row(k).tail(p) = u.transpose();
  }
  Eigen::FullPivLU<Matrix> lu_check(design);
  if (lu_check.rank() < p + 1) {
    throw ConfigError("fit_control_affine: training inputs do not affinely span the input space");
  }
  // weights is (p+1) x K with [base; slopes] = weights * [L_1; ...; L_K].
  Matrix weights;
  if (n_inputs == p + 1) {
    weights = lu_check.inverse();
  } else {
    weights = (design.transpose() * design).ldlt().solve(design.transpose());
  }

  const SharedGram gram = prepare(*dictionary, data, lambda);
  std::vector<ComplexMatrix> trained;
  trained.reserve(training_inputs.size());
  for (const Vector& u : training_inputs) {
    trained.push_back(estimate_with(gram, *dictionary, model, u, data).generator);
  }
  const Index n = dictionary->size();
  std::vector<ComplexMatrix> coeffs(static_cast<std::size_t>(p + 1), ComplexMatrix::Zero(n, n));
  for (Index r = 0; r <= p; ++r) {
    for (Index k = 0; k < n_inputs; ++k) {
      const double w = weights(r, k);
      if (w != 0.0) coeffs[static_cast<std::size_t>(r)] += w * trained[static_cast<std::size_t>(k)];
    }
  }
  ComplexMatrix base = std::move(coeffs[0]);
  std::vector<ComplexMatrix> slopes(std::make_move_iterator(coeffs.begin() + 1),
                                    std::make_move_iterator(coeffs.end()));
  return GeneratorModel(std::move(dictionary), training_inputs, std::move(trained), std::move(base),
                        std::move(slopes), gram.mass, lambda, gram.inverse.rank, data_digest(data));
}

}  // namespace kgedmd
