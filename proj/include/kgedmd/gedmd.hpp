#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kgedmd/dynamics.hpp"
#include "kgedmd/features.hpp"
#include "kgedmd/types.hpp"

namespace kgedmd {

/// Empirical Galerkin matrices for one constant input.
struct GalerkinEstimate {
  ComplexMatrix stiffness;  // A = (1/m) L_u Psi(X) Psi(X)^H
  ComplexMatrix mass;       // C = (1/m) Psi(X) Psi(X)^H
  ComplexMatrix generator;  // L = A (C + lambda I)^+
  Index effective_rank = 0;
};

/// gEDMD estimate of the generator at a constant input u.
GalerkinEstimate estimate_matrices(const Dictionary& dict, const SdeModel& model, const Vector& u,
                                   const Matrix& data, double lambda);

/// Bilinear surrogate: L_u = base + sum_i slopes[i] u_i, identified from
/// generator estimates at a set of affinely independent constant inputs.
class GeneratorModel {
 public:
  GeneratorModel() = default;
  GeneratorModel(std::shared_ptr<const Dictionary> dictionary, std::vector<Vector> training_inputs,
                 std::vector<ComplexMatrix> trained, ComplexMatrix base,
                 std::vector<ComplexMatrix> slopes, ComplexMatrix mass, double lambda,
                 Index effective_rank, std::string data_digest);

  /// L_u. Returns the stored estimate unchanged when u equals a training input.
  ComplexMatrix generator_at(const Vector& u) const;
  /// Writes L_u into `out` without the training-input lookup (hot path for propagation).
  void assemble(const Vector& u, ComplexMatrix& out) const;

  const Dictionary& dictionary() const { return *dictionary_; }
  const std::shared_ptr<const Dictionary>& dictionary_ptr() const { return dictionary_; }
  Index size() const { return base_.rows(); }
  Index input_dim() const { return static_cast<Index>(slopes_.size()); }
  const std::vector<Vector>& training_inputs() const { return training_inputs_; }
  const std::vector<ComplexMatrix>& trained() const { return trained_; }
  const ComplexMatrix& base() const { return base_; }
  const std::vector<ComplexMatrix>& slopes() const { return slopes_; }
  const ComplexMatrix& mass() const { return mass_; }
  double lambda() const { return lambda_; }
  Index effective_rank() const { return effective_rank_; }
  const std::string& data_digest() const { return data_digest_; }

  /// Model with L_u = 0 for every u (used as a propagation identity check).
  static GeneratorModel zero(std::shared_ptr<const Dictionary> dictionary, Index input_dim);
  /// Model with prescribed base and slopes; no training data attached.
  static GeneratorModel from_matrices(std::shared_ptr<const Dictionary> dictionary, ComplexMatrix base,
                                      std::vector<ComplexMatrix> slopes);

 private:
  std::shared_ptr<const Dictionary> dictionary_;
  std::vector<Vector> training_inputs_;
  std::vector<ComplexMatrix> trained_;
  ComplexMatrix base_;
  std::vector<ComplexMatrix> slopes_;
  ComplexMatrix mass_;
  double lambda_ = 0.0;
  Index effective_rank_ = 0;
  std::string data_digest_;
};

/// Fits L_k at every training input (sharing one pseudoinverse of C + lambda I)
/// and solves L_k = base + sum_i slopes[i] u_{k,i} in the least-squares sense.
/// Throws ConfigError when the training inputs do not affinely span R^p.
GeneratorModel fit_control_affine(std::shared_ptr<const Dictionary> dictionary, const SdeModel& model,
                                  const std::vector<Vector>& training_inputs, const Matrix& data,
                                  double lambda);

/// Hex FNV-1a digest of the raw bytes of a data matrix (with its shape).
std::string data_digest(const Matrix& data);

}  // namespace kgedmd
