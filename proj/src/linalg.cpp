#include "kgedmd/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "kgedmd/errors.hpp"

namespace kgedmd {

PseudoInverse hermitian_pseudo_inverse(const ComplexMatrix& h, double relative_cutoff) {
  if (h.rows() != h.cols()) throw ArgumentError("hermitian_pseudo_inverse: matrix is not square");
  if (!h.allFinite()) throw NumericalError("hermitian_pseudo_inverse: non-finite entries");
  PseudoInverse out;
  out.matrix = ComplexMatrix::Zero(h.rows(), h.cols());
  if (h.size() == 0) return out;

  // Symmetrize so round-off asymmetry does not leak into the eigensolver.
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("hermitian_pseudo_inverse: eigensolver failed");
  const Vector& values = eig.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  if (largest == 0.0) return out;
  const double threshold = relative_cutoff * largest;

  Vector inv = Vector::Zero(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) > threshold) {
      inv(i) = 1.0 / values(i);
      ++out.rank;
    }
  }
  const ComplexMatrix& q = eig.eigenvectors();
  out.matrix = q * inv.cast<Complex>().asDiagonal() * q.adjoint();
  return out;
}

double hermitian_defect(const ComplexMatrix& h) {
  if (h.size() == 0) return 0.0;
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

double spectral_abscissa(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<ComplexMatrix> eig(m, false);
  if (eig.info() != Eigen::Success) throw NumericalError("spectral_abscissa: eigensolver failed");
  return eig.eigenvalues().real().maxCoeff();
}

}  // namespace kgedmd
