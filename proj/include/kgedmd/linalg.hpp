#pragma once

#include "kgedmd/types.hpp"

namespace kgedmd {

/// Relative eigenvalue cutoff used for every pseudoinverse in the library.
inline constexpr double kPseudoInverseCutoff = 1e-12;

struct PseudoInverse {
  ComplexMatrix matrix;
  /// Number of eigenvalues kept.
  Index rank = 0;
};

/// Moore-Penrose pseudoinverse of a Hermitian matrix via its eigendecomposition.
/// Eigenvalues with |e| <= cutoff * max|e| are treated as zero.
PseudoInverse hermitian_pseudo_inverse(const ComplexMatrix& h,
                                       double relative_cutoff = kPseudoInverseCutoff);

/// Max-norm of H - H^H.
double hermitian_defect(const ComplexMatrix& h);

/// Largest real part over the eigenvalues of a square matrix.
double spectral_abscissa(const ComplexMatrix& m);

}  // namespace kgedmd
