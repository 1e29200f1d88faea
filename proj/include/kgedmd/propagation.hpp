#pragma once

#include <vector>

#include "kgedmd/features.hpp"
#include "kgedmd/gedmd.hpp"
#include "kgedmd/signal.hpp"
#include "kgedmd/types.hpp"

namespace kgedmd {

struct PropagationOptions {
  /// RK4 substeps per control interval; L_u is frozen on each interval.
  int substeps = 10;
  /// Norm above which a coefficient vector counts as diverged.
  double blowup_norm = 1e12;
  /// Record every substep node instead of the control nodes only.
  bool record_substeps = false;
  /// Raise `substeps` until h * rho(L_u) <= stability_limit over the signal's value range.
  bool auto_substeps = true;
  /// RK4's stability region reaches about 2.8 along both the real and imaginary axes.
  double stability_limit = 2.5;
};

/// Smallest substep count >= minimum such that (step / n) * rho(L_u) <= limit for
/// every u on the corners of the box [u_min, u_max]. The spectral radius of an
/// affine family is not convex in u, so a 10% margin is added.
int stable_substeps(const GeneratorModel& model, const Vector& u_min, const Vector& u_max, double step,
                    int minimum, double limit = 2.5);

enum class CoeffKind { forward, adjoint };

struct CoeffTrajectory {
  CoeffKind kind = CoeffKind::adjoint;
  std::vector<double> times;
  std::vector<ComplexVector> values;
};

/// Observable-side propagation over the signal's full horizon T.
///
/// Integrates dV^H/ds = V^H L_{u(T - s)} for s in [0, T], so that the final
/// vector satisfies V(T)^H Psi(x) ~ E^x[phi(X_T)] for every x. For a
/// time-varying input the backward Kolmogorov equation consumes the input
/// from the end of the horizon; for constant inputs this is plain
/// dV^H/dt = V^H L_u. values[k] is recorded at s = times[k].
CoeffTrajectory propagate_forward(const GeneratorModel& model, const InputSignal& signal,
                                  const ComplexVector& v0, const PropagationOptions& options = {});

/// State-side (dual) propagation: d gamma/dt = L_{u(t)} gamma, gamma(0) = Psi(x0).
/// E^{x0}[phi(X_t)] ~ V_phi^H gamma(t) for every observable at once.
CoeffTrajectory propagate_adjoint(const GeneratorModel& model, const InputSignal& signal,
                                  const Vector& x0, const PropagationOptions& options = {});

/// Threshold for the imaginary-part diagnostic, relative to 1 + |value|.
inline constexpr double kImaginaryTolerance = 1e-6;

struct ExpectationPrediction {
  std::vector<double> times;
  /// Real parts, one row per observable.
  Matrix values;
  /// max |Im| / (1 + |Re|) over all reported entries.
  double max_imaginary = 0.0;
  bool imaginary_warning = false;
};

/// Re(V_phi^H gamma(t)) for each observable from a single adjoint solve.
ExpectationPrediction predict_expectations(const GeneratorModel& model, const InputSignal& signal,
                                           const Vector& x0,
                                           const std::vector<ObservableCoeffs>& observables,
                                           const PropagationOptions& options = {});

ExpectationPrediction predict_expectation(const GeneratorModel& model, const InputSignal& signal,
                                          const Vector& x0, const ObservableCoeffs& observable,
                                          const PropagationOptions& options = {});

}  // namespace kgedmd
