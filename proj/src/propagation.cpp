#include "kgedmd/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Eigenvalues>

#include "kgedmd/errors.hpp"

namespace kgedmd {

namespace {

/// One classical RK4 step of dy/dt = M y, scratch buffers supplied by the caller.
struct Rk4Linear {
  ComplexVector k1, k2, k3, k4, tmp;

  explicit Rk4Linear(Index n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}

  void step(const ComplexMatrix& m, double h, ComplexVector& y) {
    k1.noalias() = m * y;
    tmp = y + (0.5 * h) * k1;
    k2.noalias() = m * tmp;
    tmp = y + (0.5 * h) * k2;
    k3.noalias() = m * tmp;
    tmp = y + h * k3;
    k4.noalias() = m * tmp;
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

void check_options(const PropagationOptions& options) {
  if (options.substeps < 1) throw ArgumentError("propagation: substeps must be >= 1");
}

void check_blowup(const ComplexVector& y, double limit, double t) {
  const double norm = y.norm();
  if (!std::isfinite(norm) || norm > limit) {
    throw PropagationDiverged("surrogate propagation diverged at t = " + std::to_string(t), t);
  }
}

PropagationOptions resolve(const GeneratorModel& model, const InputSignal& signal, PropagationOptions options) {
  check_options(options);
  if (options.auto_substeps && model.input_dim() > 0) {
    const Vector lo = signal.values().rowwise().minCoeff();
    const Vector hi = signal.values().rowwise().maxCoeff();
    options.substeps = stable_substeps(model, lo, hi, signal.step(), options.substeps, options.stability_limit);
  } else if (options.auto_substeps) {
    options.substeps = stable_substeps(model, Vector(), Vector(), signal.step(), options.substeps,
                                       options.stability_limit);
  }
  return options;
}

/// `matrix_for(k)` yields the (frozen) system matrix for integration interval k.
template <typename MatrixFor>
CoeffTrajectory integrate(const InputSignal& signal, ComplexVector y, const PropagationOptions& options,
                          CoeffKind kind, MatrixFor&& matrix_for) {
  check_options(options);
  const Index intervals = signal.intervals();
  const double h = signal.step() / options.substeps;
  CoeffTrajectory out;
  out.kind = kind;
  const std::size_t records =
      static_cast<std::size_t>(intervals) * (options.record_substeps ? options.substeps : 1) + 1;
  out.times.reserve(records);
  out.values.reserve(records);
  out.times.push_back(0.0);
  out.values.push_back(y);

  Rk4Linear rk(y.size());
  ComplexMatrix m;
  for (Index k = 0; k < intervals; ++k) {
    matrix_for(k, m);
    for (int j = 1; j <= options.substeps; ++j) {
      rk.step(m, h, y);
      const double t = signal.node(k) + h * j;
      check_blowup(y, options.blowup_norm, t);
      if (options.record_substeps && j < options.substeps) {
        out.times.push_back(t);
        out.values.push_back(y);
      }
    }
    out.times.push_back(signal.node(k + 1));
    out.values.push_back(y);
  }
  return out;
}

void check_model_signal(const GeneratorModel& model, const InputSignal& signal) {
  if (signal.input_dim() != model.input_dim()) {
    throw ArgumentError("propagation: signal input dimension does not match the generator model");
  }
}

}  // namespace

int stable_substeps(const GeneratorModel& model, const Vector& u_min, const Vector& u_max, double step,
                    int minimum, double limit) {
  if (u_min.size() != model.input_dim() || u_max.size() != model.input_dim()) {
    throw ArgumentError("stable_substeps: input range has wrong dimension");
  }
  if (!(limit > 0.0) || !(step > 0.0)) throw ArgumentError("stable_substeps: limit and step must be positive");
  const Index p = model.input_dim();
  if (p > 20) throw ArgumentError("stable_substeps: too many input components for corner enumeration");
  double radius = 0.0;
  ComplexMatrix lu;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
    Vector u(p);
    for (Index i = 0; i < p; ++i) u(i) = (mask >> i) & 1U ? u_max(i) : u_min(i);
    model.assemble(u, lu);
    if (lu.size() == 0) continue;
    Eigen::ComplexEigenSolver<ComplexMatrix> eig(lu, false);
    if (eig.info() != Eigen::Success) throw NumericalError("stable_substeps: eigensolver failed");
    radius = std::max(radius, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  const double needed = std::ceil(1.1 * radius * step / limit);
  if (!std::isfinite(needed)) throw NumericalError("stable_substeps: non-finite spectral radius");
  return std::max(minimum, static_cast<int>(needed));
}

CoeffTrajectory propagate_forward(const GeneratorModel& model, const InputSignal& signal,
                                  const ComplexVector& v0, const PropagationOptions& options) {
  check_model_signal(model, signal);
  if (v0.size() != model.size()) throw ArgumentError("propagate_forward: V0 has wrong length");
  const Index last = signal.intervals() - 1;
  ComplexMatrix lu;
  return integrate(signal, v0, resolve(model, signal, options), CoeffKind::forward, [&](Index k, ComplexMatrix& m) {
    model.assemble(signal.value(last - k), lu);
    m = lu.adjoint();
  });
}

CoeffTrajectory propagate_adjoint(const GeneratorModel& model, const InputSignal& signal,
                                  const Vector& x0, const PropagationOptions& options) {
  check_model_signal(model, signal);
  const ComplexVector psi0 = model.dictionary().features(x0);
  return integrate(signal, psi0, resolve(model, signal, options), CoeffKind::adjoint,
                   [&](Index k, ComplexMatrix& m) { model.assemble(signal.value(k), m); });
}

ExpectationPrediction predict_expectations(const GeneratorModel& model, const InputSignal& signal,
                                           const Vector& x0,
                                           const std::vector<ObservableCoeffs>& observables,
                                           const PropagationOptions& options) {
  for (const auto& obs : observables) {
    if (obs.coeffs.size() != model.size()) {
      throw ArgumentError("predict_expectations: observable '" + obs.label + "' has wrong length");
    }
  }
  const CoeffTrajectory gamma = propagate_adjoint(model, signal, x0, options);
  ExpectationPrediction out;
  out.times = gamma.times;
  const auto n_obs = static_cast<Index>(observables.size());
  const auto nt = static_cast<Index>(gamma.values.size());
  out.values.resize(n_obs, nt);
  for (Index o = 0; o < n_obs; ++o) {
    const ComplexVector& v = observables[static_cast<std::size_t>(o)].coeffs;
    for (Index k = 0; k < nt; ++k) {
      const Complex e = v.dot(gamma.values[static_cast<std::size_t>(k)]);
      out.values(o, k) = e.real();
      out.max_imaginary = std::max(out.max_imaginary, std::abs(e.imag()) / (1.0 + std::abs(e.real())));
    }
  }
  out.imaginary_warning = out.max_imaginary > kImaginaryTolerance;
  return out;
}

ExpectationPrediction predict_expectation(const GeneratorModel& model, const InputSignal& signal,
                                          const Vector& x0, const ObservableCoeffs& observable,
                                          const PropagationOptions& options) {
  return predict_expectations(model, signal, x0, {observable}, options);
}

}  // namespace kgedmd
