#pragma once

#include <functional>
#include <string>

#include "kgedmd/types.hpp"

namespace kgedmd {

/// Piecewise-constant input u(t) on a uniform grid 0 = t_0 < ... < t_K.
/// Column k of `values()` is the input on [t_k, t_{k+1}).
class InputSignal {
 public:
  InputSignal() = default;
  InputSignal(double step, Matrix values, std::string descriptor = {});

  static InputSignal constant(Index intervals, double step, const Vector& u);
  /// Samples f at the left node of every interval.
  static InputSignal sampled(Index intervals, double step,
                             const std::function<Vector(double)>& f,
                             std::string descriptor = {});
  static InputSignal sampled_scalar(Index intervals, double step,
                                    const std::function<double(double)>& f,
                                    std::string descriptor = {});

  Index input_dim() const { return values_.rows(); }
  Index intervals() const { return values_.cols(); }
  double step() const { return step_; }
  double horizon() const { return step_ * static_cast<double>(intervals()); }
  double node(Index k) const { return step_ * static_cast<double>(k); }

  const Matrix& values() const { return values_; }
  Vector value(Index k) const { return values_.col(k); }
  /// Interval containing t, clamped to the grid; boundaries belong to the right interval.
  Index interval_at(double t) const;
  Vector at(double t) const { return values_.col(interval_at(t)); }

  const std::string& descriptor() const { return descriptor_; }

  /// Stacked column-major parameter vector (interval-major), as seen by optimizers.
  Vector flatten() const;
  static InputSignal unflatten(const Vector& flat, Index input_dim, double step);

  bool operator==(const InputSignal& other) const;

 private:
  double step_ = 1.0;
  Matrix values_;
  std::string descriptor_;
};

}  // namespace kgedmd
