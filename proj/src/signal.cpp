#include "kgedmd/signal.hpp"

#include <cmath>
#include <utility>

#include "kgedmd/errors.hpp"

namespace kgedmd {

InputSignal::InputSignal(double step, Matrix values, std::string descriptor)
    : step_(step), values_(std::move(values)), descriptor_(std::move(descriptor)) {
  if (!(step_ > 0.0) || !std::isfinite(step_)) {
    throw ArgumentError("InputSignal: step must be positive and finite");
  }
  if (values_.cols() < 1) {
    throw ArgumentError("InputSignal: at least one interval required");
  }
  if (!values_.allFinite()) {
    throw ArgumentError("InputSignal: non-finite input value");
  }
}

InputSignal InputSignal::constant(Index intervals, double step, const Vector& u) {
  if (intervals < 1) throw ArgumentError("InputSignal: at least one interval required");
  Matrix values = u.replicate(1, intervals);
  return InputSignal(step, std::move(values), "constant");
}

InputSignal InputSignal::sampled(Index intervals, double step,
                                 const std::function<Vector(double)>& f,
                                 std::string descriptor) {
  if (intervals < 1) throw ArgumentError("InputSignal: at least one interval required");
  Vector first = f(0.0);
  Matrix values(first.size(), intervals);
  values.col(0) = first;
  for (Index k = 1; k < intervals; ++k) {
    Vector v = f(step * static_cast<double>(k));
    if (v.size() != first.size()) throw ArgumentError("InputSignal: inconsistent input dimension");
    values.col(k) = v;
  }
  return InputSignal(step, std::move(values), std::move(descriptor));
}

InputSignal InputSignal::sampled_scalar(Index intervals, double step,
                                        const std::function<double(double)>& f,
                                        std::string descriptor) {
  return sampled(
      intervals, step, [&](double t) { return Vector::Constant(1, f(t)); },
      std::move(descriptor));
}

Index InputSignal::interval_at(double t) const {
  // Relative slack keeps t = k * dt from landing in interval k-1 through rounding.
  const double pos = t / step_;
  auto k = static_cast<Index>(std::floor(pos + 1e-9 * std::max(1.0, std::abs(pos))));
  if (k < 0) return 0;
  if (k >= intervals()) return intervals() - 1;
  return k;
}

Vector InputSignal::flatten() const {
  return Eigen::Map<const Vector>(values_.data(), values_.size());
}

InputSignal InputSignal::unflatten(const Vector& flat, Index input_dim, double step) {
  if (input_dim < 1 || flat.size() % input_dim != 0) {
    throw ArgumentError("InputSignal::unflatten: size is not a multiple of the input dimension");
  }
  Matrix values = Eigen::Map<const Matrix>(flat.data(), input_dim, flat.size() / input_dim);
  return InputSignal(step, std::move(values));
}

bool InputSignal::operator==(const InputSignal& other) const {
  return step_ == other.step_ && values_.rows() == other.values_.rows() &&
         values_.cols() == other.values_.cols() && values_ == other.values_ &&
         descriptor_ == other.descriptor_;
}

}  // namespace kgedmd
