#pragma once

#include <functional>
#include <vector>

#include "kgedmd/types.hpp"

namespace kgedmd {

struct NelderMeadOptions {
  int max_evaluations = 20000;
  /// Stop when every vertex is within x_tolerance (max-norm) of the best one
  /// and the value spread is below f_tolerance.
  double x_tolerance = 1e-6;
  double f_tolerance = 1e-10;
  /// Edge length of the initial axis-aligned simplex.
  double initial_step = 0.25;
  /// Dimension-dependent coefficients (Gao and Han); plain 1/2/0.5/0.5 otherwise.
  bool adaptive = true;
};

struct NelderMeadResult {
  Vector x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
  /// Best value after every iteration; non-increasing.
  std::vector<double> best_history;
  /// Cumulative objective evaluations after every iteration.
  std::vector<int> evaluation_history;
};

/// Derivative-free simplex minimization. Non-finite objective values are
/// treated as +infinity, so the objective may signal infeasibility that way.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective, const Vector& x0,
                             const NelderMeadOptions& options = {});

}  // namespace kgedmd
