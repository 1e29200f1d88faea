#include "kgedmd/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kgedmd/errors.hpp"

namespace kgedmd {

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective, const Vector& x0,
                             const NelderMeadOptions& options) {
  const Index n = x0.size();
  if (n < 1) throw ArgumentError("nelder_mead: empty parameter vector");
  const double dim = static_cast<double>(n);
  const double reflect = 1.0;
  const double expand = options.adaptive ? 1.0 + 2.0 / dim : 2.0;
  const double contract = options.adaptive ? 0.75 - 1.0 / (2.0 * dim) : 0.5;
  const double shrink = options.adaptive ? 1.0 - 1.0 / dim : 0.5;

  NelderMeadResult result;
  auto eval = [&](const Vector& x) {
    ++result.evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  for (Index i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)](i) += options.initial_step;
  for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(static_cast<std::size_t>(n + 1));
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Vector> s2;
    std::vector<double> v2;
    s2.reserve(order.size());
    v2.reserve(order.size());
    for (std::size_t i : order) {
      s2.push_back(std::move(simplex[i]));
      v2.push_back(values[i]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };

  const std::size_t worst = static_cast<std::size_t>(n);
  sort_simplex();
  Vector centroid(n);
  while (result.evaluations < options.max_evaluations) {
    double x_spread = 0.0;
    for (std::size_t i = 1; i <= worst; ++i) {
      x_spread = std::max(x_spread, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    }
    const double f_spread = values[worst] - values[0];
    if (x_spread <= options.x_tolerance && f_spread <= options.f_tolerance) {
      result.converged = true;
      break;
    }
    ++result.iterations;

    centroid.setZero();
    for (std::size_t i = 0; i < worst; ++i) centroid += simplex[i];
    centroid /= dim;

    const Vector xr = centroid + reflect * (centroid - simplex[worst]);
    const double fr = eval(xr);
    bool do_shrink = false;
    if (fr < values[0]) {
      const Vector xe = centroid + expand * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
    } else if (fr < values[worst - 1]) {
      simplex[worst] = xr;
      values[worst] = fr;
    } else if (fr < values[worst]) {
      const Vector xc = centroid + contract * (xr - centroid);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[worst] = xc;
        values[worst] = fc;
      } else {
        do_shrink = true;
      }
    } else {
      const Vector xc = centroid - contract * (centroid - simplex[worst]);
      const double fc = eval(xc);
      if (fc < values[worst]) {
        simplex[worst] = xc;
        values[worst] = fc;
      } else {
        do_shrink = true;
      }
    }
    if (do_shrink) {
      for (std::size_t i = 1; i <= worst; ++i) {
        simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0]);
        values[i] = eval(simplex[i]);
      }
    }
    sort_simplex();
    result.best_history.push_back(values[0]);
    result.evaluation_history.push_back(result.evaluations);
  }
  result.x = simplex[0];
  result.value = values[0];
  return result;
}

}  // namespace kgedmd
