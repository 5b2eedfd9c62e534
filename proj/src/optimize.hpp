#pragma once

#include <functional>
#include <vector>

namespace gedecomp::detail {

struct OptimumResult {
  std::vector<double> x;
  double value;
  std::size_t evaluations;
};

/// Nelder-Mead minimization. Non-finite objective values are treated as
/// +infinity. Restarts from the best vertex until a restart no longer
/// improves the value by more than `ftol`.
OptimumResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, std::size_t max_evaluations,
                          double ftol);

/// Central-difference Hessian of f at x with step h.
std::vector<double> hessian(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x, double h);

}  // namespace gedecomp::detail
