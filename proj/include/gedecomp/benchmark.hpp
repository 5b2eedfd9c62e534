#pragma once

// Constrained Bayes (benchmarked) estimates.
//
// Given Bayes estimates d^B_j, decomposition weights w_j and loss weights
// phi_j, the minimizer of sum_j phi_j E[(d_j - GE_j)^2 | y] subject to
// target = sum_j w_j d_j + between is
//
//   d_j = d^B_j + (r_j / q) * (target - between - sum_k w_k d^B_k),
//   r_j = w_j / phi_j,  q = sum_k w_k^2 / phi_k.

#include <span>
#include <vector>

namespace gedecomp {

struct BenchmarkProblem {
  std::vector<double> bayes;         ///< d^B_j
  std::vector<double> weights;       ///< w_j >= 0, not all zero
  std::vector<double> loss_weights;  ///< phi_j > 0; ignored by solve_uniform / solve_raking
  double target = 0.0;               ///< benchmark GE of the parent unit
  double between = 0.0;              ///< estimated between-unit term

  /// Throws ValidationError on length mismatch, negative w or nonpositive phi.
  void validate(bool need_loss_weights = true) const;
};

struct BenchmarkSolution {
  std::vector<double> constrained;  ///< d^CB_j
  double residual = 0.0;            ///< target - between - sum_j w_j d^B_j
  std::vector<double> adjustments;  ///< d^CB_j - d^B_j
  std::vector<bool> negative;       ///< d^CB_j < 0; values are never clipped

  bool any_negative() const noexcept;
};

BenchmarkSolution solve(const BenchmarkProblem& problem);

/// phi_j = w_j: the same shift residual / sum_j w_j for every unit.
BenchmarkSolution solve_uniform(const BenchmarkProblem& problem);

/// phi_j = w_j / d^B_j: d^CB_j = d^B_j (target - between) / sum_k w_k d^B_k.
/// Throws BenchmarkError when some d^B_j <= 0.
BenchmarkSolution solve_raking(const BenchmarkProblem& problem);

/// Residual target - between - sum_j w_j d_j.
double benchmark_residual(std::span<const double> estimates, std::span<const double> weights, double target,
                          double between);

}  // namespace gedecomp
