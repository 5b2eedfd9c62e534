#pragma once

// Generalized-entropy inequality of a finite population and its exact
// additive decomposition into within-group and between-group terms.

#include <cstddef>
#include <span>
#include <vector>

#include "gedecomp/distributions.hpp"

namespace gedecomp {

/// Household incomes with optional group and subgroup labels (one label per
/// household, or empty). Labels are arbitrary nonnegative integers.
struct FinitePopulation {
  std::vector<double> incomes;
  std::vector<std::size_t> groups;
  std::vector<std::size_t> subgroups;

  /// Throws DomainError / ValidationError.
  void validate() const;
};

/// GE_theta of the empirical distribution. Incomes must be positive.
double ge_finite(std::span<const double> incomes, Theta theta);

inline double ge_finite(const FinitePopulation& pop, Theta theta) { return ge_finite(pop.incomes, theta); }

/// Decomposition weight lambda^(1-theta) * s^theta.
double decomposition_weight(double population_share, double income_share, Theta theta);

/// Between-group term [sum_j lambda_j (mu_j/mu)^theta - 1] / (theta(theta-1)),
/// with sum_j lambda_j log(mu/mu_j) at theta = 0 and
/// sum_j s_j log(mu_j/mu) at theta = 1.
double between_term(std::span<const double> population_shares, std::span<const double> group_means,
                    double overall_mean, Theta theta);

struct GroupDecomposition {
  std::vector<std::size_t> labels;  ///< sorted distinct labels
  std::vector<double> ge;           ///< per-group GE
  std::vector<double> means;
  std::vector<double> population_shares;
  std::vector<double> income_shares;
  std::vector<double> weights;
  double mean = 0.0;
  double within = 0.0;
  double between = 0.0;
  double total = 0.0;  ///< ge_finite of the whole population
};

GroupDecomposition decompose_finite(std::span<const double> incomes, std::span<const std::size_t> labels,
                                    Theta theta);

inline GroupDecomposition decompose_finite(const FinitePopulation& pop, Theta theta) {
  return decompose_finite(pop.incomes, pop.groups, theta);
}

/// Shares, weights and between-group term estimated from group mean
/// estimates and known population shares.
struct BetweenEstimate {
  double mean = 0.0;  ///< sum_j lambda_j mu_j
  std::vector<double> income_shares;
  std::vector<double> weights;
  double between = 0.0;
};

/// Throws ValidationError when the shares do not sum to 1 within 1e-9 or a
/// mean is not positive.
BetweenEstimate between_from_means(std::span<const double> population_shares,
                                   std::span<const double> group_means, Theta theta);

}  // namespace gedecomp
