#include "gedecomp/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gedecomp/errors.hpp"
#include "gedecomp/kernels.hpp"

namespace gedecomp {
namespace {

void require_positive(std::span<const double> incomes) {
  if (incomes.empty()) throw ValidationError("population must contain at least one household");
  for (double x : incomes) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("incomes must be positive and finite");
  }
}

double ge_of_positive(std::span<const double> x, Theta theta) {
  const double n = static_cast<double>(x.size());
  const double mu = kernels::sum(x) / n;
  const double inv = 1.0 / mu;
  if (theta.is_mld()) return -kernels::log_sum(x, inv) / n;
  if (theta.is_theil()) return kernels::xlogx_sum(x, inv) / n;
  const double t = theta.value();
  return (kernels::power_sum(x, inv, t) / n - 1.0) / (t * (t - 1.0));
}

}  // namespace

void FinitePopulation::validate() const {
  require_positive(incomes);
  if (!groups.empty() && groups.size() != incomes.size()) {
    throw ValidationError("group labels must have one entry per household");
  }
  if (!subgroups.empty() && subgroups.size() != incomes.size()) {
    throw ValidationError("subgroup labels must have one entry per household");
  }
  if (!subgroups.empty() && groups.empty()) throw ValidationError("subgroup labels require group labels");
}

double ge_finite(std::span<const double> incomes, Theta theta) {
  require_positive(incomes);
  return ge_of_positive(incomes, theta);
}

double decomposition_weight(double population_share, double income_share, Theta theta) {
  if (theta.is_mld()) return population_share;
  if (theta.is_theil()) return income_share;
  const double t = theta.value();
  return std::exp((1.0 - t) * std::log(population_share) + t * std::log(income_share));
}

double between_term(std::span<const double> lambda, std::span<const double> means, double mu, Theta theta) {
  double acc = 0.0;
  if (theta.is_mld()) {
    for (std::size_t j = 0; j < lambda.size(); ++j) acc += lambda[j] * std::log(mu / means[j]);
    return acc;
  }
  if (theta.is_theil()) {
    for (std::size_t j = 0; j < lambda.size(); ++j) {
      const double s = lambda[j] * means[j] / mu;
      acc += s * std::log(means[j] / mu);
    }
    return acc;
  }
  const double t = theta.value();
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    acc += lambda[j] * std::expm1(t * std::log(means[j] / mu));
  }
  return acc / (t * (t - 1.0));
}

GroupDecomposition decompose_finite(std::span<const double> incomes, std::span<const std::size_t> labels,
                                    Theta theta) {
  require_positive(incomes);
  if (labels.size() != incomes.size()) throw ValidationError("one group label per household is required");

  GroupDecomposition d;
  d.labels.assign(labels.begin(), labels.end());
  std::sort(d.labels.begin(), d.labels.end());
  d.labels.erase(std::unique(d.labels.begin(), d.labels.end()), d.labels.end());

  const std::size_t groups = d.labels.size();
  std::vector<std::vector<double>> members(groups);
  for (std::size_t i = 0; i < incomes.size(); ++i) {
    const auto j = static_cast<std::size_t>(std::lower_bound(d.labels.begin(), d.labels.end(), labels[i]) -
                                            d.labels.begin());
    members[j].push_back(incomes[i]);
  }

  const double n = static_cast<double>(incomes.size());
  d.mean = kernels::sum(incomes) / n;
  d.total = ge_of_positive(incomes, theta);
  d.ge.resize(groups);
  d.means.resize(groups);
  d.population_shares.resize(groups);
  d.income_shares.resize(groups);
  d.weights.resize(groups);
  for (std::size_t j = 0; j < groups; ++j) {
    const auto& m = members[j];
    d.means[j] = kernels::sum(m) / static_cast<double>(m.size());
    d.population_shares[j] = static_cast<double>(m.size()) / n;
    d.income_shares[j] = d.population_shares[j] * d.means[j] / d.mean;
    d.weights[j] = decomposition_weight(d.population_shares[j], d.income_shares[j], theta);
    d.ge[j] = ge_of_positive(m, theta);
    d.within += d.weights[j] * d.ge[j];
  }
  d.between = between_term(d.population_shares, d.means, d.mean, theta);
  return d;
}

BetweenEstimate between_from_means(std::span<const double> lambda, std::span<const double> means,
                                   Theta theta) {
  if (lambda.size() != means.size() || lambda.empty()) {
    throw ValidationError("between_from_means: shares and means must be nonempty and of equal length");
  }
  double total_share = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    if (!(lambda[j] > 0.0)) throw ValidationError("between_from_means: population shares must be positive");
    if (!(means[j] > 0.0) || !std::isfinite(means[j])) {
      throw ValidationError("between_from_means: group means must be positive");
    }
    total_share += lambda[j];
  }
  if (std::abs(total_share - 1.0) > 1e-9) {
    throw ValidationError("between_from_means: population shares sum to " + std::to_string(total_share));
  }

  BetweenEstimate e;
  for (std::size_t j = 0; j < lambda.size(); ++j) e.mean += lambda[j] * means[j];
  e.income_shares.resize(lambda.size());
  e.weights.resize(lambda.size());
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    e.income_shares[j] = lambda[j] * means[j] / e.mean;
    e.weights[j] = decomposition_weight(lambda[j], e.income_shares[j], theta);
  }
  e.between = between_term(lambda, means, e.mean, theta);
  return e;
}

}  // namespace gedecomp
