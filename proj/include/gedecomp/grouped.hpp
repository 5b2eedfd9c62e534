#pragma once

// Bayesian fitting of an income family to grouped (bracketed) counts.
//
// Likelihood: sum_g y_g log[F(c_g) - F(c_{g-1})] with c_0 = 0, c_G = +inf.
// Priors: IG(1, 1) on every positive parameter, flat on the lognormal xi.
// Sampler: random-walk Metropolis-Hastings on log-transformed positive
// parameters (xi on its natural scale).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gedecomp/distributions.hpp"

namespace gedecomp {

class GroupedSample {
 public:
  /// boundaries = (c_0 = 0, c_1, ..., c_{G-1}, +inf); counts has G entries.
  /// Throws ValidationError on any violated invariant.
  GroupedSample(std::vector<double> boundaries, std::vector<double> counts, std::string id = {});

  std::size_t groups() const noexcept { return counts_.size(); }
  std::span<const double> boundaries() const noexcept { return boundaries_; }
  std::span<const double> counts() const noexcept { return counts_; }
  /// Finite cut points c_1 .. c_{G-1}.
  std::span<const double> interior() const noexcept {
    return std::span<const double>(boundaries_).subspan(1, boundaries_.size() - 2);
  }
  double total() const noexcept { return total_; }
  const std::string& id() const noexcept { return id_; }

  /// Same brackets, counts multiplied by factor > 0.
  GroupedSample scaled(double factor) const;

  bool operator==(const GroupedSample&) const = default;

 private:
  std::vector<double> boundaries_;
  std::vector<double> counts_;
  double total_ = 0.0;
  std::string id_;
};

/// Exact bracket counts of a set of incomes.
GroupedSample bracket(std::span<const double> incomes, std::vector<double> boundaries,
                      std::string id = {});

struct McmcConfig {
  std::size_t iterations = 10000;
  std::size_t burn_in = 2000;
  /// Proposal standard deviations on the transformed scale, one per
  /// parameter. Empty means 0.1 for every coordinate. Used as the proposal
  /// when mode_search is off or the curvature at the mode is not usable.
  std::vector<double> step_sizes;
  /// Rescale the proposal during burn-in toward 20-40% acceptance; the
  /// kernel is frozen for the retained draws.
  bool adapt = true;
  /// Start the chain at the posterior mode (reached by Nelder-Mead from the
  /// quantile-matching start) with a proposal shaped by the curvature there.
  bool mode_search = true;
  std::uint64_t seed = 1;

  void validate(std::size_t dimension) const;
  bool operator==(const McmcConfig&) const = default;
};

class PosteriorDraws {
 public:
  PosteriorDraws(Family family, std::vector<double> values, double acceptance_rate,
                 McmcConfig config);

  Family family() const noexcept { return family_; }
  std::size_t dimension() const noexcept { return parameter_count(family_); }
  std::size_t size() const noexcept { return values_.size() / dimension(); }
  /// Row-major draws x parameters, native parameterization.
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(values_).subspan(i * dimension(), dimension());
  }
  FamilyParams params(std::size_t i) const { return from_vector(family_, row(i)); }
  double acceptance_rate() const noexcept { return acceptance_rate_; }
  std::uint64_t seed() const noexcept { return config_.seed; }
  const McmcConfig& config() const noexcept { return config_; }

  std::vector<double> posterior_mean() const;
  std::vector<double> posterior_sd() const;

  bool operator==(const PosteriorDraws&) const = default;

 private:
  Family family_;
  std::vector<double> values_;
  double acceptance_rate_;
  McmcConfig config_;
};

/// Returns -infinity when a bracket with positive count has zero model
/// probability.
double log_likelihood(const FamilyParams& params, const GroupedSample& data);

/// IG(1,1) log density (up to the constant) summed over positive
/// parameters: -2 log x - 1/x each. Flat on the lognormal xi.
/// -infinity for a nonpositive parameter.
double log_prior(const FamilyParams& params);

/// Quantile-matching starting point from the empirical bracket cdf.
FamilyParams initial_guess(Family family, const GroupedSample& data);

PosteriorDraws fit(Family family, const GroupedSample& data, const McmcConfig& config);

struct PosteriorSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;  ///< draws where the quantity does not exist
  /// More than 1% of the draws were excluded.
  bool unreliable() const noexcept {
    return used + excluded > 0 && static_cast<double>(excluded) > 0.01 * static_cast<double>(used + excluded);
  }
};

/// Posterior mean of GE_theta over the retained draws (the Bayes estimate
/// under squared loss). Throws MomentError when no draw admits theta.
PosteriorSummary posterior_ge(const PosteriorDraws& draws, Theta theta);

/// Posterior mean of the distribution mean.
PosteriorSummary posterior_mean_income(const PosteriorDraws& draws);

}  // namespace gedecomp
