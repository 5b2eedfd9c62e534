#pragma once

// Synthetic hierarchies with known truth: a finite population is drawn leaf
// by leaf from given laws, a fraction of each leaf is sampled without
// replacement and bracketed, and the exact decomposition of the realized
// population serves as the truth.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gedecomp/distributions.hpp"
#include "gedecomp/grouped.hpp"
#include "gedecomp/inequality.hpp"
#include "gedecomp/pipeline.hpp"

namespace gedecomp {

struct LeafSpec {
  std::string id;
  FamilyParams law;
  std::size_t households = 0;
};

struct RegionSpec {
  std::string id;
  std::vector<LeafSpec> subregions;  ///< at least one
};

/// Families assumed when fitting each level.
struct FitFamilies {
  Family country = Family::gb2;
  Family region = Family::singh_maddala;
  Family subregion = Family::lognormal;
  bool operator==(const FitFamilies&) const = default;
};

struct SyntheticSpec {
  std::string country_id = "country";
  std::vector<RegionSpec> regions;
  /// (0, c_1, ..., c_{G-1}, +inf)
  std::vector<double> boundaries = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 20.0,
                                    std::numeric_limits<double>::infinity()};
  double sampling_fraction = 0.1;
  FitFamilies fit;
  std::uint64_t seed = 1;

  /// Throws ValidationError / DomainError.
  void validate() const;
};

struct SyntheticData {
  /// groups = region index, subgroups = leaf index (global, region-major).
  FinitePopulation population;
  /// Populations are leaf household counts; every node carries the bracket
  /// counts of its sampled households.
  HierarchyNode hierarchy;
};

/// Leaf draws use derive_seed(seed, "population/" + id), sampling uses
/// derive_seed(seed, "sample/" + id).
SyntheticData generate(const SyntheticSpec& spec);

/// Exact decomposition of the realized population, laid out as a report:
/// ge_bayes = ge_constrained = the true GE of each unit, residuals zero.
DecompositionReport true_decomposition(const SyntheticData& data, Theta theta);

struct ComparisonRow {
  Method method;
  double theta;
  std::string component;
  double estimate;
  double truth;
  double error;  ///< estimate - truth
};

/// Components, in table order: ge, between, residual_region,
/// sum_w_between_sub, sum_w_within_sub, residual_subregion, and
/// subregion_rd (mean relative difference of the subregion GE estimates).
struct Comparison {
  std::vector<double> thetas;
  std::vector<ComparisonRow> rows;
  std::vector<DecompositionReport> estimates;  ///< method-major
  std::vector<DecompositionReport> truth;      ///< one per theta
};

/// One set of fits (every node) serves all three methods and all thetas.
Comparison compare_methods(const SyntheticSpec& spec, const std::vector<double>& thetas, const McmcConfig& mcmc,
                           const LossWeightPolicy& policy = {});

/// Comparison table rows for already assembled reports.
std::vector<ComparisonRow> comparison_rows(const DecompositionReport& estimate, const DecompositionReport& truth);

}  // namespace gedecomp
