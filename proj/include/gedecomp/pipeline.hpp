#pragma once

// Multilevel (country -> region -> subregion) GE decomposition.
//
// Three estimators share the same per-unit posterior fits:
//   proposed  country GE from the country fit; region and subregion GEs
//             benchmarked (constrained Bayes) so that every level adds up;
//   separate  every unit estimated on its own, with the two residuals of
//             the decomposition reported;
//   mixture   leaves only; upper levels are finite mixtures of the leaves.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gedecomp/benchmark.hpp"
#include "gedecomp/distributions.hpp"
#include "gedecomp/grouped.hpp"

namespace gedecomp {

enum class Level { country, region, subregion };

std::string_view level_name(Level level) noexcept;
Level parse_level(std::string_view name);

struct HierarchyNode {
  std::string id;
  Level level = Level::country;
  double population = 0.0;  ///< households
  Family family = Family::lognormal;
  std::optional<GroupedSample> data;
  std::string source;  ///< file the data came from, for error messages
  std::vector<HierarchyNode> children;

  /// Tree invariants: unique ids, levels nested in order, positive
  /// populations, children summing to the parent. Data presence is checked
  /// by each estimator.
  void validate() const;

  const HierarchyNode* find(std::string_view node_id) const;
};

/// Loss weights phi used by the benchmark step.
struct LossWeightPolicy {
  enum class Kind { uniform, raking, custom };
  Kind kind = Kind::uniform;
  std::map<std::string, double> custom;  ///< node id -> phi, for Kind::custom

  static LossWeightPolicy uniform() { return {}; }
  static LossWeightPolicy raking() { return {Kind::raking, {}}; }
};

enum class Method { proposed, separate, mixture };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);

/// Posterior draws for every fitted unit, keyed by node id.
struct HierarchyFits {
  std::map<std::string, PosteriorDraws> draws;

  const PosteriorDraws& at(const std::string& id) const;
  bool operator==(const HierarchyFits&) const = default;
};

/// Fits every node with data (or only the leaves). Unit chains run
/// concurrently on up to `threads` workers (0 = hardware concurrency) and
/// are seeded with derive_seed(config.seed, node id), so the result does
/// not depend on scheduling.
HierarchyFits fit_hierarchy(const HierarchyNode& root, const McmcConfig& config, bool leaves_only = false,
                            unsigned threads = 0);

struct SubregionEstimate {
  std::string id;
  double population_share = 0.0;  ///< lambda_jk
  double mean_income = 0.0;       ///< mu_jk
  double ge_bayes = 0.0;
  double ge_constrained = 0.0;
  double weight = 0.0;  ///< w_jk
  bool operator==(const SubregionEstimate&) const = default;
};

struct RegionEstimate {
  std::string id;
  double population_share = 0.0;  ///< lambda_j
  double mean_income = 0.0;       ///< mu_j from the region fit
  double subregion_mean = 0.0;    ///< sum_k lambda_jk mu_jk (equals mean_income without subregions)
  double ge_bayes = 0.0;
  double ge_constrained = 0.0;
  double weight = 0.0;          ///< w_j
  double between_sub = 0.0;     ///< B_j
  double within_sub = 0.0;      ///< W_j = sum_k w_jk GE_jk
  double residual_sub = 0.0;    ///< separate method only
  std::vector<SubregionEstimate> subregions;
  bool operator==(const RegionEstimate&) const = default;
};

struct DecompositionReport {
  double theta = 0.0;
  Method method = Method::proposed;
  double ge = 0.0;            ///< country GE estimate
  double mean_income = 0.0;   ///< sum_j lambda_j mu_j (country fit mean without regions)
  double between = 0.0;       ///< B
  double within = 0.0;        ///< sum_j w_j GE_j
  double sum_weighted_between_sub = 0.0;  ///< sum_j w_j B_j
  double sum_weighted_within_sub = 0.0;   ///< sum_j w_j W_j
  double residual_region = 0.0;
  double residual_subregion = 0.0;  ///< sum_j w_j residual_sub_j
  std::vector<RegionEstimate> regions;
  std::vector<std::string> unreliable;  ///< ids whose posterior GE excluded >1% of draws
  std::vector<std::string> negative;    ///< ids with a negative constrained estimate

  const RegionEstimate& region(std::string_view id) const;
  bool operator==(const DecompositionReport&) const = default;
};

DecompositionReport assemble_proposed(const HierarchyNode& root, const HierarchyFits& fits, Theta theta,
                                      const LossWeightPolicy& policy = {});
DecompositionReport assemble_separate(const HierarchyNode& root, const HierarchyFits& fits, Theta theta);
DecompositionReport assemble_mixture(const HierarchyNode& root, const HierarchyFits& fits, Theta theta);

DecompositionReport assemble(Method method, const HierarchyNode& root, const HierarchyFits& fits, Theta theta,
                             const LossWeightPolicy& policy = {});

/// Fit + assemble. config.seed is the master seed.
DecompositionReport run_proposed(const HierarchyNode& root, Theta theta, const McmcConfig& config,
                                 const LossWeightPolicy& policy = {});
DecompositionReport run_separate(const HierarchyNode& root, Theta theta, const McmcConfig& config);
DecompositionReport run_mixture(const HierarchyNode& root, Theta theta, const McmcConfig& config);

/// B_j / W_j for one region; empty when W_j <= 0.
std::optional<double> bw_ratio(const DecompositionReport& report, std::string_view region_id);

/// (estimate_i - truth_i) / truth_i. Throws DomainError on a zero truth.
std::vector<double> relative_difference(std::span<const double> estimates, std::span<const double> truth);

/// GE on an (a, q) grid at fixed b (and p, for GB2). values[t][i][j] is
/// empty where GE is undefined (moment window or q <= 1/a at theta = 1).
struct GeSurface {
  Family family = Family::singh_maddala;
  double b = 1.0;
  double p = 1.0;
  std::vector<double> a;
  std::vector<double> q;
  std::vector<double> thetas;
  std::vector<std::vector<std::vector<std::optional<double>>>> values;
};

GeSurface ge_surface(Family family, double b, std::vector<double> a_grid, std::vector<double> q_grid,
                     std::vector<double> thetas, double p = 1.0);

}  // namespace gedecomp
