#include "gedecomp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "gedecomp/errors.hpp"
#include "gedecomp/seed.hpp"

namespace gedecomp {

void SyntheticSpec::validate() const {
  if (regions.empty()) throw ValidationError("synthetic spec needs at least one region");
  if (!(sampling_fraction > 0.0 && sampling_fraction <= 1.0))
    throw ValidationError("sampling fraction must lie in (0, 1]");
  std::set<std::string> ids{country_id};
  for (const auto& r : regions) {
    if (!ids.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
    if (r.subregions.empty()) throw ValidationError("region '" + r.id + "' has no subregions");
    for (const auto& leaf : r.subregions) {
      if (!ids.insert(leaf.id).second) throw ValidationError("duplicate id '" + leaf.id + "'");
      if (leaf.households == 0) throw ValidationError("leaf '" + leaf.id + "' has no households");
      gedecomp::validate(leaf.law);
    }
  }
  GroupedSample(boundaries, std::vector<double>(boundaries.size() - 1, 1.0));
}

namespace {

std::size_t sample_size(std::size_t households, double fraction) {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(fraction * static_cast<double>(households))),
                                 1, households);
}

HierarchyNode make_node(std::string id, Level level, Family family, std::span<const double> sampled,
                        const std::vector<double>& boundaries, double population) {
  HierarchyNode node;
  node.id = id;
  node.level = level;
  node.population = population;
  node.family = family;
  node.data = bracket(sampled, boundaries, std::move(id));
  return node;
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticData out;
  auto& pop = out.population;
  auto& root = out.hierarchy;
  root.id = spec.country_id;
  root.level = Level::country;
  root.family = spec.fit.country;

  std::vector<double> country_sample;
  std::size_t leaf_index = 0;
  for (std::size_t j = 0; j < spec.regions.size(); ++j) {
    const auto& rs = spec.regions[j];
    std::vector<double> region_sample;
    HierarchyNode region;
    for (const auto& leaf : rs.subregions) {
      auto incomes = sample(leaf.law, leaf.households, derive_seed(spec.seed, "population/" + leaf.id));
      std::mt19937_64 rng(derive_seed(spec.seed, "sample/" + leaf.id));
      std::vector<double> drawn;
      drawn.reserve(sample_size(leaf.households, spec.sampling_fraction));
      std::sample(incomes.begin(), incomes.end(), std::back_inserter(drawn),
                  sample_size(leaf.households, spec.sampling_fraction), rng);

      const double n = static_cast<double>(leaf.households);
      region.children.push_back(make_node(leaf.id, Level::subregion, spec.fit.subregion, drawn, spec.boundaries, n));
      region.population += n;
      region_sample.insert(region_sample.end(), drawn.begin(), drawn.end());

      pop.incomes.insert(pop.incomes.end(), incomes.begin(), incomes.end());
      pop.groups.insert(pop.groups.end(), incomes.size(), j);
      pop.subgroups.insert(pop.subgroups.end(), incomes.size(), leaf_index++);
    }
    auto node = make_node(rs.id, Level::region, spec.fit.region, region_sample, spec.boundaries, region.population);
    node.children = std::move(region.children);
    root.population += node.population;
    root.children.push_back(std::move(node));
    country_sample.insert(country_sample.end(), region_sample.begin(), region_sample.end());
  }
  root.data = bracket(country_sample, spec.boundaries, root.id);
  root.validate();
  return out;
}

DecompositionReport true_decomposition(const SyntheticData& data, Theta theta) {
  const auto& pop = data.population;
  const auto& root = data.hierarchy;
  DecompositionReport r;
  r.theta = theta.value();
  r.method = Method::proposed;

  const auto top = decompose_finite(pop.incomes, pop.groups, theta);
  r.ge = top.total;
  r.mean_income = top.mean;
  r.between = top.between;
  r.within = top.within;
  if (top.labels.size() != root.children.size()) throw ValidationError("population does not match hierarchy");

  for (std::size_t j = 0; j < top.labels.size(); ++j) {
    std::vector<double> incomes;
    std::vector<std::size_t> leaves;
    for (std::size_t i = 0; i < pop.incomes.size(); ++i) {
      if (pop.groups[i] != top.labels[j]) continue;
      incomes.push_back(pop.incomes[i]);
      leaves.push_back(pop.subgroups[i]);
    }
    const auto sub = decompose_finite(incomes, leaves, theta);
    const auto& node = root.children[j];
    if (sub.labels.size() != node.children.size()) throw ValidationError("population does not match hierarchy");

    RegionEstimate re;
    re.id = node.id;
    re.population_share = top.population_shares[j];
    re.mean_income = re.subregion_mean = top.means[j];
    re.ge_bayes = re.ge_constrained = top.ge[j];
    re.weight = top.weights[j];
    re.between_sub = sub.between;
    re.within_sub = sub.within;
    for (std::size_t k = 0; k < sub.labels.size(); ++k) {
      SubregionEstimate se;
      se.id = node.children[k].id;
      se.population_share = sub.population_shares[k];
      se.mean_income = sub.means[k];
      se.ge_bayes = se.ge_constrained = sub.ge[k];
      se.weight = sub.weights[k];
      re.subregions.push_back(std::move(se));
    }
    r.sum_weighted_between_sub += re.weight * re.between_sub;
    r.sum_weighted_within_sub += re.weight * re.within_sub;
    r.regions.push_back(std::move(re));
  }
  return r;
}

std::vector<ComparisonRow> comparison_rows(const DecompositionReport& est, const DecompositionReport& truth) {
  std::vector<ComparisonRow> rows;
  auto add = [&](std::string component, double e, double t) {
    rows.push_back({est.method, est.theta, std::move(component), e, t, e - t});
  };
  add("ge", est.ge, truth.ge);
  add("between", est.between, truth.between);
  add("residual_region", est.residual_region, truth.residual_region);
  add("sum_w_between_sub", est.sum_weighted_between_sub, truth.sum_weighted_between_sub);
  add("sum_w_within_sub", est.sum_weighted_within_sub, truth.sum_weighted_within_sub);
  add("residual_subregion", est.residual_subregion, truth.residual_subregion);

  std::vector<double> e;
  std::vector<double> t;
  for (std::size_t j = 0; j < est.regions.size() && j < truth.regions.size(); ++j) {
    for (std::size_t k = 0; k < est.regions[j].subregions.size(); ++k) {
      e.push_back(est.regions[j].subregions[k].ge_constrained);
      t.push_back(truth.regions[j].subregions.at(k).ge_constrained);
    }
  }
  if (!e.empty()) {
    const auto rd = relative_difference(e, t);
    const double mean_rd = std::accumulate(rd.begin(), rd.end(), 0.0) / static_cast<double>(rd.size());
    add("subregion_rd", mean_rd, 0.0);
  }
  return rows;
}

Comparison compare_methods(const SyntheticSpec& spec, const std::vector<double>& thetas, const McmcConfig& mcmc,
                           const LossWeightPolicy& policy) {
  const auto data = generate(spec);
  const auto fits = fit_hierarchy(data.hierarchy, mcmc);
  Comparison c;
  c.thetas = thetas;
  for (double t : thetas) c.truth.push_back(true_decomposition(data, t));
  for (Method m : {Method::proposed, Method::separate, Method::mixture}) {
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      c.estimates.push_back(assemble(m, data.hierarchy, fits, thetas[i], policy));
      auto rows = comparison_rows(c.estimates.back(), c.truth[i]);
      c.rows.insert(c.rows.end(), rows.begin(), rows.end());
    }
  }
  return c;
}

}  // namespace gedecomp
