#include "gedecomp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <set>
#include <thread>

#include "gedecomp/errors.hpp"
#include "gedecomp/inequality.hpp"
#include "gedecomp/seed.hpp"

namespace gedecomp {

std::string_view level_name(Level level) noexcept {
  switch (level) {
    case Level::country:
      return "country";
    case Level::region:
      return "region";
    case Level::subregion:
      return "subregion";
  }
  return "?";
}

Level parse_level(std::string_view name) {
  if (name == "country") return Level::country;
  if (name == "region") return Level::region;
  if (name == "subregion") return Level::subregion;
  throw ValidationError("unknown level '" + std::string(name) + "'");
}

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::proposed:
      return "proposed";
    case Method::separate:
      return "separate";
    case Method::mixture:
      return "mixture";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "proposed") return Method::proposed;
  if (name == "separate") return Method::separate;
  if (name == "mixture") return Method::mixture;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

namespace {

void validate_node(const HierarchyNode& node, std::set<std::string>& seen) {
  if (node.id.empty()) throw ValidationError("hierarchy node with empty id");
  if (!seen.insert(node.id).second) throw ValidationError("duplicate node id '" + node.id + "'");
  if (!(node.population > 0.0) || !std::isfinite(node.population))
    throw NodeError(node.id, node.source, "population must be positive and finite");
  if (node.children.empty()) return;
  if (node.level == Level::subregion) throw NodeError(node.id, node.source, "subregions cannot have children");
  const Level expected = node.level == Level::country ? Level::region : Level::subregion;
  double total = 0.0;
  for (const auto& child : node.children) {
    if (child.level != expected)
      throw NodeError(child.id, child.source,
                      "expected level " + std::string(level_name(expected)) + " under '" + node.id + "'");
    total += child.population;
  }
  if (std::abs(total - node.population) > 1e-9 * node.population)
    throw NodeError(node.id, node.source, "child populations sum to " + std::to_string(total) +
                                              ", parent has " + std::to_string(node.population));
  for (const auto& child : node.children) validate_node(child, seen);
}

template <typename F>
auto at_node(const HierarchyNode& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NodeError&) {
    throw;
  } catch (const std::exception& e) {
    throw NodeError(node.id, node.source, e.what());
  }
}

std::vector<double> shares(const HierarchyNode& parent) {
  std::vector<double> out;
  out.reserve(parent.children.size());
  for (const auto& c : parent.children) out.push_back(c.population / parent.population);
  return out;
}

// Per-unit posterior summaries for one theta.
struct UnitEstimate {
  double ge = 0.0;
  double mean = 0.0;
};

class Summaries {
 public:
  Summaries(const HierarchyFits& fits, Theta theta, DecompositionReport& report)
      : fits_(fits), theta_(theta), report_(report) {}

  UnitEstimate operator()(const HierarchyNode& node) {
    return at_node(node, [&] {
      const auto& draws = fits_.at(node.id);
      const auto ge = posterior_ge(draws, theta_);
      if (ge.unreliable()) report_.unreliable.push_back(node.id);
      return UnitEstimate{ge.mean, posterior_mean_income(draws).mean};
    });
  }

 private:
  const HierarchyFits& fits_;
  Theta theta_;
  DecompositionReport& report_;
};

BenchmarkSolution benchmark(const std::vector<const HierarchyNode*>& units, BenchmarkProblem problem,
                            const LossWeightPolicy& policy) {
  switch (policy.kind) {
    case LossWeightPolicy::Kind::uniform:
      return solve_uniform(problem);
    case LossWeightPolicy::Kind::raking:
      return solve_raking(problem);
    case LossWeightPolicy::Kind::custom:
      break;
  }
  problem.loss_weights.clear();
  for (const auto* u : units) {
    const auto it = policy.custom.find(u->id);
    if (it == policy.custom.end()) throw NodeError(u->id, u->source, "no loss weight given");
    problem.loss_weights.push_back(it->second);
  }
  return solve(problem);
}

void require_data(const HierarchyNode& node) {
  if (!node.data) throw NodeError(node.id, node.source, "node has no grouped data");
}

void collect(const HierarchyNode& node, bool leaves_only, std::vector<const HierarchyNode*>& out) {
  if (!leaves_only || node.children.empty()) {
    require_data(node);
    out.push_back(&node);
  }
  for (const auto& c : node.children) collect(c, leaves_only, out);
}

void finish(DecompositionReport& r) {
  std::sort(r.unreliable.begin(), r.unreliable.end());
  r.unreliable.erase(std::unique(r.unreliable.begin(), r.unreliable.end()), r.unreliable.end());
}

}  // namespace

void HierarchyNode::validate() const {
  if (level != Level::country) throw ValidationError("hierarchy root must be at country level");
  std::set<std::string> seen;
  validate_node(*this, seen);
}

const HierarchyNode* HierarchyNode::find(std::string_view node_id) const {
  if (id == node_id) return this;
  for (const auto& c : children)
    if (const auto* hit = c.find(node_id)) return hit;
  return nullptr;
}

const PosteriorDraws& HierarchyFits::at(const std::string& id) const {
  const auto it = draws.find(id);
  if (it == draws.end()) throw ValidationError("no posterior draws for node '" + id + "'");
  return it->second;
}

const RegionEstimate& DecompositionReport::region(std::string_view id) const {
  for (const auto& r : regions)
    if (r.id == id) return r;
  throw ValidationError("no region '" + std::string(id) + "' in report");
}

HierarchyFits fit_hierarchy(const HierarchyNode& root, const McmcConfig& config, bool leaves_only,
                            unsigned threads) {
  root.validate();
  std::vector<const HierarchyNode*> units;
  collect(root, leaves_only, units);

  std::vector<std::optional<PosteriorDraws>> results(units.size());
  std::vector<std::exception_ptr> errors(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      const auto& node = *units[i];
      try {
        McmcConfig c = config;
        c.seed = derive_seed(config.seed, node.id);
        results[i] = at_node(node, [&] { return fit(node.family, *node.data, c); });
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, units.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  HierarchyFits fits;
  for (std::size_t i = 0; i < units.size(); ++i) fits.draws.emplace(units[i]->id, std::move(*results[i]));
  return fits;
}

DecompositionReport assemble_proposed(const HierarchyNode& root, const HierarchyFits& fits, Theta theta,
                                      const LossWeightPolicy& policy) {
  root.validate();
  DecompositionReport r;
  r.theta = theta.value();
  r.method = Method::proposed;
  Summaries summarize(fits, theta, r);

  const auto country = summarize(root);
  r.ge = country.ge;
  r.mean_income = country.mean;
  if (root.children.empty()) {
    r.within = r.sum_weighted_within_sub = r.ge;
    finish(r);
    return r;
  }

  const auto lambda = shares(root);
  std::vector<UnitEstimate> region_est;
  std::vector<double> region_means;
  std::vector<const HierarchyNode*> regions;
  for (const auto& reg : root.children) {
    region_est.push_back(summarize(reg));
    region_means.push_back(region_est.back().mean);
    regions.push_back(&reg);
  }
  const auto be = at_node(root, [&] { return between_from_means(lambda, region_means, theta); });
  r.mean_income = be.mean;
  r.between = be.between;

  BenchmarkProblem top;
  for (const auto& e : region_est) top.bayes.push_back(e.ge);
  top.weights = be.weights;
  top.target = r.ge;
  top.between = be.between;
  const auto top_cb = at_node(root, [&] { return benchmark(regions, top, policy); });

  for (std::size_t j = 0; j < regions.size(); ++j) {
    const auto& node = *regions[j];
    RegionEstimate re;
    re.id = node.id;
    re.population_share = lambda[j];
    re.mean_income = re.subregion_mean = region_est[j].mean;
    re.ge_bayes = region_est[j].ge;
    re.ge_constrained = top_cb.constrained[j];
    re.weight = be.weights[j];
    if (top_cb.negative[j]) r.negative.push_back(node.id);

    if (node.children.empty()) {
      re.within_sub = re.ge_constrained;
    } else {
      const auto lam_k = shares(node);
      std::vector<UnitEstimate> sub_est;
      std::vector<double> sub_means;
      std::vector<const HierarchyNode*> subs;
      for (const auto& s : node.children) {
        sub_est.push_back(summarize(s));
        sub_means.push_back(sub_est.back().mean);
        subs.push_back(&s);
      }
      const auto be_k = at_node(node, [&] { return between_from_means(lam_k, sub_means, theta); });
      re.subregion_mean = be_k.mean;
      re.between_sub = be_k.between;

      BenchmarkProblem sub;
      for (const auto& e : sub_est) sub.bayes.push_back(e.ge);
      sub.weights = be_k.weights;
      sub.target = re.ge_constrained;
      sub.between = be_k.between;
      const auto sub_cb = at_node(node, [&] { return benchmark(subs, sub, policy); });

      for (std::size_t k = 0; k < subs.size(); ++k) {
        SubregionEstimate se;
        se.id = subs[k]->id;
        se.population_share = lam_k[k];
        se.mean_income = sub_est[k].mean;
        se.ge_bayes = sub_est[k].ge;
        se.ge_constrained = sub_cb.constrained[k];
        se.weight = be_k.weights[k];
        re.within_sub += se.weight * se.ge_constrained;
        if (sub_cb.negative[k]) r.negative.push_back(se.id);
        re.subregions.push_back(std::move(se));
      }
    }
    r.within += re.weight * re.ge_constrained;
    r.sum_weighted_between_sub += re.weight * re.between_sub;
    r.sum_weighted_within_sub += re.weight * re.within_sub;
    r.regions.push_back(std::move(re));
  }
  finish(r);
  return r;
}

DecompositionReport assemble_separate(const HierarchyNode& root, const HierarchyFits& fits, Theta theta) {
  root.validate();
  DecompositionReport r;
  r.theta = theta.value();
  r.method = Method::separate;
  Summaries summarize(fits, theta, r);

  const auto country = summarize(root);
  r.ge = country.ge;
  r.mean_income = country.mean;
  if (root.children.empty()) {
    r.within = r.sum_weighted_within_sub = r.ge;
    finish(r);
    return r;
  }

  const auto lambda = shares(root);
  std::vector<UnitEstimate> region_est;
  std::vector<double> region_means;
  for (const auto& reg : root.children) {
    region_est.push_back(summarize(reg));
    region_means.push_back(region_est.back().mean);
  }
  const auto be = at_node(root, [&] { return between_from_means(lambda, region_means, theta); });
  r.mean_income = be.mean;
  r.between = be.between;

  for (std::size_t j = 0; j < root.children.size(); ++j) {
    const auto& node = root.children[j];
    RegionEstimate re;
    re.id = node.id;
    re.population_share = lambda[j];
    re.mean_income = re.subregion_mean = region_est[j].mean;
    re.ge_bayes = re.ge_constrained = region_est[j].ge;
    re.weight = be.weights[j];

    if (node.children.empty()) {
      re.within_sub = re.ge_bayes;
    } else {
      const auto lam_k = shares(node);
      std::vector<UnitEstimate> sub_est;
      std::vector<double> sub_means;
      for (const auto& s : node.children) {
        sub_est.push_back(summarize(s));
        sub_means.push_back(sub_est.back().mean);
      }
      const auto be_k = at_node(node, [&] { return between_from_means(lam_k, sub_means, theta); });
      re.subregion_mean = be_k.mean;
      re.between_sub = be_k.between;
      for (std::size_t k = 0; k < node.children.size(); ++k) {
        SubregionEstimate se;
        se.id = node.children[k].id;
        se.population_share = lam_k[k];
        se.mean_income = sub_est[k].mean;
        se.ge_bayes = se.ge_constrained = sub_est[k].ge;
        se.weight = be_k.weights[k];
        re.within_sub += se.weight * se.ge_bayes;
        re.subregions.push_back(std::move(se));
      }
      re.residual_sub = re.ge_bayes - re.between_sub - re.within_sub;
    }
    r.within += re.weight * re.ge_bayes;
    r.sum_weighted_between_sub += re.weight * re.between_sub;
    r.sum_weighted_within_sub += re.weight * re.within_sub;
    r.residual_subregion += re.weight * re.residual_sub;
    r.regions.push_back(std::move(re));
  }
  r.residual_region = r.ge - r.between - r.within;
  finish(r);
  return r;
}

DecompositionReport assemble_mixture(const HierarchyNode& root, const HierarchyFits& fits, Theta theta) {
  root.validate();
  DecompositionReport r;
  r.theta = theta.value();
  r.method = Method::mixture;
  Summaries summarize(fits, theta, r);

  if (root.children.empty()) {
    const auto est = summarize(root);
    r.ge = r.within = r.sum_weighted_within_sub = est.ge;
    r.mean_income = est.mean;
    finish(r);
    return r;
  }

  std::vector<double> region_means;
  for (const auto& node : root.children) {
    RegionEstimate re;
    re.id = node.id;
    re.population_share = node.population / root.population;
    if (node.children.empty()) {
      const auto est = summarize(node);
      re.mean_income = re.subregion_mean = est.mean;
      re.ge_bayes = re.within_sub = est.ge;
    } else {
      const auto lam_k = shares(node);
      std::vector<UnitEstimate> sub_est;
      std::vector<double> sub_means;
      for (const auto& s : node.children) {
        sub_est.push_back(summarize(s));
        sub_means.push_back(sub_est.back().mean);
      }
      const auto be_k = at_node(node, [&] { return between_from_means(lam_k, sub_means, theta); });
      re.mean_income = re.subregion_mean = be_k.mean;
      re.between_sub = be_k.between;
      for (std::size_t k = 0; k < node.children.size(); ++k) {
        SubregionEstimate se;
        se.id = node.children[k].id;
        se.population_share = lam_k[k];
        se.mean_income = sub_est[k].mean;
        se.ge_bayes = se.ge_constrained = sub_est[k].ge;
        se.weight = be_k.weights[k];
        re.within_sub += se.weight * se.ge_bayes;
        re.subregions.push_back(std::move(se));
      }
      re.ge_bayes = re.within_sub + re.between_sub;
    }
    re.ge_constrained = re.ge_bayes;
    region_means.push_back(re.mean_income);
    r.regions.push_back(std::move(re));
  }

  std::vector<double> lambda;
  for (const auto& re : r.regions) lambda.push_back(re.population_share);
  const auto be = at_node(root, [&] { return between_from_means(lambda, region_means, theta); });
  r.mean_income = be.mean;
  r.between = be.between;
  for (std::size_t j = 0; j < r.regions.size(); ++j) {
    auto& re = r.regions[j];
    re.weight = be.weights[j];
    r.within += re.weight * re.ge_bayes;
    r.sum_weighted_between_sub += re.weight * re.between_sub;
    r.sum_weighted_within_sub += re.weight * re.within_sub;
  }
  r.ge = r.within + r.between;
  finish(r);
  return r;
}

DecompositionReport assemble(Method method, const HierarchyNode& root, const HierarchyFits& fits, Theta theta,
                             const LossWeightPolicy& policy) {
  switch (method) {
    case Method::proposed:
      return assemble_proposed(root, fits, theta, policy);
    case Method::separate:
      return assemble_separate(root, fits, theta);
    case Method::mixture:
      return assemble_mixture(root, fits, theta);
  }
  throw ValidationError("unknown method");
}

DecompositionReport run_proposed(const HierarchyNode& root, Theta theta, const McmcConfig& config,
                                 const LossWeightPolicy& policy) {
  return assemble_proposed(root, fit_hierarchy(root, config), theta, policy);
}

DecompositionReport run_separate(const HierarchyNode& root, Theta theta, const McmcConfig& config) {
  return assemble_separate(root, fit_hierarchy(root, config), theta);
}

DecompositionReport run_mixture(const HierarchyNode& root, Theta theta, const McmcConfig& config) {
  return assemble_mixture(root, fit_hierarchy(root, config, true), theta);
}

std::optional<double> bw_ratio(const DecompositionReport& report, std::string_view region_id) {
  const auto& re = report.region(region_id);
  if (!(re.within_sub > 0.0)) return std::nullopt;
  return re.between_sub / re.within_sub;
}

std::vector<double> relative_difference(std::span<const double> estimates, std::span<const double> truth) {
  if (estimates.size() != truth.size()) throw ValidationError("relative_difference: length mismatch");
  std::vector<double> out(estimates.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (truth[i] == 0.0) throw DomainError("relative_difference: zero denominator at index " + std::to_string(i));
    out[i] = (estimates[i] - truth[i]) / truth[i];
  }
  return out;
}

GeSurface ge_surface(Family family, double b, std::vector<double> a_grid, std::vector<double> q_grid,
                     std::vector<double> thetas, double p) {
  if (family == Family::lognormal) throw ValidationError("ge_surface needs an (a, q) family: gb2 or sm");
  GeSurface s;
  s.family = family;
  s.b = b;
  s.p = family == Family::gb2 ? p : 1.0;
  s.a = std::move(a_grid);
  s.q = std::move(q_grid);
  s.thetas = std::move(thetas);
  s.values.resize(s.thetas.size());
  for (std::size_t t = 0; t < s.thetas.size(); ++t) {
    auto& plane = s.values[t];
    plane.assign(s.a.size(), std::vector<std::optional<double>>(s.q.size()));
    for (std::size_t i = 0; i < s.a.size(); ++i) {
      for (std::size_t j = 0; j < s.q.size(); ++j) {
        const FamilyParams params = family == Family::gb2 ? FamilyParams(Gb2{s.a[i], b, s.p, s.q[j]})
                                                          : FamilyParams(SinghMaddala{s.a[i], b, s.q[j]});
        validate(params);
        try {
          plane[i][j] = ge_parametric(params, s.thetas[t]);
        } catch (const MomentError&) {
        }
      }
    }
  }
  return s;
}

}  // namespace gedecomp
