#include <cmath>
#include <set>

#include "doctest.h"
#include "gedecomp/errors.hpp"
#include "gedecomp/sim.hpp"

using namespace gedecomp;

namespace {
SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.seed = 42;
  s.regions = {{"A", {{"A1", SinghMaddala{2.2, 4.0, 2.0}, 3000}, {"A2", LogNormal{1.2, 0.5}, 2000}}},
               {"B", {{"B1", Gb2{2.5, 5.0, 0.9, 1.8}, 4000}}}};
  return s;
}

void collect(const HierarchyNode& n, std::vector<const HierarchyNode*>& out) {
  out.push_back(&n);
  for (const auto& c : n.children) collect(c, out);
}
}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("spec validation") {
    auto s = small_spec();
    CHECK_NOTHROW(s.validate());
    s.sampling_fraction = 0.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_spec();
    s.regions[1].subregions[0].id = "A1";
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_spec();
    s.regions[0].subregions[0].households = 0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    s = small_spec();
    s.regions[0].subregions[0].law = SinghMaddala{-1.0, 1.0, 1.0};
    CHECK_THROWS_AS(s.validate(), DomainError);
    s = small_spec();
    s.boundaries = {0.0, 5.0};
    CHECK_THROWS_AS(s.validate(), ValidationError);
  }

  TEST_CASE("shape of the generated data") {
    const auto d = generate(small_spec());
    CHECK(d.population.incomes.size() == 9000);
    CHECK(d.hierarchy.population == 9000);
    CHECK(d.hierarchy.children.size() == 2);
    CHECK(d.hierarchy.children[0].children.size() == 2);
    CHECK(d.hierarchy.children[0].children[1].population == 2000);
    CHECK(d.hierarchy.children[0].children[1].data->total() == 200);
    CHECK(d.hierarchy.data->total() == 900);
    CHECK(d.hierarchy.family == Family::gb2);
    CHECK(d.hierarchy.children[0].family == Family::singh_maddala);
    CHECK(d.hierarchy.children[0].children[0].family == Family::lognormal);
  }

  TEST_CASE("grouped counts are the sum of their children") {
    const auto d = generate(small_spec());
    std::vector<const HierarchyNode*> nodes;
    collect(d.hierarchy, nodes);
    for (const auto* n : nodes) {
      if (n->children.empty()) continue;
      std::vector<double> sum(n->data->groups(), 0.0);
      for (const auto& c : n->children)
        for (std::size_t g = 0; g < sum.size(); ++g) sum[g] += c.data->counts()[g];
      CHECK(std::vector<double>(n->data->counts().begin(), n->data->counts().end()) == sum);
    }
  }

  TEST_CASE("regenerating with the same seed is identical") {
    const auto a = generate(small_spec());
    const auto b = generate(small_spec());
    CHECK(a.population.incomes == b.population.incomes);
    CHECK(a.population.subgroups == b.population.subgroups);
    std::vector<const HierarchyNode*> na, nb;
    collect(a.hierarchy, na);
    collect(b.hierarchy, nb);
    REQUIRE(na.size() == nb.size());
    for (std::size_t i = 0; i < na.size(); ++i) CHECK(*na[i]->data == *nb[i]->data);
    auto other = small_spec();
    other.seed = 43;
    CHECK_FALSE(generate(other).population.incomes == a.population.incomes);
  }

  TEST_CASE("sampled households come from their leaf") {
    auto s = small_spec();
    s.sampling_fraction = 1.0;
    const auto d = generate(s);
    // Full sampling: leaf counts are the exact brackets of the leaf population.
    std::size_t offset = 0;
    for (const auto& region : d.hierarchy.children)
      for (const auto& l : region.children) {
        const auto n = static_cast<std::size_t>(l.population);
        std::vector<double> x(d.population.incomes.begin() + static_cast<std::ptrdiff_t>(offset),
                              d.population.incomes.begin() + static_cast<std::ptrdiff_t>(offset + n));
        CHECK(bracket(x, s.boundaries, l.id) == *l.data);
        offset += n;
      }
  }

  TEST_CASE("degenerate leaves give zero truth") {
    SyntheticSpec s;
    s.regions = {{"A", {{"A1", LogNormal{std::log(2.5), 0.0}, 500}, {"A2", LogNormal{std::log(2.5), 0.0}, 300}}}};
    const auto d = generate(s);
    std::size_t nonempty = 0;
    for (double c : d.hierarchy.data->counts()) nonempty += c > 0;
    CHECK(nonempty == 1);
    for (double t : {-1.0, 0.0, 1.0, 2.0}) {
      const auto truth = true_decomposition(d, t);
      CHECK(truth.ge == doctest::Approx(0.0).scale(1e-15));
      CHECK(truth.regions[0].subregions[1].ge_bayes == doctest::Approx(0.0).scale(1e-15));
      CHECK(truth.between == doctest::Approx(0.0).scale(1e-15));
    }
  }

  TEST_CASE("truth decomposition identities") {
    const auto d = generate(small_spec());
    for (double t : {-1.0, 0.0, 1.0, 2.0}) {
      const auto r = true_decomposition(d, t);
      const double s = std::abs(r.ge);
      CHECK(std::abs(r.within + r.between - r.ge) <= 1e-12 * s);
      CHECK(std::abs(r.sum_weighted_within_sub + r.sum_weighted_between_sub + r.between - r.ge) <= 1e-12 * s);
      for (const auto& re : r.regions) {
        double w = re.between_sub;
        for (const auto& sub : re.subregions) w += sub.weight * sub.ge_bayes;
        CHECK(std::abs(w - re.ge_bayes) <= 1e-12 * std::abs(re.ge_bayes));
      }
    }
  }

  TEST_CASE("method comparison on lognormal leaves") {
    SyntheticSpec s;
    s.seed = 3;
    s.fit = {Family::lognormal, Family::lognormal, Family::lognormal};
    for (int j = 0; j < 2; ++j) {
      RegionSpec r{"R" + std::to_string(j), {}};
      for (int k = 0; k < 2; ++k) r.subregions.push_back({r.id + std::to_string(k), LogNormal{1.3, 0.5}, 200000});
      s.regions.push_back(r);
    }
    const auto c = compare_methods(s, {-1.0, 2.0}, McmcConfig{});
    CHECK(c.estimates.size() == 6);
    CHECK(c.truth.size() == 2);
    for (const auto& row : c.rows) {
      CAPTURE(row.component);
      CAPTURE(row.theta);
      if (row.component == "ge") CHECK(std::abs(row.error) < 0.05 * row.truth);
      if (row.component.rfind("residual", 0) == 0) CHECK(std::abs(row.estimate) < 0.01);
      if (row.component == "subregion_rd") CHECK(std::abs(row.estimate) < 0.05);
    }
  }

  TEST_CASE("method comparison on Singh-Maddala leaves with lognormal fits") {
    SyntheticSpec s;
    s.seed = 11;
    for (int j = 0; j < 2; ++j) {
      RegionSpec r{"R" + std::to_string(j), {}};
      for (int k = 0; k < 3; ++k)
        r.subregions.push_back({r.id + std::to_string(k), SinghMaddala{2.0 + 0.2 * k, 4.0, 2.2 + 0.2 * j}, 200000});
      s.regions.push_back(r);
    }
    const auto c = compare_methods(s, {-1.0, 2.0}, McmcConfig{});
    auto find = [&](Method m, double t, const std::string& comp) {
      for (const auto& r : c.rows)
        if (r.method == m && r.theta == t && r.component == comp) return r;
      FAIL("row not found");
      return c.rows.front();
    };
    for (double t : {-1.0, 2.0}) {
      const auto prop = find(Method::proposed, t, "subregion_rd");
      const auto sep = find(Method::separate, t, "subregion_rd");
      const auto mix = find(Method::mixture, t, "subregion_rd");
      if (t < 0) {
        CHECK(sep.estimate < 0.0);
        CHECK(find(Method::separate, t, "sum_w_within_sub").error < 0.0);
        CHECK(find(Method::mixture, t, "sum_w_within_sub").error < 0.0);
      } else {
        CHECK(sep.estimate > 0.0);
        CHECK(find(Method::separate, t, "sum_w_within_sub").error > 0.0);
        CHECK(find(Method::mixture, t, "sum_w_within_sub").error > 0.0);
      }
      CHECK(mix.estimate == doctest::Approx(sep.estimate));
      CHECK(std::abs(prop.estimate) < std::abs(sep.estimate));
    }
  }
}
