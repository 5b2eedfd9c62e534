#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "gedecomp/errors.hpp"
#include "gedecomp/inequality.hpp"
#include "gedecomp/pipeline.hpp"
#include "gedecomp/sim.hpp"
#include "oracles.hpp"

using namespace gedecomp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<double> kBounds = {0, 1, 2, 3, 4, 5, 7, 10, 15, 20, kInf};
const std::vector<double> kThetas = {-1.0, 0.0, 1.0, 2.0};

HierarchyNode leaf(std::string id, Level level, double population, Family family = Family::lognormal) {
  HierarchyNode n;
  n.id = std::move(id);
  n.level = level;
  n.population = population;
  n.family = family;
  return n;
}

McmcConfig quick() {
  McmcConfig c;
  c.iterations = 3000;
  c.burn_in = 1000;
  c.seed = 5;
  return c;
}

// SM truth, GB2 / SM / LN fits: 3 regions x 4 subregions, 20,000 sampled
// households per subregion.
SyntheticSpec sm_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  const double as[3] = {1.9, 2.2, 2.5};
  for (int j = 0; j < 3; ++j) {
    RegionSpec r;
    r.id = "R" + std::to_string(j);
    for (int k = 0; k < 4; ++k)
      r.subregions.push_back({r.id + "-" + std::to_string(k), SinghMaddala{as[j] + 0.1 * k, 4.0 + 0.5 * k, 2.0 + 0.3 * j},
                              200000});
    spec.regions.push_back(r);
  }
  return spec;
}

struct Fitted {
  SyntheticData data;
  HierarchyFits fits;
};

const Fitted& sm_world() {
  static const Fitted f = [] {
    Fitted out{generate(sm_spec(2024)), {}};
    out.fits = fit_hierarchy(out.data.hierarchy, McmcConfig{});
    return out;
  }();
  return f;
}

PosteriorDraws point(const FamilyParams& p) {
  return PosteriorDraws(family_of(p), to_vector(p), 0.3, McmcConfig{});
}

void check_proposed_identities(const DecompositionReport& r) {
  const double scale = std::abs(r.ge);
  CHECK(std::abs(r.sum_weighted_within_sub + r.sum_weighted_between_sub + r.between - r.ge) <= 1e-10 * scale);
  CHECK(std::abs(r.within + r.between - r.ge) <= 1e-10 * scale);
  for (const auto& re : r.regions) {
    double w = re.between_sub;
    for (const auto& s : re.subregions) w += s.weight * s.ge_constrained;
    if (!re.subregions.empty()) CHECK(std::abs(w - re.ge_constrained) <= 1e-10 * std::abs(re.ge_constrained));
  }
  CHECK(r.residual_region == 0.0);
  CHECK(r.residual_subregion == 0.0);
}
}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("hierarchy validation") {
    auto root = leaf("JP", Level::country, 10);
    root.children.push_back(leaf("A", Level::region, 4));
    root.children.push_back(leaf("B", Level::region, 6));
    CHECK_NOTHROW(root.validate());
    root.children[1].population = 5;
    CHECK_THROWS_AS(root.validate(), NodeError);
    root.children[1].population = 6;
    root.children[1].id = "A";
    CHECK_THROWS_AS(root.validate(), ValidationError);
    root.children[1].id = "B";
    root.children[1].level = Level::subregion;
    CHECK_THROWS_AS(root.validate(), NodeError);
    root.children[1].level = Level::region;
    CHECK(root.find("B") == &root.children[1]);
    CHECK(root.find("C") == nullptr);
  }

  TEST_CASE("nodes without data are rejected with their id") {
    auto root = leaf("JP", Level::country, 10);
    try {
      fit_hierarchy(root, quick());
      FAIL("expected NodeError");
    } catch (const NodeError& e) {
      CHECK(e.node() == "JP");
    }
  }

  TEST_CASE("fit errors are annotated with the node") {
    auto root = leaf("JP", Level::country, 10, Family::gb2);
    root.data = GroupedSample({0, 1, 2, kInf}, {1, 2, 3}, "JP");
    root.source = "jp.csv";
    try {
      fit_hierarchy(root, quick());
      FAIL("expected NodeError");
    } catch (const NodeError& e) {
      CHECK(e.node() == "JP");
      CHECK(e.file() == "jp.csv");
    }
  }

  TEST_CASE("degenerate hierarchy: one region, one subregion") {
    const auto x = sample(SinghMaddala{2.5, 4.0, 2.0}, 20000, 3);
    const auto data = bracket(x, kBounds);
    auto root = leaf("JP", Level::country, 100, Family::gb2);
    root.data = data;
    auto region = leaf("R", Level::region, 100, Family::singh_maddala);
    region.data = data;
    auto sub = leaf("S", Level::subregion, 100, Family::lognormal);
    sub.data = data;
    region.children.push_back(sub);
    root.children.push_back(region);
    const auto fits = fit_hierarchy(root, quick());
    for (double t : kThetas) {
      const auto r = assemble_proposed(root, fits, t);
      CHECK(r.between == 0.0);
      CHECK(r.regions[0].between_sub == 0.0);
      CHECK(r.regions[0].weight == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(r.regions[0].ge_constrained == doctest::Approx(r.ge).epsilon(1e-14));
      CHECK(r.regions[0].subregions[0].ge_constrained == doctest::Approx(r.ge).epsilon(1e-14));
      CHECK(bw_ratio(r, "R").value() == 0.0);
      check_proposed_identities(r);
    }
  }

  TEST_CASE("country-only hierarchy on the national table") {
    std::vector<double> c;
    for (double f : {0.068, 0.139, 0.178, 0.157, 0.126, 0.159, 0.110, 0.047, 0.009, 0.006}) c.push_back(f * 5e6);
    auto root = leaf("JP", Level::country, 5e6, Family::gb2);
    root.data = GroupedSample(kBounds, c, "JP");
    const auto r = run_proposed(root, 1.0, McmcConfig{});
    CHECK(std::abs(r.ge - 0.249) < 0.01);
    CHECK(r.between == 0.0);
    CHECK(r.sum_weighted_within_sub == r.ge);
  }

  TEST_CASE("proposed method on an SM-truth hierarchy") {
    const auto& w = sm_world();
    for (double t : kThetas) {
      CAPTURE(t);
      const auto r = assemble_proposed(w.data.hierarchy, w.fits, t);
      check_proposed_identities(r);
      const auto truth = true_decomposition(w.data, t);
      for (std::size_t j = 0; j < r.regions.size(); ++j)
        for (std::size_t k = 0; k < r.regions[j].subregions.size(); ++k) {
          const double est = r.regions[j].subregions[k].ge_constrained;
          const double tru = truth.regions[j].subregions[k].ge_constrained;
          CHECK(std::abs(est / tru - 1.0) < 0.10);
        }
      for (const auto& policy : {LossWeightPolicy::raking()}) check_proposed_identities(assemble_proposed(w.data.hierarchy, w.fits, t, policy));
    }
  }

  TEST_CASE("custom loss weights") {
    const auto& w = sm_world();
    LossWeightPolicy policy{LossWeightPolicy::Kind::custom, {}};
    std::function<void(const HierarchyNode&)> add = [&](const HierarchyNode& n) {
      policy.custom[n.id] = 1.0 + static_cast<double>(n.id.size() % 3);
      for (const auto& c : n.children) add(c);
    };
    add(w.data.hierarchy);
    check_proposed_identities(assemble_proposed(w.data.hierarchy, w.fits, 2.0, policy));
    policy.custom.erase("R1-2");
    try {
      assemble_proposed(w.data.hierarchy, w.fits, 2.0, policy);
      FAIL("expected NodeError");
    } catch (const NodeError& e) {
      CHECK(e.node() == "R1-2");
    }
  }

  TEST_CASE("separate method accounting and residual signs") {
    const auto& w = sm_world();
    for (double t : kThetas) {
      const auto r = assemble_separate(w.data.hierarchy, w.fits, t);
      double sub = 0.0;
      for (const auto& re : r.regions) sub += re.weight * re.residual_sub;
      CHECK(sub == doctest::Approx(r.residual_subregion).epsilon(1e-14));
      const double rebuilt =
          r.sum_weighted_within_sub + r.sum_weighted_between_sub + r.between + r.residual_region + r.residual_subregion;
      CHECK(rebuilt == doctest::Approx(r.ge).epsilon(1e-13));
    }
    CHECK(assemble_separate(w.data.hierarchy, w.fits, -1.0).residual_subregion > 0.0);
    CHECK(assemble_separate(w.data.hierarchy, w.fits, 2.0).residual_subregion < 0.0);
  }

  TEST_CASE("separate residuals vanish for a well-specified hierarchy") {
    // Identical lognormal leaves: every level is exactly lognormal.
    SyntheticSpec spec;
    spec.fit = {Family::lognormal, Family::lognormal, Family::lognormal};
    spec.seed = 8;
    for (int j = 0; j < 2; ++j) {
      RegionSpec r{"R" + std::to_string(j), {}};
      for (int k = 0; k < 2; ++k) r.subregions.push_back({r.id + std::to_string(k), LogNormal{1.3, 0.5}, 200000});
      spec.regions.push_back(r);
    }
    const auto data = generate(spec);
    const auto fits = fit_hierarchy(data.hierarchy, McmcConfig{});
    for (double t : kThetas) {
      const auto r = assemble_separate(data.hierarchy, fits, t);
      CHECK(std::abs(r.residual_region) < 0.01 * r.ge);
      CHECK(std::abs(r.residual_subregion) < 0.01 * r.ge);
    }
  }

  TEST_CASE("mixture of identical leaves") {
    auto root = leaf("C", Level::country, 4);
    root.children.push_back(leaf("A", Level::region, 2));
    root.children.push_back(leaf("B", Level::region, 2));
    root.children[0].children.push_back(leaf("A1", Level::subregion, 1));
    root.children[0].children.push_back(leaf("A2", Level::subregion, 1));
    root.children[1].children.push_back(leaf("B1", Level::subregion, 2));
    HierarchyFits fits;
    for (const char* id : {"A1", "A2", "B1"}) fits.draws.emplace(id, point(LogNormal{0.4, 0.6}));
    for (double t : kThetas) {
      const auto r = assemble_mixture(root, fits, t);
      const double g = ge_parametric(LogNormal{0.4, 0.6}, t);
      CHECK(r.ge == doctest::Approx(g).epsilon(1e-14));
      CHECK(r.between == doctest::Approx(0.0).scale(1e-15));
      CHECK(r.sum_weighted_between_sub == doctest::Approx(0.0).scale(1e-15));
      CHECK(r.sum_weighted_within_sub + r.sum_weighted_between_sub + r.between == doctest::Approx(r.ge).epsilon(1e-14));
    }
  }

  TEST_CASE("mixture of two lognormals against Monte Carlo") {
    auto root = leaf("C", Level::country, 2);
    root.children.push_back(leaf("A", Level::region, 1));
    root.children.push_back(leaf("B", Level::region, 1));
    HierarchyFits fits;
    fits.draws.emplace("A", point(LogNormal{0.0, 0.25}));
    fits.draws.emplace("B", point(LogNormal{1.0, 0.25}));
    const auto r = assemble_mixture(root, fits, 1.0);

    const double m1 = std::exp(0.125), m2 = std::exp(1.125), mu = 0.5 * (m1 + m2);
    const double s1 = 0.5 * m1 / mu, s2 = 0.5 * m2 / mu;
    const double hand = s1 * 0.125 + s2 * 0.125 + s1 * std::log(m1 / mu) + s2 * std::log(m2 / mu);
    CHECK(r.ge == doctest::Approx(hand).epsilon(1e-14));

    std::mt19937_64 rng(12);
    std::normal_distribution<double> z;
    std::vector<double> x(1000000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::exp((i % 2 ? 1.0 : 0.0) + 0.5 * z(rng));
    // MC standard error of the Theil index is ~1e-3 here.
    CHECK(std::abs(ge_finite(x, 1.0) - r.ge) < 4e-3);
  }

  TEST_CASE("mixture and GB2-based country GE differ at theta = -1") {
    const auto& w = sm_world();
    const auto mix = assemble_mixture(w.data.hierarchy, w.fits, -1.0);
    const auto prop = assemble_proposed(w.data.hierarchy, w.fits, -1.0);
    CHECK(std::abs(mix.ge / prop.ge - 1.0) > 0.05);
    const double scale = std::abs(mix.ge);
    CHECK(std::abs(mix.sum_weighted_within_sub + mix.sum_weighted_between_sub + mix.between - mix.ge) <= 1e-10 * scale);
  }

  TEST_CASE("B/W ratio") {
    DecompositionReport r;
    RegionEstimate re;
    re.id = "R";
    re.between_sub = 0.004;
    re.within_sub = 0.26;
    r.regions.push_back(re);
    CHECK(bw_ratio(r, "R").value() == doctest::Approx(0.004 / 0.26));
    CHECK(bw_ratio(r, "R").value() == doctest::Approx(0.01538).epsilon(1e-3));
    r.regions[0].within_sub = 0.0;
    CHECK_FALSE(bw_ratio(r, "R").has_value());
    CHECK_THROWS_AS(bw_ratio(r, "X"), ValidationError);

    // Same means, different spreads: no between-subregion inequality.
    auto root = leaf("C", Level::country, 2);
    root.children.push_back(leaf("A", Level::region, 2));
    root.children[0].children.push_back(leaf("A1", Level::subregion, 1));
    root.children[0].children.push_back(leaf("A2", Level::subregion, 1));
    HierarchyFits fits;
    fits.draws.emplace("A1", point(LogNormal{-0.1, 0.2}));
    fits.draws.emplace("A2", point(LogNormal{-0.4, 0.8}));
    CHECK(bw_ratio(assemble_mixture(root, fits, 2.0), "A").value() == doctest::Approx(0.0).scale(1e-14));
  }

  TEST_CASE("relative difference") {
    const std::vector<double> a = {0.1, 0.2};
    CHECK(relative_difference(a, a) == std::vector<double>{0.0, 0.0});
    CHECK(relative_difference(std::vector<double>{0.3}, std::vector<double>{0.25})[0] == doctest::Approx(0.2));
    CHECK_THROWS_AS(relative_difference(std::vector<double>{0.3}, std::vector<double>{0.0}), DomainError);
  }

  TEST_CASE("GE surface") {
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(1.5 + 0.5 * i);
    const auto s = ge_surface(Family::singh_maddala, 3.0, grid, grid, kThetas);
    for (std::size_t t = 0; t < kThetas.size(); ++t)
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
          const SinghMaddala p{grid[i], 3.0, grid[j]};
          const auto& v = s.values[t][i][j];
          REQUIRE(v.has_value());
          CHECK(*v == ge_parametric(p, kThetas[t]));
          if (i + 1 < grid.size()) CHECK(*s.values[t][i + 1][j] < *v);
          if (j + 1 < grid.size()) CHECK(*s.values[t][i][j + 1] < *v);
        }
    CHECK(ge_parametric(SinghMaddala{2, 3, 3}, -1.0) > ge_parametric(SinghMaddala{3, 3, 3}, -1.0));
    const auto big = ge_surface(Family::singh_maddala, 3.0, {200.0}, {200.0}, kThetas);
    for (const auto& plane : big.values) CHECK(*plane[0][0] < 1e-3);
    const auto masked = ge_surface(Family::singh_maddala, 1.0, {0.5, 2.0}, {1.5}, {1.0});
    CHECK_FALSE(masked.values[0][0][0].has_value());
    CHECK(masked.values[0][1][0].has_value());
    CHECK_THROWS_AS(ge_surface(Family::lognormal, 1.0, {1.0}, {1.0}, {1.0}), ValidationError);
  }

  TEST_CASE("fits are deterministic and independent of siblings and threads") {
    auto spec = sm_spec(5);
    spec.regions.resize(2);
    const auto data = generate(spec);
    const auto a = fit_hierarchy(data.hierarchy, quick(), false, 1);
    const auto b = fit_hierarchy(data.hierarchy, quick(), false, 4);
    CHECK(a == b);
    CHECK(assemble_proposed(data.hierarchy, a, 2.0) == assemble_proposed(data.hierarchy, b, 2.0));

    // Drop one subregion: every other subregion's chain is unchanged.
    auto pruned = data.hierarchy;
    auto& r0 = pruned.children[0];
    r0.population -= r0.children.back().population;
    pruned.population -= r0.children.back().population;
    r0.children.pop_back();
    const auto c = fit_hierarchy(pruned, quick(), true);
    for (const auto& [id, draws] : c.draws) CHECK(draws == a.at(id));
  }

  TEST_CASE("methods and levels by name") {
    CHECK(parse_method("separate") == Method::separate);
    CHECK(method_name(Method::mixture) == "mixture");
    CHECK(parse_level("subregion") == Level::subregion);
    CHECK_THROWS_AS(parse_method("other"), ValidationError);
  }
}
