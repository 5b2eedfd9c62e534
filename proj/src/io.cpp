#include "gedecomp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "gedecomp/errors.hpp"

namespace gedecomp::io {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& file, std::size_t line) {
  if (s == "inf" || s == "Inf" || s == "INF") return kInf;
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty())
    throw IoError(file, "line " + std::to_string(line) + ": '" + s + "' is not a number");
  return v;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed5(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(5) << v;
  return out.str();
}

Json boundaries_json(std::span<const double> b) {
  Json out = Json::array();
  for (double c : b) out.push_back(std::isinf(c) ? Json("inf") : Json(c));
  return out;
}

std::vector<double> boundaries_from_json(const Json& j) {
  std::vector<double> out;
  for (const auto& c : j) out.push_back(c.is_string() && c.get<std::string>() == "inf" ? kInf : c.get<double>());
  return out;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot write file");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

GroupedSample parse_grouped_csv_text(const std::string& text, const std::string& name, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw IoError(name, "count scale must be positive");
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<double> boundaries;
  std::vector<double> counts;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (!header) {
      if (cells.size() != 3 || cells[0] != "lower" || cells[1] != "upper" || cells[2] != "count")
        throw IoError(name, "expected header 'lower,upper,count'");
      header = true;
      continue;
    }
    if (cells.size() != 3) throw IoError(name, "line " + std::to_string(lineno) + ": expected 3 fields");
    const double lower = parse_number(cells[0], name, lineno);
    const double upper = parse_number(cells[1], name, lineno);
    const double count = parse_number(cells[2], name, lineno);
    if (boundaries.empty()) {
      if (lower != 0.0) throw IoError(name, "first bracket must start at 0");
      boundaries.push_back(lower);
    } else if (std::isinf(boundaries.back())) {
      throw IoError(name, "line " + std::to_string(lineno) + ": bracket after the open 'inf' bracket");
    } else if (lower != boundaries.back()) {
      throw IoError(name, "line " + std::to_string(lineno) + ": lower bound " + cells[0] +
                              " does not continue the previous upper bound");
    }
    if (!(upper > lower))
      throw IoError(name, "line " + std::to_string(lineno) + ": boundaries must increase");
    if (!(count >= 0.0) || !std::isfinite(count))
      throw IoError(name, "line " + std::to_string(lineno) + ": count must be nonnegative");
    boundaries.push_back(upper);
    counts.push_back(count * scale);
  }
  if (!header) throw IoError(name, "empty file");
  if (counts.empty()) throw IoError(name, "no brackets");
  if (!std::isinf(boundaries.back())) throw IoError(name, "last bracket must end at 'inf'");
  try {
    return GroupedSample(std::move(boundaries), std::move(counts), name);
  } catch (const std::exception& e) {
    throw IoError(name, e.what());
  }
}

GroupedSample parse_grouped_csv(const fs::path& path, double scale) {
  return parse_grouped_csv_text(read_text(path), path.string(), scale);
}

std::string grouped_csv(const GroupedSample& sample) {
  std::string out = "lower,upper,count\n";
  const auto b = sample.boundaries();
  const auto c = sample.counts();
  for (std::size_t g = 0; g < c.size(); ++g)
    out += format_number(b[g]) + "," + format_number(b[g + 1]) + "," + format_number(c[g]) + "\n";
  return out;
}

void write_grouped_csv(const fs::path& path, const GroupedSample& sample) { write_text(path, grouped_csv(sample)); }

Json to_json(const McmcConfig& c) {
  return Json{{"iterations", c.iterations}, {"burn_in", c.burn_in},       {"step_sizes", c.step_sizes},
              {"adapt", c.adapt},           {"mode_search", c.mode_search}, {"seed", c.seed}};
}

McmcConfig mcmc_from_json(const Json& j) {
  McmcConfig c;
  c.iterations = get_or(j, "iterations", c.iterations);
  c.burn_in = get_or(j, "burn_in", c.burn_in);
  c.step_sizes = get_or(j, "step_sizes", c.step_sizes);
  c.adapt = get_or(j, "adapt", c.adapt);
  c.mode_search = get_or(j, "mode_search", c.mode_search);
  c.seed = get_or(j, "seed", c.seed);
  return c;
}

Json to_json(const Manifest& m) {
  Json nodes = Json::array();
  for (const auto& n : m.nodes) {
    nodes.push_back({{"id", n.id},
                     {"parent", n.parent.empty() ? Json(nullptr) : Json(n.parent)},
                     {"level", level_name(n.level)},
                     {"population", n.population},
                     {"family", family_name(n.family)},
                     {"data", n.data}});
  }
  return Json{{"thetas", m.thetas}, {"phi", m.phi},       {"mcmc", to_json(m.mcmc)},
              {"seed", m.mcmc.seed}, {"scale_counts", m.scale_counts}, {"nodes", nodes}};
}

Manifest manifest_from_json(const Json& j, fs::path base_dir) {
  Manifest m;
  m.base_dir = std::move(base_dir);
  try {
    m.thetas = get_or(j, "thetas", m.thetas);
    m.phi = get_or(j, "phi", m.phi);
    if (j.contains("mcmc")) m.mcmc = mcmc_from_json(j.at("mcmc"));
    m.mcmc.seed = get_or(j, "seed", m.mcmc.seed);
    m.scale_counts = get_or(j, "scale_counts", m.scale_counts);
    for (const auto& n : j.at("nodes")) {
      NodeRecord r;
      r.id = n.at("id").get<std::string>();
      r.parent = get_or<std::string>(n, "parent", "");
      r.level = parse_level(n.at("level").get<std::string>());
      r.population = n.at("population").get<double>();
      r.family = parse_family(n.at("family").get<std::string>());
      r.data = get_or<std::string>(n, "data", "");
      m.nodes.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest read_manifest(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    throw IoError(path.string(), e.what());
  }
  try {
    return manifest_from_json(j, path.parent_path());
  } catch (const ValidationError& e) {
    throw IoError(path.string(), e.what());
  }
}

void write_manifest(const fs::path& path, const Manifest& m) { write_text(path, to_json(m).dump(2) + "\n"); }

HierarchyNode load_hierarchy(const Manifest& m) {
  std::map<std::string, const NodeRecord*> by_id;
  const NodeRecord* root = nullptr;
  for (const auto& r : m.nodes) {
    if (!by_id.emplace(r.id, &r).second) throw NodeError(r.id, r.data, "duplicate node id");
    if (r.parent.empty()) {
      if (root) throw NodeError(r.id, r.data, "second root node (first was '" + root->id + "')");
      root = &r;
    }
  }
  if (!root) throw ValidationError("manifest has no root node");
  std::map<std::string, std::vector<const NodeRecord*>> kids;
  for (const auto& r : m.nodes) {
    if (r.parent.empty()) continue;
    if (!by_id.count(r.parent)) throw NodeError(r.id, r.data, "unknown parent '" + r.parent + "'");
    kids[r.parent].push_back(&r);
  }

  std::size_t built = 0;
  std::function<HierarchyNode(const NodeRecord&, std::size_t)> build = [&](const NodeRecord& r, std::size_t depth) {
    if (depth > 2) throw NodeError(r.id, r.data, "hierarchy deeper than country/region/subregion");
    ++built;
    HierarchyNode node;
    node.id = r.id;
    node.level = r.level;
    node.population = r.population;
    node.family = r.family;
    if (!r.data.empty()) {
      const fs::path p = fs::path(r.data).is_absolute() ? fs::path(r.data) : m.base_dir / r.data;
      node.source = p.string();
      try {
        node.data = parse_grouped_csv(p, m.scale_counts);
      } catch (const std::exception& e) {
        throw NodeError(r.id, node.source, e.what());
      }
    }
    for (const auto* c : kids[r.id]) node.children.push_back(build(*c, depth + 1));
    return node;
  };
  auto tree = build(*root, 0);
  if (built != m.nodes.size()) throw ValidationError("manifest parent links contain a cycle");
  tree.validate();
  return tree;
}

std::vector<NodeRecord> node_records(const HierarchyNode& root,
                                     const std::function<std::string(const HierarchyNode&)>& path_of) {
  std::vector<NodeRecord> out;
  std::function<void(const HierarchyNode&, const std::string&)> walk = [&](const HierarchyNode& n,
                                                                         const std::string& parent) {
    out.push_back({n.id, parent, n.level, n.population, n.family, path_of(n)});
    for (const auto& c : n.children) walk(c, n.id);
  };
  walk(root, "");
  return out;
}

LossWeightPolicy load_policy(const std::string& phi, const fs::path& base_dir) {
  if (phi == "uniform") return LossWeightPolicy::uniform();
  if (phi == "raking") return LossWeightPolicy::raking();
  if (phi.rfind("file:", 0) != 0) throw ValidationError("phi must be uniform, raking or file:PATH");
  fs::path path = phi.substr(5);
  if (path.is_relative()) path = base_dir / path;
  const auto text = read_text(path);
  LossWeightPolicy policy{LossWeightPolicy::Kind::custom, {}};
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (lineno == 1) {
      if (cells.size() != 2 || cells[0] != "id" || cells[1] != "phi") throw IoError(path.string(), "expected header 'id,phi'");
      continue;
    }
    if (cells.size() != 2) throw IoError(path.string(), "line " + std::to_string(lineno) + ": expected 2 fields");
    const double v = parse_number(cells[1], path.string(), lineno);
    if (!(v > 0.0) || !std::isfinite(v))
      throw IoError(path.string(), "line " + std::to_string(lineno) + ": phi must be positive");
    policy.custom[cells[0]] = v;
  }
  return policy;
}

Json to_json(const DecompositionReport& r) {
  Json regions = Json::array();
  for (const auto& re : r.regions) {
    Json subs = Json::array();
    for (const auto& s : re.subregions) {
      subs.push_back({{"id", s.id},
                      {"population_share", s.population_share},
                      {"mean_income", s.mean_income},
                      {"ge_bayes", s.ge_bayes},
                      {"ge_constrained", s.ge_constrained},
                      {"weight", s.weight}});
    }
    const auto bw = bw_ratio(r, re.id);
    regions.push_back({{"id", re.id},
                       {"population_share", re.population_share},
                       {"mean_income", re.mean_income},
                       {"subregion_mean", re.subregion_mean},
                       {"ge_bayes", re.ge_bayes},
                       {"ge_constrained", re.ge_constrained},
                       {"weight", re.weight},
                       {"between_sub", re.between_sub},
                       {"within_sub", re.within_sub},
                       {"residual_sub", re.residual_sub},
                       {"bw_ratio", bw ? Json(*bw) : Json(nullptr)},
                       {"subregions", subs}});
  }
  return Json{{"theta", r.theta},
              {"method", method_name(r.method)},
              {"ge", r.ge},
              {"mean_income", r.mean_income},
              {"between", r.between},
              {"within", r.within},
              {"sum_w_between_sub", r.sum_weighted_between_sub},
              {"sum_w_within_sub", r.sum_weighted_within_sub},
              {"residual_region", r.residual_region},
              {"residual_subregion", r.residual_subregion},
              {"regions", regions},
              {"unreliable", r.unreliable},
              {"negative", r.negative}};
}

DecompositionReport report_from_json(const Json& j) {
  DecompositionReport r;
  try {
    r.theta = j.at("theta").get<double>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.ge = j.at("ge").get<double>();
    r.mean_income = j.at("mean_income").get<double>();
    r.between = j.at("between").get<double>();
    r.within = j.at("within").get<double>();
    r.sum_weighted_between_sub = j.at("sum_w_between_sub").get<double>();
    r.sum_weighted_within_sub = j.at("sum_w_within_sub").get<double>();
    r.residual_region = j.at("residual_region").get<double>();
    r.residual_subregion = j.at("residual_subregion").get<double>();
    r.unreliable = j.at("unreliable").get<std::vector<std::string>>();
    r.negative = j.at("negative").get<std::vector<std::string>>();
    for (const auto& rj : j.at("regions")) {
      RegionEstimate re;
      re.id = rj.at("id").get<std::string>();
      re.population_share = rj.at("population_share").get<double>();
      re.mean_income = rj.at("mean_income").get<double>();
      re.subregion_mean = rj.at("subregion_mean").get<double>();
      re.ge_bayes = rj.at("ge_bayes").get<double>();
      re.ge_constrained = rj.at("ge_constrained").get<double>();
      re.weight = rj.at("weight").get<double>();
      re.between_sub = rj.at("between_sub").get<double>();
      re.within_sub = rj.at("within_sub").get<double>();
      re.residual_sub = rj.at("residual_sub").get<double>();
      for (const auto& sj : rj.at("subregions")) {
        SubregionEstimate se;
        se.id = sj.at("id").get<std::string>();
        se.population_share = sj.at("population_share").get<double>();
        se.mean_income = sj.at("mean_income").get<double>();
        se.ge_bayes = sj.at("ge_bayes").get<double>();
        se.ge_constrained = sj.at("ge_constrained").get<double>();
        se.weight = sj.at("weight").get<double>();
        re.subregions.push_back(std::move(se));
      }
      r.regions.push_back(std::move(re));
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

Json fit_summary(const PosteriorDraws& draws) {
  return Json{{"family", family_name(draws.family())},
              {"posterior_mean", draws.posterior_mean()},
              {"posterior_sd", draws.posterior_sd()},
              {"acceptance_rate", draws.acceptance_rate()},
              {"draws", draws.size()},
              {"seed", draws.seed()}};
}

std::string format_table(const std::vector<DecompositionReport>& reports) {
  constexpr int kLabel = 22;
  constexpr int kCol = 22;
  std::ostringstream out;
  auto label = [&](const std::string& s) { out << std::left << std::setw(kLabel) << s << std::right; };
  label("");
  for (const auto& r : reports) {
    std::ostringstream h;
    h << method_name(r.method) << " theta=" << format_number(r.theta);
    out << std::setw(kCol) << h.str();
  }
  out << "\n";
  auto row = [&](const std::string& name, double DecompositionReport::*field) {
    label(name);
    for (const auto& r : reports) out << std::setw(kCol) << fixed5(r.*field);
    out << "\n";
  };
  row("GE_hat", &DecompositionReport::ge);
  row("B (between regions)", &DecompositionReport::between);
  row("residual-region", &DecompositionReport::residual_region);
  row("sum w_j B_j", &DecompositionReport::sum_weighted_between_sub);
  row("sum w_j W_j", &DecompositionReport::sum_weighted_within_sub);
  row("residual-subregion", &DecompositionReport::residual_subregion);
  return out.str();
}

std::string regions_csv(const std::vector<DecompositionReport>& reports) {
  std::string out =
      "method,theta,id,population_share,mean_income,ge_bayes,ge_constrained,weight,between_sub,within_sub,"
      "bw_ratio,residual_sub\n";
  for (const auto& r : reports) {
    for (const auto& re : r.regions) {
      const auto bw = bw_ratio(r, re.id);
      out += std::string(method_name(r.method)) + "," + format_number(r.theta) + "," + re.id + "," +
             format_number(re.population_share) + "," + format_number(re.mean_income) + "," +
             format_number(re.ge_bayes) + "," + format_number(re.ge_constrained) + "," + format_number(re.weight) +
             "," + format_number(re.between_sub) + "," + format_number(re.within_sub) + "," +
             (bw ? format_number(*bw) : std::string()) + "," + format_number(re.residual_sub) + "\n";
    }
  }
  return out;
}

std::string subregions_csv(const std::vector<DecompositionReport>& reports) {
  std::string out = "method,theta,region,id,population_share,mean_income,ge_bayes,ge_constrained,weight\n";
  for (const auto& r : reports) {
    for (const auto& re : r.regions) {
      for (const auto& s : re.subregions) {
        out += std::string(method_name(r.method)) + "," + format_number(r.theta) + "," + re.id + "," + s.id + "," +
               format_number(s.population_share) + "," + format_number(s.mean_income) + "," +
               format_number(s.ge_bayes) + "," + format_number(s.ge_constrained) + "," + format_number(s.weight) +
               "\n";
      }
    }
  }
  return out;
}

Json to_json(const SyntheticSpec& s) {
  Json regions = Json::array();
  for (const auto& r : s.regions) {
    Json leaves = Json::array();
    for (const auto& l : r.subregions) {
      leaves.push_back({{"id", l.id},
                        {"households", l.households},
                        {"family", family_name(family_of(l.law))},
                        {"params", to_vector(l.law)}});
    }
    regions.push_back({{"id", r.id}, {"subregions", leaves}});
  }
  return Json{{"country", s.country_id},
              {"seed", s.seed},
              {"sampling_fraction", s.sampling_fraction},
              {"boundaries", boundaries_json(s.boundaries)},
              {"fit",
               {{"country", family_name(s.fit.country)},
                {"region", family_name(s.fit.region)},
                {"subregion", family_name(s.fit.subregion)}}},
              {"regions", regions}};
}

SyntheticSpec synthetic_spec_from_json(const Json& j) {
  SyntheticSpec s;
  try {
    s.country_id = get_or<std::string>(j, "country", s.country_id);
    s.seed = get_or(j, "seed", s.seed);
    s.sampling_fraction = get_or(j, "sampling_fraction", s.sampling_fraction);
    if (j.contains("boundaries")) s.boundaries = boundaries_from_json(j.at("boundaries"));
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      if (f.contains("country")) s.fit.country = parse_family(f.at("country").get<std::string>());
      if (f.contains("region")) s.fit.region = parse_family(f.at("region").get<std::string>());
      if (f.contains("subregion")) s.fit.subregion = parse_family(f.at("subregion").get<std::string>());
    }
    for (const auto& rj : j.at("regions")) {
      RegionSpec r;
      r.id = rj.at("id").get<std::string>();
      for (const auto& lj : rj.at("subregions")) {
        LeafSpec l;
        l.id = lj.at("id").get<std::string>();
        l.households = lj.at("households").get<std::size_t>();
        const auto params = lj.at("params").get<std::vector<double>>();
        const auto family = parse_family(lj.at("family").get<std::string>());
        if (params.size() != parameter_count(family))
          throw ValidationError("leaf '" + l.id + "': wrong number of parameters");
        l.law = from_vector(family, params);
        r.subregions.push_back(std::move(l));
      }
      s.regions.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

SyntheticSpec read_synthetic_spec(const fs::path& path) {
  try {
    return synthetic_spec_from_json(Json::parse(read_text(path)));
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(path.string(), e.what());
  }
}

Json to_json(const Comparison& c) {
  Json rows = Json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"method", method_name(r.method)},
                    {"theta", r.theta},
                    {"component", r.component},
                    {"estimate", r.estimate},
                    {"truth", r.truth},
                    {"error", r.error}});
  }
  Json estimates = Json::array();
  for (const auto& e : c.estimates) estimates.push_back(to_json(e));
  Json truth = Json::array();
  for (const auto& t : c.truth) truth.push_back(to_json(t));
  return Json{{"thetas", c.thetas}, {"rows", rows}, {"estimates", estimates}, {"truth", truth}};
}

std::string format_comparison(const Comparison& c) {
  std::ostringstream out;
  for (double theta : c.thetas) {
    out << "theta = " << format_number(theta) << "\n";
    std::vector<std::string> components;
    std::map<std::string, std::map<Method, double>> est;
    std::map<std::string, double> truth;
    for (const auto& r : c.rows) {
      if (r.theta != theta) continue;
      if (!truth.count(r.component)) components.push_back(r.component);
      est[r.component][r.method] = r.estimate;
      truth[r.component] = r.truth;
    }
    out << std::left << std::setw(22) << "" << std::right << std::setw(12) << "truth";
    for (Method m : {Method::proposed, Method::separate, Method::mixture}) out << std::setw(12) << method_name(m);
    out << "\n";
    for (const auto& comp : components) {
      out << std::left << std::setw(22) << comp << std::right << std::setw(12) << fixed5(truth[comp]);
      for (Method m : {Method::proposed, Method::separate, Method::mixture}) {
        const auto it = est[comp].find(m);
        out << std::setw(12) << (it == est[comp].end() ? std::string("-") : fixed5(it->second));
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

Json to_json(const GeSurface& s) {
  Json values = Json::array();
  for (const auto& plane : s.values) {
    Json p = Json::array();
    for (const auto& row : plane) {
      Json r = Json::array();
      for (const auto& v : row) r.push_back(v ? Json(*v) : Json(nullptr));
      p.push_back(r);
    }
    values.push_back(p);
  }
  return Json{{"family", family_name(s.family)}, {"b", s.b},           {"p", s.p},          {"a", s.a},
              {"q", s.q},                          {"thetas", s.thetas}, {"values", values}};
}

std::string surface_csv(const GeSurface& s) {
  std::string out = "theta,a,q,ge\n";
  for (std::size_t t = 0; t < s.thetas.size(); ++t)
    for (std::size_t i = 0; i < s.a.size(); ++i)
      for (std::size_t j = 0; j < s.q.size(); ++j) {
        const auto& v = s.values[t][i][j];
        out += format_number(s.thetas[t]) + "," + format_number(s.a[i]) + "," + format_number(s.q[j]) + "," +
               (v ? format_number(*v) : std::string()) + "\n";
      }
  return out;
}

}  // namespace gedecomp::io
