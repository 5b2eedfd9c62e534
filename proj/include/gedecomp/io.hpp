#pragma once

// File formats: grouped-count CSVs, hierarchy manifests (JSON), synthetic
// specs (JSON), decomposition reports (JSON, CSV and a fixed-width table).

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gedecomp/grouped.hpp"
#include "gedecomp/pipeline.hpp"
#include "gedecomp/sim.hpp"

namespace gedecomp::io {

namespace fs = std::filesystem;
using Json = nlohmann::json;

/// Header `lower,upper,count`; one row per bracket in increasing order; the
/// last upper bound is the literal `inf`. Counts are multiplied by scale.
/// Throws IoError naming the file.
GroupedSample parse_grouped_csv(const fs::path& path, double scale = 1.0);
GroupedSample parse_grouped_csv_text(const std::string& text, const std::string& name, double scale = 1.0);
std::string grouped_csv(const GroupedSample& sample);
void write_grouped_csv(const fs::path& path, const GroupedSample& sample);

struct NodeRecord {
  std::string id;
  std::string parent;  ///< empty for the country node
  Level level = Level::country;
  double population = 0.0;
  Family family = Family::lognormal;
  std::string data;  ///< grouped CSV path, relative to the manifest directory
  bool operator==(const NodeRecord&) const = default;
};

struct Manifest {
  std::vector<NodeRecord> nodes;
  std::vector<double> thetas = {-1.0, 0.0, 1.0, 2.0};
  std::string phi = "uniform";  ///< uniform | raking | file:PATH
  McmcConfig mcmc;              ///< mcmc.seed is the master seed
  double scale_counts = 1.0;
  fs::path base_dir;  ///< not serialized; where relative paths resolve
  bool operator==(const Manifest&) const = default;
};

Json to_json(const Manifest& m);
Manifest manifest_from_json(const Json& j, fs::path base_dir = {});
Manifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const Manifest& m);

/// Builds and validates the tree, reading every referenced CSV. Errors are
/// NodeError carrying the node id and file.
HierarchyNode load_hierarchy(const Manifest& m);

/// Flat manifest records for a tree (data paths given by path_of(node)).
std::vector<NodeRecord> node_records(const HierarchyNode& root,
                                     const std::function<std::string(const HierarchyNode&)>& path_of);

/// `file:PATH` reads a CSV with header `id,phi`.
LossWeightPolicy load_policy(const std::string& phi, const fs::path& base_dir = {});

Json to_json(const McmcConfig& c);
McmcConfig mcmc_from_json(const Json& j);

Json to_json(const DecompositionReport& r);
DecompositionReport report_from_json(const Json& j);

/// Fit summary per node: family, posterior mean/sd, acceptance rate, seed.
Json fit_summary(const PosteriorDraws& draws);

/// Fixed-width table: one column per report, rows GE_hat, B (between
/// regions), residual-region, sum w_j B_j, sum w_j W_j, residual-subregion.
/// Five decimals.
std::string format_table(const std::vector<DecompositionReport>& reports);

std::string regions_csv(const std::vector<DecompositionReport>& reports);
std::string subregions_csv(const std::vector<DecompositionReport>& reports);

Json to_json(const SyntheticSpec& s);
SyntheticSpec synthetic_spec_from_json(const Json& j);
SyntheticSpec read_synthetic_spec(const fs::path& path);

Json to_json(const Comparison& c);
std::string format_comparison(const Comparison& c);

Json to_json(const GeSurface& s);
std::string surface_csv(const GeSurface& s);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace gedecomp::io
