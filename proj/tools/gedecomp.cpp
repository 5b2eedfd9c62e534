// gedecomp command-line driver.

#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gedecomp/errors.hpp"
#include "gedecomp/inequality.hpp"
#include "gedecomp/io.hpp"
#include "gedecomp/pipeline.hpp"
#include "gedecomp/sim.hpp"

namespace io = gedecomp::io;
using io::Json;

namespace {

struct McmcFlags {
  std::optional<std::size_t> iters;
  std::optional<std::size_t> burnin;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--iters", iters, "MCMC iterations (including burn-in)");
    app->add_option("--burnin", burnin, "burn-in iterations");
    app->add_option("--seed", seed, "master seed");
  }
  void apply(gedecomp::McmcConfig& c) const {
    if (iters) c.iterations = *iters;
    if (burnin) c.burn_in = *burnin;
    if (seed) c.seed = *seed;
  }
};

std::vector<double> default_thetas() { return {-1.0, 0.0, 1.0, 2.0}; }

// lo:hi:n -> n evenly spaced points; a comma list is taken as is.
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::istringstream in(spec);
    std::string lo, hi, n;
    std::getline(in, lo, ':');
    std::getline(in, hi, ':');
    std::getline(in, n);
    const double a = std::stod(lo);
    const double b = std::stod(hi);
    const int k = std::stoi(n);
    if (k < 1) throw gedecomp::ValidationError("grid '" + spec + "' needs at least one point");
    for (int i = 0; i < k; ++i) out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
    return out;
  }
  std::istringstream in(spec);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

void emit(const std::string& out_dir, const std::string& file, const std::string& text) {
  if (out_dir.empty()) {
    std::cout << text;
  } else {
    io::write_text(io::fs::path(out_dir) / file, text);
  }
}

Json error_json(const std::exception& e) {
  Json err{{"message", e.what()}};
  if (const auto* n = dynamic_cast<const gedecomp::NodeError*>(&e)) {
    err["type"] = "node";
    err["node"] = n->node();
    if (!n->file().empty()) err["file"] = n->file();
  } else if (const auto* f = dynamic_cast<const gedecomp::IoError*>(&e)) {
    err["type"] = "io";
    err["file"] = f->path();
  } else if (const auto* m = dynamic_cast<const gedecomp::MomentError*>(&e)) {
    err["type"] = "moment";
    err["theta"] = m->theta();
  } else if (dynamic_cast<const gedecomp::ValidationError*>(&e)) {
    err["type"] = "validation";
  } else if (dynamic_cast<const gedecomp::DomainError*>(&e)) {
    err["type"] = "domain";
  } else if (dynamic_cast<const gedecomp::BenchmarkError*>(&e)) {
    err["type"] = "benchmark";
  } else {
    err["type"] = "internal";
  }
  return Json{{"error", err}};
}

Json finite_decomposition(const std::vector<double>& incomes, const std::vector<std::size_t>& groups,
                          const std::vector<std::size_t>& subgroups, double theta) {
  Json out{{"theta", theta}, {"ge", gedecomp::ge_finite(incomes, theta)}};
  if (groups.empty()) return out;
  const auto d = gedecomp::decompose_finite(incomes, groups, theta);
  out["within"] = d.within;
  out["between"] = d.between;
  Json gs = Json::array();
  for (std::size_t j = 0; j < d.labels.size(); ++j) {
    Json g{{"label", d.labels[j]},        {"population_share", d.population_shares[j]},
           {"income_share", d.income_shares[j]}, {"mean", d.means[j]},
           {"ge", d.ge[j]},                {"weight", d.weights[j]}};
    if (!subgroups.empty()) {
      std::vector<double> x;
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < incomes.size(); ++i)
        if (groups[i] == d.labels[j]) {
          x.push_back(incomes[i]);
          s.push_back(subgroups[i]);
        }
      const auto sub = gedecomp::decompose_finite(x, s, theta);
      g["within_sub"] = sub.within;
      g["between_sub"] = sub.between;
    }
    gs.push_back(std::move(g));
  }
  out["groups"] = gs;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized-entropy inequality from grouped income data: fits, multilevel decomposition, "
               "benchmarking and simulation."};
  app.require_subcommand(1);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit one family to a grouped-count CSV");
  std::string fit_data;
  std::string fit_family = "gb2";
  std::vector<double> fit_thetas;
  double fit_scale = 1.0;
  std::string fit_out;
  McmcFlags fit_mcmc;
  fit_cmd->add_option("--data", fit_data, "grouped CSV (lower,upper,count)")->required();
  fit_cmd->add_option("--family", fit_family, "gb2 | sm | ln");
  fit_cmd->add_option("--theta", fit_thetas, "GE sensitivity (repeatable)");
  fit_cmd->add_option("--scale-counts", fit_scale, "multiply counts by this factor");
  fit_cmd->add_option("--out", fit_out, "output directory (default: stdout)");
  fit_mcmc.add(fit_cmd);

  // decompose
  auto* dec_cmd = app.add_subcommand("decompose", "Exact GE decomposition of household incomes");
  std::string dec_data;
  std::vector<double> dec_thetas;
  std::string dec_out;
  dec_cmd->add_option("--data", dec_data, "CSV with header income[,group[,subgroup]]")->required();
  dec_cmd->add_option("--theta", dec_thetas, "GE sensitivity (repeatable)");
  dec_cmd->add_option("--out", dec_out, "output directory (default: stdout)");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Multilevel decomposition of a hierarchy manifest");
  std::string pipe_manifest;
  std::vector<std::string> pipe_methods;
  std::vector<double> pipe_thetas;
  std::optional<std::string> pipe_phi;
  std::optional<double> pipe_scale;
  std::string pipe_out;
  unsigned pipe_threads = 0;
  McmcFlags pipe_mcmc;
  pipe_cmd->add_option("--manifest", pipe_manifest, "hierarchy manifest (JSON)")->required();
  pipe_cmd->add_option("--method", pipe_methods, "proposed | separate | mixture (repeatable; default proposed)");
  pipe_cmd->add_option("--theta", pipe_thetas, "GE sensitivity (repeatable; overrides the manifest)");
  pipe_cmd->add_option("--phi", pipe_phi, "uniform | raking | file:PATH");
  pipe_cmd->add_option("--scale-counts", pipe_scale, "multiply every count by this factor");
  pipe_cmd->add_option("--threads", pipe_threads, "fit workers (0 = hardware concurrency)");
  pipe_cmd->add_option("--out", pipe_out, "output directory (default: JSON on stdout)");
  pipe_mcmc.add(pipe_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic hierarchy with known truth");
  std::string sim_spec;
  std::vector<double> sim_thetas;
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  sim_cmd->add_option("--spec", sim_spec, "synthetic spec (JSON)")->required();
  sim_cmd->add_option("--theta", sim_thetas, "GE sensitivity for the truth (repeatable)");
  sim_cmd->add_option("--seed", sim_seed, "override the spec seed");
  sim_cmd->add_option("--out", sim_out, "output directory")->required();

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "Compare proposed, separate and mixture estimates with truth");
  std::string cmp_spec;
  std::vector<double> cmp_thetas;
  std::string cmp_phi = "uniform";
  std::string cmp_out;
  McmcFlags cmp_mcmc;
  cmp_cmd->add_option("--spec", cmp_spec, "synthetic spec (JSON)")->required();
  cmp_cmd->add_option("--theta", cmp_thetas, "GE sensitivity (repeatable)");
  cmp_cmd->add_option("--phi", cmp_phi, "uniform | raking | file:PATH");
  cmp_cmd->add_option("--out", cmp_out, "output directory (default: table on stdout)");
  cmp_mcmc.add(cmp_cmd);

  // surface
  auto* surf_cmd = app.add_subcommand("surface", "GE over an (a, q) grid at fixed b");
  std::string surf_family = "sm";
  double surf_b = 1.0;
  double surf_p = 1.0;
  std::string surf_a = "1:5:17";
  std::string surf_q = "1:5:17";
  std::vector<double> surf_thetas;
  std::string surf_out;
  surf_cmd->add_option("--family", surf_family, "sm | gb2");
  surf_cmd->add_option("--b", surf_b, "scale parameter");
  surf_cmd->add_option("--p", surf_p, "GB2 shape p");
  surf_cmd->add_option("--a", surf_a, "a grid: lo:hi:n or a comma list");
  surf_cmd->add_option("--q", surf_q, "q grid: lo:hi:n or a comma list");
  surf_cmd->add_option("--theta", surf_thetas, "GE sensitivity (repeatable)");
  surf_cmd->add_option("--out", surf_out, "output directory (default: CSV on stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*fit_cmd) {
      if (fit_thetas.empty()) fit_thetas = default_thetas();
      const auto data = io::parse_grouped_csv(fit_data, fit_scale);
      gedecomp::McmcConfig config;
      fit_mcmc.apply(config);
      const auto draws = gedecomp::fit(gedecomp::parse_family(fit_family), data, config);
      auto out = io::fit_summary(draws);
      out["data"] = fit_data;
      Json ge = Json::array();
      for (double t : fit_thetas) {
        try {
          const auto s = gedecomp::posterior_ge(draws, t);
          ge.push_back({{"theta", t}, {"mean", s.mean}, {"sd", s.sd}, {"excluded", s.excluded},
                        {"unreliable", s.unreliable()}});
        } catch (const gedecomp::MomentError& e) {
          ge.push_back({{"theta", t}, {"mean", nullptr}, {"error", e.what()}});
        }
      }
      out["ge"] = ge;
      out["mean_income"] = gedecomp::posterior_mean_income(draws).mean;
      emit(fit_out, "fit.json", out.dump(2) + "\n");
    } else if (*dec_cmd) {
      if (dec_thetas.empty()) dec_thetas = default_thetas();
      std::istringstream in(io::read_text(dec_data));
      std::string line;
      std::vector<double> incomes;
      std::vector<std::size_t> groups;
      std::vector<std::size_t> subgroups;
      std::size_t columns = 0;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        if (columns == 0) {
          columns = cells.size();
          if (columns < 1 || columns > 3 || cells[0].rfind("income", 0) != 0)
            throw gedecomp::IoError(dec_data, "expected header income[,group[,subgroup]]");
          continue;
        }
        if (cells.size() != columns)
          throw gedecomp::IoError(dec_data, "line " + std::to_string(lineno) + ": wrong number of fields");
        try {
          incomes.push_back(std::stod(cells[0]));
          if (columns > 1) groups.push_back(std::stoul(cells[1]));
          if (columns > 2) subgroups.push_back(std::stoul(cells[2]));
        } catch (const std::logic_error&) {
          throw gedecomp::IoError(dec_data, "line " + std::to_string(lineno) + ": not a number");
        }
      }
      gedecomp::FinitePopulation pop{incomes, groups, subgroups};
      pop.validate();
      Json out = Json::array();
      for (double t : dec_thetas) out.push_back(finite_decomposition(incomes, groups, subgroups, t));
      emit(dec_out, "decomposition.json", out.dump(2) + "\n");
    } else if (*pipe_cmd) {
      auto manifest = io::read_manifest(pipe_manifest);
      pipe_mcmc.apply(manifest.mcmc);
      if (!pipe_thetas.empty()) manifest.thetas = pipe_thetas;
      if (pipe_phi) manifest.phi = *pipe_phi;
      if (pipe_scale) manifest.scale_counts = *pipe_scale;
      if (pipe_methods.empty()) pipe_methods = {"proposed"};
      std::vector<gedecomp::Method> methods;
      for (const auto& m : pipe_methods) methods.push_back(gedecomp::parse_method(m));

      const auto root = io::load_hierarchy(manifest);
      const auto policy = io::load_policy(manifest.phi, manifest.base_dir);
      const auto fits = gedecomp::fit_hierarchy(root, manifest.mcmc, false, pipe_threads);
      std::vector<gedecomp::DecompositionReport> reports;
      for (auto m : methods)
        for (double t : manifest.thetas) reports.push_back(gedecomp::assemble(m, root, fits, t, policy));

      Json doc{{"manifest", pipe_manifest}, {"seed", manifest.mcmc.seed}, {"phi", manifest.phi},
               {"mcmc", io::to_json(manifest.mcmc)}};
      Json fit_json = Json::object();
      for (const auto& [id, draws] : fits.draws) fit_json[id] = io::fit_summary(draws);
      doc["fits"] = fit_json;
      Json rj = Json::array();
      for (const auto& r : reports) rj.push_back(io::to_json(r));
      doc["reports"] = rj;

      if (pipe_out.empty()) {
        std::cout << doc.dump(2) << "\n";
      } else {
        const io::fs::path dir(pipe_out);
        io::write_text(dir / "report.json", doc.dump(2) + "\n");
        const auto table = io::format_table(reports);
        io::write_text(dir / "report.txt", table);
        io::write_text(dir / "regions.csv", io::regions_csv(reports));
        io::write_text(dir / "subregions.csv", io::subregions_csv(reports));
        std::cout << table;
      }
    } else if (*sim_cmd) {
      if (sim_thetas.empty()) sim_thetas = default_thetas();
      auto spec = io::read_synthetic_spec(sim_spec);
      if (sim_seed) spec.seed = *sim_seed;
      const auto data = gedecomp::generate(spec);
      const io::fs::path dir(sim_out);
      io::Manifest manifest;
      manifest.thetas = sim_thetas;
      manifest.mcmc.seed = spec.seed;
      manifest.nodes = io::node_records(data.hierarchy, [](const gedecomp::HierarchyNode& n) {
        return "data/" + n.id + ".csv";
      });
      std::function<void(const gedecomp::HierarchyNode&)> write = [&](const gedecomp::HierarchyNode& n) {
        io::write_grouped_csv(dir / "data" / (n.id + ".csv"), *n.data);
        for (const auto& c : n.children) write(c);
      };
      write(data.hierarchy);
      io::write_manifest(dir / "manifest.json", manifest);
      Json truth = Json::array();
      for (double t : sim_thetas) truth.push_back(io::to_json(gedecomp::true_decomposition(data, t)));
      io::write_text(dir / "truth.json", truth.dump(2) + "\n");
      std::cout << "wrote " << manifest.nodes.size() << " grouped samples, manifest.json and truth.json to "
                << dir.string() << "\n";
    } else if (*cmp_cmd) {
      if (cmp_thetas.empty()) cmp_thetas = default_thetas();
      const auto spec = io::read_synthetic_spec(cmp_spec);
      gedecomp::McmcConfig config;
      config.seed = spec.seed;
      cmp_mcmc.apply(config);
      const auto policy = io::load_policy(cmp_phi, io::fs::path(cmp_spec).parent_path());
      const auto c = gedecomp::compare_methods(spec, cmp_thetas, config, policy);
      const auto table = io::format_comparison(c);
      if (!cmp_out.empty()) {
        io::write_text(io::fs::path(cmp_out) / "comparison.json", io::to_json(c).dump(2) + "\n");
        io::write_text(io::fs::path(cmp_out) / "comparison.txt", table);
      }
      std::cout << table;
    } else if (*surf_cmd) {
      if (surf_thetas.empty()) surf_thetas = default_thetas();
      const auto s = gedecomp::ge_surface(gedecomp::parse_family(surf_family), surf_b, parse_grid(surf_a),
                                          parse_grid(surf_q), surf_thetas, surf_p);
      if (surf_out.empty()) {
        std::cout << io::surface_csv(s);
      } else {
        io::write_text(io::fs::path(surf_out) / "surface.csv", io::surface_csv(s));
        io::write_text(io::fs::path(surf_out) / "surface.json", io::to_json(s).dump(2) + "\n");
      }
    }
  } catch (const std::exception& e) {
    std::cerr << error_json(e).dump() << "\n";
    return 1;
  }
  return 0;
}
