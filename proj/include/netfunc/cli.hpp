#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netfunc/bounds.hpp"
#include "netfunc/chargraph.hpp"
#include "netfunc/codesim.hpp"
#include "netfunc/entropy.hpp"
#include "netfunc/equiv.hpp"
#include "netfunc/fixtures.hpp"
#include "netfunc/io.hpp"
#include "netfunc/netmodel.hpp"

namespace netfunc::cli {

using io::json;

struct RunConfig {
  std::string command;
  std::string input;
  std::string code;
  std::string builtin;
  std::string pairs;
  std::string cut;
  std::string partition;
  std::string dot_dir;
  std::size_t max_cut_size = 0;
  std::size_t edge_cap = 20;
  std::uint64_t seed = 0;
  std::size_t starts = 32;
  double tol = 1e-9;
  std::uint32_t k = 1;
  bool grid_oracle = false;
  bool csv = false;
  bool with_bounds = false;
  bool with_partitions = false;
  bool no_improved = false;

  json to_json() const {
    return {{"command", command}, {"input", input},         {"code", code},
            {"builtin", builtin}, {"pairs", pairs},         {"cut", cut},
            {"partition", partition}, {"max_cut_size", max_cut_size}, {"edge_cap", edge_cap},
            {"seed", seed},       {"starts", starts},       {"tol", tol},
            {"k", k},             {"grid_oracle", grid_oracle}, {"csv", csv},
            {"no_improved", no_improved}};
  }
};

inline int exit_code(errc c) {
  if (is_size_cap(c)) return 3;
  if (c == errc::no_convergence || c == errc::optimizer_failed || c == errc::infeasible_spec) return 1;
  return 2;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

/// "--cut e5,e6 --partition e5|e6"; without a partition the trivial one is used.
inline StrongPartition resolve_partition(const ValidatedModel& model, const RunConfig& cfg) {
  if (cfg.cut.empty() && cfg.partition.empty()) throw error(errc::usage, "--cut or --partition is required");
  std::vector<EdgeSet> blocks;
  if (!cfg.partition.empty()) {
    for (const auto& b : split(cfg.partition, '|')) blocks.push_back(model.edge_set(split(b, ',')));
  } else {
    blocks.push_back(model.edge_set(split(cfg.cut, ',')));
  }
  auto p = make_strong_partition(model, blocks);
  if (!cfg.cut.empty() && p.cut != model.edge_set(split(cfg.cut, ',')))
    throw error(errc::usage, "partition blocks do not cover the cut");
  return p;
}

inline ValidatedModel load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw error(errc::usage, "an input file is required");
  return io::load_model(cfg.input);
}

inline void write_dot(const RunConfig& cfg, const std::string& name, const ProbGraph& g) {
  if (cfg.dot_dir.empty()) return;
  std::filesystem::create_directories(cfg.dot_dir);
  std::ofstream(std::filesystem::path(cfg.dot_dir) / (name + ".dot")) << to_dot(g, name);
}

inline json bounds_result(const ValidatedModel& model, const RunConfig& cfg, std::string* csv) {
  SearchConfig search;
  search.max_cut_size = cfg.max_cut_size;
  search.edge_cap = cfg.edge_cap;
  if (!cfg.pairs.empty()) search.pairs = io::parse_pairs(model, io::read_json_file(cfg.pairs));
  OptimizerConfig opt;
  opt.seed = cfg.seed;
  opt.starts = cfg.starts;
  opt.tol = cfg.tol;
  opt.grid_oracle = cfg.grid_oracle;
  const auto rep = compute_bounds(model, search, opt, !cfg.no_improved);
  if (csv) {
    std::ostringstream os;
    os << "cut,partition,cut_size,h_omega,basic,improved,n_C,omega,fixed_length\n";
    os << std::setprecision(15);
    for (const auto& p : rep.pairs) {
      auto ids = [&](EdgeSet e) {
        std::string t;
        for (const auto& id : model.edge_ids(e)) t += (t.empty() ? "" : " ") + id;
        return t;
      };
      std::string part;
      for (auto b : p.partition.blocks) part += (part.empty() ? "" : "|") + ids(b);
      const std::string cut = ids(p.partition.cut);
      os << cut << ',' << part << ',' << p.cut_size << ',' << p.h_omega << ',' << p.basic << ',';
      if (p.improved) os << p.improved->value;
      os << ',' << p.n_C << ',' << p.omega << ',' << p.fixed_length << '\n';
    }
    *csv = os.str();
  }
  return io::to_json(model, rep, !cfg.no_improved);
}

inline json simulate_result(const ValidatedModel& model, const UDCode& code) {
  return io::to_json(evaluate(model, code));
}

}  // namespace detail

/// Runs one command line; the report goes to `out`, diagnostics to `err`.
inline int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Bounds and code simulation for zero-error network function computation", "netfunc"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);

  auto add_model = [&](CLI::App* sub) { sub->add_option("input", cfg.input, "network spec (JSON)"); };
  auto add_search = [&](CLI::App* sub) {
    sub->add_option("--max-cut-size", cfg.max_cut_size, "largest cut considered (0 = all)");
    sub->add_option("--edge-cap", cfg.edge_cap, "refuse exhaustive search above this many edges (max 26)");
  };
  auto add_partition = [&](CLI::App* sub) {
    sub->add_option("--cut", cfg.cut, "cut edges, comma separated");
    sub->add_option("--partition", cfg.partition, "blocks separated by '|', edges by ','");
    sub->add_option("--k", cfg.k, "block length");
  };
  auto add_optimizer = [&](CLI::App* sub) {
    sub->add_option("--pairs", cfg.pairs, "JSON list of partitions to evaluate");
    sub->add_option("--seed", cfg.seed, "optimizer seed");
    sub->add_option("--starts", cfg.starts, "random starts per pair");
    sub->add_option("--tol", cfg.tol, "sweep gain tolerance");
    sub->add_flag("--grid-oracle", cfg.grid_oracle, "grid cross-check when the feasible dimension is at most 3");
    sub->add_flag("--csv", cfg.csv, "per-pair table as CSV");
    sub->add_flag("--no-improved", cfg.no_improved, "skip the improved bound");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a network spec");
  add_model(validate_cmd);
  auto* cuts_cmd = app.add_subcommand("cuts", "list cut sets");
  add_model(cuts_cmd);
  add_search(cuts_cmd);
  cuts_cmd->add_flag("--partitions", cfg.with_partitions, "include strong partitions");
  auto* classes_cmd = app.add_subcommand("classes", "equivalence classes for a partition");
  add_model(classes_cmd);
  add_partition(classes_cmd);
  auto* chargraph_cmd = app.add_subcommand("chargraph", "characteristic graph for a partition");
  add_model(chargraph_cmd);
  add_partition(chargraph_cmd);
  chargraph_cmd->add_option("--dot", cfg.dot_dir, "write DOT files here");
  auto* entropy_cmd = app.add_subcommand("entropy", "entropies of a probabilistic graph");
  entropy_cmd->add_option("input", cfg.input, "graph (JSON)");
  entropy_cmd->add_option("--dot", cfg.dot_dir, "write DOT files here");
  auto* bounds_cmd = app.add_subcommand("bounds", "lower bounds over all cut/partition pairs");
  add_model(bounds_cmd);
  add_search(bounds_cmd);
  add_optimizer(bounds_cmd);
  auto* simulate_cmd = app.add_subcommand("simulate", "evaluate a code");
  add_model(simulate_cmd);
  simulate_cmd->add_option("--code", cfg.code, "code tables (JSON)");
  simulate_cmd->add_option("--builtin", cfg.builtin, "built-in scheme (diamond)");
  simulate_cmd->add_option("--k", cfg.k, "block length for built-in schemes");
  auto* example_cmd = app.add_subcommand("example", "bundled examples");
  std::string example_name;
  example_cmd->add_option("name", example_name, "example name (diamond)")->required();
  example_cmd->add_flag("--bounds", cfg.with_bounds, "compute the bounds");
  add_search(example_cmd);
  add_optimizer(example_cmd);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "UsageError: " << e.what() << '\n';
    return 2;
  }

  try {
    json result;
    std::string csv;
    auto* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();

    if (sub == validate_cmd) {
      const auto m = detail::load_input(cfg);
      result = {{"valid", true},
                {"nodes", m.num_nodes()},
                {"edges", m.num_edges()},
                {"sources", m.raw().sources},
                {"sink", m.raw().sink},
                {"image", m.image()}};
    } else if (sub == cuts_cmd) {
      const auto m = detail::load_input(cfg);
      json cuts = json::array();
      for (const auto& c : enumerate_cut_sets(m, cfg.max_cut_size, cfg.edge_cap)) {
        json j = io::to_json(m, c);
        if (cfg.with_partitions) {
          json ps = json::array();
          for (const auto& p : enumerate_strong_partitions(m, c)) ps.push_back(io::to_json(m, p)["blocks"]);
          j["partitions"] = ps;
        }
        cuts.push_back(j);
      }
      result = {{"cuts", cuts}};
    } else if (sub == classes_cmd) {
      const auto m = detail::load_input(cfg);
      const auto p = detail::resolve_partition(m, cfg);
      const PartitionEquivalence pe(m, p, cfg.k);
      json fibers = json::array();
      for (std::uint64_t aj = 0; aj < pe.J_space().size(); ++aj) {
        const auto& ic = pe.i_classes(aj);
        json classes = io::to_json(ic);
        json counts = json::array();
        for (std::uint32_t c = 0; c < ic.classes.size(); ++c) {
          json row = json::array();
          for (std::uint64_t al = 0; al < pe.L_space().size(); ++al) row.push_back(pe.count_N(aj, c, al));
          counts.push_back({{"N_by_a_L", row}, {"N", pe.count_N_max(aj, c)}});
        }
        json blocks = json::array();
        for (std::uint64_t al = 0; al < pe.L_space().size(); ++al)
          for (std::size_t l = 0; l < p.size(); ++l) {
            json b = io::to_json(pe.block_classes(l, al, aj));
            b["block"] = l + 1;
            b["a_L"] = pe.L_space().label(al);
            blocks.push_back(b);
          }
        fibers.push_back({{"a_J", pe.J_space().label(aj)}, {"I_classes", classes}, {"counts", counts},
                          {"block_classes", blocks}});
      }
      result = {{"partition", io::to_json(m, p)}, {"fibers", fibers}, {"n_C", pe.n_C()}};
    } else if (sub == chargraph_cmd) {
      const auto m = detail::load_input(cfg);
      const auto p = detail::resolve_partition(m, cfg);
      const auto cg = build_chargraph(m, p, cfg.k);
      result = io::to_json(cg);
      result["partition"] = io::to_json(m, p);
      result["layer_check"] = io::to_json(verify_layers(cg));
      detail::write_dot(cfg, "chargraph", cg.graph);
    } else if (sub == entropy_cmd) {
      if (cfg.input.empty()) throw error(errc::usage, "a graph file is required");
      const auto g = io::parse_graph(io::read_json_file(cfg.input));
      result = {{"shannon", io::num(shannon_entropy(g.dist()))},
                {"clique", io::to_json(g, clique_entropy(g))},
                {"graph", io::to_json(g, graph_entropy(g))}};
      if (g.size() <= max_chromatic_vertices) result["chromatic"] = io::to_json(g, chromatic_entropy(g));
      if (g.size() <= 64) result["clique_number"] = clique_number(g);
      detail::write_dot(cfg, "graph", g);
    } else if (sub == bounds_cmd) {
      const auto m = detail::load_input(cfg);
      result = detail::bounds_result(m, cfg, cfg.csv ? &csv : nullptr);
    } else if (sub == simulate_cmd) {
      if (!cfg.builtin.empty()) {
        if (cfg.builtin != "diamond") throw error(errc::usage, "unknown built-in scheme '" + cfg.builtin + "'");
        const auto m = cfg.input.empty() ? validate(fixtures::diamond()) : detail::load_input(cfg);
        const auto code = huffman_transform(m, diamond_scheme(cfg.k));
        result = detail::simulate_result(m, code);
        result["scheme"] = "diamond";
      } else {
        if (cfg.code.empty()) throw error(errc::usage, "--code or --builtin is required");
        const auto m = detail::load_input(cfg);
        const auto j = io::read_json_file(cfg.code);
        if (j.contains("builtin")) {
          cfg.k = io::field<std::uint32_t>(j, "k");
          if (io::field<std::string>(j, "builtin") != "diamond") throw error(errc::usage, "unknown built-in scheme");
          result = detail::simulate_result(m, huffman_transform(m, diamond_scheme(cfg.k)));
        } else {
          result = detail::simulate_result(m, io::parse_code(j));
        }
      }
    } else if (sub == example_cmd) {
      if (example_name != "diamond") throw error(errc::usage, "unknown example '" + example_name + "'");
      cfg.input = "builtin:diamond";
      const auto m = validate(fixtures::diamond());
      result = {{"model", io::to_json(m.raw())}};
      if (cfg.with_bounds) result["bounds"] = detail::bounds_result(m, cfg, cfg.csv ? &csv : nullptr);
    }

    if (cfg.csv && !csv.empty()) {
      out << csv;
      return 0;
    }
    json report = {{"version", version}, {"config", cfg.to_json()}, {"result", result}};
    out << report.dump(2) << '\n';
    return 0;
  } catch (const error& e) {
    err << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "Error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace netfunc::cli
