#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "netfunc/bounds.hpp"
#include "netfunc/chargraph.hpp"
#include "netfunc/codesim.hpp"
#include "netfunc/entropy.hpp"
#include "netfunc/equiv.hpp"
#include "netfunc/netmodel.hpp"
#include "netfunc/pgraph.hpp"

namespace netfunc::io {

using json = nlohmann::json;

/// Rounds to 15 significant digits so reports are stable across platforms.
inline double num(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return std::strtod(buf, nullptr);
}

inline json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::schema, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw error(errc::schema, path + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw error(errc::schema, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw error(errc::schema, std::string("field '") + key + "': " + e.what());
  }
}

// -- models -------------------------------------------------------------------

inline NetworkModel parse_model(const json& j) {
  NetworkModel m;
  m.alphabet = field<std::uint32_t>(j, "alphabet");
  m.nodes = field<std::vector<std::string>>(j, "nodes");
  for (const auto& e : field<json>(j, "edges"))
    m.edges.push_back({field<std::string>(e, "id"), field<std::string>(e, "tail"), field<std::string>(e, "head")});
  m.sources = field<std::vector<std::string>>(j, "sources");
  m.sink = field<std::string>(j, "sink");
  m.function = field<std::vector<std::int64_t>>(j, "function");
  m.distribution = field<std::vector<double>>(j, "distribution");
  return m;
}

inline json to_json(const NetworkModel& m) {
  json edges = json::array();
  for (const auto& e : m.edges) edges.push_back({{"id", e.id}, {"tail", e.tail}, {"head", e.head}});
  return {{"alphabet", m.alphabet}, {"nodes", m.nodes},   {"edges", edges},          {"sources", m.sources},
          {"sink", m.sink},         {"function", m.function}, {"distribution", nums(m.distribution)}};
}

inline ValidatedModel load_model(const std::string& path) { return validate(parse_model(read_json_file(path))); }

/// Partitions given as lists of blocks of edge ids.
inline std::vector<std::vector<EdgeSet>> parse_pairs(const ValidatedModel& model, const json& j) {
  if (!j.is_array()) throw error(errc::schema, "pairs file must hold an array of partitions");
  std::vector<std::vector<EdgeSet>> out;
  for (const auto& p : j) {
    const json& blocks = p.is_object() ? p.at("partition") : p;
    std::vector<EdgeSet> part;
    for (const auto& b : blocks) part.push_back(model.edge_set(b.get<std::vector<std::string>>()));
    out.push_back(std::move(part));
  }
  return out;
}

// -- cuts and partitions ---------------------------------------------------------

inline json to_json(const ValidatedModel& m, const CutAnalysis& c) {
  return {{"cut", m.edge_ids(c.cut)},
          {"K", m.source_ids(c.upstream)},
          {"I", m.source_ids(c.separated)},
          {"J", m.source_ids(c.bypassing)},
          {"global", c.is_global}};
}

inline json to_json(const ValidatedModel& m, const StrongPartition& p) {
  json blocks = json::array();
  json block_sources = json::array();
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    blocks.push_back(m.edge_ids(p.blocks[i]));
    block_sources.push_back(m.source_ids(p.block_sources[i]));
  }
  return {{"cut", m.edge_ids(p.cut)},
          {"blocks", blocks},
          {"I_blocks", block_sources},
          {"L", m.source_ids(p.rest)},
          {"I", m.source_ids(p.separated)},
          {"J", m.source_ids(p.bypassing)}};
}

inline json to_json(const EquivPartition& p) {
  json classes = json::array();
  for (const auto& c : p.classes) {
    json members = json::array();
    for (auto x : c) members.push_back(p.space.label(x));
    classes.push_back(members);
  }
  return {{"k", p.k}, {"a_J", p.a_J}, {"classes", classes}};
}

// -- graphs -------------------------------------------------------------------

inline ProbGraph parse_graph(const json& j) {
  const auto labels = field<std::vector<std::string>>(j, "vertices");
  const auto dist = field<std::vector<double>>(j, "dist");
  ProbGraph g(labels, dist);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!index.emplace(labels[i], i).second) throw error(errc::schema, "duplicate vertex '" + labels[i] + "'");
  for (const auto& e : field<json>(j, "edges")) {
    if (!e.is_array() || e.size() != 2) throw error(errc::schema, "edges must be [u, v] pairs");
    auto u = index.find(e[0].get<std::string>());
    auto v = index.find(e[1].get<std::string>());
    if (u == index.end() || v == index.end()) throw error(errc::schema, "edge names an unknown vertex");
    g.add_edge(u->second, v->second);
  }
  return g;
}

inline json to_json(const ProbGraph& g) {
  json edges = json::array();
  for (auto [u, v] : g.edges()) edges.push_back({g.label(u), g.label(v)});
  return {{"vertices", g.labels()}, {"edges", edges}, {"dist", nums(g.dist())}};
}

inline json to_json(const ProbGraph& g, const DecompositionTree& t) {
  json vs = json::array();
  for (auto v : t.vertices) vs.push_back(g.label(v));
  json j = {{"kind", to_string(t.kind)}, {"vertices", vs}, {"mass", num(t.mass)}, {"value", num(t.value)}};
  if (!t.children.empty()) {
    json c = json::array();
    for (const auto& ch : t.children) c.push_back(to_json(g, ch));
    j["children"] = c;
  }
  return j;
}

inline json to_json(const ProbGraph& g, const EntropyResult& r) {
  json j = {{"value", num(r.value)}, {"method", to_string(r.method)}};
  if (r.tree) j["tree"] = to_json(g, *r.tree);
  if (r.trace)
    j["trace"] = {{"iterations", r.trace->iterations}, {"gap", num(r.trace->gap)}, {"active_atoms", r.trace->active_atoms}};
  if (!r.coloring.empty()) j["coloring"] = r.coloring;
  return j;
}

inline json to_json(const CharGraph& cg) {
  json layers = json::array();
  for (std::size_t v = 0; v < cg.layers.size(); ++v) {
    const auto& c = cg.layers[v];
    layers.push_back({{"vertex", cg.graph.label(v)},
                      {"a_J", c.a_J},
                      {"class", c.cls},
                      {"a_L", c.a_L},
                      {"block_classes", c.block_cls}});
  }
  return {{"graph", to_json(cg.graph)}, {"k", cg.k}, {"layers", layers}};
}

inline json to_json(const LayerReport& r) {
  json j = {{"ok", r.ok},
            {"fibers", r.fibers},
            {"class_blocks", r.class_blocks},
            {"al_blocks", r.al_blocks},
            {"bracket_sets", r.bracket_sets}};
  if (!r.ok) j["failure"] = r.failure;
  return j;
}

// -- bounds -------------------------------------------------------------------

inline json to_json(const ValidatedModel& m, const PairResult& r) {
  json j = {{"cut", m.edge_ids(r.partition.cut)},
            {"partition", to_json(m, r.partition)["blocks"]},
            {"cut_size", r.cut_size},
            {"h_omega", num(r.h_omega)},
            {"method", to_string(r.method)},
            {"basic", num(r.basic)},
            {"n_C", r.n_C},
            {"omega", r.omega},
            {"fixed_length", num(r.fixed_length)}};
  if (r.improved) {
    const auto& im = *r.improved;
    json d = {{"h", num(im.h)},
              {"value", num(im.value)},
              {"dist", nums(im.dist)},
              {"feasible_dim", im.feasible_dim},
              {"best_start", im.best_start},
              {"starts", im.starts},
              {"sweeps", im.sweeps},
              {"evaluations", im.evaluations}};
    if (im.grid) {
      d["grid"] = {{"value", num(im.grid->value)},
                   {"point", nums(im.grid->point)},
                   {"boundary_supremum", im.grid->boundary},
                   {"points", im.grid->points},
                   {"agrees", std::abs(im.grid->value - im.h) <= 1e-3}};
    }
    j["improved"] = d;
  }
  return j;
}

inline json to_json(const ValidatedModel& m, const BoundsReport& r, bool with_improved) {
  json pairs = json::array();
  for (const auto& p : r.pairs) pairs.push_back(to_json(m, p));
  auto witness = [&](const std::optional<std::size_t>& w) -> json {
    if (!w) return nullptr;
    const auto& p = r.pairs[*w];
    return {{"cut", m.edge_ids(p.partition.cut)}, {"partition", to_json(m, p.partition)["blocks"]}};
  };
  json j = {{"basic", num(r.basic)},
            {"fixed_length", num(r.fixed_length)},
            {"pairs", pairs},
            {"witness", {{"basic", witness(r.basic_witness)}, {"fixed_length", witness(r.fixed_witness)}}}};
  if (with_improved) {
    j["improved"] = num(r.improved);
    j["witness"]["improved"] = witness(r.improved_witness);
  }
  return j;
}

// -- codes --------------------------------------------------------------------

inline UDCode parse_code(const json& j) {
  UDCode c;
  c.k = field<std::uint32_t>(j, "k");
  c.encoders = field<std::map<std::string, std::map<std::string, std::string>>>(j, "encoders");
  c.decoder = field<std::map<std::string, std::vector<std::int64_t>>>(j, "decoder");
  return c;
}

inline json to_json(const UDCode& c) { return {{"k", c.k}, {"encoders", c.encoders}, {"decoder", c.decoder}}; }

inline json to_json(const RateReport& r) {
  json edges = json::array();
  for (const auto& e : r.edges)
    edges.push_back({{"id", e.id},
                     {"L", num(e.expected_length)},
                     {"R", num(e.rate)},
                     {"uniquely_decodable", e.uniquely_decodable},
                     {"image_size", e.image_size}});
  json j = {{"k", r.k}, {"edges", edges}, {"R", num(r.rate)}, {"admissible", r.admissible}, {"inputs", r.inputs},
            {"non_ud_edges", r.non_ud_edges}};
  if (r.counterexample) j["counterexample"] = *r.counterexample;
  return j;
}

}  // namespace netfunc::io
