#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "netfunc/equiv.hpp"
#include "netfunc/netmodel.hpp"
#include "netfunc/pgraph.hpp"

namespace netfunc {

/// Characteristic graph of a strong partition at block length k.
struct CharGraph {
  ProbGraph graph;
  StrongPartition partition;
  std::uint32_t k = 1;
  MessageSpace vertex_space;  // A^{k x (I u J)}
  std::vector<std::uint64_t> i_index;
  std::vector<LayerCoord> layers;
  std::shared_ptr<const PartitionEquivalence> equiv;
};

/// Marginal of the source distribution on A^{I u J} (k = 1 indexing).
inline std::vector<double> marginal(const ValidatedModel& model, SourceSet T) {
  const MessageSpace full(model.q(), 1, model.num_sources(), model.all_sources());
  const MessageSpace sub(model.q(), 1, model.num_sources(), T);
  std::vector<double> out(sub.size(), 0.0);
  for (std::uint64_t x = 0; x < full.size(); ++x) out[sub.project(x)] += model.probability(x);
  return out;
}

/// Vertex v of the k-fold graph split into its k rows, each an index of A^{1 x T}.
inline std::vector<std::uint64_t> rows_of(const MessageSpace& ks, const MessageSpace& one, std::uint64_t v) {
  std::vector<std::uint64_t> rows(ks.k(), 0);
  const auto width = ks.member_list().size();
  for (std::uint32_t j = 0; j < ks.k(); ++j) {
    std::uint64_t r = 0;
    for (std::size_t m = 0; m < width; ++m) r = r * one.q() + ks.digit(v, m, j);
    rows[j] = r;
  }
  return rows;
}

/// Builds G^k for the partition. Edges follow the two conditions in order:
/// equal x_J, then different I-classes, else equal x_L and some different block class.
/// `base_dist`, when given, replaces the model marginal on A^{I u J} (k = 1 indexing).
inline CharGraph build_chargraph(const ValidatedModel& model, const StrongPartition& partition, std::uint32_t k = 1,
                                 const std::vector<double>* base_dist = nullptr,
                                 std::uint64_t vertex_cap = max_graph_vertices) {
  CharGraph cg;
  cg.partition = partition;
  cg.k = k;
  const SourceSet IJ = partition.separated | partition.bypassing;
  checked_pow(model.q(), std::uint64_t{k} * popcount(IJ), vertex_cap, errc::too_large);
  cg.vertex_space = MessageSpace(model.q(), k, model.num_sources(), IJ);
  const MessageSpace one(model.q(), 1, model.num_sources(), IJ);
  auto pe = std::make_shared<PartitionEquivalence>(model, partition, k);
  cg.equiv = pe;

  std::vector<double> m1 = base_dist ? *base_dist : marginal(model, IJ);
  if (m1.size() != one.size()) throw error(errc::bad_dist, "distribution length differs from |A^{I u J}|");
  const auto n = cg.vertex_space.size();
  std::vector<std::string> labels(n);
  std::vector<double> dist(n);
  cg.i_index.resize(n);
  cg.layers.resize(n);
  for (std::uint64_t v = 0; v < n; ++v) {
    labels[v] = cg.vertex_space.label(v);
    double p = 1.0;
    for (auto r : rows_of(cg.vertex_space, one, v)) p *= m1[r];
    dist[v] = p;
    const auto full = cg.vertex_space.embed(v);
    cg.i_index[v] = pe->I_space().project(full);
    cg.layers[v] = pe->coordinates(cg.i_index[v], pe->J_space().project(full));
  }
  double total = 0.0;
  for (double p : dist) total += p;
  for (auto& p : dist) p /= total;
  cg.graph = ProbGraph(std::move(labels), std::move(dist));

  for (std::uint64_t u = 0; u < n; ++u) {
    const auto& a = cg.layers[u];
    for (std::uint64_t v = u + 1; v < n; ++v) {
      const auto& b = cg.layers[v];
      if (a.a_J != b.a_J) continue;
      bool edge = a.cls != b.cls;
      if (!edge && a.a_L == b.a_L) edge = a.block_cls != b.block_cls;
      if (edge) cg.graph.add_edge(u, v);
    }
  }
  return cg;
}

/// Same graph with a different distribution on A^{I u J} (k = 1 only).
inline ProbGraph reweight(const CharGraph& cg, const std::vector<double>& dist) {
  if (cg.k != 1) throw error(errc::schema, "reweighting requires k = 1");
  return cg.graph.with_dist(dist);
}

struct LayerReport {
  bool ok = true;
  std::string failure;
  std::size_t fibers = 0;
  std::size_t class_blocks = 0;
  std::size_t al_blocks = 0;
  std::size_t bracket_sets = 0;
};

/// Checks the four-layer autonomous structure: x_J fibers isolated, classes
/// completely connected, a_L slices isolated, bracket sets completely connected
/// with empty interiors and each bracket set contained in one class.
inline LayerReport verify_layers(const CharGraph& cg) {
  LayerReport rep;
  const auto& g = cg.graph;
  const auto n = g.size();
  auto fail = [&](const std::string& why, std::size_t u, std::size_t v) {
    rep.ok = false;
    rep.failure = why + " at (" + g.label(u) + ", " + g.label(v) + ")";
  };
  for (std::size_t u = 0; u < n && rep.ok; ++u) {
    const auto& a = cg.layers[u];
    for (std::size_t v = u + 1; v < n && rep.ok; ++v) {
      const auto& b = cg.layers[v];
      const bool e = g.adjacent(u, v);
      if (a.a_J != b.a_J) {
        if (e) fail("edge between x_J fibers", u, v);
      } else if (a.cls != b.cls) {
        if (!e) fail("missing edge between classes", u, v);
      } else if (a.a_L != b.a_L) {
        if (e) fail("edge between a_L slices", u, v);
      } else if (a.block_cls != b.block_cls) {
        if (!e) fail("missing edge between bracket sets", u, v);
      } else if (e) {
        fail("edge inside a bracket set", u, v);
      }
    }
  }

  std::map<std::uint64_t, int> fibers;
  std::map<std::pair<std::uint64_t, std::uint32_t>, int> classes;
  std::map<std::tuple<std::uint64_t, std::uint32_t, std::uint64_t>, int> slices;
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::vector<std::uint32_t>>, std::uint32_t> brackets;
  for (std::size_t v = 0; v < n; ++v) {
    const auto& c = cg.layers[v];
    fibers[c.a_J];
    classes[{c.a_J, c.cls}];
    slices[{c.a_J, c.cls, c.a_L}];
    auto [it, fresh] = brackets.emplace(std::make_tuple(c.a_J, c.a_L, c.block_cls), c.cls);
    if (!fresh && it->second != c.cls && rep.ok) {
      rep.ok = false;
      rep.failure = "bracket set spans two classes at " + g.label(v);
    }
  }
  rep.fibers = fibers.size();
  rep.class_blocks = classes.size();
  rep.al_blocks = slices.size();
  rep.bracket_sets = brackets.size();
  return rep;
}

/// Clique number through the layers: max over x_J of the sum over classes of
/// the largest bracket-set count over a_L. Requires k = 1.
inline std::uint64_t clique_number_via_decomposition(const CharGraph& cg) {
  if (cg.k != 1) throw error(errc::schema, "layer recursion is defined for k = 1");
  std::map<std::tuple<std::uint64_t, std::uint32_t, std::uint64_t>, std::set<std::vector<std::uint32_t>>> slices;
  for (const auto& c : cg.layers) slices[{c.a_J, c.cls, c.a_L}].insert(c.block_cls);
  std::map<std::pair<std::uint64_t, std::uint32_t>, std::uint64_t> per_class;
  for (const auto& [key, sets] : slices) {
    auto& best = per_class[{std::get<0>(key), std::get<1>(key)}];
    best = std::max<std::uint64_t>(best, sets.size());
  }
  std::map<std::uint64_t, std::uint64_t> per_fiber;
  for (const auto& [key, count] : per_class) per_fiber[key.first] += count;
  std::uint64_t omega = 0;
  for (const auto& [aj, total] : per_fiber) omega = std::max(omega, total);
  return omega;
}

struct SandwichReport {
  bool and_in_k = true;
  bool k_in_or = true;
  std::size_t and_edges = 0;
  std::size_t k_edges = 0;
  std::size_t or_edges = 0;
  std::optional<std::pair<std::string, std::string>> counterexample;
};

/// Checks G^{AND k} within G^k within G^{OR k} on the common vertex set.
inline SandwichReport sandwich_check(const ValidatedModel& model, const StrongPartition& partition, std::uint32_t k) {
  if (k == 0 || k > 3) throw error(errc::too_large, "sandwich check supports 1 <= k <= 3");
  const auto g1 = build_chargraph(model, partition, 1);
  const auto gk = build_chargraph(model, partition, k);
  const std::vector<ProbGraph> copies(k, g1.graph);
  const auto g_and = and_product(copies);
  const auto g_or = or_product(copies);

  // Product vertex (v_1, ..., v_k), first coordinate most significant, holds row j in v_j.
  const auto n1 = g1.graph.size();
  const auto n = gk.graph.size();
  const auto& one = g1.vertex_space;
  std::vector<std::uint64_t> to_k(n);
  for (std::uint64_t x = 0; x < n; ++x) {
    std::uint64_t r = x;
    std::vector<std::uint64_t> v(k);
    for (std::uint32_t j = k; j-- > 0;) {
      v[j] = r % n1;
      r /= n1;
    }
    std::uint64_t idx = 0;
    const auto width = one.member_list().size();
    for (std::size_t m = 0; m < width; ++m)
      for (std::uint32_t j = 0; j < k; ++j) idx = idx * model.q() + one.digit(v[j], m, 0);
    to_k[x] = idx;
  }

  SandwichReport rep;
  rep.and_edges = g_and.edge_count();
  rep.k_edges = gk.graph.edge_count();
  rep.or_edges = g_or.edge_count();
  for (std::uint64_t x = 0; x < n; ++x)
    for (std::uint64_t y = x + 1; y < n; ++y) {
      const bool in_k = gk.graph.adjacent(to_k[x], to_k[y]);
      if (g_and.adjacent(x, y) && !in_k) {
        rep.and_in_k = false;
        if (!rep.counterexample) rep.counterexample = {g_and.label(x), g_and.label(y)};
      }
      if (in_k && !g_or.adjacent(x, y)) {
        rep.k_in_or = false;
        if (!rep.counterexample) rep.counterexample = {g_or.label(x), g_or.label(y)};
      }
    }
  return rep;
}

}  // namespace netfunc
