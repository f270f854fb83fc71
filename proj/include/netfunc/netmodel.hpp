#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "netfunc/error.hpp"
#include "netfunc/util.hpp"

namespace netfunc {

struct Edge {
  std::string id;
  std::string tail;
  std::string head;
};

/// The raw triple (N, X_S, f) as read from a network spec file.
///
/// `function` and `distribution` are indexed lexicographically over A^s with the
/// first source most significant.
struct NetworkModel {
  std::uint32_t alphabet = 2;
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::vector<std::string> sources;
  std::string sink;
  std::vector<std::int64_t> function;
  std::vector<double> distribution;
};

/// K_C, I_C and J_C of an edge set.
struct CutAnalysis {
  EdgeSet cut = 0;
  SourceSet upstream = 0;   // K_C
  SourceSet separated = 0;  // I_C
  SourceSet bypassing = 0;  // J_C
  bool is_global = false;

  friend bool operator==(const CutAnalysis&, const CutAnalysis&) = default;
};

/// A strong partition {C_1, ..., C_m} of a cut set together with its index sets.
struct StrongPartition {
  EdgeSet cut = 0;
  std::vector<EdgeSet> blocks;           // sorted by least edge index
  std::vector<SourceSet> block_sources;  // I_l = I_{C_l}
  SourceSet rest = 0;                    // L = I_C minus the union of the I_l
  SourceSet separated = 0;               // I = I_C
  SourceSet bypassing = 0;               // J = J_C

  std::size_t size() const noexcept { return blocks.size(); }
  bool trivial() const noexcept { return blocks.size() == 1; }

  friend bool operator==(const StrongPartition&, const StrongPartition&) = default;
};

/// A model whose invariants have been checked, with reachability precomputed.
class ValidatedModel {
 public:
  const NetworkModel& raw() const noexcept { return raw_; }
  std::uint32_t q() const noexcept { return raw_.alphabet; }
  std::size_t num_sources() const noexcept { return raw_.sources.size(); }
  std::size_t num_edges() const noexcept { return raw_.edges.size(); }
  std::size_t num_nodes() const noexcept { return raw_.nodes.size(); }
  SourceSet all_sources() const noexcept { return (SourceSet{1} << num_sources()) - 1; }
  EdgeSet all_edges() const noexcept {
    return num_edges() == 64 ? ~EdgeSet{0} : (EdgeSet{1} << num_edges()) - 1;
  }

  std::size_t edge_tail(std::size_t e) const noexcept { return tail_[e]; }
  std::size_t edge_head(std::size_t e) const noexcept { return head_[e]; }
  std::size_t sink_node() const noexcept { return sink_; }
  std::size_t source_node(std::size_t i) const noexcept { return source_nodes_[i]; }
  /// Position in S of the node, or -1.
  int source_rank(std::size_t node) const noexcept { return source_rank_[node]; }
  const std::vector<std::size_t>& in_edges(std::size_t node) const noexcept { return in_[node]; }
  const std::vector<std::size_t>& out_edges(std::size_t node) const noexcept { return out_[node]; }
  const std::vector<std::size_t>& topological_nodes() const noexcept { return topo_; }
  bool reaches(std::size_t u, std::size_t v) const noexcept { return reach_[u * num_nodes() + v] != 0; }

  std::size_t edge_index(std::string_view id) const {
    auto it = edge_by_id_.find(std::string(id));
    if (it == edge_by_id_.end()) throw error(errc::unknown_edge_id, "no edge '" + std::string(id) + "'");
    return it->second;
  }

  EdgeSet edge_set(std::span<const std::string> ids) const {
    EdgeSet s = 0;
    for (const auto& id : ids) s |= EdgeSet{1} << edge_index(id);
    return s;
  }

  std::size_t source_index(std::string_view id) const {
    for (std::size_t i = 0; i < num_sources(); ++i)
      if (raw_.sources[i] == id) return i;
    throw error(errc::schema, "no source '" + std::string(id) + "'");
  }

  std::vector<std::string> edge_ids(EdgeSet s) const {
    std::vector<std::string> out;
    for_each_bit(s, [&](std::size_t e) { out.push_back(raw_.edges[e].id); });
    return out;
  }

  std::vector<std::string> source_ids(SourceSet s) const {
    std::vector<std::string> out;
    for_each_bit(s, [&](std::size_t i) { out.push_back(raw_.sources[i]); });
    return out;
  }

  /// K_C: sources with a path to the tail of some edge in C (a source is its own tail).
  SourceSet upstream_sources(EdgeSet cut) const noexcept {
    SourceSet k = 0;
    for_each_bit(cut, [&](std::size_t e) { k |= edge_upstream_[e]; });
    return k;
  }

  /// I_C: sources with no path to the sink once the edges of C are deleted.
  SourceSet separated_sources(EdgeSet cut) const {
    std::vector<char> alive(num_nodes(), 0);
    std::vector<std::size_t> stack{sink_};
    alive[sink_] = 1;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto e : in_[v]) {
        if ((cut >> e) & 1U) continue;
        const auto u = tail_[e];
        if (!alive[u]) {
          alive[u] = 1;
          stack.push_back(u);
        }
      }
    }
    SourceSet sep = 0;
    for (std::size_t i = 0; i < num_sources(); ++i)
      if (!alive[source_nodes_[i]]) sep |= SourceSet{1} << i;
    return sep;
  }

  /// Dense id of f(x_S) for the lexicographic index of x_S.
  std::uint32_t function_id(std::uint64_t x) const noexcept { return function_ids_[x]; }
  const std::vector<std::int64_t>& image() const noexcept { return image_; }
  double probability(std::uint64_t x) const noexcept { return raw_.distribution[x]; }

 private:
  friend ValidatedModel validate(NetworkModel model);

  NetworkModel raw_;
  std::unordered_map<std::string, std::size_t> edge_by_id_;
  std::vector<std::size_t> tail_, head_;
  std::vector<std::size_t> source_nodes_;
  std::vector<int> source_rank_;
  std::size_t sink_ = 0;
  std::vector<std::vector<std::size_t>> in_, out_;
  std::vector<std::size_t> topo_;
  std::vector<char> reach_;
  std::vector<SourceSet> edge_upstream_;
  std::vector<std::uint32_t> function_ids_;
  std::vector<std::int64_t> image_;
};

/// Checks every model invariant. Check order: schema, SourceHasInEdge,
/// SinkHasOutEdge, CycleDetected, UnreachableNode, BadDistribution, ConstantFunction.
inline ValidatedModel validate(NetworkModel model) {
  ValidatedModel vm;
  const auto n = model.nodes.size();
  std::unordered_map<std::string, std::size_t> node_index;
  for (std::size_t i = 0; i < n; ++i)
    if (!node_index.emplace(model.nodes[i], i).second)
      throw error(errc::schema, "duplicate node '" + model.nodes[i] + "'");
  if (model.alphabet < 1) throw error(errc::schema, "alphabet must be positive");
  if (model.edges.size() > 64) throw error(errc::too_large, "more than 64 edges");
  if (model.sources.empty()) throw error(errc::schema, "no sources");
  if (model.sources.size() > 62) throw error(errc::too_large, "more than 62 sources");

  auto node_of = [&](const std::string& id, const char* what) {
    auto it = node_index.find(id);
    if (it == node_index.end()) throw error(errc::schema, std::string(what) + " '" + id + "' is not a node");
    return it->second;
  };

  vm.in_.assign(n, {});
  vm.out_.assign(n, {});
  for (std::size_t e = 0; e < model.edges.size(); ++e) {
    const auto& edge = model.edges[e];
    if (!vm.edge_by_id_.emplace(edge.id, e).second) throw error(errc::schema, "duplicate edge id '" + edge.id + "'");
    const auto t = node_of(edge.tail, "tail");
    const auto h = node_of(edge.head, "head");
    if (t == h) throw error(errc::cycle_detected, "self-loop on edge '" + edge.id + "'");
    vm.tail_.push_back(t);
    vm.head_.push_back(h);
    vm.out_[t].push_back(e);
    vm.in_[h].push_back(e);
  }
  vm.sink_ = node_of(model.sink, "sink");
  vm.source_rank_.assign(n, -1);
  for (std::size_t i = 0; i < model.sources.size(); ++i) {
    const auto v = node_of(model.sources[i], "source");
    if (vm.source_rank_[v] != -1) throw error(errc::schema, "duplicate source '" + model.sources[i] + "'");
    if (v == vm.sink_) throw error(errc::schema, "sink cannot be a source");
    vm.source_rank_[v] = static_cast<int>(i);
    vm.source_nodes_.push_back(v);
  }
  const auto s = model.sources.size();
  const auto domain = checked_pow(model.alphabet, s, std::uint64_t{1} << 24, errc::too_large);
  if (model.function.size() != domain)
    throw error(errc::schema, "function table has " + std::to_string(model.function.size()) + " entries, expected " +
                                  std::to_string(domain));
  if (model.distribution.size() != domain)
    throw error(errc::schema, "distribution has " + std::to_string(model.distribution.size()) +
                                  " entries, expected " + std::to_string(domain));

  for (auto v : vm.source_nodes_)
    if (!vm.in_[v].empty()) throw error(errc::source_has_in_edge, "source '" + model.nodes[v] + "' has an in-edge");
  if (!vm.out_[vm.sink_].empty()) throw error(errc::sink_has_out_edge, "sink '" + model.sink + "' has an out-edge");

  // Kahn's algorithm; ties resolved by node declaration order.
  std::vector<std::size_t> indeg(n, 0);
  for (auto h : vm.head_) ++indeg[h];
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.insert(v);
  while (!ready.empty()) {
    const auto v = *ready.begin();
    ready.erase(ready.begin());
    vm.topo_.push_back(v);
    for (auto e : vm.out_[v])
      if (--indeg[vm.head_[e]] == 0) ready.insert(vm.head_[e]);
  }
  if (vm.topo_.size() != n) {
    for (std::size_t v = 0; v < n; ++v)
      if (indeg[v] != 0) throw error(errc::cycle_detected, "cycle through node '" + model.nodes[v] + "'");
  }

  vm.reach_.assign(n * n, 0);
  for (auto it = vm.topo_.rbegin(); it != vm.topo_.rend(); ++it) {
    const auto u = *it;
    vm.reach_[u * n + u] = 1;
    for (auto e : vm.out_[u]) {
      const auto h = vm.head_[e];
      for (std::size_t w = 0; w < n; ++w) vm.reach_[u * n + w] |= vm.reach_[h * n + w];
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (v != vm.sink_ && !vm.reach_[v * n + vm.sink_])
      throw error(errc::unreachable_node, "node '" + model.nodes[v] + "' has no path to the sink");

  double total = 0.0;
  for (double p : model.distribution) {
    if (!(p > 0.0) || !std::isfinite(p)) throw error(errc::bad_distribution, "probabilities must be strictly positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw error(errc::bad_distribution, "probabilities sum to " + std::to_string(total));

  std::map<std::int64_t, std::uint32_t> ids;
  for (auto v : model.function) ids.emplace(v, 0);
  if (ids.size() < 2) throw error(errc::constant_function, "target function is constant");
  std::uint32_t next = 0;
  for (auto& [value, id] : ids) {
    id = next++;
    vm.image_.push_back(value);
  }
  for (auto v : model.function) vm.function_ids_.push_back(ids.at(v));

  vm.edge_upstream_.assign(model.edges.size(), 0);
  for (std::size_t e = 0; e < model.edges.size(); ++e)
    for (std::size_t i = 0; i < s; ++i)
      if (vm.reach_[vm.source_nodes_[i] * n + vm.tail_[e]]) vm.edge_upstream_[e] |= SourceSet{1} << i;

  vm.raw_ = std::move(model);
  return vm;
}

inline CutAnalysis analyze_cut(const ValidatedModel& model, EdgeSet cut) {
  if ((cut & ~model.all_edges()) != 0) throw error(errc::unknown_edge_id, "edge index out of range");
  CutAnalysis a;
  a.cut = cut;
  a.upstream = model.upstream_sources(cut);
  a.separated = model.separated_sources(cut);
  a.bypassing = a.upstream & ~a.separated;
  a.is_global = a.separated == model.all_sources();
  return a;
}

inline CutAnalysis analyze_cut(const ValidatedModel& model, std::span<const std::string> edge_ids) {
  return analyze_cut(model, model.edge_set(edge_ids));
}

/// Hard ceiling on the edge count for any exhaustive cut search.
inline constexpr std::size_t max_enumerable_edges = 26;

/// All cut sets with at most `max_size` edges, by size and then lexicographically
/// on the sorted edge indices. `max_size` of 0 means |E|.
inline std::vector<CutAnalysis> enumerate_cut_sets(const ValidatedModel& model, std::size_t max_size,
                                                   std::size_t edge_cap = 20) {
  const auto m = model.num_edges();
  if (m > max_enumerable_edges)
    throw error(errc::search_space_exceeded, std::to_string(m) + " edges exceeds the hard limit of 26");
  if (m > edge_cap)
    throw error(errc::search_space_exceeded,
                std::to_string(m) + " edges exceeds the edge cap " + std::to_string(edge_cap));
  if (max_size == 0 || max_size > m) max_size = m;

  std::vector<CutAnalysis> out;
  std::vector<std::size_t> combo;
  for (std::size_t r = 1; r <= max_size; ++r) {
    combo.resize(r);
    std::iota(combo.begin(), combo.end(), 0);
    while (true) {
      EdgeSet c = 0;
      for (auto e : combo) c |= EdgeSet{1} << e;
      auto a = analyze_cut(model, c);
      if (a.separated != 0) out.push_back(a);
      std::size_t i = r;
      while (i > 0 && combo[i - 1] == m - r + i - 1) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < r; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  return out;
}

/// Fills in the index sets of a candidate partition; returns false when it is not strong.
inline bool complete_partition(const ValidatedModel& model, StrongPartition& p) {
  p.separated = model.separated_sources(p.cut);
  p.bypassing = model.upstream_sources(p.cut) & ~p.separated;
  p.block_sources.clear();
  SourceSet covered = 0;
  std::vector<SourceSet> upstream;
  for (auto b : p.blocks) {
    const auto i = model.separated_sources(b);
    if (i == 0) return false;
    p.block_sources.push_back(i);
    upstream.push_back(model.upstream_sources(b));
    covered |= i;
  }
  for (std::size_t i = 0; i < p.blocks.size(); ++i)
    for (std::size_t j = 0; j < p.blocks.size(); ++j)
      if (i != j && (p.block_sources[i] & upstream[j]) != 0) return false;
  p.rest = p.separated & ~covered;
  return true;
}

/// Builds and checks a user-supplied partition of a cut.
inline StrongPartition make_strong_partition(const ValidatedModel& model, std::vector<EdgeSet> blocks) {
  StrongPartition p;
  for (auto b : blocks) {
    if (b == 0) throw error(errc::schema, "empty partition block");
    if ((p.cut & b) != 0) throw error(errc::overlapping_sets, "partition blocks overlap");
    p.cut |= b;
  }
  if (model.separated_sources(p.cut) == 0) throw error(errc::not_a_cut_set, "I_C is empty");
  std::sort(blocks.begin(), blocks.end(), [](EdgeSet a, EdgeSet b) { return std::countr_zero(a) < std::countr_zero(b); });
  p.blocks = std::move(blocks);
  if (!complete_partition(model, p)) throw error(errc::not_a_cut_set, "partition is not a strong partition");
  return p;
}

/// Every strong partition of a cut set, in restricted-growth-string order (the
/// trivial partition first). Blocks are ordered by their least edge index.
inline std::vector<StrongPartition> enumerate_strong_partitions(const ValidatedModel& model, const CutAnalysis& cut,
                                                                std::size_t visit_cap = 5'000'000) {
  if (cut.separated == 0) throw error(errc::not_a_cut_set, "I_C is empty");
  const auto edges = bits_of(cut.cut);
  const auto n = edges.size();
  std::vector<StrongPartition> out;
  std::vector<EdgeSet> blocks;
  std::size_t visits = 0;

  // Condition 2 is monotone in the blocks, so a violating prefix can be pruned.
  auto prefix_ok = [&](const std::vector<EdgeSet>& bs) {
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const auto ii = model.separated_sources(bs[i]);
      for (std::size_t j = 0; j < bs.size(); ++j)
        if (i != j && (ii & model.upstream_sources(bs[j])) != 0) return false;
    }
    return true;
  };

  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (++visits > visit_cap) throw error(errc::search_space_exceeded, "strong-partition search exceeded cap");
    if (pos == n) {
      StrongPartition p;
      p.cut = cut.cut;
      p.blocks = blocks;
      if (complete_partition(model, p)) out.push_back(std::move(p));
      return;
    }
    const EdgeSet bit = EdgeSet{1} << edges[pos];
    for (std::size_t b = 0; b <= blocks.size(); ++b) {
      if (b == blocks.size()) blocks.push_back(bit);
      else blocks[b] |= bit;
      if (prefix_ok(blocks)) self(self, pos + 1);
      if (b == blocks.size() - 1 && blocks[b] == bit) blocks.pop_back();
      else blocks[b] &= ~bit;
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace netfunc
