#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "netfunc/error.hpp"
#include "netfunc/util.hpp"

namespace netfunc {

/// Largest vertex count the product and characteristic-graph builders will produce.
inline constexpr std::size_t max_graph_vertices = std::size_t{1} << 14;

/// A loop-free undirected graph with a probability distribution on its vertices.
class ProbGraph {
 public:
  ProbGraph() = default;

  ProbGraph(std::vector<std::string> labels, std::vector<double> dist)
      : labels_(std::move(labels)), dist_(std::move(dist)) {
    if (labels_.empty()) throw error(errc::schema, "graph needs at least one vertex");
    if (labels_.size() > max_graph_vertices) throw error(errc::too_large, "graph exceeds vertex cap");
    if (dist_.size() != labels_.size()) throw error(errc::bad_dist, "distribution length differs from vertex count");
    double total = 0.0;
    for (double p : dist_) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw error(errc::bad_dist, "negative or non-finite probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw error(errc::bad_dist, "probabilities sum to " + std::to_string(total));
    words_ = (labels_.size() + 63) / 64;
    adj_.assign(labels_.size() * words_, 0);
  }

  /// Uniform distribution over labels 0..n-1.
  static ProbGraph uniform(std::size_t n) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
    return ProbGraph(std::move(labels), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& dist() const noexcept { return dist_; }
  const std::string& label(std::size_t v) const { return labels_.at(v); }
  double prob(std::size_t v) const { return dist_.at(v); }

  void add_edge(std::size_t u, std::size_t v) {
    if (u >= size() || v >= size()) throw error(errc::schema, "vertex index out of range");
    if (u == v) throw error(errc::schema, "self-loop at vertex '" + labels_[u] + "'");
    set_bit(u, v);
    set_bit(v, u);
  }

  bool adjacent(std::size_t u, std::size_t v) const noexcept {
    return (adj_[u * words_ + v / 64] >> (v % 64)) & 1U;
  }

  /// Neighbourhood bitmask; only for graphs with at most 64 vertices.
  std::uint64_t row_mask(std::size_t v) const {
    if (size() > 64) throw error(errc::too_large, "graph has more than 64 vertices");
    return adj_[v];
  }

  std::uint64_t all_mask() const {
    if (size() > 64) throw error(errc::too_large, "graph has more than 64 vertices");
    return size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << size()) - 1;
  }

  std::size_t edge_count() const noexcept {
    std::size_t n = 0;
    for (auto w : adj_) n += popcount(w);
    return n / 2;
  }

  /// Sorted (u, v) pairs with u < v.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t u = 0; u < size(); ++u)
      for (std::size_t v = u + 1; v < size(); ++v)
        if (adjacent(u, v)) out.emplace_back(u, v);
    return out;
  }

  bool is_empty_graph() const noexcept {
    return std::all_of(adj_.begin(), adj_.end(), [](std::uint64_t w) { return w == 0; });
  }

  bool is_complete() const noexcept { return edge_count() * 2 == size() * (size() - 1); }

  /// Replaces the distribution (same length, same normalisation rules).
  ProbGraph with_dist(std::vector<double> dist) const {
    ProbGraph g(labels_, std::move(dist));
    g.adj_ = adj_;
    return g;
  }

  friend bool operator==(const ProbGraph& a, const ProbGraph& b) {
    return a.labels_ == b.labels_ && a.dist_ == b.dist_ && a.adj_ == b.adj_;
  }

 private:
  void set_bit(std::size_t u, std::size_t v) noexcept { adj_[u * words_ + v / 64] |= std::uint64_t{1} << (v % 64); }

  std::vector<std::string> labels_;
  std::vector<double> dist_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> adj_;
};

inline ProbGraph complement(const ProbGraph& g) {
  ProbGraph out(g.labels(), g.dist());
  for (std::size_t u = 0; u < g.size(); ++u)
    for (std::size_t v = u + 1; v < g.size(); ++v)
      if (!g.adjacent(u, v)) out.add_edge(u, v);
  return out;
}

namespace detail {

template <typename Adjacent>
ProbGraph product(const std::vector<ProbGraph>& gs, Adjacent&& rule) {
  if (gs.empty()) throw error(errc::empty_list, "product of no graphs");
  std::size_t n = 1;
  for (const auto& g : gs) {
    if (n > max_graph_vertices / g.size()) throw error(errc::too_large, "product exceeds vertex cap");
    n *= g.size();
  }
  const auto k = gs.size();
  std::vector<std::vector<std::size_t>> coords(n, std::vector<std::size_t>(k));
  std::vector<std::string> labels(n);
  std::vector<double> dist(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t r = x;
    for (std::size_t i = k; i-- > 0;) {
      coords[x][i] = r % gs[i].size();
      r /= gs[i].size();
    }
    double p = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (i != 0) labels[x] += ';';
      labels[x] += gs[i].label(coords[x][i]);
      p *= gs[i].prob(coords[x][i]);
    }
    dist[x] = p;
  }
  // Products of normalised factors can drift by a few ulps.
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  for (auto& p : dist) p /= total;
  ProbGraph out(std::move(labels), std::move(dist));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rule(coords[u], coords[v])) out.add_edge(u, v);
  return out;
}

}  // namespace detail

/// Distinct tuples are adjacent iff every differing coordinate pair is adjacent.
inline ProbGraph and_product(const std::vector<ProbGraph>& gs) {
  return detail::product(gs, [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t i = 0; i < gs.size(); ++i)
      if (a[i] != b[i] && !gs[i].adjacent(a[i], b[i])) return false;
    return true;
  });
}

/// Tuples are adjacent iff some coordinate pair is adjacent.
inline ProbGraph or_product(const std::vector<ProbGraph>& gs) {
  return detail::product(gs, [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t i = 0; i < gs.size(); ++i)
      if (a[i] != b[i] && gs[i].adjacent(a[i], b[i])) return true;
    return false;
  });
}

inline double mass(const ProbGraph& g, const std::vector<std::size_t>& U) {
  double m = 0.0;
  for (auto v : U) m += g.prob(v);
  return m;
}

namespace detail {

inline std::vector<std::size_t> normalized_subset(const ProbGraph& g, std::vector<std::size_t> U) {
  std::sort(U.begin(), U.end());
  U.erase(std::unique(U.begin(), U.end()), U.end());
  if (U.empty()) throw error(errc::zero_mass, "empty vertex subset");
  if (U.back() >= g.size()) throw error(errc::schema, "vertex index out of range");
  return U;
}

}  // namespace detail

/// Induced subgraph on U with the conditional distribution P(z) / P(U).
inline ProbGraph project(const ProbGraph& g, std::vector<std::size_t> U) {
  U = detail::normalized_subset(g, std::move(U));
  const double m = mass(g, U);
  if (!(m > 0.0)) throw error(errc::zero_mass, "projection onto a zero-mass set");
  std::vector<std::string> labels;
  std::vector<double> dist;
  for (auto v : U) {
    labels.push_back(g.label(v));
    dist.push_back(g.prob(v) / m);
  }
  double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  for (auto& p : dist) p /= total;
  ProbGraph out(std::move(labels), std::move(dist));
  for (std::size_t a = 0; a < U.size(); ++a)
    for (std::size_t b = a + 1; b < U.size(); ++b)
      if (g.adjacent(U[a], U[b])) out.add_edge(a, b);
  return out;
}

/// True iff every vertex outside U is adjacent to all of U or to none of it.
inline bool is_autonomous(const ProbGraph& g, const std::vector<std::size_t>& U) {
  std::vector<char> in(g.size(), 0);
  for (auto v : U) in.at(v) = 1;
  for (std::size_t w = 0; w < g.size(); ++w) {
    if (in[w]) continue;
    const bool first = g.adjacent(w, U.front());
    for (auto v : U)
      if (g.adjacent(w, v) != first) return false;
  }
  return true;
}

/// Contracts the autonomous set U into one vertex placed at U's least index.
inline ProbGraph replace(const ProbGraph& g, std::vector<std::size_t> U, const std::string& label) {
  U = detail::normalized_subset(g, std::move(U));
  if (!is_autonomous(g, U)) throw error(errc::not_autonomous, "set is not autonomous");
  const double m = mass(g, U);
  if (!(m > 0.0)) throw error(errc::zero_mass, "replacement of a zero-mass set");
  std::vector<char> in(g.size(), 0);
  for (auto v : U) in[v] = 1;
  std::vector<std::size_t> keep;  // old index per new vertex; U.front() stands for u
  std::vector<std::string> labels;
  std::vector<double> dist;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (in[v] && v != U.front()) continue;
    keep.push_back(v);
    labels.push_back(v == U.front() ? label : g.label(v));
    dist.push_back(v == U.front() ? m : g.prob(v));
  }
  ProbGraph out(std::move(labels), std::move(dist));
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = a + 1; b < keep.size(); ++b)
      if (g.adjacent(keep[a], keep[b])) out.add_edge(a, b);
  return out;
}

enum class SplitKind { Isolated, CompletelyConnected, None };

inline const char* to_string(SplitKind k) noexcept {
  switch (k) {
    case SplitKind::Isolated: return "Isolated";
    case SplitKind::CompletelyConnected: return "CompletelyConnected";
    case SplitKind::None: return "None";
  }
  return "None";
}

struct AutonomousSplit {
  SplitKind kind = SplitKind::None;
  std::vector<std::vector<std::size_t>> blocks;  // sorted, ordered by least vertex
};

/// Connected components of g (complemented when `co` is set), ordered by least vertex.
inline std::vector<std::vector<std::size_t>> components(const ProbGraph& g, bool co = false) {
  const auto n = g.size();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != -1) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<std::size_t> stack{s};
    comp[s] = id;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      out.back().push_back(v);
      for (std::size_t w = 0; w < n; ++w)
        if (comp[w] == -1 && w != v && g.adjacent(v, w) != co) {
          comp[w] = id;
          stack.push_back(w);
        }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

inline AutonomousSplit autonomous_split(const ProbGraph& g) {
  AutonomousSplit s;
  s.blocks = components(g);
  if (s.blocks.size() > 1) {
    s.kind = SplitKind::Isolated;
    return s;
  }
  s.blocks = components(g, true);
  if (s.blocks.size() > 1) {
    s.kind = SplitKind::CompletelyConnected;
    return s;
  }
  s.kind = SplitKind::None;
  s.blocks = {s.blocks.front()};
  return s;
}

namespace detail {

/// Weighted maximum clique by branch and bound with a greedy-colouring bound.
/// Vertices are branched in index order and a candidate replaces the incumbent
/// only when strictly heavier, so results are deterministic.
class WeightedCliqueSearch {
 public:
  WeightedCliqueSearch(const std::vector<std::uint64_t>& rows, const std::vector<double>& w) : rows_(rows), w_(w) {}

  std::uint64_t run(std::uint64_t candidates) {
    best_set_ = 0;
    best_ = -1.0;
    expand(0, 0.0, candidates);
    return best_set_;
  }

  double best() const noexcept { return best_; }

 private:
  double bound(std::uint64_t p) const {
    // Each greedy colour class is independent, so it contributes at most one vertex.
    double total = 0.0;
    while (p != 0) {
      std::uint64_t avail = p;
      double heaviest = 0.0;
      while (avail != 0) {
        const auto v = static_cast<std::size_t>(std::countr_zero(avail));
        heaviest = std::max(heaviest, w_[v]);
        p &= ~(std::uint64_t{1} << v);
        avail &= ~((std::uint64_t{1} << v) | rows_[v]);
      }
      total += heaviest;
    }
    return total;
  }

  void expand(std::uint64_t current, double weight, std::uint64_t p) {
    if (p == 0) {
      if (weight > best_ + 1e-15) {
        best_ = weight;
        best_set_ = current;
      }
      return;
    }
    if (weight + bound(p) <= best_ + 1e-15) return;
    while (p != 0) {
      if (weight + bound(p) <= best_ + 1e-15) return;
      const auto v = static_cast<std::size_t>(std::countr_zero(p));
      const std::uint64_t bit = std::uint64_t{1} << v;
      expand(current | bit, weight + w_[v], p & rows_[v]);
      p &= ~bit;
    }
  }

  const std::vector<std::uint64_t>& rows_;
  const std::vector<double>& w_;
  double best_ = -1.0;
  std::uint64_t best_set_ = 0;
};

inline std::vector<std::uint64_t> rows_of(const ProbGraph& g, bool co) {
  std::vector<std::uint64_t> rows(g.size());
  const auto all = g.all_mask();
  for (std::size_t v = 0; v < g.size(); ++v)
    rows[v] = co ? (~g.row_mask(v) & all & ~(std::uint64_t{1} << v)) : g.row_mask(v);
  return rows;
}

}  // namespace detail

/// Maximum-weight clique as a vertex bitmask (at most 64 vertices).
inline std::uint64_t max_weight_clique(const ProbGraph& g, const std::vector<double>& weights) {
  if (g.size() > 64) throw error(errc::too_large, "exact clique search limited to 64 vertices");
  if (weights.size() != g.size()) throw error(errc::schema, "weight vector length differs from vertex count");
  for (double x : weights)
    if (!(x >= 0.0)) throw error(errc::schema, "weights must be nonnegative");
  const auto rows = detail::rows_of(g, false);
  detail::WeightedCliqueSearch search(rows, weights);
  return search.run(g.all_mask());
}

/// Maximum-weight independent set as a vertex bitmask (at most 64 vertices).
inline std::uint64_t max_weight_independent_set(const ProbGraph& g, const std::vector<double>& weights) {
  if (g.size() > 64) throw error(errc::too_large, "exact independent-set search limited to 64 vertices");
  if (weights.size() != g.size()) throw error(errc::schema, "weight vector length differs from vertex count");
  for (double x : weights)
    if (!(x >= 0.0)) throw error(errc::schema, "weights must be nonnegative");
  const auto rows = detail::rows_of(g, true);
  detail::WeightedCliqueSearch search(rows, weights);
  return search.run(g.all_mask());
}

inline std::size_t clique_number(const ProbGraph& g) {
  return popcount(max_weight_clique(g, std::vector<double>(g.size(), 1.0)));
}

inline bool is_coloring(const ProbGraph& g, const std::vector<std::int64_t>& colors) {
  if (colors.size() != g.size()) throw error(errc::schema, "colouring length differs from vertex count");
  for (std::size_t u = 0; u < g.size(); ++u)
    for (std::size_t v = u + 1; v < g.size(); ++v)
      if (g.adjacent(u, v) && colors[u] == colors[v]) return false;
  return true;
}

inline std::string to_dot(const ProbGraph& g, const std::string& name = "G") {
  std::ostringstream os;
  os << "graph " << name << " {\n";
  for (std::size_t v = 0; v < g.size(); ++v) os << "  n" << v << " [label=\"" << g.label(v) << "\"];\n";
  for (auto [u, v] : g.edges()) os << "  n" << u << " -- n" << v << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace netfunc
