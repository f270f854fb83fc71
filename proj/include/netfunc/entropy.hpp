#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "netfunc/error.hpp"
#include "netfunc/pgraph.hpp"
#include "netfunc/util.hpp"

namespace netfunc {

// All entropies are in bits.

inline double shannon_entropy(const std::vector<double>& dist) {
  double total = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw error(errc::bad_dist, "negative or non-finite probability");
    total += p;
  }
  if (dist.empty() || std::abs(total - 1.0) > 1e-10)
    throw error(errc::bad_dist, "probabilities sum to " + std::to_string(total));
  double h = 0.0;
  for (double p : dist) h += neg_xlog2x(p);
  return std::max(h, 0.0);
}

enum class EntropyMethod { ExactDecomposition, NumericFallback, BruteForce };

inline const char* to_string(EntropyMethod m) noexcept {
  switch (m) {
    case EntropyMethod::ExactDecomposition: return "ExactDecomposition";
    case EntropyMethod::NumericFallback: return "NumericFallback";
    case EntropyMethod::BruteForce: return "BruteForce";
  }
  return "Unknown";
}

enum class NodeKind { EmptyLeaf, CompleteLeaf, IsolatedSplit, CCSplit, Opaque };

inline const char* to_string(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::EmptyLeaf: return "EmptyLeaf";
    case NodeKind::CompleteLeaf: return "CompleteLeaf";
    case NodeKind::IsolatedSplit: return "IsolatedSplit";
    case NodeKind::CCSplit: return "CCSplit";
    case NodeKind::Opaque: return "Opaque";
  }
  return "Unknown";
}

/// Recursive autonomous-block structure of a graph. Vertex indices refer to the
/// graph the tree was built from; masses and values are filled by evaluation.
struct DecompositionTree {
  NodeKind kind = NodeKind::EmptyLeaf;
  std::vector<std::size_t> vertices;
  std::vector<DecompositionTree> children;
  double mass = 0.0;   // P(U) relative to the parent
  double value = 0.0;  // clique entropy of the conditional graph

  bool exact() const {
    if (kind == NodeKind::Opaque) return false;
    return std::all_of(children.begin(), children.end(), [](const auto& c) { return c.exact(); });
  }

  std::size_t opaque_count() const {
    std::size_t n = kind == NodeKind::Opaque ? 1 : 0;
    for (const auto& c : children) n += c.opaque_count();
    return n;
  }
};

/// Conditional-gradient diagnostics.
struct OptimizerTrace {
  std::size_t iterations = 0;
  double gap = 0.0;
  std::size_t active_atoms = 0;
};

struct EntropyResult {
  double value = 0.0;
  EntropyMethod method = EntropyMethod::ExactDecomposition;
  std::optional<DecompositionTree> tree;
  std::optional<OptimizerTrace> trace;
  std::vector<std::int64_t> coloring;  // chromatic entropy minimiser
};

namespace detail {

inline double clamp_entropy(double v) { return std::abs(v) < 1e-12 ? 0.0 : v; }

inline std::vector<std::size_t> positive_vertices(const ProbGraph& g) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (g.prob(v) > 0.0) out.push_back(v);
  return out;
}

/// Induced subgraph on U with the given (unnormalised) weights renormalised.
inline ProbGraph induced(const ProbGraph& g, const std::vector<std::size_t>& U, const std::vector<double>& weights) {
  double m = 0.0;
  for (auto v : U) m += weights[v];
  std::vector<std::string> labels;
  std::vector<double> dist;
  for (auto v : U) {
    labels.push_back(g.label(v));
    dist.push_back(weights[v] / m);
  }
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  for (auto& p : dist) p /= total;
  ProbGraph out(std::move(labels), std::move(dist));
  for (std::size_t a = 0; a < U.size(); ++a)
    for (std::size_t b = a + 1; b < U.size(); ++b)
      if (g.adjacent(U[a], U[b])) out.add_edge(a, b);
  return out;
}

}  // namespace detail

// -- chromatic entropy --------------------------------------------------------

inline constexpr std::size_t max_chromatic_vertices = 12;

/// Minimum entropy of c(Z) over colourings c, by exhaustive search over
/// partitions of V into independent sets.
inline EntropyResult chromatic_entropy(const ProbGraph& g) {
  if (g.size() > max_chromatic_vertices) throw error(errc::too_large, "chromatic entropy limited to 12 vertices");
  const auto n = g.size();
  std::vector<std::int64_t> color(n, 0), best_color(n, 0);
  std::vector<std::uint64_t> members;
  std::vector<double> masses;
  double best = std::numeric_limits<double>::infinity();
  auto rec = [&](auto&& self, std::size_t v) -> void {
    if (v == n) {
      double h = 0.0;
      for (double m : masses) h += neg_xlog2x(m);
      if (h < best - 1e-15) {
        best = h;
        best_color = color;
      }
      return;
    }
    const auto row = g.row_mask(v);
    for (std::size_t c = 0; c <= members.size(); ++c) {
      if (c == members.size()) {
        members.push_back(0);
        masses.push_back(0.0);
      } else if ((members[c] & row) != 0) {
        continue;
      }
      members[c] |= std::uint64_t{1} << v;
      masses[c] += g.prob(v);
      color[v] = static_cast<std::int64_t>(c);
      self(self, v + 1);
      members[c] &= ~(std::uint64_t{1} << v);
      masses[c] -= g.prob(v);
      if (members[c] == 0) {
        members.pop_back();
        masses.pop_back();
      }
    }
  };
  rec(rec, 0);
  EntropyResult r;
  r.value = detail::clamp_entropy(best);
  r.method = EntropyMethod::BruteForce;
  r.coloring = best_color;
  return r;
}

// -- graph entropy ------------------------------------------------------------

inline constexpr std::size_t max_numeric_vertices = 20;

struct FrankWolfeConfig {
  double gap_tolerance = 1e-7;  // bits
  std::size_t max_iterations = 100000;
};

/// Minimum of sum_z P(z) log(1/a_z) over the vertex-packing polytope, by pairwise
/// conditional gradient with a maximum-weight independent set oracle.
inline EntropyResult graph_entropy_numeric(const ProbGraph& g, const FrankWolfeConfig& cfg = {}) {
  const auto support = detail::positive_vertices(g);
  if (support.size() > max_numeric_vertices) throw error(errc::too_large, "numeric graph entropy limited to 20 vertices");
  const ProbGraph h = detail::induced(g, support, g.dist());
  const auto n = h.size();
  const auto& p = h.dist();
  const double ln2 = std::log(2.0);

  // Active set of independent sets (bitmasks) with convex weights.
  std::vector<std::uint64_t> atoms;
  std::vector<double> lambda;
  for (std::size_t v = 0; v < n; ++v) {
    atoms.push_back(std::uint64_t{1} << v);
    lambda.push_back(1.0 / static_cast<double>(n));
  }
  std::vector<double> a(n, 1.0 / static_cast<double>(n));

  auto objective = [&](const std::vector<double>& x) {
    double f = 0.0;
    for (std::size_t z = 0; z < n; ++z) f -= p[z] * std::log2(x[z]);
    return f;
  };

  OptimizerTrace trace;
  std::vector<double> w(n);
  for (std::size_t it = 0;; ++it) {
    for (std::size_t z = 0; z < n; ++z) w[z] = p[z] / a[z];
    const auto s = max_weight_independent_set(h, w);
    double ws = 0.0;
    for_each_bit(s, [&](std::size_t z) { ws += w[z]; });
    trace.gap = (ws - 1.0) / ln2;
    trace.iterations = it;
    if (trace.gap < cfg.gap_tolerance) break;
    if (it >= cfg.max_iterations) throw error(errc::no_convergence, "conditional gradient hit the iteration cap");

    // Away atom: the active atom with the smallest weight sum, i.e. the worst under the gradient.
    std::size_t away = 0;
    double away_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      double wv = 0.0;
      for_each_bit(atoms[i], [&](std::size_t z) { wv += w[z]; });
      if (wv < away_val) {
        away_val = wv;
        away = i;
      }
    }
    std::vector<double> d(n, 0.0);
    for_each_bit(s, [&](std::size_t z) { d[z] += 1.0; });
    for_each_bit(atoms[away], [&](std::size_t z) { d[z] -= 1.0; });
    const double gamma_max = lambda[away];

    // Exact line search: bisection on the derivative of the convex restriction.
    auto slope = [&](double gamma) {
      double dv = 0.0;
      for (std::size_t z = 0; z < n; ++z)
        if (d[z] != 0.0) dv -= p[z] * d[z] / (a[z] + gamma * d[z]);
      return dv;
    };
    double lo = 0.0, hi = gamma_max;
    double gamma = gamma_max;
    bool interior_limit = false;
    for (std::size_t z = 0; z < n; ++z)
      if (a[z] + gamma_max * d[z] <= 0.0) interior_limit = true;
    if (interior_limit || slope(gamma_max) > 0.0) {
      for (int b = 0; b < 100; ++b) {
        const double mid = 0.5 * (lo + hi);
        bool ok = true;
        for (std::size_t z = 0; z < n; ++z)
          if (a[z] + mid * d[z] <= 0.0) ok = false;
        if (!ok || slope(mid) > 0.0) hi = mid;
        else lo = mid;
      }
      gamma = lo;
    }
    if (gamma <= 0.0) {
      // Numerically stalled; accept the current point when the objective cannot move.
      trace.iterations = it;
      break;
    }

    auto s_pos = std::find(atoms.begin(), atoms.end(), s);
    if (s_pos == atoms.end()) {
      atoms.push_back(s);
      lambda.push_back(0.0);
      s_pos = atoms.end() - 1;
    }
    const auto si = static_cast<std::size_t>(s_pos - atoms.begin());
    lambda[si] += gamma;
    lambda[away] -= gamma;
    for (std::size_t z = 0; z < n; ++z) a[z] += gamma * d[z];
    if (lambda[away] <= 1e-15) {
      atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(away));
      lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(away));
    }
  }
  trace.active_atoms = atoms.size();
  EntropyResult r;
  r.value = detail::clamp_entropy(objective(a));
  r.method = EntropyMethod::NumericFallback;
  r.trace = trace;
  return r;
}

// -- clique entropy -----------------------------------------------------------

/// Builds the autonomous-block tree of g restricted to its positive-probability vertices.
inline DecompositionTree decompose(const ProbGraph& g) {
  auto rec = [&](auto&& self, std::vector<std::size_t> U) -> DecompositionTree {
    DecompositionTree node;
    node.vertices = U;
    std::size_t edges = 0;
    for (std::size_t a = 0; a < U.size(); ++a)
      for (std::size_t b = a + 1; b < U.size(); ++b)
        if (g.adjacent(U[a], U[b])) ++edges;
    if (edges == 0) {
      node.kind = NodeKind::EmptyLeaf;
      return node;
    }
    if (edges * 2 == U.size() * (U.size() - 1)) {
      node.kind = NodeKind::CompleteLeaf;
      return node;
    }
    const ProbGraph sub = detail::induced(g, U, std::vector<double>(g.size(), 1.0));
    const auto split = autonomous_split(sub);
    if (split.kind == SplitKind::None) {
      node.kind = NodeKind::Opaque;
      return node;
    }
    node.kind = split.kind == SplitKind::Isolated ? NodeKind::IsolatedSplit : NodeKind::CCSplit;
    for (const auto& block : split.blocks) {
      std::vector<std::size_t> child;
      for (auto i : block) child.push_back(U[i]);
      node.children.push_back(self(self, std::move(child)));
    }
    return node;
  };
  return rec(rec, detail::positive_vertices(g));
}

/// Evaluates a tree built by decompose() under an arbitrary distribution on the
/// graph's vertices, filling in masses and values.
inline double evaluate(DecompositionTree& node, const ProbGraph& g, const std::vector<double>& dist,
                       const FrankWolfeConfig& cfg = {}) {
  double m = 0.0;
  for (auto v : node.vertices) m += dist[v];
  if (!(m > 0.0)) {
    node.value = 0.0;
    return 0.0;
  }
  switch (node.kind) {
    case NodeKind::EmptyLeaf: node.value = 0.0; break;
    case NodeKind::CompleteLeaf: {
      double h = 0.0;
      for (auto v : node.vertices) h += neg_xlog2x(dist[v] / m);
      node.value = h;
      break;
    }
    case NodeKind::IsolatedSplit:
    case NodeKind::CCSplit: {
      double h = 0.0;
      for (auto& c : node.children) {
        double cm = 0.0;
        for (auto v : c.vertices) cm += dist[v];
        c.mass = cm / m;
        const double cv = evaluate(c, g, dist, cfg);
        if (c.mass > 0.0) h += c.mass * cv + (node.kind == NodeKind::CCSplit ? -c.mass * std::log2(c.mass) : 0.0);
      }
      node.value = h;
      break;
    }
    case NodeKind::Opaque: {
      if (node.vertices.size() > max_numeric_vertices)
        throw error(errc::too_large, "opaque block exceeds the 20-vertex fallback limit");
      const ProbGraph sub = detail::induced(g, node.vertices, dist);
      const double hz = shannon_entropy(sub.dist());
      node.value = hz - graph_entropy_numeric(complement(sub), cfg).value;
      break;
    }
  }
  node.value = detail::clamp_entropy(node.value);
  return node.value;
}

/// Clique entropy: exact through autonomous splits, with H(Z) - H_kappa(G^c, Z) on opaque blocks.
inline EntropyResult clique_entropy(const ProbGraph& g, const FrankWolfeConfig& cfg = {}) {
  EntropyResult r;
  auto tree = decompose(g);
  tree.mass = 1.0;
  r.value = evaluate(tree, g, g.dist(), cfg);
  r.method = tree.exact() ? EntropyMethod::ExactDecomposition : EntropyMethod::NumericFallback;
  r.tree = std::move(tree);
  return r;
}

/// Graph entropy: exact through H(Z) - H_omega(G^c, Z) when the complement
/// decomposes completely, numeric otherwise.
inline EntropyResult graph_entropy(const ProbGraph& g, const FrankWolfeConfig& cfg = {}) {
  auto tree = decompose(complement(g));
  if (tree.exact()) {
    EntropyResult r;
    tree.mass = 1.0;
    const auto gc = complement(g);
    r.value = detail::clamp_entropy(shannon_entropy(g.dist()) - evaluate(tree, gc, g.dist(), cfg));
    r.method = EntropyMethod::ExactDecomposition;
    r.tree = std::move(tree);
    return r;
  }
  return graph_entropy_numeric(g, cfg);
}

struct ProductCheck {
  double product_value = 0.0;  // H_omega of the AND product
  double sum_value = 0.0;      // sum of the factors' H_omega
  double discrepancy = 0.0;
};

inline ProductCheck clique_entropy_product_check(const std::vector<ProbGraph>& gs, const FrankWolfeConfig& cfg = {}) {
  if (gs.empty()) throw error(errc::empty_list, "product of no graphs");
  ProductCheck c;
  c.product_value = clique_entropy(and_product(gs), cfg).value;
  for (const auto& g : gs) c.sum_value += clique_entropy(g, cfg).value;
  c.discrepancy = std::abs(c.product_value - c.sum_value);
  return c;
}

}  // namespace netfunc
