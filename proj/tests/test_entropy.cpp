#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "netfunc/entropy.hpp"
#include "oracles.hpp"

namespace nf = netfunc;

namespace {

const double log3 = std::log2(3.0);

nf::ProbGraph complete(std::size_t n) {
  auto g = nf::ProbGraph::uniform(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) g.add_edge(a, b);
  return g;
}

nf::ProbGraph cycle(std::size_t n) {
  auto g = nf::ProbGraph::uniform(n);
  for (std::size_t v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n);
  return g;
}

double h_omega(const nf::ProbGraph& g) { return nf::clique_entropy(g).value; }
double h_kappa_numeric(const nf::ProbGraph& g) { return nf::graph_entropy_numeric(g).value; }

/// Recomputes every node value from its children using the leaf and split formulas.
void check_tree(const nf::DecompositionTree& t, const nf::ProbGraph& g) {
  double m = 0.0;
  for (auto v : t.vertices) m += g.prob(v);
  std::vector<double> cond;
  for (auto v : t.vertices) cond.push_back(g.prob(v) / m);
  switch (t.kind) {
    case nf::NodeKind::EmptyLeaf: ASSERT_EQ(t.value, 0.0); break;
    case nf::NodeKind::CompleteLeaf: ASSERT_NEAR(t.value, nf::shannon_entropy(cond), 1e-12); break;
    case nf::NodeKind::IsolatedSplit:
    case nf::NodeKind::CCSplit: {
      double sum = 0.0, mass = 0.0;
      for (const auto& c : t.children) {
        check_tree(c, g);
        mass += c.mass;
        sum += c.mass * c.value - (t.kind == nf::NodeKind::CCSplit ? c.mass * std::log2(c.mass) : 0.0);
      }
      ASSERT_NEAR(mass, 1.0, 1e-12);
      ASSERT_NEAR(t.value, sum, 1e-12);
      break;
    }
    case nf::NodeKind::Opaque: break;
  }
  ASSERT_GE(t.value, 0.0);
  ASSERT_LE(t.value, std::log2(static_cast<double>(t.vertices.size())) + 1e-9);
}

}  // namespace

TEST(Shannon, KnownValues) {
  EXPECT_DOUBLE_EQ(nf::shannon_entropy(std::vector<double>(8, 0.125)), 3.0);
  EXPECT_EQ(nf::shannon_entropy({1.0}), 0.0);
  EXPECT_NEAR(nf::shannon_entropy({0.375, 0.375, 0.125, 0.125}), 3.0 - 0.75 * log3, 1e-15);
  EXPECT_EQ(nf::shannon_entropy({0.5, 0.0, 0.5}), 1.0);
  EXPECT_THROW(nf::shannon_entropy({0.5, 0.6}), nf::error);
  EXPECT_THROW(nf::shannon_entropy({-0.5, 1.5}), nf::error);
}

TEST(Shannon, GroupingIdentity) {
  // H(Z) = H(Z with U merged) + P(U) H(Z | U)
  std::mt19937_64 rng(41);
  for (int t = 0; t < 100; ++t) {
    const auto p = oracle::random_planted(rng, 3, {3});
    const auto& U = p.modules[0];
    const double lhs = nf::shannon_entropy(p.graph.dist());
    const double rhs = nf::shannon_entropy(nf::replace(p.graph, U, "u").dist()) +
                       nf::mass(p.graph, U) * nf::shannon_entropy(nf::project(p.graph, U).dist());
    ASSERT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(Chromatic, EmptyAndComplete) {
  std::mt19937_64 rng(42);
  for (std::size_t n = 1; n <= 7; ++n) {
    auto g = oracle::random_graph(rng, n, 0.0);
    const auto r = nf::chromatic_entropy(g);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.method, nf::EntropyMethod::BruteForce);
    EXPECT_TRUE(nf::is_coloring(g, r.coloring));
    auto k = oracle::random_graph(rng, n, 1.0);
    EXPECT_NEAR(nf::chromatic_entropy(k).value, nf::shannon_entropy(k.dist()), 1e-12);
  }
}

TEST(Chromatic, SingleEdgePlusIsolated) {
  auto g = nf::ProbGraph::uniform(3);
  g.add_edge(0, 1);
  const auto r = nf::chromatic_entropy(g);
  EXPECT_NEAR(r.value, oracle::min_coloring_entropy(g), 1e-12);
  EXPECT_NEAR(r.value, nf::shannon_entropy({2.0 / 3.0, 1.0 / 3.0}), 1e-12);
}

TEST(Chromatic, MatchesColoringEnumeration) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 60; ++t) {
    const auto g = oracle::random_graph(rng, 1 + t % 7);
    const auto r = nf::chromatic_entropy(g);
    ASSERT_NEAR(r.value, oracle::min_coloring_entropy(g), 1e-12);
    ASSERT_TRUE(nf::is_coloring(g, r.coloring));
  }
  EXPECT_THROW(nf::chromatic_entropy(nf::ProbGraph::uniform(13)), nf::error);
}

TEST(GraphEntropy, CompleteAndEmpty) {
  for (std::size_t n = 1; n <= 8; ++n) {
    EXPECT_NEAR(nf::graph_entropy(complete(n)).value, std::log2(static_cast<double>(n)), 1e-12);
    EXPECT_NEAR(h_kappa_numeric(complete(n)), std::log2(static_cast<double>(n)), 1e-6);
    EXPECT_NEAR(nf::graph_entropy(nf::ProbGraph::uniform(n)).value, 0.0, 1e-12);
    EXPECT_NEAR(h_kappa_numeric(nf::ProbGraph::uniform(n)), 0.0, 1e-6);
  }
}

TEST(GraphEntropy, FiveCycleIsLogFractionalChromatic) {
  // vertex-transitive graph under the uniform law: log of the fractional chromatic number 5/2
  const auto r = nf::graph_entropy(cycle(5));
  EXPECT_EQ(r.method, nf::EntropyMethod::NumericFallback);
  ASSERT_TRUE(r.trace.has_value());
  EXPECT_LT(r.trace->gap, 1e-7);
  EXPECT_NEAR(r.value, std::log2(2.5), 1e-6);
}

TEST(GraphEntropy, IterationCap) {
  nf::FrankWolfeConfig cfg;
  cfg.max_iterations = 0;
  try {
    nf::graph_entropy_numeric(cycle(5), cfg);
    FAIL();
  } catch (const nf::error& e) {
    EXPECT_EQ(e.code(), nf::errc::no_convergence);
  }
  EXPECT_THROW(nf::graph_entropy_numeric(cycle(21)), nf::error);
}

TEST(CliqueEntropy, FigureValues) {
  const auto g = oracle::diamond_figure();
  const auto r = nf::clique_entropy(g);
  EXPECT_EQ(r.method, nf::EntropyMethod::ExactDecomposition);
  EXPECT_NEAR(r.value, 3.5 - 0.75 * log3, 1e-12);
  check_tree(*r.tree, g);
  EXPECT_EQ(r.tree->kind, nf::NodeKind::CCSplit);
  EXPECT_EQ(r.tree->children.size(), 4U);

  const auto mid = nf::project(g, {1, 2, 4});
  EXPECT_NEAR(h_omega(mid), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(h_omega(nf::project(g, {3, 5, 6})), 2.0 / 3.0, 1e-15);
}

TEST(CliqueEntropy, FiveCycleFallback) {
  const auto r = nf::clique_entropy(cycle(5));
  EXPECT_EQ(r.method, nf::EntropyMethod::NumericFallback);
  EXPECT_EQ(r.tree->opaque_count(), 1U);
  // self-complementary: H(Z) - log(5/2) = 1 = log omega
  EXPECT_NEAR(r.value, 1.0, 1e-6);
  EXPECT_LE(r.value, 1.0 + 1e-6);
  EXPECT_LE(r.value, nf::graph_entropy(cycle(5)).value + 1e-6);
  EXPECT_LE(nf::graph_entropy(cycle(5)).value, nf::chromatic_entropy(cycle(5)).value + 1e-6);
}

TEST(CliqueEntropy, EmptyAndCompleteExact) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 50; ++t) {
    const auto n = static_cast<std::size_t>(1 + t % 9);
    const auto e = oracle::random_graph(rng, n, 0.0);
    EXPECT_EQ(h_omega(e), 0.0);
    const auto k = oracle::random_graph(rng, n, 1.0);
    EXPECT_NEAR(h_omega(k), nf::shannon_entropy(k.dist()), 1e-12);
  }
}

TEST(CliqueEntropy, ZeroMassVerticesAreDropped) {
  auto g = nf::ProbGraph({"a", "b", "c", "d"}, {0.5, 0.5, 0.0, 0.0});
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  const auto r = nf::clique_entropy(g);
  EXPECT_NEAR(r.value, 1.0, 1e-15);
  EXPECT_EQ(r.tree->vertices, (std::vector<std::size_t>{0, 1}));
}

TEST(CliqueEntropy, TreeInvariantsOnRandomGraphs) {
  std::mt19937_64 rng(45);
  for (int t = 0; t < 100; ++t) {
    const auto g = oracle::random_graph(rng, 1 + t % 10, 0.2 + 0.15 * (t % 5));
    const auto r = nf::clique_entropy(g);
    check_tree(*r.tree, g);
    ASSERT_EQ(r.method == nf::EntropyMethod::ExactDecomposition, r.tree->opaque_count() == 0);
  }
}

TEST(CliqueEntropy, ComplementIdentity) {
  std::mt19937_64 rng(46);
  for (int t = 0; t < 60; ++t) {
    const auto g = oracle::random_graph(rng, 2 + t % 7);
    ASSERT_NEAR(h_kappa_numeric(nf::complement(g)) + h_omega(g), nf::shannon_entropy(g.dist()), 2e-6);
  }
}

TEST(CliqueEntropy, ChainAndCliqueBound) {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 60; ++t) {
    const auto g = oracle::random_graph(rng, 1 + t % 8);
    const double w = h_omega(g);
    const double k = h_kappa_numeric(g);
    const double c = nf::chromatic_entropy(g).value;
    ASSERT_LE(w, k + 1e-5);
    ASSERT_LE(k, c + 1e-5);
    ASSERT_LE(w, std::log2(static_cast<double>(oracle::max_clique(g))) + 1e-9);
  }
}

TEST(CliqueEntropy, SubstitutionOnPlantedModules) {
  std::mt19937_64 rng(48);
  for (int t = 0; t < 60; ++t) {
    // single module
    const auto p = oracle::random_planted(rng, 3, {3});
    const auto& U = p.modules[0];
    const double lhs = h_omega(p.graph);
    const double rhs = h_omega(nf::replace(p.graph, U, "u")) + nf::mass(p.graph, U) * h_omega(nf::project(p.graph, U));
    ASSERT_NEAR(lhs, rhs, 1e-5);

    // several disjoint modules at once
    const auto q = oracle::random_planted(rng, 2, {2, 3, 2});
    auto contracted = q.graph;
    double sum = 0.0;
    for (std::size_t j = 0; j < q.modules.size(); ++j) {
      std::vector<std::size_t> cur;
      for (auto v : q.modules[j]) {
        const auto& ls = contracted.labels();
        cur.push_back(static_cast<std::size_t>(std::find(ls.begin(), ls.end(), q.graph.label(v)) - ls.begin()));
      }
      contracted = nf::replace(contracted, cur, "u" + std::to_string(j));
      sum += nf::mass(q.graph, q.modules[j]) * h_omega(nf::project(q.graph, q.modules[j]));
    }
    ASSERT_NEAR(h_omega(q.graph), h_omega(contracted) + sum, 1e-5);
  }
}

TEST(ProductCheck, KnownCases) {
  const auto k2 = complete(2);
  const auto c = nf::clique_entropy_product_check({k2, k2});
  EXPECT_NEAR(c.product_value, 2.0, 1e-12);
  EXPECT_NEAR(c.sum_value, 2.0, 1e-12);

  std::mt19937_64 rng(49);
  const auto e = oracle::random_graph(rng, 3, 0.0);
  const auto k = oracle::random_graph(rng, 3, 1.0);
  const auto m = nf::clique_entropy_product_check({e, k});
  EXPECT_NEAR(m.product_value, nf::shannon_entropy(k.dist()), 1e-12);
  EXPECT_NEAR(m.discrepancy, 0.0, 1e-12);
}

TEST(ProductCheck, RandomPairsAgree) {
  std::mt19937_64 rng(50);
  for (int t = 0; t < 40; ++t) {
    const auto a = oracle::random_graph(rng, 2 + t % 3);
    const auto b = oracle::random_graph(rng, 2 + (t / 3) % 3);
    ASSERT_LT(nf::clique_entropy_product_check({a, b}).discrepancy, 1e-5);
  }
}

TEST(GraphEntropy, OrProductAdditive) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 30; ++t) {
    const auto a = oracle::random_graph(rng, 2 + t % 3);
    const auto b = oracle::random_graph(rng, 2 + (t / 3) % 3);
    const double prod = h_kappa_numeric(nf::or_product({a, b}));
    ASSERT_NEAR(prod, h_kappa_numeric(a) + h_kappa_numeric(b), 2e-6);
  }
}
