#include <gtest/gtest.h>

#include <random>

#include "netfunc/chargraph.hpp"
#include "netfunc/entropy.hpp"
#include "netfunc/fixtures.hpp"
#include "oracles.hpp"

namespace nf = netfunc;

namespace {

oracle::Part part_of(const nf::StrongPartition& p) {
  oracle::Part o;
  o.I = oracle::to_set(p.separated);
  o.J = oracle::to_set(p.bypassing);
  o.L = oracle::to_set(p.rest);
  for (auto b : p.block_sources) o.blocks.push_back(oracle::to_set(b));
  return o;
}

/// Adjacency and vertex law of the built graph against the definition, pair by pair.
void expect_matches_definition(const nf::NetworkModel& raw, const nf::CharGraph& cg) {
  const auto op = part_of(cg.partition);
  oracle::Set IJ = op.I;
  IJ.insert(op.J.begin(), op.J.end());
  const auto s = raw.sources.size();
  const auto n = cg.graph.size();
  std::size_t expected_n = 1;
  for (std::size_t i = 0; i < IJ.size() * cg.k; ++i) expected_n *= raw.alphabet;
  ASSERT_EQ(n, expected_n);

  // marginal of the model law on I u J
  std::size_t width = 1;
  for (std::size_t i = 0; i < IJ.size(); ++i) width *= raw.alphabet;
  std::vector<double> one(width, 0.0);
  const auto S = oracle::complement_of(s, {});
  for (std::size_t idx = 0; idx < raw.distribution.size(); ++idx)
    one[oracle::encode(oracle::decode(idx, S, raw.alphabet, 1, s), IJ, raw.alphabet)] += raw.distribution[idx];
  for (std::uint64_t v = 0; v < n; ++v) {
    const auto x = oracle::decode(v, IJ, raw.alphabet, cg.k, s);
    double p = 1.0;
    for (std::uint32_t j = 0; j < cg.k; ++j) {
      oracle::Msg row(s, std::vector<int>(1, -1));
      for (auto i : IJ) row[i][0] = x[i][j];
      p *= one[oracle::encode(row, IJ, raw.alphabet)];
    }
    ASSERT_NEAR(cg.graph.prob(v), p, 1e-12);
    for (std::uint64_t w = v + 1; w < n; ++w)
      ASSERT_EQ(cg.graph.adjacent(v, w),
                oracle::char_edge(raw, cg.k, op, x, oracle::decode(w, IJ, raw.alphabet, cg.k, s)))
          << cg.graph.label(v) << " " << cg.graph.label(w);
  }
}

}  // namespace

namespace {

struct Diamond {
  nf::NetworkModel raw = nf::fixtures::diamond();
  nf::ValidatedModel m = nf::validate(raw);
  std::vector<nf::StrongPartition> ps =
      nf::enumerate_strong_partitions(m, nf::analyze_cut(m, m.edge_set(std::vector<std::string>{"e5", "e6"})));
};

}  // namespace

TEST(Build, DiamondFigure) {
  const Diamond d;
  const auto cg = nf::build_chargraph(d.m, d.ps[1]);
  const auto fig = oracle::diamond_figure();
  ASSERT_EQ(cg.graph.size(), 8U);
  EXPECT_EQ(cg.graph.edges(), fig.edges());
  EXPECT_EQ(cg.graph.edge_count(), 24U);
  EXPECT_EQ(cg.graph.label(1), "(0,0,1)");
  EXPECT_TRUE(cg.graph.adjacent(1, 4));
  EXPECT_FALSE(cg.graph.adjacent(1, 2));
  expect_matches_definition(d.raw, cg);
}

TEST(Build, DiamondTrivialAndPartialCuts) {
  const Diamond d;
  const auto t = nf::build_chargraph(d.m, d.ps[0]);
  EXPECT_EQ(t.graph.edge_count(), 22U);
  expect_matches_definition(d.raw, t);

  const auto c5 = nf::make_strong_partition(d.m, {d.m.edge_set(std::vector<std::string>{"e5"})});
  const auto g5 = nf::build_chargraph(d.m, c5);
  ASSERT_EQ(g5.graph.size(), 4U);
  expect_matches_definition(d.raw, g5);
  for (auto [u, v] : g5.graph.edges()) EXPECT_EQ(g5.layers[u].a_J, g5.layers[v].a_J);
}

TEST(Build, TwoFoldDiamond) {
  const Diamond d;
  for (const auto& p : d.ps) {
    const auto cg = nf::build_chargraph(d.m, p, 2);
    ASSERT_EQ(cg.graph.size(), 64U);
    expect_matches_definition(d.raw, cg);
  }
}

TEST(Build, VertexCap) {
  const Diamond d;
  try {
    nf::build_chargraph(d.m, d.ps[1], 5);
    FAIL();
  } catch (const nf::error& e) {
    EXPECT_EQ(e.code(), nf::errc::too_large);
  }
}

TEST(Build, RandomModelsMatchDefinition) {
  std::mt19937_64 rng(61);
  int built = 0;
  for (int t = 0; t < 40; ++t) {
    const auto raw = oracle::random_model(rng, 1 + t % 3, 8);
    const auto m = nf::validate(raw);
    const auto cuts = nf::enumerate_cut_sets(m, 3);
    if (cuts.empty()) continue;  // every cut has more than three edges
    std::uniform_int_distribution<std::size_t> pick(0, cuts.size() - 1);
    const auto ps = nf::enumerate_strong_partitions(m, cuts[pick(rng)]);
    for (const auto& p : ps) {
      expect_matches_definition(raw, nf::build_chargraph(m, p, 1));
      if (t % 4 == 0) expect_matches_definition(raw, nf::build_chargraph(m, p, 2));
      ++built;
    }
  }
  EXPECT_GE(built, 40);
}

TEST(Layers, DiamondCounts) {
  const Diamond d;
  const auto r = nf::verify_layers(nf::build_chargraph(d.m, d.ps[1]));
  EXPECT_TRUE(r.ok) << r.failure;
  EXPECT_EQ(r.fibers, 1U);
  EXPECT_EQ(r.class_blocks, 4U);
  EXPECT_EQ(r.al_blocks, 6U);
  EXPECT_EQ(r.bracket_sets, 8U);
}

TEST(CliqueNumber, DiamondAndSingleEdge) {
  const Diamond d;
  const auto split = nf::build_chargraph(d.m, d.ps[1]);
  EXPECT_EQ(nf::clique_number_via_decomposition(split), 6U);
  EXPECT_EQ(nf::clique_number(split.graph), 6U);
  EXPECT_EQ(oracle::max_clique(split.graph), 6U);
  const auto triv = nf::build_chargraph(d.m, d.ps[0]);
  EXPECT_EQ(nf::clique_number_via_decomposition(triv), oracle::max_clique(triv.graph));
  EXPECT_EQ(nf::clique_number_via_decomposition(triv), 4U);

  const auto s = nf::validate(nf::fixtures::single_edge());
  const auto cg = nf::build_chargraph(s, nf::make_strong_partition(s, {1}));
  EXPECT_EQ(nf::clique_number_via_decomposition(cg), 2U);
  EXPECT_TRUE(cg.graph.is_complete());
}

TEST(CliqueNumber, RandomModels) {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 60; ++t) {
    const auto raw = oracle::random_model(rng, 1 + t % 3, 8, t % 6 == 0 ? 3 : 2);
    const auto m = nf::validate(raw);
    for (const auto& cut : nf::enumerate_cut_sets(m, 3))
      for (const auto& p : nf::enumerate_strong_partitions(m, cut)) {
        const auto cg = nf::build_chargraph(m, p);
        const auto layers = nf::verify_layers(cg);
        ASSERT_TRUE(layers.ok) << layers.failure;
        const auto w = nf::clique_number_via_decomposition(cg);
        ASSERT_EQ(w, cg.equiv->n_C());
        if (cg.graph.size() <= 16) ASSERT_EQ(w, oracle::max_clique(cg.graph));
        else ASSERT_EQ(w, nf::clique_number(cg.graph));
      }
  }
}

TEST(Sandwich, Diamond) {
  const Diamond d;
  for (const auto& p : d.ps) {
    const auto r = nf::sandwich_check(d.m, p, 2);
    EXPECT_TRUE(r.and_in_k);
    EXPECT_TRUE(r.k_in_or);
    EXPECT_LE(r.and_edges, r.k_edges);
    EXPECT_LE(r.k_edges, r.or_edges);
    EXPECT_FALSE(r.counterexample.has_value());
    const auto one = nf::sandwich_check(d.m, p, 1);
    EXPECT_EQ(one.and_edges, one.k_edges);
    EXPECT_EQ(one.k_edges, one.or_edges);
  }
}

TEST(Sandwich, IdentityAndRandomModels) {
  const auto s = nf::validate(nf::fixtures::single_edge());
  const auto r = nf::sandwich_check(s, nf::make_strong_partition(s, {1}), 3);
  EXPECT_TRUE(r.and_in_k && r.k_in_or);

  std::mt19937_64 rng(63);
  for (int t = 0; t < 20; ++t) {
    const auto m = nf::validate(oracle::random_model(rng, 1 + t % 3, 8));
    for (const auto& cut : nf::enumerate_cut_sets(m, 2))
      for (const auto& p : nf::enumerate_strong_partitions(m, cut)) {
        const auto rep = nf::sandwich_check(m, p, 2);
        ASSERT_TRUE(rep.and_in_k && rep.k_in_or);
      }
  }
}

TEST(Reweight, KeepsEdgesChangesLaw) {
  const Diamond d;
  const auto cg = nf::build_chargraph(d.m, d.ps[1]);
  const std::vector<double> p{0.1, 0.15, 0.1, 0.15, 0.15, 0.1, 0.15, 0.1};
  const auto g = nf::reweight(cg, p);
  EXPECT_EQ(g.edges(), cg.graph.edges());
  EXPECT_EQ(g.dist(), p);
  EXPECT_NEAR(nf::clique_entropy(g).value, std::log2(5.0), 1e-12);
}
