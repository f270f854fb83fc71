#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "netfunc/bounds.hpp"
#include "netfunc/fixtures.hpp"
#include "oracles.hpp"

namespace nf = netfunc;

namespace {

const double log3 = std::log2(3.0);

struct Diamond {
  nf::ValidatedModel m = nf::validate(nf::fixtures::diamond());
  std::vector<nf::StrongPartition> ps =
      nf::enumerate_strong_partitions(m, nf::analyze_cut(m, m.edge_set(std::vector<std::string>{"e5", "e6"})));
};

/// Row rank by plain Gaussian elimination.
std::size_t rank_of(std::vector<std::vector<double>> a) {
  std::size_t r = 0;
  const auto cols = a.empty() ? 0 : a[0].size();
  for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
    std::size_t piv = r;
    for (std::size_t i = r; i < a.size(); ++i)
      if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
    if (std::abs(a[piv][c]) < 1e-12) continue;
    std::swap(a[r], a[piv]);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r) continue;
      const double f = a[i][c] / a[r][c];
      for (std::size_t j = 0; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    ++r;
  }
  return r;
}

double max_marginal_error(const nf::ValidatedModel& m, const nf::StrongPartition& p, const std::vector<double>& x) {
  const auto base = nf::marginal(m, p.separated | p.bypassing);
  const auto spec = nf::equivalent_dist_spec(m, p, base);
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  return (spec.A * v - spec.b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Basic, DiamondValueAndWitness) {
  const Diamond d;
  const auto r = nf::basic_lower_bound(d.m);
  EXPECT_NEAR(r.value, 1.75 - 0.375 * log3, 1e-12);
  ASSERT_TRUE(r.witness.has_value());
  const auto& w = r.pairs[*r.witness];
  EXPECT_EQ(w.partition, d.ps[1]);
  EXPECT_EQ(w.method, nf::EntropyMethod::ExactDecomposition);
  EXPECT_NEAR(w.h_omega, 3.5 - 0.75 * log3, 1e-12);
  for (const auto& p : r.pairs) EXPECT_LE(p.basic, r.value);
}

TEST(Basic, SingleEdge) {
  const auto u = nf::validate(nf::fixtures::single_edge());
  EXPECT_NEAR(nf::basic_lower_bound(u).value, 1.0, 1e-15);
  const auto b = nf::validate(nf::fixtures::single_edge(2, 0.75));
  EXPECT_NEAR(nf::basic_lower_bound(b).value, 2.0 - 0.75 * log3, 1e-12);
}

TEST(Basic, RestrictedPairs) {
  const Diamond d;
  nf::SearchConfig s;
  s.pairs = {{d.m.edge_set(std::vector<std::string>{"e5", "e6"})}};
  const auto r = nf::basic_lower_bound(d.m, s);
  ASSERT_EQ(r.pairs.size(), 1U);
  EXPECT_NEAR(r.value, (3.0 - 0.75 * log3) / 2.0, 1e-12);
}

TEST(Basic, SearchSpaceCap) {
  const Diamond d;
  nf::SearchConfig s;
  s.edge_cap = 5;
  try {
    nf::basic_lower_bound(d.m, s);
    FAIL();
  } catch (const nf::error& e) {
    EXPECT_EQ(e.code(), nf::errc::search_space_exceeded);
  }
}

TEST(Equivalence, DiamondPoints) {
  const Diamond d;
  const auto& p = d.ps[1];
  const std::vector<double> optimum{0.1, 0.15, 0.1, 0.15, 0.15, 0.1, 0.15, 0.1};
  EXPECT_TRUE(nf::is_pc_equivalent(optimum, d.m, p));
  EXPECT_TRUE(nf::is_pc_equivalent(std::vector<double>(8, 0.125), d.m, p));
  // shifts mass inside the (x1, x2) = (0, 0) fiber only: the (x2, x3) marginal breaks
  std::vector<double> bad(8, 0.125);
  bad[0] += 0.05;
  bad[1] -= 0.05;
  EXPECT_FALSE(nf::is_pc_equivalent(bad, d.m, p));
  // moves along a direction that keeps both marginals, until atom 000 vanishes
  std::vector<double> edge = optimum;
  edge[0] = 0.0;
  edge[1] = 0.25;
  edge[4] = 0.25;
  edge[5] = 0.0;
  EXPECT_FALSE(nf::is_pc_equivalent(edge, d.m, p));
  EXPECT_THROW(nf::is_pc_equivalent(std::vector<double>(8, 0.2), d.m, p), nf::error);
  EXPECT_THROW(nf::is_pc_equivalent(std::vector<double>(4, 0.25), d.m, p), nf::error);
}

TEST(Equivalence, FeasibleDimensionFromMarginalEquations) {
  const Diamond d;
  // p_{x1 x2 .} and p_{. x2 x3}, atoms indexed x1 x2 x3
  std::vector<std::vector<double>> rows;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      std::vector<double> r12(8, 0.0), r23(8, 0.0);
      for (int c = 0; c < 2; ++c) {
        r12[a * 4 + b * 2 + c] = 1.0;
        r23[c * 4 + a * 2 + b] = 1.0;
      }
      rows.push_back(r12);
      rows.push_back(r23);
    }
  const auto expected_dim = 8 - rank_of(rows);
  EXPECT_EQ(expected_dim, 2U);
  const auto spec = nf::equivalent_dist_spec(d.m, d.ps[1], std::vector<double>(8, 0.125));
  EXPECT_EQ(static_cast<std::size_t>(nf::null_space(spec.A).cols()), expected_dim);
  // trivial partition pins the whole law
  const auto t = nf::equivalent_dist_spec(d.m, d.ps[0], std::vector<double>(8, 0.125));
  EXPECT_EQ(nf::null_space(t.A).cols(), 0);
}

TEST(Improved, DiamondOptimum) {
  const Diamond d;
  nf::SearchConfig s;
  s.pairs = {d.ps[1].blocks};
  nf::OptimizerConfig o;
  o.grid_oracle = true;
  const auto r = nf::improved_lower_bound(d.m, s, o);
  ASSERT_EQ(r.pairs.size(), 1U);
  const auto& im = *r.pairs[0].improved;
  EXPECT_NEAR(r.value, 0.5 * std::log2(5.0), 1e-4);
  EXPECT_EQ(im.feasible_dim, 2U);
  const std::vector<double> optimum{0.1, 0.15, 0.1, 0.15, 0.15, 0.1, 0.15, 0.1};
  ASSERT_EQ(im.dist.size(), 8U);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(im.dist[i], optimum[i], 1e-3) << i;
  ASSERT_TRUE(im.grid.has_value());
  EXPECT_NEAR(im.grid->value, im.h, 1e-3);
  EXPECT_EQ(im.starts, o.starts);
}

TEST(Improved, FeasibleOutputAndOrdering) {
  const Diamond d;
  const auto r = nf::compute_bounds(d.m, {}, {}, true);
  for (const auto& p : r.pairs) {
    const auto& im = *p.improved;
    double total = 0.0;
    for (double x : im.dist) {
      EXPECT_GT(x, 0.0);
      total += x;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LE(max_marginal_error(d.m, p.partition, im.dist), 1e-10);
    EXPECT_TRUE(nf::is_pc_equivalent(im.dist, d.m, p.partition));
    EXPECT_GE(im.value, p.basic - 1e-12);
    EXPECT_LE(im.value, p.fixed_length + 1e-6);
  }
  EXPECT_NEAR(r.improved, 0.5 * std::log2(5.0), 1e-4);
  EXPECT_EQ(r.pairs[*r.improved_witness].partition, d.ps[1]);
}

TEST(Improved, Deterministic) {
  const Diamond d;
  nf::SearchConfig s;
  s.pairs = {d.ps[1].blocks};
  const auto a = nf::improved_lower_bound(d.m, s);
  const auto b = nf::improved_lower_bound(d.m, s);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.pairs[0].improved->dist, b.pairs[0].improved->dist);
}

TEST(Improved, EqualsBasicWhenNothingCanMove) {
  // single edge: I_1 = I, L and J empty, so the only equivalent law is the base one
  const auto m = nf::validate(nf::fixtures::single_edge(2, 0.75));
  const auto r = nf::improved_lower_bound(m);
  EXPECT_EQ(r.pairs[0].improved->feasible_dim, 0U);
  EXPECT_NEAR(r.value, nf::basic_lower_bound(m).value, 1e-12);
}

TEST(FixedLength, KnownValues) {
  const Diamond d;
  const auto r = nf::fixed_length_bound(d.m);
  EXPECT_NEAR(r.value, 0.5 * (1.0 + log3), 1e-12);
  const auto& w = r.pairs[*r.witness];
  EXPECT_EQ(w.n_C, 6U);
  EXPECT_EQ(w.omega, 6U);
  for (const auto& p : r.pairs) EXPECT_EQ(p.n_C, p.omega);
  EXPECT_NEAR(nf::fixed_length_bound(nf::validate(nf::fixtures::single_edge())).value, 1.0, 1e-15);
}

TEST(Ordering, RandomModels) {
  std::mt19937_64 rng(71);
  nf::OptimizerConfig o;
  o.starts = 8;
  for (int t = 0; t < 10; ++t) {
    const auto m = nf::validate(oracle::random_model(rng, 1 + t % 3, 8));
    nf::SearchConfig s;
    s.max_cut_size = 2;
    const auto r = nf::compute_bounds(m, s, o, true);
    for (const auto& p : r.pairs) {
      ASSERT_LE(p.basic, p.improved->value + 1e-6);
      ASSERT_LE(p.improved->value, p.fixed_length + 1e-6);
      ASSERT_EQ(p.n_C, p.omega);
    }
    ASSERT_LE(r.basic, r.improved + 1e-6);
    ASSERT_LE(r.improved, r.fixed_length + 1e-6);
  }
}
