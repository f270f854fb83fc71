#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "netfunc/chargraph.hpp"
#include "netfunc/entropy.hpp"
#include "netfunc/equiv.hpp"
#include "netfunc/netmodel.hpp"

namespace netfunc {

struct SearchConfig {
  std::size_t max_cut_size = 0;  // 0: every size
  std::size_t edge_cap = 20;
  /// When nonempty, only these partitions (blocks as edge sets) are evaluated.
  std::vector<std::vector<EdgeSet>> pairs;
};

struct OptimizerConfig {
  std::uint64_t seed = 0;
  std::size_t starts = 32;
  double tol = 1e-9;
  bool grid_oracle = false;
  std::size_t grid_steps = 80;
  double floor = 1e-9;
  std::size_t max_sweeps = 2000;
  std::size_t max_atoms = 1024;
};

enum class BoundKind { Basic, Improved, FixedLength };

inline const char* to_string(BoundKind k) noexcept {
  switch (k) {
    case BoundKind::Basic: return "basic";
    case BoundKind::Improved: return "improved";
    case BoundKind::FixedLength: return "fixed_length";
  }
  return "unknown";
}

struct GridResult {
  double value = 0.0;  // clique entropy, not divided by |C|
  std::vector<double> point;
  bool boundary = false;
  std::size_t points = 0;
};

struct ImprovedResult {
  double h = 0.0;      // best clique entropy found
  double value = 0.0;  // h / |C|
  std::vector<double> dist;
  std::size_t feasible_dim = 0;
  std::size_t best_start = 0;  // 0 is the base point
  std::size_t starts = 0;
  std::size_t sweeps = 0;
  std::size_t evaluations = 0;
  std::optional<GridResult> grid;
};

struct PairResult {
  CutAnalysis cut;
  StrongPartition partition;
  std::size_t cut_size = 0;
  double h_omega = 0.0;
  EntropyMethod method = EntropyMethod::ExactDecomposition;
  double basic = 0.0;
  std::uint64_t n_C = 0;
  std::uint64_t omega = 0;
  double fixed_length = 0.0;
  std::optional<ImprovedResult> improved;
};

struct BoundsReport {
  std::vector<PairResult> pairs;
  double basic = 0.0;
  double improved = 0.0;
  double fixed_length = 0.0;
  std::optional<std::size_t> basic_witness;
  std::optional<std::size_t> improved_witness;
  std::optional<std::size_t> fixed_witness;
};

/// One bound with its witness, for callers that want a single kind.
struct BoundReport {
  BoundKind kind = BoundKind::Basic;
  double value = 0.0;
  std::optional<std::size_t> witness;
  std::vector<PairResult> pairs;
};

// -- P_C-equivalent distributions ---------------------------------------------

/// Linear constraints A p = b fixing every (I_l u L u J)-marginal of p on A^{I u J}.
struct EquivalentDistSpec {
  std::vector<double> base;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

inline EquivalentDistSpec equivalent_dist_spec(const ValidatedModel& model, const StrongPartition& partition,
                                               const std::vector<double>& base) {
  const auto s = model.num_sources();
  const SourceSet IJ = partition.separated | partition.bypassing;
  const MessageSpace one(model.q(), 1, s, IJ);
  if (base.size() != one.size()) throw error(errc::bad_dist, "distribution length differs from |A^{I u J}|");
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (auto block : partition.block_sources) {
    const MessageSpace T(model.q(), 1, s, block | partition.rest | partition.bypassing);
    const auto offset = rows.size();
    rows.resize(offset + T.size(), std::vector<double>(one.size(), 0.0));
    rhs.resize(offset + T.size(), 0.0);
    for (std::uint64_t x = 0; x < one.size(); ++x) {
      const auto t = T.project(one.embed(x));
      rows[offset + t][x] = 1.0;
      rhs[offset + t] += base[x];
    }
  }
  EquivalentDistSpec spec;
  spec.base = base;
  spec.A.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(one.size()));
  spec.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < one.size(); ++c)
      spec.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    spec.b(static_cast<Eigen::Index>(r)) = rhs[r];
  }
  return spec;
}

/// Orthonormal basis of the null space of A (columns).
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, double rel_tol = 1e-10) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

/// Full support and every (I_l u L u J)-marginal equal to the model's.
inline bool is_pc_equivalent(const std::vector<double>& candidate, const ValidatedModel& model,
                             const StrongPartition& partition, double tol = 1e-10) {
  const auto base = marginal(model, partition.separated | partition.bypassing);
  if (candidate.size() != base.size()) throw error(errc::bad_dist, "distribution length differs from |A^{I u J}|");
  double total = 0.0;
  for (double p : candidate) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw error(errc::bad_dist, "negative or non-finite probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw error(errc::bad_dist, "probabilities sum to " + std::to_string(total));
  if (std::any_of(candidate.begin(), candidate.end(), [](double p) { return p <= 0.0; })) return false;
  const auto spec = equivalent_dist_spec(model, partition, base);
  const Eigen::Map<const Eigen::VectorXd> p(candidate.data(), static_cast<Eigen::Index>(candidate.size()));
  return ((spec.A * p - spec.b).cwiseAbs().maxCoeff()) <= tol;
}

namespace detail {

/// Reduced row echelon form of [A | b]; returns pivot columns. Rows beyond the rank are dropped.
inline std::vector<Eigen::Index> rref(Eigen::MatrixXd& M, double tol = 1e-12) {
  std::vector<Eigen::Index> pivots;
  Eigen::Index row = 0;
  const Eigen::Index cols = M.cols() - 1;
  for (Eigen::Index c = 0; c < cols && row < M.rows(); ++c) {
    Eigen::Index best = row;
    for (Eigen::Index r = row; r < M.rows(); ++r)
      if (std::abs(M(r, c)) > std::abs(M(best, c))) best = r;
    if (std::abs(M(best, c)) <= tol) continue;
    M.row(row).swap(M.row(best));
    M.row(row) /= M(row, c);
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      if (r != row && M(r, c) != 0.0) M.row(r) -= M(r, c) * M.row(row);
    pivots.push_back(c);
    ++row;
  }
  M.conservativeResize(row, Eigen::NoChange);
  return pivots;
}

/// Clique entropy of the characteristic graph under p, reusing the block tree.
class CliqueObjective {
 public:
  CliqueObjective(const ProbGraph& g, double floor) : g_(g), tree_(decompose(g)), floor_(floor) {}

  double operator()(const Eigen::VectorXd& x) {
    ++evaluations;
    std::vector<double> p(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) p[static_cast<std::size_t>(i)] = std::max(x(i), floor_);
    return evaluate(tree_, g_, p);
  }

  std::size_t evaluations = 0;

 private:
  const ProbGraph& g_;
  DecompositionTree tree_;
  double floor_;
};

/// Interval of t keeping x + t d at or above the floor.
inline std::pair<double, double> feasible_interval(const Eigen::VectorXd& x, const Eigen::VectorXd& d, double floor) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(d(i)) < 1e-15) continue;
    const double t = (floor - x(i)) / d(i);
    if (d(i) > 0) lo = std::max(lo, t);
    else hi = std::min(hi, t);
  }
  if (!std::isfinite(lo)) lo = 0.0;
  if (!std::isfinite(hi)) hi = 0.0;
  return {std::min(lo, 0.0), std::max(hi, 0.0)};
}

/// Golden-section maximisation of f(x + t d) over the feasible interval.
template <typename F>
std::pair<double, double> golden_line(F& f, const Eigen::VectorXd& x, const Eigen::VectorXd& d, double floor) {
  auto [a, b] = feasible_interval(x, d, floor);
  if (b - a < 1e-15) return {0.0, f(x)};
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), e = a + r * (b - a);
  double fc = f(x + c * d), fe = f(x + e * d);
  for (int it = 0; it < 80 && (b - a) > 1e-13; ++it) {
    if (fc >= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - r * (b - a);
      fc = f(x + c * d);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + r * (b - a);
      fe = f(x + e * d);
    }
  }
  return fc >= fe ? std::pair{c, fc} : std::pair{e, fe};
}

}  // namespace detail

/// Maximises the clique entropy of the characteristic graph over P_C-equivalent
/// distributions: coordinate ascent along a null-space basis with golden-section
/// line searches, from the base point and `starts` seeded random interior points.
inline ImprovedResult optimize_equivalent(const ValidatedModel& model, const StrongPartition& partition,
                                          const CharGraph& cg, const OptimizerConfig& cfg, std::uint64_t pair_index) {
  if (cg.k != 1) throw error(errc::schema, "improved bound uses the 1-fold graph");
  const auto base = marginal(model, partition.separated | partition.bypassing);
  if (base.size() > cfg.max_atoms) throw error(errc::too_large, "too many atoms for the improved-bound optimizer");
  const auto spec = equivalent_dist_spec(model, partition, base);
  const Eigen::MatrixXd N = null_space(spec.A);
  const Eigen::Map<const Eigen::VectorXd> x0(base.data(), static_cast<Eigen::Index>(base.size()));
  if ((spec.A * x0 - spec.b).cwiseAbs().maxCoeff() > 1e-9) throw error(errc::infeasible_spec, "base point infeasible");

  ImprovedResult res;
  res.feasible_dim = static_cast<std::size_t>(N.cols());
  detail::CliqueObjective f(cg.graph, cfg.floor);

  auto ascend = [&](Eigen::VectorXd x, std::size_t& sweeps) {
    double fx = f(x);
    for (sweeps = 0; sweeps < cfg.max_sweeps && N.cols() > 0; ++sweeps) {
      const Eigen::VectorXd start = x;
      const double f0 = fx;
      for (Eigen::Index i = 0; i < N.cols(); ++i) {
        const Eigen::VectorXd d = N.col(i);
        auto [t, ft] = detail::golden_line(f, x, d, cfg.floor);
        if (ft > fx) {
          x += t * d;
          fx = ft;
        }
      }
      const Eigen::VectorXd step = x - start;
      if (step.norm() > 1e-14) {
        auto [t, ft] = detail::golden_line(f, x, step, cfg.floor);
        if (ft > fx) {
          x += t * step;
          fx = ft;
        }
      }
      if (fx - f0 < cfg.tol) break;
    }
    return std::pair{x, fx};
  };

  std::size_t sweeps = 0;
  auto [best_x, best_f] = ascend(x0, sweeps);
  res.sweeps = sweeps;
  bool any_finite = std::isfinite(best_f);
  if (N.cols() > 0) {
    for (std::size_t s = 1; s <= cfg.starts; ++s) {
      std::seed_seq seq{cfg.seed, pair_index, static_cast<std::uint64_t>(s)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Eigen::VectorXd c(N.cols());
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = gauss(rng);
      const Eigen::VectorXd d = N * c;
      const auto [lo, hi] = detail::feasible_interval(x0, d, cfg.floor);
      const double t = lo + (hi - lo) * (0.05 + 0.9 * unit(rng));
      std::size_t sw = 0;
      auto [x, fx] = ascend(x0 + t * d, sw);
      if (!std::isfinite(fx)) continue;
      any_finite = true;
      res.sweeps = std::max(res.sweeps, sw);
      if (!std::isfinite(best_f) || fx > best_f + 1e-12) {
        best_x = x;
        best_f = fx;
        res.best_start = s;
      }
    }
    res.starts = cfg.starts;
  }
  if (!any_finite) throw error(errc::optimizer_failed, "every start diverged");

  res.h = best_f;
  res.value = best_f / static_cast<double>(popcount(partition.cut));
  res.dist.assign(best_x.data(), best_x.data() + best_x.size());
  for (auto& p : res.dist) p = std::max(p, cfg.floor);
  res.evaluations = f.evaluations;

  if (cfg.grid_oracle && res.feasible_dim <= 3) {
    Eigen::MatrixXd M(spec.A.rows(), spec.A.cols() + 1);
    M << spec.A, spec.b;
    const auto pivots = detail::rref(M);
    std::vector<Eigen::Index> free;
    for (Eigen::Index c = 0; c < spec.A.cols(); ++c)
      if (std::find(pivots.begin(), pivots.end(), c) == pivots.end()) free.push_back(c);
    GridResult grid;
    grid.value = -std::numeric_limits<double>::infinity();
    const std::size_t steps = cfg.grid_steps;
    std::size_t total = 1;
    for (std::size_t i = 0; i < free.size(); ++i) total *= steps + 1;
    for (std::size_t idx = 0; idx < total; ++idx) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.A.cols());
      std::size_t r = idx;
      for (auto c : free) {
        x(c) = static_cast<double>(r % (steps + 1)) / static_cast<double>(steps);
        r /= steps + 1;
      }
      bool ok = true;
      for (std::size_t pr = 0; pr < pivots.size() && ok; ++pr) {
        double v = M(static_cast<Eigen::Index>(pr), M.cols() - 1);
        for (auto c : free) v -= M(static_cast<Eigen::Index>(pr), c) * x(c);
        if (v < -1e-12) ok = false;
        x(pivots[pr]) = std::max(v, 0.0);
      }
      if (!ok) continue;
      ++grid.points;
      std::vector<double> p(x.data(), x.data() + x.size());
      const double total_mass = std::accumulate(p.begin(), p.end(), 0.0);
      for (auto& v : p) v /= total_mass;
      const double h = clique_entropy(cg.graph.with_dist(p)).value;
      if (h > grid.value + 1e-12) {
        grid.value = h;
        grid.point = p;
      }
    }
    grid.boundary = std::any_of(grid.point.begin(), grid.point.end(), [](double v) { return v <= 1e-12; });
    res.grid = std::move(grid);
  }
  return res;
}

// -- pair search ----------------------------------------------------------------

/// Every (C, P_C) pair in canonical order: cuts by size then edge indices, partitions in RGS order.
inline std::vector<StrongPartition> enumerate_pairs(const ValidatedModel& model, const SearchConfig& search) {
  std::vector<StrongPartition> out;
  if (!search.pairs.empty()) {
    for (const auto& blocks : search.pairs) out.push_back(make_strong_partition(model, blocks));
    return out;
  }
  for (const auto& cut : enumerate_cut_sets(model, search.max_cut_size, search.edge_cap))
    for (auto& p : enumerate_strong_partitions(model, cut)) out.push_back(std::move(p));
  return out;
}

/// Evaluates all pairs; the improved bound only when `with_improved` is set.
inline BoundsReport compute_bounds(const ValidatedModel& model, const SearchConfig& search, const OptimizerConfig& opt,
                                   bool with_improved = true) {
  const auto parts = enumerate_pairs(model, search);
  BoundsReport rep;
  rep.pairs.resize(parts.size());
  parallel_for(parts.size(), [&](std::size_t i) {
    PairResult& r = rep.pairs[i];
    r.partition = parts[i];
    r.cut = analyze_cut(model, parts[i].cut);
    r.cut_size = popcount(parts[i].cut);
    const auto cg = build_chargraph(model, parts[i], 1);
    const auto h = clique_entropy(cg.graph);
    r.h_omega = h.value;
    r.method = h.method;
    r.basic = h.value / static_cast<double>(r.cut_size);
    r.n_C = cg.equiv->n_C();
    r.omega = cg.graph.size() <= 64 ? clique_number(cg.graph) : clique_number_via_decomposition(cg);
    r.fixed_length = std::log2(static_cast<double>(r.n_C)) / static_cast<double>(r.cut_size);
    if (with_improved) r.improved = optimize_equivalent(model, parts[i], cg, opt, i);
  });

  // Canonical order; a later pair wins only by more than 1e-12.
  auto pick = [&](auto value) {
    std::optional<std::size_t> w;
    for (std::size_t i = 0; i < rep.pairs.size(); ++i)
      if (!w || value(rep.pairs[i]) > value(rep.pairs[*w]) + 1e-12) w = i;
    return w;
  };
  rep.basic_witness = pick([](const PairResult& r) { return r.basic; });
  rep.fixed_witness = pick([](const PairResult& r) { return r.fixed_length; });
  if (rep.basic_witness) rep.basic = rep.pairs[*rep.basic_witness].basic;
  if (rep.fixed_witness) rep.fixed_length = rep.pairs[*rep.fixed_witness].fixed_length;
  if (with_improved) {
    rep.improved_witness = pick([](const PairResult& r) { return r.improved->value; });
    if (rep.improved_witness) rep.improved = rep.pairs[*rep.improved_witness].improved->value;
  }
  return rep;
}

inline BoundReport basic_lower_bound(const ValidatedModel& model, const SearchConfig& search = {}) {
  auto r = compute_bounds(model, search, {}, false);
  return {BoundKind::Basic, r.basic, r.basic_witness, std::move(r.pairs)};
}

inline BoundReport improved_lower_bound(const ValidatedModel& model, const SearchConfig& search = {},
                                        const OptimizerConfig& opt = {}) {
  auto r = compute_bounds(model, search, opt, true);
  return {BoundKind::Improved, r.improved, r.improved_witness, std::move(r.pairs)};
}

inline BoundReport fixed_length_bound(const ValidatedModel& model, const SearchConfig& search = {}) {
  auto r = compute_bounds(model, search, {}, false);
  return {BoundKind::FixedLength, r.fixed_length, r.fixed_witness, std::move(r.pairs)};
}

}  // namespace netfunc
