#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "netfunc/error.hpp"
#include "netfunc/netmodel.hpp"
#include "netfunc/util.hpp"

namespace netfunc {

inline constexpr std::uint64_t default_domain_cap = std::uint64_t{1} << 20;

/// Values of f applied row by row to a k x S message matrix, packed into one id.
class KShotFunction {
 public:
  KShotFunction(const ValidatedModel& model, std::uint32_t k, std::uint64_t cap = default_domain_cap)
      : k_(k), space_(model.q(), k, model.num_sources(), model.all_sources()) {
    if (k == 0) throw error(errc::schema, "k must be positive");
    checked_pow(model.q(), std::uint64_t{k} * model.num_sources(), cap);
    const auto s = model.num_sources();
    const auto q = model.q();
    const std::uint64_t image = model.image().size();
    checked_pow(image, k, std::uint64_t{1} << 62, errc::domain_too_large);
    values_.resize(space_.size());
    for (std::uint64_t x = 0; x < space_.size(); ++x) {
      std::uint64_t packed = 0;
      for (std::uint32_t j = 0; j < k; ++j) {
        std::uint64_t row = 0;
        for (std::size_t i = 0; i < s; ++i) row = row * q + space_.digit(x, i, j);
        packed = packed * image + model.function_id(row);
      }
      values_[x] = packed;
    }
  }

  std::uint32_t k() const noexcept { return k_; }
  const MessageSpace& space() const noexcept { return space_; }
  std::uint64_t operator()(std::uint64_t full) const noexcept { return values_[full]; }

 private:
  std::uint32_t k_;
  MessageSpace space_;
  std::vector<std::uint64_t> values_;
};

/// A partition of A^{k x T} into equivalence classes, classes ordered by least member.
struct EquivPartition {
  MessageSpace space;
  std::vector<std::vector<std::uint64_t>> classes;
  std::vector<std::uint32_t> class_of;

  // context
  SourceSet I = 0;
  SourceSet J = 0;
  std::uint64_t a_J = 0;
  std::uint32_t k = 1;
  std::optional<std::size_t> block;  // ell for (I_l, a_L, a_J)-classes
  SourceSet L = 0;
  std::uint64_t a_L = 0;
};

namespace detail {

/// Groups indices 0..n-1 by signature; first appearance order gives least-member order.
template <typename Sig>
void group_by_signature(std::uint64_t n, Sig&& signature, EquivPartition& out) {
  std::map<std::vector<std::uint64_t>, std::uint32_t> ids;
  out.class_of.assign(n, 0);
  out.classes.clear();
  for (std::uint64_t b = 0; b < n; ++b) {
    auto [it, fresh] = ids.emplace(signature(b), static_cast<std::uint32_t>(out.classes.size()));
    if (fresh) out.classes.emplace_back();
    out.class_of[b] = it->second;
    out.classes[it->second].push_back(b);
  }
}

}  // namespace detail

/// (I, a_J)-equivalence classes of A^{k x I}: b ~ b' iff f(b, a_J, d) = f(b', a_J, d) for every d.
inline EquivPartition i_aj_classes(const ValidatedModel& model, const KShotFunction& fk, SourceSet I, SourceSet J,
                                   std::uint64_t a_J) {
  if ((I & J) != 0) throw error(errc::overlapping_sets, "I and J intersect");
  const auto s = model.num_sources();
  const auto k = fk.k();
  EquivPartition p;
  p.space = MessageSpace(model.q(), k, s, I);
  const MessageSpace js(model.q(), k, s, J);
  const MessageSpace ds(model.q(), k, s, model.all_sources() & ~(I | J));
  if (a_J >= js.size()) throw error(errc::schema, "a_J out of range");
  p.I = I;
  p.J = J;
  p.a_J = a_J;
  p.k = k;
  const auto emb_i = p.space.embedding_table();
  const auto emb_d = ds.embedding_table();
  const auto base = js.embed(a_J);
  detail::group_by_signature(
      p.space.size(),
      [&](std::uint64_t b) {
        std::vector<std::uint64_t> sig(emb_d.size());
        for (std::size_t d = 0; d < emb_d.size(); ++d) sig[d] = fk(emb_i[b] + base + emb_d[d]);
        return sig;
      },
      p);
  return p;
}

inline EquivPartition i_aj_classes(const ValidatedModel& model, SourceSet I, SourceSet J, std::uint64_t a_J,
                                   std::uint32_t k, std::uint64_t cap = default_domain_cap) {
  if ((I & J) != 0) throw error(errc::overlapping_sets, "I and J intersect");
  return i_aj_classes(model, KShotFunction(model, k, cap), I, J, a_J);
}

/// Vertex coordinates in the layered structure of the characteristic graph.
struct LayerCoord {
  std::uint64_t a_J = 0;
  std::uint32_t cls = 0;  // (I, a_J)-class id
  std::uint64_t a_L = 0;
  std::vector<std::uint32_t> block_cls;  // (I_l, a_L, a_J)-class id per block
};

/// All equivalence data attached to one strong partition at block length k.
class PartitionEquivalence {
 public:
  PartitionEquivalence(const ValidatedModel& model, const StrongPartition& partition, std::uint32_t k,
                       std::uint64_t cap = default_domain_cap)
      : partition_(partition), fk_(model, k, cap) {
    const auto q = model.q();
    const auto s = model.num_sources();
    I_ = MessageSpace(q, k, s, partition.separated);
    J_ = MessageSpace(q, k, s, partition.bypassing);
    L_ = MessageSpace(q, k, s, partition.rest);
    for (auto b : partition.block_sources) blocks_.emplace_back(q, k, s, b);
    const auto m = blocks_.size();

    i_classes_.reserve(J_.size());
    for (std::uint64_t aj = 0; aj < J_.size(); ++aj)
      i_classes_.push_back(i_aj_classes(model, fk_, partition.separated, partition.bypassing, aj));

    std::vector<std::vector<std::uint64_t>> emb(m);
    for (std::size_t l = 0; l < m; ++l) emb[l] = blocks_[l].embedding_table();
    const auto emb_l = L_.embedding_table();

    // Assembled I-index of (c_1, ..., c_m, a_L) for every tuple, row-major over blocks.
    auto assemble = [&](const std::vector<std::uint64_t>& c, std::uint64_t al) {
      std::uint64_t full = emb_l[al];
      for (std::size_t l = 0; l < m; ++l) full += emb[l][c[l]];
      return I_.project(full);
    };

    block_classes_.assign(J_.size(), std::vector<std::vector<EquivPartition>>(L_.size()));
    counts_.assign(J_.size(), {});
    for (std::uint64_t aj = 0; aj < J_.size(); ++aj) {
      const auto& icls = i_classes_[aj];
      counts_[aj].assign(icls.classes.size(), std::vector<std::uint64_t>(L_.size(), 0));
      for (std::uint64_t al = 0; al < L_.size(); ++al) {
        auto& per_block = block_classes_[aj][al];
        for (std::size_t l = 0; l < m; ++l) {
          EquivPartition p;
          p.space = blocks_[l];
          p.I = partition.block_sources[l];
          p.J = partition.bypassing;
          p.a_J = aj;
          p.k = k;
          p.block = l;
          p.L = partition.rest;
          p.a_L = al;
          std::uint64_t others = 1;
          for (std::size_t j = 0; j < m; ++j)
            if (j != l) others *= blocks_[j].size();
          detail::group_by_signature(
              blocks_[l].size(),
              [&](std::uint64_t b) {
                std::vector<std::uint64_t> sig;
                sig.reserve(others);
                std::vector<std::uint64_t> c(m, 0);
                c[l] = b;
                for (std::uint64_t t = 0; t < others; ++t) {
                  std::uint64_t r = t;
                  for (std::size_t j = m; j-- > 0;) {
                    if (j == l) continue;
                    c[j] = r % blocks_[j].size();
                    r /= blocks_[j].size();
                  }
                  sig.push_back(icls.class_of[assemble(c, al)]);
                }
                return sig;
              },
              p);
          per_block.push_back(std::move(p));
        }

        // N(a_L, Cl): bracket sets of class tuples fully inside one Cl.
        std::vector<std::size_t> radix(m);
        std::uint64_t tuples = 1;
        for (std::size_t l = 0; l < m; ++l) {
          radix[l] = per_block[l].classes.size();
          tuples *= radix[l];
        }
        std::vector<std::size_t> t(m, 0);
        for (std::uint64_t n = 0; n < tuples; ++n) {
          std::uint64_t r = n;
          for (std::size_t l = m; l-- > 0;) {
            t[l] = r % radix[l];
            r /= radix[l];
          }
          const auto cls = bracket_class(icls, per_block, t, al, assemble);
          if (cls) ++counts_[aj][*cls][al];
        }
      }
    }
  }

  const StrongPartition& partition() const noexcept { return partition_; }
  const KShotFunction& function() const noexcept { return fk_; }
  std::uint32_t k() const noexcept { return fk_.k(); }
  const MessageSpace& I_space() const noexcept { return I_; }
  const MessageSpace& J_space() const noexcept { return J_; }
  const MessageSpace& L_space() const noexcept { return L_; }
  const MessageSpace& block_space(std::size_t l) const noexcept { return blocks_[l]; }

  const EquivPartition& i_classes(std::uint64_t a_J) const { return i_classes_.at(a_J); }
  const EquivPartition& block_classes(std::size_t l, std::uint64_t a_L, std::uint64_t a_J) const {
    if (l >= blocks_.size()) throw error(errc::schema, "block index out of range");
    return block_classes_.at(a_J).at(a_L).at(l);
  }

  /// Id of `members` among the (I, a_J)-classes.
  std::uint32_t class_id(std::uint64_t a_J, std::vector<std::uint64_t> members) const {
    std::sort(members.begin(), members.end());
    const auto& ic = i_classes(a_J);
    for (std::uint32_t c = 0; c < ic.classes.size(); ++c)
      if (ic.classes[c] == members) return c;
    throw error(errc::not_a_class, "set is not an (I, a_J)-equivalence class");
  }

  std::uint64_t count_N(std::uint64_t a_J, std::uint32_t cls, std::uint64_t a_L) const {
    return counts_.at(a_J).at(cls).at(a_L);
  }

  std::uint64_t count_N_max(std::uint64_t a_J, std::uint32_t cls) const {
    const auto& row = counts_.at(a_J).at(cls);
    return *std::max_element(row.begin(), row.end());
  }

  /// max over a_J of the sum over classes of N(Cl[a_J]).
  std::uint64_t n_C() const {
    std::uint64_t best = 0;
    for (std::uint64_t aj = 0; aj < J_.size(); ++aj) {
      std::uint64_t sum = 0;
      for (std::uint32_t c = 0; c < i_classes_[aj].classes.size(); ++c) sum += count_N_max(aj, c);
      best = std::max(best, sum);
    }
    return best;
  }

  /// Layer coordinates of an A^{k x (I u J)} message, given its I and J indices.
  LayerCoord coordinates(std::uint64_t i_index, std::uint64_t a_J) const {
    LayerCoord lc;
    lc.a_J = a_J;
    lc.cls = i_classes_[a_J].class_of[i_index];
    const auto full = I_.embed(i_index);
    lc.a_L = L_.project(full);
    for (std::size_t l = 0; l < blocks_.size(); ++l)
      lc.block_cls.push_back(block_classes_[a_J][lc.a_L][l].class_of[blocks_[l].project(full)]);
    return lc;
  }

 private:
  /// Class id of the bracket set <cl_1, ..., cl_m, a_L> when it lies inside a single class.
  template <typename Assemble>
  static std::optional<std::uint32_t> bracket_class(const EquivPartition& icls,
                                                    const std::vector<EquivPartition>& per_block,
                                                    const std::vector<std::size_t>& t, std::uint64_t al,
                                                    Assemble&& assemble) {
    const auto m = per_block.size();
    std::vector<std::size_t> pos(m, 0);
    std::vector<std::uint64_t> c(m);
    std::optional<std::uint32_t> cls;
    while (true) {
      for (std::size_t l = 0; l < m; ++l) c[l] = per_block[l].classes[t[l]][pos[l]];
      const auto id = icls.class_of[assemble(c, al)];
      if (!cls) cls = id;
      else if (*cls != id) return std::nullopt;
      std::size_t l = m;
      while (true) {
        if (l == 0) return cls;
        --l;
        if (++pos[l] < per_block[l].classes[t[l]].size()) break;
        pos[l] = 0;
      }
    }
  }

  StrongPartition partition_;
  KShotFunction fk_;
  MessageSpace I_, J_, L_;
  std::vector<MessageSpace> blocks_;
  std::vector<EquivPartition> i_classes_;
  std::vector<std::vector<std::vector<EquivPartition>>> block_classes_;  // [a_J][a_L][l]
  std::vector<std::vector<std::vector<std::uint64_t>>> counts_;          // [a_J][cls][a_L]
};

/// (I_l, a_L, a_J)-equivalence classes of A^{k x I_l}; `ell` is zero-based.
inline EquivPartition il_al_aj_classes(const ValidatedModel& model, const StrongPartition& partition, std::size_t ell,
                                       std::uint64_t a_L, std::uint64_t a_J, std::uint32_t k,
                                       std::uint64_t cap = default_domain_cap) {
  return PartitionEquivalence(model, partition, k, cap).block_classes(ell, a_L, a_J);
}

inline std::uint64_t count_N(const ValidatedModel& model, const StrongPartition& partition,
                             const std::vector<std::uint64_t>& cl, std::uint64_t a_J, std::uint64_t a_L) {
  const PartitionEquivalence pe(model, partition, 1);
  return pe.count_N(a_J, pe.class_id(a_J, cl), a_L);
}

inline std::uint64_t count_N_max(const ValidatedModel& model, const StrongPartition& partition,
                                 const std::vector<std::uint64_t>& cl, std::uint64_t a_J) {
  const PartitionEquivalence pe(model, partition, 1);
  return pe.count_N_max(a_J, pe.class_id(a_J, cl));
}

inline std::uint64_t n_C(const ValidatedModel& model, const StrongPartition& partition,
                         std::uint64_t cap = default_domain_cap) {
  return PartitionEquivalence(model, partition, 1, cap).n_C();
}

/// Maximum of n_C over every strong partition of the cut.
inline std::uint64_t n_C_f(const ValidatedModel& model, const CutAnalysis& cut, std::uint64_t cap = default_domain_cap) {
  std::uint64_t best = 0;
  for (const auto& p : enumerate_strong_partitions(model, cut)) best = std::max(best, n_C(model, p, cap));
  return best;
}

}  // namespace netfunc
