#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "netfunc/chargraph.hpp"
#include "netfunc/entropy.hpp"
#include "netfunc/error.hpp"
#include "netfunc/netmodel.hpp"

namespace netfunc {

// -- unique decodability ------------------------------------------------------

/// Sardinas-Patterson test.
inline bool sardinas_patterson(const std::set<std::string>& code) {
  if (code.empty()) throw error(errc::empty_word, "empty code");
  if (code.count("")) throw error(errc::empty_word, "code contains the empty word");

  auto dangling = [&](const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out;
    for (const auto& u : a)
      for (const auto& v : b)
        if (v.size() > u.size() && v.compare(0, u.size(), u) == 0) out.insert(v.substr(u.size()));
    return out;
  };

  std::set<std::string> current;
  for (const auto& u : code)
    for (const auto& v : code)
      if (u != v && v.size() > u.size() && v.compare(0, u.size(), u) == 0) current.insert(v.substr(u.size()));
  std::set<std::string> seen;
  while (!current.empty()) {
    std::set<std::string> fresh;
    for (const auto& w : current) {
      if (code.count(w)) return false;
      if (seen.insert(w).second) fresh.insert(w);
    }
    if (fresh.empty()) return true;
    auto next = dangling(fresh, code);
    for (auto& w : dangling(code, fresh)) next.insert(w);
    current = std::move(next);
  }
  return true;
}

// -- Huffman ------------------------------------------------------------------

/// Huffman codeword lengths; ties merge the earliest-created subtree first.
inline std::vector<std::size_t> huffman_lengths(const std::vector<double>& probs) {
  const auto n = probs.size();
  if (n == 0) throw error(errc::empty_list, "no symbols");
  if (n == 1) return {1};
  using Item = std::tuple<double, std::size_t, std::vector<std::size_t>>;
  auto cmp = [](const Item& a, const Item& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::get<1>(a) > std::get<1>(b);
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  for (std::size_t i = 0; i < n; ++i) pq.emplace(probs[i], i, std::vector<std::size_t>{i});
  std::vector<std::size_t> len(n, 0);
  std::size_t next_id = n;
  while (pq.size() > 1) {
    auto a = pq.top();
    pq.pop();
    auto b = pq.top();
    pq.pop();
    auto members = std::get<2>(a);
    for (auto i : std::get<2>(b)) members.push_back(i);
    for (auto i : members) ++len[i];
    pq.emplace(std::get<0>(a) + std::get<0>(b), next_id++, std::move(members));
  }
  return len;
}

/// Canonical prefix code for the given lengths (shorter first, then symbol order).
inline std::vector<std::string> canonical_codewords(const std::vector<std::size_t>& lengths) {
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lengths[a] < lengths[b]; });
  std::vector<std::string> out(lengths.size());
  std::uint64_t code = 0;
  std::size_t prev = lengths[order.front()];
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto l = lengths[order[i]];
    if (i > 0) code = (code + 1) << (l - prev);
    prev = l;
    std::string w(l, '0');
    for (std::size_t b = 0; b < l; ++b)
      if ((code >> (l - 1 - b)) & 1U) w[b] = '1';
    out[order[i]] = w;
  }
  return out;
}

// -- codes --------------------------------------------------------------------

/// A k-shot code given by tables. Source out-edges are keyed by the source's k
/// symbols; other edges by the codewords on In(tail) joined with ','; the decoder
/// by the codewords on In(rho) joined with ','.
struct UDCode {
  std::uint32_t k = 1;
  std::map<std::string, std::map<std::string, std::string>> encoders;
  std::map<std::string, std::vector<std::int64_t>> decoder;
};

struct EdgeRate {
  std::string id;
  double expected_length = 0.0;  // L_e
  double rate = 0.0;             // R_e = L_e / k
  bool uniquely_decodable = true;
  std::size_t image_size = 0;
};

struct RateReport {
  std::uint32_t k = 1;
  std::vector<EdgeRate> edges;
  double rate = 0.0;  // max over edges
  bool admissible = true;
  std::size_t inputs = 0;
  std::optional<std::string> counterexample;
  std::vector<std::string> non_ud_edges;

  double rate_of(const std::string& id) const {
    for (const auto& e : edges)
      if (e.id == id) return e.rate;
    throw error(errc::unknown_edge_id, "no edge '" + id + "'");
  }
};

namespace detail {

inline std::string symbol_string(const MessageSpace& space, std::uint64_t x, std::size_t source) {
  std::string s;
  for (std::uint32_t j = 0; j < space.k(); ++j) {
    if (space.q() > 10 && j != 0) s += '.';
    s += std::to_string(space.digit(x, source, j));
  }
  return s;
}

inline std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) s += ',';
    s += parts[i];
  }
  return s;
}

/// Edges in an order where every edge follows the edges into its tail.
inline std::vector<std::size_t> edge_order(const ValidatedModel& model) {
  std::vector<std::size_t> order;
  for (auto v : model.topological_nodes())
    for (auto e : model.out_edges(v)) order.push_back(e);
  return order;
}

/// Probability of a k x S message under the i.i.d. extension.
inline double kshot_probability(const ValidatedModel& model, const MessageSpace& space, std::uint64_t x) {
  double p = 1.0;
  for (std::uint32_t j = 0; j < space.k(); ++j) {
    std::uint64_t row = 0;
    for (std::size_t i = 0; i < model.num_sources(); ++i) row = row * model.q() + space.digit(x, i, j);
    p *= model.probability(row);
  }
  return p;
}

inline std::string message_label(const ValidatedModel& model, const MessageSpace& space, std::uint64_t x) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < model.num_sources(); ++i)
    parts.push_back(model.raw().sources[i] + "=" + symbol_string(space, x, i));
  return join(parts);
}

}  // namespace detail

/// Codewords on every edge (declaration order) for message x in A^{k x S}.
inline std::vector<std::string> run_code(const ValidatedModel& model, const UDCode& code, const MessageSpace& space,
                                         std::uint64_t x) {
  std::vector<std::string> word(model.num_edges());
  for (auto e : detail::edge_order(model)) {
    const auto& id = model.raw().edges[e].id;
    auto table = code.encoders.find(id);
    if (table == code.encoders.end()) throw error(errc::domain_mismatch, "no encoder for edge '" + id + "'");
    const auto tail = model.edge_tail(e);
    std::string key;
    if (model.source_rank(tail) >= 0) {
      key = detail::symbol_string(space, x, static_cast<std::size_t>(model.source_rank(tail)));
    } else {
      std::vector<std::string> parts;
      for (auto in : model.in_edges(tail)) parts.push_back(word[in]);
      key = detail::join(parts);
    }
    auto it = table->second.find(key);
    if (it == table->second.end())
      throw error(errc::domain_mismatch, "edge '" + id + "' has no codeword for input '" + key + "'");
    word[e] = it->second;
  }
  return word;
}

/// Runs the code on every x in A^{k x S}: zero-error admissibility and expected rates.
inline RateReport evaluate(const ValidatedModel& model, const UDCode& code, std::uint64_t cap = default_domain_cap) {
  if (code.k == 0) throw error(errc::schema, "k must be positive");
  const MessageSpace space(model.q(), code.k, model.num_sources(), model.all_sources(), cap);
  RateReport rep;
  rep.k = code.k;
  rep.inputs = space.size();
  std::vector<double> length(model.num_edges(), 0.0);
  const auto& sink_in = model.in_edges(model.sink_node());
  for (std::uint64_t x = 0; x < space.size(); ++x) {
    const auto word = run_code(model, code, space, x);
    const double p = detail::kshot_probability(model, space, x);
    for (std::size_t e = 0; e < word.size(); ++e) length[e] += p * static_cast<double>(word[e].size());
    std::vector<std::string> parts;
    for (auto e : sink_in) parts.push_back(word[e]);
    auto it = code.decoder.find(detail::join(parts));
    if (it == code.decoder.end()) throw error(errc::domain_mismatch, "decoder has no entry for '" + detail::join(parts) + "'");
    bool ok = it->second.size() == code.k;
    for (std::uint32_t j = 0; ok && j < code.k; ++j) {
      std::uint64_t row = 0;
      for (std::size_t i = 0; i < model.num_sources(); ++i) row = row * model.q() + space.digit(x, i, j);
      ok = it->second[j] == model.image()[model.function_id(row)];
    }
    if (!ok && rep.admissible) {
      rep.admissible = false;
      rep.counterexample = detail::message_label(model, space, x);
    }
  }
  for (std::size_t e = 0; e < model.num_edges(); ++e) {
    EdgeRate er;
    er.id = model.raw().edges[e].id;
    er.expected_length = length[e];
    er.rate = length[e] / static_cast<double>(code.k);
    std::set<std::string> image;
    for (const auto& [key, w] : code.encoders.at(er.id)) image.insert(w);
    er.image_size = image.size();
    er.uniquely_decodable = sardinas_patterson(image);
    if (!er.uniquely_decodable) rep.non_ud_edges.push_back(er.id);
    rep.rate = std::max(rep.rate, er.rate);
    rep.edges.push_back(er);
  }
  return rep;
}

/// Sum of R_e over the edges of a cut.
inline double cut_rate(const ValidatedModel& model, const RateReport& rep, EdgeSet cut) {
  double sum = 0.0;
  for_each_bit(cut, [&](std::size_t e) { sum += rep.rate_of(model.raw().edges[e].id); });
  return sum;
}

// -- fixed-length schemes -----------------------------------------------------

/// Message matrix: x[i][j] is source i at shot j.
using Matrix = std::vector<std::vector<std::uint32_t>>;
using Symbols = std::vector<std::int64_t>;

/// Per-edge functions of the source messages and a decoder on In(rho) values.
struct FixedScheme {
  std::uint32_t k = 1;
  std::map<std::string, std::function<Symbols(const Matrix&)>> edges;
  /// Arguments: the values on In(rho), in in-edge order.
  std::function<Symbols(const std::vector<Symbols>&)> decode;
};

inline Matrix to_matrix(const MessageSpace& space, std::size_t sources, std::uint64_t x) {
  Matrix m(sources, std::vector<std::uint32_t>(space.k()));
  for (std::size_t i = 0; i < sources; ++i)
    for (std::uint32_t j = 0; j < space.k(); ++j) m[i][j] = space.digit(x, i, j);
  return m;
}

/// Replaces each edge value by a Huffman codeword for its distribution under P^k.
inline UDCode huffman_transform(const ValidatedModel& model, const FixedScheme& scheme,
                                std::uint64_t cap = default_domain_cap) {
  const MessageSpace space(model.q(), scheme.k, model.num_sources(), model.all_sources(), cap);
  const auto s = model.num_sources();
  std::vector<std::vector<Symbols>> values(model.num_edges(), std::vector<Symbols>(space.size()));
  std::vector<double> prob(space.size());
  for (std::uint64_t x = 0; x < space.size(); ++x) {
    const auto m = to_matrix(space, s, x);
    prob[x] = detail::kshot_probability(model, space, x);
    for (std::size_t e = 0; e < model.num_edges(); ++e) {
      const auto& id = model.raw().edges[e].id;
      auto fn = scheme.edges.find(id);
      if (fn == scheme.edges.end()) throw error(errc::domain_mismatch, "scheme has no function for edge '" + id + "'");
      values[e][x] = fn->second(m);
    }
  }

  std::vector<std::map<Symbols, std::string>> codebook(model.num_edges());
  for (std::size_t e = 0; e < model.num_edges(); ++e) {
    std::map<Symbols, double> dist;
    for (std::uint64_t x = 0; x < space.size(); ++x) dist[values[e][x]] += prob[x];
    std::vector<double> p;
    for (const auto& [v, q] : dist) p.push_back(q);
    const auto words = canonical_codewords(huffman_lengths(p));
    std::size_t i = 0;
    for (const auto& [v, q] : dist) codebook[e][v] = words[i++];
  }

  UDCode code;
  code.k = scheme.k;
  std::vector<std::string> word(model.num_edges());
  for (std::uint64_t x = 0; x < space.size(); ++x) {
    for (std::size_t e = 0; e < model.num_edges(); ++e) word[e] = codebook[e].at(values[e][x]);
    for (std::size_t e = 0; e < model.num_edges(); ++e) {
      const auto& id = model.raw().edges[e].id;
      const auto tail = model.edge_tail(e);
      std::string key;
      if (model.source_rank(tail) >= 0) {
        key = detail::symbol_string(space, x, static_cast<std::size_t>(model.source_rank(tail)));
      } else {
        std::vector<std::string> parts;
        for (auto in : model.in_edges(tail)) parts.push_back(word[in]);
        key = detail::join(parts);
      }
      auto [it, fresh] = code.encoders[id].emplace(key, word[e]);
      if (!fresh && it->second != word[e])
        throw error(errc::domain_mismatch, "edge '" + id + "' is not a function of its inputs");
    }
    std::vector<std::string> parts;
    std::vector<Symbols> in_values;
    for (auto e : model.in_edges(model.sink_node())) {
      parts.push_back(word[e]);
      in_values.push_back(values[e][x]);
    }
    const auto out = scheme.decode(in_values);
    auto [it, fresh] = code.decoder.emplace(detail::join(parts), out);
    if (!fresh && it->second != out) throw error(errc::domain_mismatch, "decoder is not a function of In(rho)");
  }
  return code;
}

/// Split-and-partial-sum scheme for the three-source diamond computing x1 + x2 + x3.
/// Edge ids e1..e6 follow the bundled diamond fixture.
inline FixedScheme diamond_scheme(std::uint32_t k) {
  if (k == 0 || k % 2 != 0) throw error(errc::odd_k, "diamond scheme needs an even k >= 2");
  const std::uint32_t h = k / 2;
  FixedScheme s;
  s.k = k;
  auto row = [](const Matrix& x, std::size_t i, std::uint32_t from, std::uint32_t to) {
    Symbols out;
    for (std::uint32_t j = from; j < to; ++j) out.push_back(x[i][j]);
    return out;
  };
  s.edges["e1"] = [=](const Matrix& x) { return row(x, 0, 0, k); };
  s.edges["e2"] = [=](const Matrix& x) { return row(x, 1, 0, h); };
  s.edges["e3"] = [=](const Matrix& x) { return row(x, 1, h, k); };
  s.edges["e4"] = [=](const Matrix& x) { return row(x, 2, 0, k); };
  s.edges["e5"] = [=](const Matrix& x) {
    Symbols out;
    for (std::uint32_t j = 0; j < k; ++j) out.push_back(j < h ? x[0][j] + x[1][j] : x[0][j]);
    return out;
  };
  s.edges["e6"] = [=](const Matrix& x) {
    Symbols out;
    for (std::uint32_t j = 0; j < k; ++j) out.push_back(j < h ? x[2][j] : x[1][j] + x[2][j]);
    return out;
  };
  s.decode = [=](const std::vector<Symbols>& in) {
    Symbols out(k);
    for (std::uint32_t j = 0; j < k; ++j) out[j] = in.at(0).at(j) + in.at(1).at(j);
    return out;
  };
  return s;
}

/// True iff the codewords on the cut separate every adjacent pair of G^k.
/// Sources outside I u J are held at zero; edges in the cut do not depend on them.
inline bool cut_coloring_check(const ValidatedModel& model, const UDCode& code, const StrongPartition& partition) {
  const auto cg = build_chargraph(model, partition, code.k);
  const MessageSpace space(model.q(), code.k, model.num_sources(), model.all_sources());
  const auto cut_edges = bits_of(partition.cut);
  std::vector<std::vector<std::string>> color(cg.graph.size());
  for (std::uint64_t v = 0; v < cg.graph.size(); ++v) {
    const auto word = run_code(model, code, space, cg.vertex_space.embed(v));
    for (auto e : cut_edges) color[v].push_back(word[e]);
  }
  for (auto [u, v] : cg.graph.edges())
    if (color[u] == color[v]) return false;
  return true;
}

}  // namespace netfunc
