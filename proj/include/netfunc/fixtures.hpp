#pragma once

#include <string>
#include <vector>

#include "netfunc/netmodel.hpp"

namespace netfunc::fixtures {

/// Three binary sources, two relays, sink computes x1 + x2 + x3; uniform inputs.
/// s1 -> v1 (e1), s2 -> v1 (e2), s2 -> v2 (e3), s3 -> v2 (e4), v1 -> rho (e5), v2 -> rho (e6).
inline NetworkModel diamond() {
  NetworkModel m;
  m.alphabet = 2;
  m.nodes = {"s1", "s2", "s3", "v1", "v2", "rho"};
  m.edges = {{"e1", "s1", "v1"}, {"e2", "s2", "v1"}, {"e3", "s2", "v2"},
             {"e4", "s3", "v2"}, {"e5", "v1", "rho"}, {"e6", "v2", "rho"}};
  m.sources = {"s1", "s2", "s3"};
  m.sink = "rho";
  for (int x = 0; x < 8; ++x) m.function.push_back(((x >> 2) & 1) + ((x >> 1) & 1) + (x & 1));
  m.distribution.assign(8, 1.0 / 8.0);
  return m;
}

/// One source wired straight to the sink, identity target, P(0) = p0.
inline NetworkModel single_edge(std::uint32_t q = 2, double p0 = 0.5) {
  NetworkModel m;
  m.alphabet = q;
  m.nodes = {"s", "rho"};
  m.edges = {{"e", "s", "rho"}};
  m.sources = {"s"};
  m.sink = "rho";
  for (std::uint32_t x = 0; x < q; ++x) m.function.push_back(x);
  if (q == 1) {
    m.distribution = {1.0};
  } else {
    m.distribution.assign(q, (1.0 - p0) / static_cast<double>(q - 1));
    m.distribution[0] = p0;
  }
  return m;
}

}  // namespace netfunc::fixtures
