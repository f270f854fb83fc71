#pragma once

#include <stdexcept>
#include <string>

namespace netfunc {

/// Error conditions raised by the library. The CLI maps them onto exit codes.
enum class errc {
  schema,
  cycle_detected,
  source_has_in_edge,
  sink_has_out_edge,
  unreachable_node,
  bad_distribution,
  constant_function,
  unknown_edge_id,
  not_a_cut_set,
  overlapping_sets,
  domain_too_large,
  not_a_class,
  too_large,
  empty_list,
  not_autonomous,
  zero_mass,
  bad_dist,
  no_convergence,
  search_space_exceeded,
  optimizer_failed,
  infeasible_spec,
  domain_mismatch,
  odd_k,
  empty_word,
  usage,
};

inline const char* to_string(errc code) noexcept {
  switch (code) {
    case errc::schema: return "SchemaError";
    case errc::cycle_detected: return "CycleDetected";
    case errc::source_has_in_edge: return "SourceHasInEdge";
    case errc::sink_has_out_edge: return "SinkHasOutEdge";
    case errc::unreachable_node: return "UnreachableNode";
    case errc::bad_distribution: return "BadDistribution";
    case errc::constant_function: return "ConstantFunction";
    case errc::unknown_edge_id: return "UnknownEdgeId";
    case errc::not_a_cut_set: return "NotACutSet";
    case errc::overlapping_sets: return "OverlappingSets";
    case errc::domain_too_large: return "DomainTooLarge";
    case errc::not_a_class: return "NotAClass";
    case errc::too_large: return "TooLarge";
    case errc::empty_list: return "EmptyList";
    case errc::not_autonomous: return "NotAutonomous";
    case errc::zero_mass: return "ZeroMass";
    case errc::bad_dist: return "BadDist";
    case errc::no_convergence: return "NoConvergence";
    case errc::search_space_exceeded: return "SearchSpaceExceeded";
    case errc::optimizer_failed: return "OptimizerFailed";
    case errc::infeasible_spec: return "InfeasibleSpec";
    case errc::domain_mismatch: return "DomainMismatch";
    case errc::odd_k: return "OddK";
    case errc::empty_word: return "EmptyWord";
    case errc::usage: return "UsageError";
  }
  return "Unknown";
}

/// Size-cap violations (exit code 3 in the CLI).
inline bool is_size_cap(errc code) noexcept {
  return code == errc::domain_too_large || code == errc::too_large ||
         code == errc::search_space_exceeded;
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace netfunc
