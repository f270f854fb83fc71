#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "netfunc/error.hpp"

namespace netfunc {

inline constexpr const char* version = "0.3.1";

/// Bitmask over source indices (position in S).
using SourceSet = std::uint64_t;
/// Bitmask over edge indices (declaration order in the model file).
using EdgeSet = std::uint64_t;

inline std::size_t popcount(std::uint64_t x) noexcept { return static_cast<std::size_t>(std::popcount(x)); }

template <typename F>
void for_each_bit(std::uint64_t mask, F&& fn) {
  while (mask != 0) {
    const auto i = static_cast<std::size_t>(std::countr_zero(mask));
    fn(i);
    mask &= mask - 1;
  }
}

inline std::vector<std::size_t> bits_of(std::uint64_t mask) {
  std::vector<std::size_t> out;
  for_each_bit(mask, [&](std::size_t i) { out.push_back(i); });
  return out;
}

/// base^exp, throwing `code` when the result exceeds `cap`.
inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t cap,
                                 errc code = errc::domain_too_large) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) throw error(code, "domain size exceeds cap " + std::to_string(cap));
    r *= base;
  }
  if (r > cap) throw error(code, "domain size exceeds cap " + std::to_string(cap));
  return r;
}

// -- entropy primitives (bits) ------------------------------------------------

inline double neg_xlog2x(double p) noexcept { return p > 0.0 ? -p * std::log2(p) : 0.0; }

// -- message matrices ---------------------------------------------------------

/// Indexes the matrices in A^{k x T} for a subset T of the sources.
///
/// Digits are laid out column-per-source (sources in S order), row-major within a
/// source, the first digit most significant. With T = S and k = 1 this is the
/// lexicographic order of the model's function table.
class MessageSpace {
 public:
  MessageSpace() = default;

  MessageSpace(std::uint32_t q, std::uint32_t k, std::size_t num_sources, SourceSet members,
               std::uint64_t cap = (std::uint64_t{1} << 62))
      : q_(q), k_(k), num_sources_(num_sources), members_(members), member_list_(bits_of(members)) {
    width_ = member_list_.size() * k_;
    size_ = checked_pow(q_, width_, cap);
    const std::size_t full_width = num_sources_ * k_;
    sub_weight_.assign(width_, 1);
    for (std::size_t p = width_; p-- > 1;) sub_weight_[p - 1] = sub_weight_[p] * q_;
    full_weight_.assign(width_, 0);
    std::vector<std::uint64_t> fw(full_width, 1);
    for (std::size_t p = full_width; p-- > 1;) fw[p - 1] = fw[p] * q_;
    for (std::size_t r = 0; r < member_list_.size(); ++r)
      for (std::size_t j = 0; j < k_; ++j) full_weight_[r * k_ + j] = fw[member_list_[r] * k_ + j];
  }

  std::uint64_t size() const noexcept { return size_; }
  std::uint32_t q() const noexcept { return q_; }
  std::uint32_t k() const noexcept { return k_; }
  SourceSet members() const noexcept { return members_; }
  const std::vector<std::size_t>& member_list() const noexcept { return member_list_; }

  /// Digit of member source `rank` (position within T) at shot `shot`.
  std::uint32_t digit(std::uint64_t index, std::size_t rank, std::size_t shot) const noexcept {
    return static_cast<std::uint32_t>((index / sub_weight_[rank * k_ + shot]) % q_);
  }

  /// Contribution of this sub-matrix to the index of the full A^{k x S} matrix.
  std::uint64_t embed(std::uint64_t index) const noexcept {
    std::uint64_t full = 0;
    for (std::size_t p = 0; p < width_; ++p) full += ((index / sub_weight_[p]) % q_) * full_weight_[p];
    return full;
  }

  /// Sub-matrix of a full A^{k x S} matrix restricted to T.
  std::uint64_t project(std::uint64_t full) const noexcept {
    std::uint64_t idx = 0;
    for (std::size_t p = 0; p < width_; ++p) idx += ((full / full_weight_[p]) % q_) * sub_weight_[p];
    return idx;
  }

  std::vector<std::uint64_t> embedding_table() const {
    std::vector<std::uint64_t> t(size_);
    for (std::uint64_t i = 0; i < size_; ++i) t[i] = embed(i);
    return t;
  }

  /// "(01,11,10)": one group per member source holding its k symbols.
  std::string label(std::uint64_t index) const {
    std::string out = "(";
    for (std::size_t r = 0; r < member_list_.size(); ++r) {
      if (r != 0) out += ',';
      for (std::size_t j = 0; j < k_; ++j) {
        if (q_ > 10 && j != 0) out += '.';
        out += std::to_string(digit(index, r, j));
      }
    }
    out += ')';
    return out;
  }

 private:
  std::uint32_t q_ = 2;
  std::uint32_t k_ = 1;
  std::size_t num_sources_ = 0;
  SourceSet members_ = 0;
  std::vector<std::size_t> member_list_;
  std::size_t width_ = 0;
  std::uint64_t size_ = 1;
  std::vector<std::uint64_t> sub_weight_;
  std::vector<std::uint64_t> full_weight_;
};

// -- threading ----------------------------------------------------------------

/// Worker count: hardware concurrency capped by NETFUNC_THREADS when set.
inline std::size_t worker_count() {
  std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NETFUNC_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

/// Runs fn(i) for i in [0, n). Each index is visited exactly once; callers write
/// into per-index slots so the result never depends on scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace netfunc
