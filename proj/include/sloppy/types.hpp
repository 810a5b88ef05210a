#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

namespace sloppy {

using Key = std::int64_t;

/// Inclusive 1-based rank band [lo, hi]. May be empty (hi < lo) when n < k.
struct GroupInterval {
  std::size_t lo = 1;
  std::size_t hi = 0;

  bool empty() const { return hi < lo; }
  std::size_t length() const { return empty() ? 0 : hi - lo + 1; }
  bool intersects(std::size_t a, std::size_t b) const {
    return !empty() && a <= hi && b >= lo;
  }
  bool contains(std::size_t a, std::size_t b) const {
    return a >= lo && b <= hi;
  }
  friend bool operator==(const GroupInterval&, const GroupInterval&) = default;
};

/// Group i of k over n elements: ranks [floor((i-1)n/k)+1, floor(i n/k)].
/// Throws std::out_of_range unless 1 <= i <= k.
GroupInterval group_interval(std::size_t n, std::size_t k, std::size_t i);

/// The group holding rank r (1 <= r <= n), i.e. ceil(r k / n).
std::size_t group_of_rank(std::size_t n, std::size_t k, std::size_t r);

/// Elementary-operation accounting. One comparison or one element move is
/// one unit; index and heap node visits are tracked separately.
struct CostMeter {
  std::uint64_t comparisons = 0;
  std::uint64_t moves = 0;
  std::uint64_t index_visits = 0;
  std::uint64_t heap_visits = 0;

  std::uint64_t elementary() const { return comparisons + moves; }
  std::uint64_t total() const {
    return comparisons + moves + index_visits + heap_visits;
  }

  CostMeter& operator+=(const CostMeter& o) {
    comparisons += o.comparisons;
    moves += o.moves;
    index_visits += o.index_visits;
    heap_visits += o.heap_visits;
    return *this;
  }
  friend bool operator==(const CostMeter&, const CostMeter&) = default;
};

/// ceil(num * n / den) and floor(num * n / den) without floating point.
constexpr std::size_t ceil_frac(std::uint64_t num, std::uint64_t n,
                                std::uint64_t den) {
  return static_cast<std::size_t>((num * n + den - 1) / den);
}
constexpr std::size_t floor_frac(std::uint64_t num, std::uint64_t n,
                                 std::uint64_t den) {
  return static_cast<std::size_t>((num * n) / den);
}

}  // namespace sloppy
