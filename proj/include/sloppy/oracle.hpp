#pragma once

#include <cstddef>
#include <vector>

#include "sloppy/types.hpp"

namespace sloppy {

/// Ranks an element may take under some tie-break: [less + 1, leq].
struct RankInterval {
  std::size_t lo;
  std::size_t hi;
  friend bool operator==(const RankInterval&, const RankInterval&) = default;
};

/// Sorted multiset used as ground truth for group membership.
class OracleSet {
 public:
  void insert(Key x);
  /// Removes one occurrence. Throws std::invalid_argument if absent.
  void erase(Key x);

  std::size_t size() const { return sorted_.size(); }
  bool contains(Key x) const;
  std::size_t count_less(Key x) const;
  std::size_t count_leq(Key x) const;

  /// Throws std::invalid_argument if x is absent.
  RankInterval feasible_ranks(Key x) const;

  /// True iff x may be returned for group i of k. Vacuously true for n < k.
  bool is_valid_delete(Key x, std::size_t i, std::size_t k) const;

  const std::vector<Key>& sorted() const { return sorted_; }

 private:
  std::vector<Key> sorted_;
};

}  // namespace sloppy
