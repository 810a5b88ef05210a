#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sloppy/types.hpp"

namespace sloppy {

/// Phased brute-force baseline with O(k log k) amortized cost per operation.
///
/// With at least 3k elements and no phase under way, all elements are cut
/// into 3k equal quantile buckets; the next ceil(n/(3k)) operations form a
/// phase, inserting into an overflow bucket and deleting from the middle
/// bucket of the requested group's triple. Below 3k elements it selects by
/// rank over a flat array.
class Variant1Heap {
 public:
  /// Throws std::invalid_argument for k == 0.
  explicit Variant1Heap(std::size_t k);

  void insert(Key x);
  /// Throws std::logic_error on an empty heap, std::out_of_range on bad i.
  Key delete_group(std::size_t i);

  std::size_t size() const { return n_; }
  std::size_t k() const { return k_; }
  bool in_phase() const { return in_phase_; }
  std::size_t phase_ops_left() const { return ops_left_; }
  std::uint64_t reorganizations() const { return reorganizations_; }
  std::uint64_t borrowed_deletes() const { return borrowed_; }

  /// 1-based ordinal, among the 3k phase buckets, serving group i.
  std::size_t middle_bucket(std::size_t i) const { return 3 * (i - 1) + 2; }
  const std::vector<std::vector<Key>>& phase_buckets() const { return buckets_; }

  const CostMeter& meter() const { return meter_; }
  CostMeter snapshot_meter();

 private:
  void begin_op();
  void end_op();
  void reorganize();
  std::vector<Key> gather();

  std::size_t k_;
  std::size_t n_ = 0;
  bool in_phase_ = false;
  std::size_t ops_left_ = 0;
  std::vector<std::vector<Key>> buckets_;
  std::vector<Key> overflow_;
  std::vector<Key> flat_;
  std::uint64_t reorganizations_ = 0;
  std::uint64_t borrowed_ = 0;
  CostMeter meter_;
};

}  // namespace sloppy
