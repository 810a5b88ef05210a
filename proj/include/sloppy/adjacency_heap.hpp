#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sloppy/types.hpp"

namespace sloppy {

using BucketId = std::uint32_t;
inline constexpr BucketId kNoBucket = static_cast<BucketId>(-1);

/// Indexed binary min-heap over adjacent-pair size sums. An entry is named
/// by the id of the left bucket of its pair; the position table doubles as
/// the handle store, so key updates and erasure are O(log t).
class AdjacencyHeap {
 public:
  struct Entry {
    std::size_t sum;
    BucketId left;
  };

  std::size_t size() const { return heap_.size(); }
  bool empty() const { return heap_.empty(); }
  bool contains(BucketId left) const;

  void push(BucketId left, std::size_t sum, CostMeter& meter);
  void update(BucketId left, std::size_t sum, CostMeter& meter);
  void erase(BucketId left, CostMeter& meter);
  void clear();

  std::optional<Entry> top() const;
  std::optional<std::size_t> sum_of(BucketId left) const;
  const std::vector<Entry>& entries() const { return heap_; }

  /// Test hook: overwrite a stored key without restoring heap order.
  void corrupt_for_test(BucketId left, std::size_t sum);

 private:
  static bool before(const Entry& a, const Entry& b) {
    return a.sum != b.sum ? a.sum < b.sum : a.left < b.left;
  }
  void place(std::size_t pos, Entry e);
  void sift_up(std::size_t pos, CostMeter& meter);
  void sift_down(std::size_t pos, CostMeter& meter);

  std::vector<Entry> heap_;
  std::vector<std::size_t> pos_;  // indexed by BucketId; npos when absent
};

}  // namespace sloppy
