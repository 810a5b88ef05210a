#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "sloppy/adjacency_heap.hpp"
#include "sloppy/types.hpp"

namespace sloppy {

/// Ordered sequence of buckets with cached subtree size sums.
///
/// Backed by a treap with parent links whose node slots are indexed by
/// BucketId. Prefix-size descent, key routing, point size updates and
/// positional insert/erase all touch O(log t) nodes in expectation; the
/// priorities come from a fixed-seed generator, so shapes are reproducible.
class BucketIndex {
 public:
  struct Item {
    BucketId id;
    std::size_t size;
    std::optional<Key> hi;  // nullopt means +infinity
  };
  struct RankHit {
    BucketId id;
    std::size_t before;  // total size of buckets preceding `id`
  };

  void clear();
  void build(const std::vector<Item>& items);

  /// Inserts `item` right after `after` (kNoBucket: at the front).
  void insert_after(BucketId after, const Item& item, CostMeter& meter);
  void erase(BucketId id, CostMeter& meter);
  void add_size(BucketId id, std::ptrdiff_t delta, CostMeter& meter);
  void set_hi(BucketId id, std::optional<Key> hi);

  std::size_t count() const { return root_ == kNoBucket ? 0 : node(root_).count; }
  std::size_t total() const { return root_ == kNoBucket ? 0 : node(root_).sum; }
  std::size_t size_of(BucketId id) const { return node(id).size; }

  /// Total size of the buckets before `id` in sequence order.
  std::size_t prefix_before(BucketId id, CostMeter& meter) const;

  /// Bucket holding 1-based rank r (1 <= r <= total()).
  RankHit find_rank(std::size_t r, CostMeter& meter) const;

  /// Leftmost bucket whose upper bound is >= key.
  BucketId route(Key key, CostMeter& meter) const;

  /// Ids in sequence order (O(t)); for audits and dumps.
  std::vector<BucketId> in_order() const;

  /// Recomputes cached sums from scratch and compares (O(t)).
  bool sums_consistent() const;

 private:
  struct Node {
    BucketId left = kNoBucket, right = kNoBucket, parent = kNoBucket;
    std::uint64_t priority = 0;
    std::size_t size = 0, sum = 0, count = 0;
    std::optional<Key> hi;
  };

  Node& node(BucketId id) { return nodes_[id]; }
  const Node& node(BucketId id) const { return nodes_[id]; }
  std::size_t sum(BucketId id) const { return id == kNoBucket ? 0 : node(id).sum; }
  std::size_t cnt(BucketId id) const { return id == kNoBucket ? 0 : node(id).count; }
  void pull(BucketId id);
  BucketId merge(BucketId a, BucketId b, CostMeter& meter);
  std::pair<BucketId, BucketId> split(BucketId t, std::size_t k, CostMeter& meter);
  std::size_t position(BucketId id, CostMeter& meter) const;
  BucketId make_node(const Item& item);
  std::uint64_t next_priority();

  std::vector<Node> nodes_;
  BucketId root_ = kNoBucket;
  std::uint64_t rng_state_ = 0x9e3779b97f4a7c15ULL;
};

}  // namespace sloppy
