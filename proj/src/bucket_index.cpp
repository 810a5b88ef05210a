#include "sloppy/bucket_index.hpp"

#include <stdexcept>

namespace sloppy {

std::uint64_t BucketIndex::next_priority() {
  // splitmix64
  std::uint64_t z = (rng_state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void BucketIndex::clear() {
  nodes_.clear();
  root_ = kNoBucket;
}

BucketId BucketIndex::make_node(const Item& item) {
  if (item.id >= nodes_.size()) nodes_.resize(item.id + 1);
  Node& n = node(item.id);
  n = Node{};
  n.priority = next_priority();
  n.size = n.sum = item.size;
  n.count = 1;
  n.hi = item.hi;
  return item.id;
}

void BucketIndex::pull(BucketId id) {
  Node& n = node(id);
  n.sum = n.size + sum(n.left) + sum(n.right);
  n.count = 1 + cnt(n.left) + cnt(n.right);
  if (n.left != kNoBucket) node(n.left).parent = id;
  if (n.right != kNoBucket) node(n.right).parent = id;
}

BucketId BucketIndex::merge(BucketId a, BucketId b, CostMeter& meter) {
  if (a == kNoBucket) return b;
  if (b == kNoBucket) return a;
  ++meter.index_visits;
  if (node(a).priority > node(b).priority) {
    node(a).right = merge(node(a).right, b, meter);
    pull(a);
    return a;
  }
  node(b).left = merge(a, node(b).left, meter);
  pull(b);
  return b;
}

std::pair<BucketId, BucketId> BucketIndex::split(BucketId t, std::size_t k,
                                                 CostMeter& meter) {
  if (t == kNoBucket) return {kNoBucket, kNoBucket};
  ++meter.index_visits;
  Node& n = node(t);
  if (cnt(n.left) < k) {
    auto [l, r] = split(n.right, k - cnt(n.left) - 1, meter);
    node(t).right = l;
    pull(t);
    return {t, r};
  }
  auto [l, r] = split(n.left, k, meter);
  node(t).left = r;
  pull(t);
  return {l, t};
}

void BucketIndex::build(const std::vector<Item>& items) {
  clear();
  CostMeter scratch;
  for (const Item& item : items) root_ = merge(root_, make_node(item), scratch);
  if (root_ != kNoBucket) node(root_).parent = kNoBucket;
}

std::size_t BucketIndex::position(BucketId id, CostMeter& meter) const {
  std::size_t pos = cnt(node(id).left);
  BucketId x = id;
  while (node(x).parent != kNoBucket) {
    ++meter.index_visits;
    BucketId p = node(x).parent;
    if (node(p).right == x) pos += cnt(node(p).left) + 1;
    x = p;
  }
  return pos;
}

void BucketIndex::insert_after(BucketId after, const Item& item,
                               CostMeter& meter) {
  const std::size_t pos = after == kNoBucket ? 0 : position(after, meter) + 1;
  auto [l, r] = split(root_, pos, meter);
  BucketId mid = make_node(item);
  root_ = merge(merge(l, mid, meter), r, meter);
  node(root_).parent = kNoBucket;
}

void BucketIndex::erase(BucketId id, CostMeter& meter) {
  const std::size_t pos = position(id, meter);
  auto [l, rest] = split(root_, pos, meter);
  auto [mid, r] = split(rest, 1, meter);
  if (mid != id) throw std::logic_error("bucket index position mismatch");
  root_ = merge(l, r, meter);
  if (root_ != kNoBucket) node(root_).parent = kNoBucket;
  node(id) = Node{};
}

void BucketIndex::add_size(BucketId id, std::ptrdiff_t delta,
                           CostMeter& meter) {
  node(id).size = static_cast<std::size_t>(
      static_cast<std::ptrdiff_t>(node(id).size) + delta);
  for (BucketId x = id; x != kNoBucket; x = node(x).parent) {
    ++meter.index_visits;
    node(x).sum = static_cast<std::size_t>(
        static_cast<std::ptrdiff_t>(node(x).sum) + delta);
  }
}

void BucketIndex::set_hi(BucketId id, std::optional<Key> hi) {
  node(id).hi = hi;
}

std::size_t BucketIndex::prefix_before(BucketId id, CostMeter& meter) const {
  std::size_t before = sum(node(id).left);
  BucketId x = id;
  while (node(x).parent != kNoBucket) {
    ++meter.index_visits;
    BucketId p = node(x).parent;
    if (node(p).right == x) before += sum(node(p).left) + node(p).size;
    x = p;
  }
  return before;
}

BucketIndex::RankHit BucketIndex::find_rank(std::size_t r,
                                            CostMeter& meter) const {
  if (r < 1 || r > total()) throw std::out_of_range("rank outside index");
  BucketId x = root_;
  std::size_t before = 0;
  for (;;) {
    ++meter.index_visits;
    const Node& n = node(x);
    const std::size_t left_sum = sum(n.left);
    if (r <= before + left_sum) {
      x = n.left;
    } else if (r <= before + left_sum + n.size) {
      return {x, before + left_sum};
    } else {
      before += left_sum + n.size;
      x = n.right;
    }
  }
}

BucketId BucketIndex::route(Key key, CostMeter& meter) const {
  BucketId x = root_, best = kNoBucket;
  while (x != kNoBucket) {
    ++meter.index_visits;
    const Node& n = node(x);
    if (!n.hi || key <= *n.hi) {
      best = x;
      x = n.left;
    } else {
      x = n.right;
    }
  }
  return best;
}

std::vector<BucketId> BucketIndex::in_order() const {
  std::vector<BucketId> out, stack;
  BucketId x = root_;
  while (x != kNoBucket || !stack.empty()) {
    while (x != kNoBucket) {
      stack.push_back(x);
      x = node(x).left;
    }
    x = stack.back();
    stack.pop_back();
    out.push_back(x);
    x = node(x).right;
  }
  return out;
}

bool BucketIndex::sums_consistent() const {
  bool ok = true;
  for (BucketId id : in_order()) {
    const Node& n = node(id);
    if (n.sum != n.size + sum(n.left) + sum(n.right)) ok = false;
    if (n.count != 1 + cnt(n.left) + cnt(n.right)) ok = false;
    if (n.left != kNoBucket && node(n.left).parent != id) ok = false;
    if (n.right != kNoBucket && node(n.right).parent != id) ok = false;
  }
  return ok;
}

}  // namespace sloppy
