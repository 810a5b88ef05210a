#include "sloppy/variant1.hpp"

#include <algorithm>
#include <stdexcept>

#include "sloppy/selection.hpp"

namespace sloppy {

Variant1Heap::Variant1Heap(std::size_t k) : k_(k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
}

CostMeter Variant1Heap::snapshot_meter() {
  CostMeter out = meter_;
  meter_ = CostMeter{};
  return out;
}

std::vector<Key> Variant1Heap::gather() {
  std::vector<Key> all = std::move(flat_);
  flat_.clear();
  for (auto& b : buckets_) {
    all.insert(all.end(), b.begin(), b.end());
    meter_.moves += b.size();
  }
  all.insert(all.end(), overflow_.begin(), overflow_.end());
  meter_.moves += overflow_.size();
  buckets_.clear();
  overflow_.clear();
  return all;
}

void Variant1Heap::reorganize() {
  std::vector<Key> all = gather();
  const std::size_t parts = 3 * k_;
  selection::partition_into_groups(all, parts, &meter_);
  const std::size_t n = all.size();
  buckets_.assign(parts, {});
  for (std::size_t j = 0; j < parts; ++j) {
    auto first = all.begin() + static_cast<std::ptrdiff_t>(j * n / parts);
    auto last = all.begin() + static_cast<std::ptrdiff_t>((j + 1) * n / parts);
    buckets_[j].assign(first, last);
    meter_.moves += buckets_[j].size();
  }
  ops_left_ = (n + parts - 1) / parts;
  in_phase_ = true;
  ++reorganizations_;
}

void Variant1Heap::begin_op() {
  if (in_phase_) return;
  if (n_ >= 3 * k_)
    reorganize();
  else if (!buckets_.empty() || !overflow_.empty())
    flat_ = gather();
}

void Variant1Heap::end_op() {
  if (in_phase_ && --ops_left_ == 0) in_phase_ = false;
}

void Variant1Heap::insert(Key x) {
  begin_op();
  ++meter_.moves;
  ++n_;
  if (!in_phase_) {
    flat_.push_back(x);
    return;
  }
  overflow_.push_back(x);
  end_op();
}

Key Variant1Heap::delete_group(std::size_t i) {
  if (i < 1 || i > k_) throw std::out_of_range("group index");
  if (n_ == 0) throw std::logic_error("delete from an empty heap");
  begin_op();
  if (in_phase_) {
    // Middle bucket of the triple first, then its two neighbours.
    const std::size_t mid = middle_bucket(i) - 1;
    for (std::size_t b : {mid, mid - 1, mid + 1}) {
      auto& bucket = buckets_[b];
      if (bucket.empty()) continue;
      if (b != mid) ++borrowed_;
      const Key x = bucket.back();
      bucket.pop_back();
      ++meter_.moves;
      --n_;
      end_op();
      return x;
    }
    // Whole triple drained: fall back to a rebuild and brute force.
    in_phase_ = false;
    flat_ = gather();
  }
  const GroupInterval g = group_interval(n_, k_, i);
  const std::size_t r = std::clamp<std::size_t>((g.lo + g.hi) / 2, 1, n_);
  const Key x = selection::select_kth(flat_, r, &meter_);
  std::swap(flat_[r - 1], flat_.back());
  flat_.pop_back();
  ++meter_.moves;
  --n_;
  return x;
}

}  // namespace sloppy
