#include "sloppy/adjacency_heap.hpp"

#include <stdexcept>

namespace sloppy {

namespace {
constexpr std::size_t npos = static_cast<std::size_t>(-1);
}

bool AdjacencyHeap::contains(BucketId left) const {
  return left < pos_.size() && pos_[left] != npos;
}

void AdjacencyHeap::place(std::size_t pos, Entry e) {
  heap_[pos] = e;
  pos_[e.left] = pos;
}

void AdjacencyHeap::sift_up(std::size_t pos, CostMeter& meter) {
  Entry e = heap_[pos];
  while (pos > 0) {
    ++meter.heap_visits;
    std::size_t parent = (pos - 1) / 2;
    if (!before(e, heap_[parent])) break;
    place(pos, heap_[parent]);
    pos = parent;
  }
  place(pos, e);
}

void AdjacencyHeap::sift_down(std::size_t pos, CostMeter& meter) {
  Entry e = heap_[pos];
  const std::size_t n = heap_.size();
  for (;;) {
    std::size_t child = 2 * pos + 1;
    if (child >= n) break;
    ++meter.heap_visits;
    if (child + 1 < n && before(heap_[child + 1], heap_[child])) ++child;
    if (!before(heap_[child], e)) break;
    place(pos, heap_[child]);
    pos = child;
  }
  place(pos, e);
}

void AdjacencyHeap::push(BucketId left, std::size_t sum, CostMeter& meter) {
  if (contains(left)) throw std::logic_error("adjacency entry already present");
  if (left >= pos_.size()) pos_.resize(left + 1, npos);
  heap_.push_back({sum, left});
  pos_[left] = heap_.size() - 1;
  ++meter.heap_visits;
  sift_up(heap_.size() - 1, meter);
}

void AdjacencyHeap::update(BucketId left, std::size_t sum, CostMeter& meter) {
  if (!contains(left)) throw std::logic_error("adjacency entry missing");
  const std::size_t pos = pos_[left];
  const std::size_t old = heap_[pos].sum;
  heap_[pos].sum = sum;
  ++meter.heap_visits;
  if (sum < old)
    sift_up(pos, meter);
  else if (sum > old)
    sift_down(pos, meter);
}

void AdjacencyHeap::erase(BucketId left, CostMeter& meter) {
  if (!contains(left)) throw std::logic_error("adjacency entry missing");
  const std::size_t pos = pos_[left];
  pos_[left] = npos;
  ++meter.heap_visits;
  Entry last = heap_.back();
  heap_.pop_back();
  if (pos == heap_.size()) return;
  place(pos, last);
  sift_up(pos, meter);
  sift_down(pos_[last.left], meter);
}

void AdjacencyHeap::clear() {
  heap_.clear();
  pos_.clear();
}

std::optional<AdjacencyHeap::Entry> AdjacencyHeap::top() const {
  if (heap_.empty()) return std::nullopt;
  return heap_.front();
}

std::optional<std::size_t> AdjacencyHeap::sum_of(BucketId left) const {
  if (!contains(left)) return std::nullopt;
  return heap_[pos_[left]].sum;
}

void AdjacencyHeap::corrupt_for_test(BucketId left, std::size_t sum) {
  if (!contains(left)) throw std::logic_error("adjacency entry missing");
  heap_[pos_[left]].sum = sum;
}

}  // namespace sloppy
