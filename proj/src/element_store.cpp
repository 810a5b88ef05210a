#include "sloppy/element_store.hpp"

#include <algorithm>
#include <utility>

namespace sloppy {

ElementStore::ElementStore(std::vector<Key> segment) {
  size_ = segment.size();
  if (!segment.empty()) segments_.push_back(std::move(segment));
}

void ElementStore::push_back(Key x) {
  if (segments_.empty()) segments_.emplace_back();
  segments_.back().push_back(x);
  ++size_;
}

void ElementStore::pop_back() {
  segments_.back().pop_back();
  --size_;
  if (segments_.back().empty()) segments_.pop_back();
}

void ElementStore::splice_back(ElementStore&& other) {
  if (other.segments_.empty()) return;
  segments_.splice(segments_.end(), other.segments_);
  size_ += other.size_;
  other.size_ = 0;
}

bool ElementStore::contains(Key x) const {
  for (const auto& seg : segments_)
    if (std::find(seg.begin(), seg.end(), x) != seg.end()) return true;
  return false;
}

std::vector<Key> ElementStore::to_vector() && {
  if (segments_.size() == 1) {
    std::vector<Key> out = std::move(segments_.front());
    segments_.clear();
    size_ = 0;
    return out;
  }
  std::vector<Key> out;
  out.reserve(size_);
  for (auto& seg : segments_) out.insert(out.end(), seg.begin(), seg.end());
  segments_.clear();
  size_ = 0;
  return out;
}

}  // namespace sloppy
