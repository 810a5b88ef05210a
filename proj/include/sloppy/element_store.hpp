#pragma once

#include <cstddef>
#include <list>
#include <vector>

#include "sloppy/types.hpp"

namespace sloppy {

/// Unordered multiset of keys kept as a list of segments, so two stores
/// concatenate in O(1) regardless of their sizes.
class ElementStore {
 public:
  ElementStore() = default;
  explicit ElementStore(std::vector<Key> segment);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::size_t segment_count() const { return segments_.size(); }

  void push_back(Key x);
  Key back() const { return segments_.back().back(); }
  void pop_back();

  /// Moves every segment of `other` to the end of this store; O(1).
  void splice_back(ElementStore&& other);

  bool contains(Key x) const;

  template <class F>
  void for_each(F&& f) const {
    for (const auto& seg : segments_)
      for (Key x : seg) f(x);
  }

  /// Flattens into one vector (O(size)).
  std::vector<Key> to_vector() &&;

 private:
  std::list<std::vector<Key>> segments_;
  std::size_t size_ = 0;
};

}  // namespace sloppy
