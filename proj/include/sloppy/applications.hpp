#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sloppy/trace.hpp"
#include "sloppy/types.hpp"

namespace sloppy {

/// ceil(n / k), at least 1.
std::size_t sort_window(std::size_t n, std::size_t k);

/// Inserts everything, then drains with delete_group(1). Every output item
/// was among the ceil(n/k) smallest remaining at its deletion.
std::vector<Key> approx_sort(std::span<const Key> seq, std::size_t k,
                             CostMeter* meter = nullptr);

struct FixupResult {
  std::vector<Key> sorted;
  std::uint64_t comparisons = 0;
  std::uint64_t moves = 0;
};

/// n * (ceil(log2 L) + 1).
std::uint64_t fixup_budget(std::size_t n, std::size_t L);

class FixupPreconditionError : public std::runtime_error {
 public:
  FixupPreconditionError(std::size_t position, const std::string& what)
      : std::runtime_error(what), position_(position) {}
  /// 1-based input position of the offending item.
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Right-to-left binary insertion; each item is searched for among the first
/// L slots only. Throws FixupPreconditionError when an item belongs further
/// right, i.e. the input was not produced by an L-smallest deleter.
FixupResult fixup_sort(std::span<const Key> approx, std::size_t L);

struct DeviationProfile {
  /// Signed distance from position j to the nearest feasible rank of a_j.
  std::vector<std::int64_t> deviation;
  std::int64_t max_overshoot = 0;   // largest positive deviation
  std::int64_t max_undershoot = 0;  // magnitude of the most negative one
  std::size_t L = 0;

  bool within_overshoot_bound() const {
    return max_overshoot <= static_cast<std::int64_t>(L) - 1;
  }
};

DeviationProfile deviation_profile(std::span<const Key> output, std::size_t L);

struct MediocreReport {
  std::size_t reads = 0;
  std::size_t violations = 0;
};

/// Replays inserts and read_group(2) on a k = 3 heap and counts reads whose
/// feasible ranks miss [floor(n/3)+1, n-floor(n/3)]. Deletes are rejected;
/// reads with n < 3 throw std::invalid_argument.
MediocreReport mediocre_check(std::span<const TraceRecord> stream);

/// Random interleaving of inserts and read_group(2); reads start once n >= 3.
std::vector<TraceRecord> mediocre_stream(std::uint64_t seed, std::size_t n_ops);

}  // namespace sloppy
