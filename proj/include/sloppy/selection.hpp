#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sloppy/types.hpp"

namespace sloppy::selection {

/// Resumable in-place nth-element over a caller-owned array.
///
/// Large ranges take their pivot from a sample of about sqrt(len) elements,
/// at the sample rank matching the target's relative position, nudged toward
/// the middle so the target usually ends up in the smaller side. Small ranges
/// use median-of-three. Once the partitioned lengths of a frame add up to
/// four times its size, later rounds use a median-of-medians pivot (groups
/// of five), which bounds the worst case linearly. Recursion for that pivot lives on an explicit frame stack, so a
/// step boundary can fall between any two elementary operations. Every
/// micro-step costs exactly one comparison or one swap.
///
/// The array is passed to every step() call and must be the same array
/// (same contents as left by the previous call) each time.
class SelectMachine {
 public:
  SelectMachine() = default;
  SelectMachine(std::size_t size, std::size_t target);

  /// Runs at most `budget` elementary operations. Returns done().
  bool step(std::span<Key> data, std::uint64_t budget, CostMeter& meter);
  bool done() const { return stack_.empty(); }
  std::size_t target() const { return target_; }

 private:
  enum class Kind : std::uint8_t { Select, Sort };
  enum class Pc : std::uint8_t {
    Start,
    Med3Cmp1, Med3Swap1, Med3Cmp2, Med3Swap2, Med3Cmp3, Med3Swap3,
    Med3ToFront,
    MomGroup, MomMedian, MomRecurse, MomToFront,
    SampleSwap, SampleRecurse, SampleToFront,
    PartInit, ScanI, ScanJ, PartCheck, PartSwap, PartFinish, Narrow,
    SortOuter, SortCmp, SortSwap,
    Finish,
  };
  static constexpr std::size_t kNoCredit = static_cast<std::size_t>(-1);
  struct Frame {
    Kind kind;
    Pc pc;
    std::size_t lo, hi, target;
    std::size_t i = 0, j = 0, g = 0, groups = 0;
    bool use_mom = false;
    Key pivot = 0;
    std::size_t credit = kNoCredit;  // range length still allowed before MoM
  };

  void micro_step(std::span<Key> a, CostMeter& meter);

  std::vector<Frame> stack_;
  std::size_t target_ = 0;
};

/// Incremental median split of a frozen input, as consumed by a bucket
/// split: selects rank ceil(|input|/2), then moves everything above that
/// rank into its own vector (one move per element, same budget).
class SelectJob {
 public:
  struct Result {
    Key pivot = 0;
    std::vector<Key> lower;  // every element <= pivot
    std::vector<Key> upper;  // every element >= pivot
  };

  /// Throws std::invalid_argument on empty input.
  explicit SelectJob(std::vector<Key> input);

  /// Runs at most `budget` elementary operations. Returns true once Done;
  /// after that, further calls cost nothing.
  bool step(std::uint64_t budget);
  bool done() const { return stage_ == Stage::Done; }

  /// Valid once done().
  const Result& result() const { return result_; }
  Result take_result() { return std::move(result_); }

  /// Elementary operations spent so far.
  const CostMeter& meter() const { return meter_; }
  std::size_t input_size() const { return input_size_; }

  /// Some element currently held by the job.
  Key any_element() const;

  /// Every element held by the job, abandoning it.
  std::vector<Key> release() &&;

 private:
  enum class Stage : std::uint8_t { Selecting, Detaching, Done };

  std::vector<Key> work_;
  SelectMachine machine_;
  Stage stage_ = Stage::Selecting;
  std::size_t input_size_ = 0;
  std::size_t detach_cursor_ = 0;
  Result result_;
  CostMeter meter_;
};

/// Element of 1-based rank r in `seq`. Permutes `seq`. Throws
/// std::out_of_range unless 1 <= r <= |seq|.
Key select_kth(std::span<Key> seq, std::size_t r, CostMeter* meter = nullptr);

/// Permutes `seq` so that consecutive blocks hold `parts` quantile groups,
/// block j covering ranks [floor(j n/parts), floor((j+1) n/parts)). Runs in
/// O(n log parts) by selecting the middle boundary and recursing.
void partition_into_groups(std::span<Key> seq, std::size_t parts,
                           CostMeter* meter = nullptr);

/// Places up to `items` elements taken from the back of `p2` into `lower`
/// (<= pivot) or `upper` (> pivot). One comparison and one move per item.
template <class Source>
void partition_step(Key pivot, std::vector<Key>& lower,
                    std::vector<Key>& upper, Source& p2, std::size_t items,
                    CostMeter& meter) {
  for (std::size_t placed = 0; placed < items && !p2.empty(); ++placed) {
    Key x = p2.back();
    p2.pop_back();
    ++meter.comparisons;
    ++meter.moves;
    if (x <= pivot)
      lower.push_back(x);
    else
      upper.push_back(x);
  }
}

}  // namespace sloppy::selection
