#include "sloppy/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace sloppy::selection {

namespace {
constexpr std::size_t kSortCutoff = 5;
constexpr std::size_t kGroup = 5;
constexpr std::size_t kSampleMin = 400;
// A frame may partition this many times its length before falling back.
constexpr std::size_t kCreditFactor = 4;

std::size_t isqrt(std::size_t x) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(x)));
  while (r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  return r;
}
}  // namespace

SelectMachine::SelectMachine(std::size_t size, std::size_t target)
    : target_(target) {
  if (target >= size) throw std::out_of_range("select target out of range");
  stack_.push_back(Frame{Kind::Select, Pc::Start, 0, size, target});
}

bool SelectMachine::step(std::span<Key> data, std::uint64_t budget,
                         CostMeter& meter) {
  const std::uint64_t start = meter.elementary();
  while (!stack_.empty() && meter.elementary() - start < budget)
    micro_step(data, meter);
  return done();
}

// Performs zero-cost control transitions until exactly one comparison or
// swap has been done, or the stack empties.
void SelectMachine::micro_step(std::span<Key> a, CostMeter& meter) {
  auto less = [&](std::size_t x, std::size_t y) {
    ++meter.comparisons;
    return a[x] < a[y];
  };
  auto swap = [&](std::size_t x, std::size_t y) {
    ++meter.moves;
    std::swap(a[x], a[y]);
  };

  while (!stack_.empty()) {
    Frame& f = stack_.back();
    switch (f.pc) {
      case Pc::Start: {
        const std::size_t len = f.hi - f.lo;
        if (len <= 1) {
          stack_.pop_back();
          continue;
        }
        if (f.credit == kNoCredit) f.credit = kCreditFactor * len;
        if (len <= kSortCutoff) {
          f.pc = Pc::Finish;
          Frame sort{Kind::Sort, Pc::SortOuter, f.lo, f.hi, 0};
          sort.i = f.lo + 1;
          stack_.push_back(sort);
          continue;
        }
        if (f.use_mom) {
          f.g = 0;
          f.groups = len / kGroup;
          f.pc = Pc::MomGroup;
        } else if (len >= kSampleMin) {
          // Sample s spread-out elements into [lo, lo+s); pivot is the sample
          // element of rank m.
          const std::size_t s = isqrt(len) | 1;
          const std::size_t d = isqrt(s) + 1;
          const std::size_t rel = f.target - f.lo;
          const std::size_t at = rel * (s + 1) / len;
          std::size_t m;
          if (2 * rel < len)
            m = std::min(s - 1, at + d);
          else
            m = at > d ? at - d - 1 : 0;
          f.g = 0;
          f.groups = s;
          f.i = len / s;  // stride
          f.j = m;
          f.pc = Pc::SampleSwap;
        } else {
          f.pc = Pc::Med3Cmp1;
        }
        continue;
      }

      // Median of three: order a[lo] <= a[mid] <= a[hi-1], then bring the
      // middle one to the front as pivot.
      case Pc::Med3Cmp1: {
        const std::size_t mid = f.lo + (f.hi - f.lo) / 2;
        f.pc = less(mid, f.lo) ? Pc::Med3Swap1 : Pc::Med3Cmp2;
        return;
      }
      case Pc::Med3Swap1:
        swap(f.lo, f.lo + (f.hi - f.lo) / 2);
        f.pc = Pc::Med3Cmp2;
        return;
      case Pc::Med3Cmp2: {
        const std::size_t mid = f.lo + (f.hi - f.lo) / 2;
        f.pc = less(f.hi - 1, mid) ? Pc::Med3Swap2 : Pc::Med3ToFront;
        return;
      }
      case Pc::Med3Swap2:
        swap(f.lo + (f.hi - f.lo) / 2, f.hi - 1);
        f.pc = Pc::Med3Cmp3;
        return;
      case Pc::Med3Cmp3: {
        const std::size_t mid = f.lo + (f.hi - f.lo) / 2;
        f.pc = less(mid, f.lo) ? Pc::Med3Swap3 : Pc::Med3ToFront;
        return;
      }
      case Pc::Med3Swap3:
        swap(f.lo, f.lo + (f.hi - f.lo) / 2);
        f.pc = Pc::Med3ToFront;
        return;
      case Pc::Med3ToFront:
        swap(f.lo, f.lo + (f.hi - f.lo) / 2);
        f.pc = Pc::PartInit;
        return;

      // Median of medians: sort each full group of five, gather the group
      // medians at the front, select their median recursively.
      case Pc::MomGroup: {
        if (f.g == f.groups) {
          f.pc = Pc::MomRecurse;
          continue;
        }
        const std::size_t base = f.lo + kGroup * f.g;
        f.pc = Pc::MomMedian;
        Frame sort{Kind::Sort, Pc::SortOuter, base, base + kGroup, 0};
        sort.i = base + 1;
        stack_.push_back(sort);
        continue;
      }
      case Pc::MomMedian:
        swap(f.lo + f.g, f.lo + kGroup * f.g + kGroup / 2);
        ++f.g;
        f.pc = Pc::MomGroup;
        return;
      case Pc::MomRecurse: {
        f.pc = Pc::MomToFront;
        const std::size_t lo = f.lo, groups = f.groups;
        stack_.push_back(
            Frame{Kind::Select, Pc::Start, lo, lo + groups, lo + groups / 2});
        continue;
      }
      case Pc::MomToFront:
        swap(f.lo, f.lo + f.groups / 2);
        f.pc = Pc::PartInit;
        return;

      case Pc::SampleSwap:
        if (f.g == f.groups) {
          f.pc = Pc::SampleRecurse;
          continue;
        }
        if (f.g * f.i == f.g) {
          ++f.g;
          continue;
        }
        swap(f.lo + f.g, f.lo + f.g * f.i);
        ++f.g;
        return;
      case Pc::SampleRecurse: {
        f.pc = Pc::SampleToFront;
        const std::size_t lo = f.lo, s = f.groups, m = f.j;
        stack_.push_back(Frame{Kind::Select, Pc::Start, lo, lo + s, lo + m});
        continue;
      }
      case Pc::SampleToFront:
        if (f.j == 0) {
          f.pc = Pc::PartInit;
          continue;
        }
        swap(f.lo, f.lo + f.j);
        f.pc = Pc::PartInit;
        return;

      // Partition with the pivot at a[lo]; equal keys stop both scans.
      case Pc::PartInit:
        f.pivot = a[f.lo];
        f.i = f.lo;
        f.j = f.hi;
        f.pc = Pc::ScanI;
        continue;
      case Pc::ScanI:
        ++f.i;
        if (f.i >= f.hi) {
          f.pc = Pc::ScanJ;
          continue;
        }
        ++meter.comparisons;
        if (!(a[f.i] < f.pivot)) f.pc = Pc::ScanJ;
        return;
      case Pc::ScanJ:
        --f.j;
        ++meter.comparisons;
        if (!(f.pivot < a[f.j])) f.pc = Pc::PartCheck;
        return;
      case Pc::PartCheck:
        f.pc = f.i >= f.j ? Pc::PartFinish : Pc::PartSwap;
        continue;
      case Pc::PartSwap:
        swap(f.i, f.j);
        f.pc = Pc::ScanI;
        return;
      case Pc::PartFinish:
        swap(f.lo, f.j);
        f.pc = Pc::Narrow;
        return;
      case Pc::Narrow: {
        if (f.target == f.j) {
          stack_.pop_back();
          continue;
        }
        const std::size_t before = f.hi - f.lo;
        if (f.target < f.j)
          f.hi = f.j;
        else
          f.lo = f.j + 1;
        f.credit -= std::min(f.credit, before);
        f.use_mom = f.credit == 0;
        f.pc = Pc::Start;
        continue;
      }

      // Insertion sort by adjacent swaps.
      case Pc::SortOuter:
        if (f.i >= f.hi) {
          stack_.pop_back();
          continue;
        }
        f.j = f.i;
        f.pc = Pc::SortCmp;
        continue;
      case Pc::SortCmp:
        if (f.j == f.lo) {
          ++f.i;
          f.pc = Pc::SortOuter;
          continue;
        }
        if (less(f.j, f.j - 1)) {
          f.pc = Pc::SortSwap;
        } else {
          ++f.i;
          f.pc = Pc::SortOuter;
        }
        return;
      case Pc::SortSwap:
        swap(f.j - 1, f.j);
        --f.j;
        f.pc = Pc::SortCmp;
        return;

      case Pc::Finish:
        stack_.pop_back();
        continue;
    }
  }
}

SelectJob::SelectJob(std::vector<Key> input)
    : work_(std::move(input)), input_size_(work_.size()) {
  if (work_.empty()) throw std::invalid_argument("SelectJob on empty input");
  machine_ = SelectMachine(work_.size(), (work_.size() + 1) / 2 - 1);
  result_.upper.reserve(work_.size() / 2);
}

bool SelectJob::step(std::uint64_t budget) {
  const std::uint64_t start = meter_.elementary();
  auto left = [&] { return budget - (meter_.elementary() - start); };
  if (stage_ == Stage::Selecting) {
    if (!machine_.step(work_, budget, meter_)) return false;
    stage_ = Stage::Detaching;
    detach_cursor_ = machine_.target() + 1;
  }
  if (stage_ == Stage::Detaching) {
    while (detach_cursor_ < work_.size() && left() > 0) {
      result_.upper.push_back(work_[detach_cursor_++]);
      ++meter_.moves;
    }
    if (detach_cursor_ < work_.size()) return false;
    const std::size_t m = machine_.target();
    result_.pivot = work_[m];
    work_.resize(m);
    result_.lower = std::move(work_);
    work_.clear();
    stage_ = Stage::Done;
  }
  return true;
}

Key SelectJob::any_element() const {
  if (!work_.empty()) return work_.front();
  return result_.pivot;
}

std::vector<Key> SelectJob::release() && {
  if (stage_ != Stage::Done) return std::move(work_);
  std::vector<Key> out = std::move(result_.lower);
  out.push_back(result_.pivot);
  out.insert(out.end(), result_.upper.begin(), result_.upper.end());
  return out;
}

Key select_kth(std::span<Key> seq, std::size_t r, CostMeter* meter) {
  if (r < 1 || r > seq.size()) throw std::out_of_range("select_kth rank");
  CostMeter local;
  CostMeter& m = meter ? *meter : local;
  SelectMachine machine(seq.size(), r - 1);
  machine.step(seq, std::numeric_limits<std::uint64_t>::max(), m);
  return seq[r - 1];
}

void partition_into_groups(std::span<Key> seq, std::size_t parts,
                           CostMeter* meter) {
  if (parts <= 1 || seq.size() <= 1) return;
  // Boundaries are taken relative to the whole sequence so that nested
  // halves reproduce floor(j n / parts) exactly.
  struct Range {
    std::size_t first_part, last_part;  // parts [first, last)
  };
  const std::size_t n = seq.size();
  auto boundary = [&](std::size_t j) { return j * n / parts; };
  std::vector<Range> todo{{0, parts}};
  while (!todo.empty()) {
    Range r = todo.back();
    todo.pop_back();
    if (r.last_part - r.first_part < 2) continue;
    const std::size_t lo = boundary(r.first_part);
    const std::size_t hi = boundary(r.last_part);
    const std::size_t mid_part = (r.first_part + r.last_part) / 2;
    const std::size_t cut = boundary(mid_part);
    if (cut > lo && cut < hi)
      select_kth(seq.subspan(lo, hi - lo), cut - lo + 1, meter);
    todo.push_back({r.first_part, mid_part});
    todo.push_back({mid_part, r.last_part});
  }
}

}  // namespace sloppy::selection
