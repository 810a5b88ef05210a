#include "sloppy/applications.hpp"

#include <algorithm>
#include <bit>
#include <random>

#include "sloppy/oracle.hpp"
#include "sloppy/sloppy_heap.hpp"

namespace sloppy {

std::size_t sort_window(std::size_t n, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  return std::max<std::size_t>(1, (n + k - 1) / k);
}

std::vector<Key> approx_sort(std::span<const Key> seq, std::size_t k,
                             CostMeter* meter) {
  SloppyHeap heap(HeapConfig::with_k(k));
  for (Key x : seq) heap.insert(x);
  std::vector<Key> out;
  out.reserve(seq.size());
  for (std::size_t j = 0; j < seq.size(); ++j) out.push_back(heap.delete_group(1));
  if (meter) *meter += heap.meter();
  return out;
}

namespace {

std::uint64_t ceil_log2(std::size_t x) {
  return x <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(x - 1));
}

}  // namespace

std::uint64_t fixup_budget(std::size_t n, std::size_t L) {
  return static_cast<std::uint64_t>(n) * (ceil_log2(std::max<std::size_t>(L, 1)) + 1);
}

FixupResult fixup_sort(std::span<const Key> approx, std::size_t L) {
  if (L == 0) throw std::invalid_argument("L must be at least 1");
  FixupResult res;
  // Built back to front: rev holds the sorted list reversed, so inserting
  // near the front of the list is a cheap insert near the end of rev.
  std::vector<Key> rev;
  rev.reserve(approx.size());
  for (std::size_t idx = approx.size(); idx-- > 0;) {
    const Key x = approx[idx];
    const std::size_t len = rev.size();
    auto S = [&](std::size_t p) { return rev[len - 1 - p]; };
    // At most L-1 remaining items are smaller, so x goes to a slot in [0, w].
    const std::size_t w = std::min(L - 1, len);
    std::size_t lo = 0, hi = w;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      ++res.comparisons;
      if (S(mid) < x)
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo == w && w < len) {
      ++res.comparisons;
      if (S(w) < x)
        throw FixupPreconditionError(
            idx + 1, "item at position " + std::to_string(idx + 1) +
                         " lies beyond the first " + std::to_string(L) + " slots");
    }
    rev.insert(rev.end() - static_cast<std::ptrdiff_t>(lo), x);
    res.moves += lo + 1;
  }
  res.sorted.assign(rev.rbegin(), rev.rend());
  return res;
}

DeviationProfile deviation_profile(std::span<const Key> output, std::size_t L) {
  DeviationProfile prof;
  prof.L = L;
  std::vector<Key> sorted(output.begin(), output.end());
  std::sort(sorted.begin(), sorted.end());
  prof.deviation.reserve(output.size());
  for (std::size_t j = 1; j <= output.size(); ++j) {
    const Key x = output[j - 1];
    const auto lo = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) + 1;
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
    std::int64_t d = 0;
    if (j < lo)
      d = static_cast<std::int64_t>(lo - j);
    else if (j > hi)
      d = -static_cast<std::int64_t>(j - hi);
    prof.deviation.push_back(d);
    prof.max_overshoot = std::max(prof.max_overshoot, d);
    prof.max_undershoot = std::max(prof.max_undershoot, -d);
  }
  return prof;
}

MediocreReport mediocre_check(std::span<const TraceRecord> stream) {
  SloppyHeap heap(HeapConfig::with_k(3));
  OracleSet oracle;
  MediocreReport rep;
  for (const TraceRecord& r : stream) {
    switch (r.op) {
      case OpType::Insert:
        heap.insert(r.value);
        oracle.insert(r.value);
        break;
      case OpType::ReadGroup: {
        const std::size_t n = oracle.size();
        if (n < 3) throw std::invalid_argument("mediocre read with fewer than 3 items");
        if (r.group() != 2) throw std::invalid_argument("mediocre stream reads group 2 only");
        const Key x = heap.read_group(2);
        ++rep.reads;
        const std::size_t third = n / 3;
        const RankInterval f = oracle.contains(x) ? oracle.feasible_ranks(x)
                                                  : RankInterval{0, 0};
        if (f.hi < third + 1 || f.lo > n - third) ++rep.violations;
        break;
      }
      case OpType::DeleteGroup:
        throw std::invalid_argument("mediocre stream has no deletes");
    }
  }
  return rep;
}

std::vector<TraceRecord> mediocre_stream(std::uint64_t seed, std::size_t n_ops) {
  std::mt19937_64 rng(seed);
  std::vector<TraceRecord> out;
  out.reserve(n_ops);
  std::size_t n = 0;
  for (std::size_t op = 0; op < n_ops; ++op) {
    if (n >= 3 && rng() % 2 == 0) {
      out.push_back(TraceRecord::read(2));
    } else {
      out.push_back(TraceRecord::insert(static_cast<Key>(rng() % 1'000'000)));
      ++n;
    }
  }
  return out;
}

}  // namespace sloppy
