#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sloppy/sloppy_heap.hpp"
#include "sloppy/trace.hpp"

namespace sloppy {

struct OpRecord {
  std::size_t index = 0;
  OpType op = OpType::Insert;
  std::size_t group = 0;       // 0 for inserts
  std::optional<Key> result;   // nullopt for inserts and failed ops
  std::optional<bool> valid;   // nullopt when unchecked
  std::uint64_t cost = 0;
  std::size_t n = 0;           // after the op
  std::size_t buckets = 0;
  std::uint64_t splits = 0;    // this step
  std::uint64_t merges = 0;
  bool transition = false;
};

struct OpSummary {
  std::uint64_t count = 0;
  std::uint64_t max_cost = 0;
  double mean_cost = 0.0;
};

struct RunReport {
  std::size_t k = 0;
  std::string header;  // free-form provenance line (generator, seed, dist)
  std::vector<OpRecord> records;
  std::array<OpSummary, 3> by_type{};  // indexed by OpType

  std::size_t ops = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t empty_errors = 0;  // group op on an empty structure
  std::uint64_t max_cost = 0;
  std::uint64_t steady_max_cost = 0;  // Bucketized, no transition
  std::size_t steady_ops = 0;

  std::size_t bucket_count_failures = 0;
  std::size_t audits = 0;
  std::size_t audit_failures = 0;
  std::string first_audit_failure;
  // Bucket-size ceiling ceil(n/3k) while n >= boot_up.
  std::size_t i1_excursions = 0;
  std::size_t i1_unhealed = 0;
  std::size_t i1_longest = 0;  // ops until the longest excursion healed

  HeapStats stats;

  std::optional<std::size_t> v1_violations;
  std::uint64_t v1_cost = 0;
  std::size_t v1_ops = 0;

  bool passed() const {
    return violations == 0 && audit_failures == 0 && bucket_count_failures == 0 &&
           v1_violations.value_or(0) == 0;
  }
};

struct RunOptions {
  std::optional<HeapConfig> config;  // default: HeapConfig::with_k(k)
  bool keep_records = true;
  bool with_oracle = true;
  bool with_variant1 = false;
  /// Full audit every this many ops (0: only at the end).
  std::size_t audit_every = 0;
  /// An I1 excursion must heal within this many ops (0: 12k).
  std::size_t heal_window = 0;
  /// Steady-state maxima only count ops at or after this index.
  std::size_t measure_from = 0;
};

RunReport run_verify(const Trace& trace, std::size_t k, RunOptions opts = {});
/// As run_verify without the oracle.
RunReport run_bench(const Trace& trace, std::size_t k, RunOptions opts = {});

inline constexpr std::string_view kCsvHeader =
    "op_index,op_type,group,result,valid,cost,n,buckets,splits,merges,transition";
void write_csv(std::ostream& out, const RunReport& report);
void write_summary(std::ostream& out, const RunReport& report);

/// n_target random inserts, then n_steady ops alternating an ascending-key
/// insert with a delete_group of a uniform group. n stays near n_target while
/// the top bucket keeps filling, so splits recur at that size.
Trace plateau_trace(std::uint64_t seed, std::size_t n_target,
                    std::size_t n_steady, std::size_t k);

/// Newline-separated integers; blank lines and `#` comments are skipped.
/// Throws TraceParseError naming the offending line.
std::vector<Key> parse_integers(std::string_view text);

struct SortReport {
  std::vector<Key> sorted;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t L = 0;
  std::int64_t max_overshoot = 0;
  std::int64_t max_undershoot = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t budget = 0;
  bool exact = false;  // equals a reference sort

  bool passed() const {
    return exact && comparisons <= budget &&
           max_overshoot <= static_cast<std::int64_t>(L) - 1;
  }
};

SortReport run_sort(std::span<const Key> input, std::size_t k);
void write_summary(std::ostream& out, const SortReport& report);

}  // namespace sloppy
