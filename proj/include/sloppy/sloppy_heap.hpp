#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sloppy/adjacency_heap.hpp"
#include "sloppy/bucket_index.hpp"
#include "sloppy/element_store.hpp"
#include "sloppy/selection.hpp"
#include "sloppy/types.hpp"

namespace sloppy {

/// num * n / (den * k), the form every size threshold takes.
struct Fraction {
  std::uint64_t num;
  std::uint64_t den;

  std::size_t ceil_of(std::size_t n, std::size_t k) const {
    return ceil_frac(num, n, den * k);
  }
  std::size_t floor_of(std::size_t n, std::size_t k) const {
    return floor_frac(num, n, den * k);
  }
};

struct HeapConfig {
  std::size_t k = 1;
  std::uint64_t phase_a_budget = 500;
  std::size_t phase_b_items = 10;
  Fraction large_threshold{9, 30};
  Fraction merge_threshold{5, 30};
  Fraction max_bucket{1, 3};
  Fraction p1_fraction{88, 300};
  std::size_t boot_up = 36;
  std::size_t boot_down = 18;
  std::size_t initial_buckets = 6;

  /// Defaults for a given k: boot_up 36k, boot_down 18k, 6k initial buckets.
  static HeapConfig with_k(std::size_t k);

  /// Throws ConfigError when an invariant of the configuration fails.
  void validate() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyHeapError : public std::logic_error {
 public:
  EmptyHeapError() : std::logic_error("operation on an empty heap") {}
};

enum class Mode : std::uint8_t { Flat, Bucketized };

enum class SplitPhase : std::uint8_t {
  SelectingMedian,
  Partitioning,
  ReadyToFinalize,
};

/// Event counters. The *_failures fields count bound checks, made at event
/// time against the reference constants (4/30, 5/30, 6/30, 120), that did
/// not hold while n >= boot_up. Misses below boot_up, where the size
/// invariants are not in force, go to band_bound_failures instead.
struct HeapStats {
  std::uint64_t splits = 0;
  std::uint64_t degenerate_splits = 0;
  std::uint64_t merges = 0;
  std::uint64_t transitions_up = 0;
  std::uint64_t transitions_down = 0;
  std::uint64_t jobs_started = 0;
  std::uint64_t jobs_abandoned = 0;
  std::uint64_t declined_merge_tests = 0;
  std::uint64_t split_bound_failures = 0;
  std::uint64_t merge_bound_failures = 0;
  std::uint64_t declined_certificate_failures = 0;
  std::uint64_t deadline_failures = 0;
  std::uint64_t band_bound_failures = 0;
  std::uint64_t phase_a_over_budget = 0;  // finished above 10 |P1|
  std::uint64_t phase_a_overruns = 0;     // eager-completion fallback fired
  std::uint64_t p2_underflows = 0;
  std::uint64_t containment_misses = 0;
  std::uint64_t merge_under_split = 0;
  std::uint64_t max_split_accesses = 0;
  double max_phase_a_ratio = 0.0;  // selection cost / |P1|
};

struct AuditCheck {
  std::string name;
  bool passed = true;
  bool hard = true;  // soft checks report transient excursions
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;

  bool ok() const;       // all hard checks passed
  bool all_ok() const;   // every check passed
  const AuditCheck* find(const std::string& name) const;
  std::string to_string() const;
};

enum class AuditDepth : std::uint8_t { Quick, Full };

/// One bucket in chain order, for dumps and golden tests.
struct BucketView {
  BucketId id;
  std::size_t size;
  std::optional<Key> lo;  // nullopt: -infinity
  bool lo_closed;
  std::optional<Key> hi;  // nullopt: +infinity
  std::optional<SplitPhase> split_phase;
};

/// 1-based inclusive range of quantile-group indices.
struct GroupRange {
  std::size_t first;
  std::size_t last;
  friend bool operator==(const GroupRange&, const GroupRange&) = default;
};

/// Dynamic multiset answering "give me an element of the i-th of k quantile
/// groups" in O(log k) worst-case time per operation.
///
/// Below boot_down elements the set is a flat array served by brute force.
/// Above boot_up it is a chain of unordered buckets with ordered key
/// intervals: each operation touches its operation bucket and the next bucket
/// of a round-robin cursor, advancing any background split job of either by a
/// fixed slice of work. A min-heap of adjacent-pair sizes drives merges.
class SloppyHeap {
 public:
  explicit SloppyHeap(HeapConfig config);
  ~SloppyHeap();
  SloppyHeap(SloppyHeap&&) noexcept;
  SloppyHeap& operator=(SloppyHeap&&) noexcept;

  /// Bucketized heap with the given buckets, in key order. Each bucket must
  /// be nonempty and no key may exceed a key of a later bucket.
  static SloppyHeap from_buckets(HeapConfig config,
                                 std::vector<std::vector<Key>> buckets);

  void insert(Key x);
  /// Throws EmptyHeapError, or std::out_of_range unless 1 <= i <= k.
  Key delete_group(std::size_t i);
  Key read_group(std::size_t i);

  /// Groups spanned by the bucket whose key interval holds x.
  GroupRange approx_rank(Key x) const;
  bool contains(Key x) const;

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }
  Mode mode() const { return mode_; }
  std::size_t bucket_count() const { return mode_ == Mode::Flat ? 0 : t_; }
  std::size_t bucket_ceiling() const { return 12 * config_.k; }
  std::size_t max_bucket_size() const;
  const HeapConfig& config() const { return config_; }
  const HeapStats& stats() const { return stats_; }

  /// Counters accumulated since the previous snapshot; resets them.
  CostMeter snapshot_meter();
  const CostMeter& meter() const { return meter_; }

  AuditReport audit(AuditDepth depth = AuditDepth::Full) const;

  std::vector<BucketView> dump() const;
  std::string dump_string() const;

  // Internal steps, public for tests and tooling.

  void transition_mode();
  BucketId locate_quantile_bucket(std::size_t i);
  BucketId advance_round_robin();
  void run_background(BucketId b);
  void maybe_start_split(BucketId b);
  void merge_test();
  BucketId round_robin_cursor() const { return cursor_; }
  std::vector<BucketId> chain() const;
  std::optional<BucketView> bucket(BucketId b) const;
  std::size_t p1_size(BucketId b) const;
  std::size_t p2_size(BucketId b) const;
  std::size_t split_accesses(BucketId b) const;
  void corrupt_adjacency_for_test(BucketId left, std::size_t sum);

 private:
  struct SplitJob;
  struct Bucket;

  Bucket& at(BucketId b);
  const Bucket& at(BucketId b) const;
  bool alive(BucketId b) const;
  BucketId allocate();
  void release(BucketId b);

  void to_bucketized();
  void to_flat();
  void install(std::vector<std::vector<Key>> groups);

  void tick(BucketId op);
  void resize_bucket(BucketId b, std::ptrdiff_t delta);
  void refresh_pair(BucketId left);
  Key take_from(BucketId b);
  Key peek(BucketId b) const;
  void finish_phase_a(BucketId b);
  void finalize_split(BucketId b);
  void bound_failure(std::uint64_t& steady_counter);
  void remove_bucket(BucketId b);
  void snap_cursor_from(BucketId removed, BucketId successor);
  Key flat_select(std::size_t i, bool remove);

  HeapConfig config_;
  Mode mode_ = Mode::Flat;
  std::size_t n_ = 0;
  std::vector<Key> flat_;

  std::vector<Bucket> buckets_;
  std::vector<BucketId> free_;
  std::size_t t_ = 0;
  BucketId head_ = kNoBucket;
  BucketId cursor_ = kNoBucket;
  bool cursor_snapped_ = false;
  BucketIndex index_;
  AdjacencyHeap pairs_;

  mutable CostMeter meter_;
  mutable HeapStats stats_;
};

}  // namespace sloppy
