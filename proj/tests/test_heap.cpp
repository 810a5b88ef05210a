#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "sloppy/oracle.hpp"
#include "sloppy/sloppy_heap.hpp"

using namespace sloppy;

namespace {

// Consecutive keys cut into buckets of the given sizes.
std::vector<std::vector<Key>> consecutive(const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<Key>> out;
  Key next = 1;
  for (std::size_t s : sizes) {
    std::vector<Key> b(s);
    std::iota(b.begin(), b.end(), next);
    next += static_cast<Key>(s);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<std::size_t> sizes_of(const SloppyHeap& h) {
  std::vector<std::size_t> out;
  for (const BucketView& v : h.dump()) out.push_back(v.size);
  return out;
}

// First bucket has `first` elements, the rest fill up to 3000 in buckets of
// at most 90 keys.
std::vector<std::size_t> layout_3000(std::size_t first) {
  std::vector<std::size_t> s{first};
  std::size_t left = 3000 - first;
  while (left > 0) {
    const std::size_t b = std::min<std::size_t>(88, left);
    s.push_back(b);
    left -= b;
  }
  return s;
}

HeapConfig tiny(std::size_t k) {
  HeapConfig c = HeapConfig::with_k(k);
  c.boot_up = 3;
  c.boot_down = 2;
  c.initial_buckets = 1;
  return c;
}

}  // namespace

TEST_CASE("construction") {
  SloppyHeap h(HeapConfig::with_k(3));
  CHECK(h.size() == 0);
  CHECK(h.empty());
  CHECK(h.mode() == Mode::Flat);
  CHECK_THROWS_AS(SloppyHeap(HeapConfig::with_k(0)), ConfigError);
  HeapConfig bad = HeapConfig::with_k(4);
  bad.boot_down = bad.boot_up;
  CHECK_THROWS_AS(SloppyHeap{bad}, ConfigError);
  CHECK(SloppyHeap(HeapConfig::with_k(12)).bucket_ceiling() == 144);
  const HeapConfig d = HeapConfig::with_k(10);
  CHECK(d.boot_up == 360);
  CHECK(d.boot_down == 180);
  CHECK(d.initial_buckets == 60);
}

TEST_CASE("basic operations in flat mode") {
  SloppyHeap h(HeapConfig::with_k(5));
  h.insert(42);
  CHECK(h.size() == 1);
  CHECK(h.mode() == Mode::Flat);
  CHECK(h.contains(42));
  CHECK(!h.contains(41));
  CHECK(h.read_group(1) == 42);
  CHECK(h.size() == 1);
  CHECK(h.delete_group(3) == 42);
  CHECK(h.empty());
  CHECK_THROWS_AS(h.delete_group(1), EmptyHeapError);
  CHECK_THROWS_AS(h.read_group(1), EmptyHeapError);
  CHECK_THROWS_AS(h.approx_rank(1), EmptyHeapError);
  h.insert(1);
  CHECK_THROWS_AS(h.delete_group(0), std::out_of_range);
  CHECK_THROWS_AS(h.delete_group(6), std::out_of_range);
  CHECK(!SloppyHeap(HeapConfig::with_k(2)).contains(7));
}

TEST_CASE("size after mixed ops") {
  SloppyHeap h(HeapConfig::with_k(3));
  for (Key x : {5, 1, 4, 2, 3}) h.insert(x);
  h.delete_group(1);
  h.delete_group(3);
  CHECK(h.size() == 3);
}

TEST_CASE("group-valid answers against the oracle") {
  SUBCASE("1..100, k=4, group 2") {
    SloppyHeap h(HeapConfig::with_k(4));
    OracleSet o;
    for (Key x = 1; x <= 100; ++x) {
      h.insert(x);
      o.insert(x);
    }
    const Key r = h.read_group(2);
    CHECK(h.size() == 100);
    CHECK(r >= 26);
    CHECK(r <= 50);
    CHECK(o.is_valid_delete(r, 2, 4));
    const Key r2 = h.read_group(2);
    CHECK(o.is_valid_delete(r2, 2, 4));
    const Key d = h.delete_group(2);
    CHECK(o.is_valid_delete(d, 2, 4));
    CHECK(h.size() == 99);
  }
  SUBCASE("nine distinct keys, k=3, middle group") {
    SloppyHeap h(HeapConfig::with_k(3));
    for (Key x : {90, 10, 50, 30, 70, 20, 80, 40, 60}) h.insert(x);
    const Key d = h.delete_group(2);
    CHECK(d >= 40);
    CHECK(d <= 60);
  }
}

TEST_CASE("split start thresholds") {
  const HeapConfig cfg = HeapConfig::with_k(10);
  SUBCASE("89 elements stay put") {
    SloppyHeap h = SloppyHeap::from_buckets(cfg, consecutive(layout_3000(89)));
    REQUIRE(h.size() == 3000);
    const BucketId b = h.chain().front();
    h.maybe_start_split(b);
    CHECK(!h.bucket(b)->split_phase);
  }
  SUBCASE("91 elements start a job with |P1|=88, |P2|=3") {
    SloppyHeap h = SloppyHeap::from_buckets(cfg, consecutive(layout_3000(91)));
    const BucketId b = h.chain().front();
    h.maybe_start_split(b);
    CHECK(h.bucket(b)->split_phase == SplitPhase::SelectingMedian);
    CHECK(h.p1_size(b) == 88);
    CHECK(h.p2_size(b) == 3);
    // no second job on the same bucket
    h.maybe_start_split(b);
    CHECK(h.stats().jobs_started == 1);
  }
}

TEST_CASE("finalized split of a 91-element bucket") {
  SloppyHeap h =
      SloppyHeap::from_buckets(HeapConfig::with_k(10), consecutive(layout_3000(91)));
  const std::size_t t = h.bucket_count();
  const BucketId b = h.chain().front();
  h.maybe_start_split(b);
  int accesses = 0;
  while (h.bucket(b)->split_phase) {
    h.run_background(b);
    ++accesses;
    REQUIRE(accesses < 100);
  }
  CHECK(h.bucket_count() == t + 1);
  const std::vector<std::size_t> s = sizes_of(h);
  CHECK(s[0] + s[1] == 91);
  for (std::size_t j : {0u, 1u}) {
    CHECK(s[j] >= 40);
    CHECK(s[j] <= 60);
  }
  CHECK(h.stats().splits == 1);
  CHECK(h.stats().max_split_accesses <= 3);  // ceil(3000 / 1200)
  CHECK(h.stats().declined_merge_tests == 1);
  const AuditReport a = h.audit();
  CHECK_MESSAGE(a.all_ok(), a.to_string());
  // the split boundary is the pivot: everything left <= everything right
  const std::vector<BucketView> v = h.dump();
  CHECK(v[0].hi == v[1].lo);
  CHECK(v[1].lo_closed);
}

TEST_CASE("insert into a splitting bucket lands in P2") {
  HeapConfig cfg = HeapConfig::with_k(10);
  cfg.phase_a_budget = 1;
  SloppyHeap h = SloppyHeap::from_buckets(cfg, consecutive(layout_3000(91)));
  const BucketId b = h.chain().front();
  h.maybe_start_split(b);
  const std::size_t p1 = h.p1_size(b), p2 = h.p2_size(b);
  h.insert(7);
  CHECK(h.p1_size(b) == p1);
  CHECK(h.p2_size(b) == p2 + 1);
  CHECK(h.contains(7));
}

TEST_CASE("phase B places ten items per access") {
  HeapConfig cfg = HeapConfig::with_k(10);
  SloppyHeap h = SloppyHeap::from_buckets(cfg, consecutive(layout_3000(91)));
  const BucketId b = h.chain().front();
  h.maybe_start_split(b);
  // Grow P2 before phase A finishes.
  for (int j = 0; j < 22; ++j) h.insert(0);  // routes into b, ticks it too
  // Drive until partitioning is visible.
  while (h.bucket(b)->split_phase == SplitPhase::SelectingMedian) h.run_background(b);
  if (h.bucket(b)->split_phase == SplitPhase::Partitioning) {
    const std::size_t before = h.p2_size(b);
    h.run_background(b);
    if (h.bucket(b) && h.bucket(b)->split_phase)
      CHECK(h.p2_size(b) == before - 10);
  }
  while (h.bucket(b)->split_phase) h.run_background(b);
  CHECK(h.stats().splits == 1);
  const AuditReport a = h.audit();
  CHECK_MESSAGE(a.ok(), a.to_string());
}

TEST_CASE("merge test thresholds") {
  const HeapConfig cfg = HeapConfig::with_k(10);
  auto build = [&](std::size_t a, std::size_t b) {
    std::vector<std::size_t> s{a, b};
    std::size_t left = 3000 - a - b;
    while (left > 0) {
      const std::size_t x = std::min<std::size_t>(90, left);
      s.push_back(x);
      left -= x;
    }
    return SloppyHeap::from_buckets(cfg, consecutive(s));
  };
  SUBCASE("sum 50 merges") {
    SloppyHeap h = build(20, 30);
    const std::size_t t = h.bucket_count();
    h.merge_test();
    CHECK(h.bucket_count() == t - 1);
    CHECK(sizes_of(h).front() == 50);
    CHECK(h.stats().merges == 1);
  }
  SUBCASE("sum 51 is declined and certified") {
    SloppyHeap h = build(20, 31);
    const std::size_t t = h.bucket_count();
    h.merge_test();
    CHECK(h.bucket_count() == t);
    CHECK(h.stats().declined_merge_tests == 1);
    CHECK(h.stats().declined_certificate_failures == 0);
    const std::vector<std::size_t> s = sizes_of(h);
    for (std::size_t j = 0; j + 1 < s.size(); ++j) CHECK(s[j] + s[j + 1] > 50);
  }
  SUBCASE("20 + 28 gives 48") {
    SloppyHeap h = build(20, 28);
    h.merge_test();
    CHECK(sizes_of(h).front() == 48);
    CHECK(h.stats().merge_bound_failures == 0);
    const AuditReport a = h.audit();
    CHECK_MESSAGE(a.ok(), a.to_string());
  }
}

TEST_CASE("bucket removal") {
  SUBCASE("two buckets become one") {
    SloppyHeap h = SloppyHeap::from_buckets(tiny(2), {{1}, {5, 6, 7}});
    CHECK(h.bucket_count() == 2);
    CHECK(h.delete_group(1) == 1);
    CHECK(h.bucket_count() == 1);
    const AuditReport a = h.audit();
    CHECK(a.find("adjacency_count")->passed);
  }
  SUBCASE("middle bucket's interval goes to its successor; cursor snaps") {
    SloppyHeap h = SloppyHeap::from_buckets(tiny(3), {{3}, {7}, {12}});
    const std::vector<BucketId> ids = h.chain();
    CHECK(h.bucket(ids[1])->lo == 3);
    CHECK(h.bucket(ids[1])->hi == 7);
    CHECK(h.advance_round_robin() == ids[1]);
    CHECK(h.delete_group(2) == 7);
    CHECK(!h.bucket(ids[1]));
    CHECK(h.bucket(ids[2])->lo == 3);
    CHECK(!h.bucket(ids[2])->hi);
    CHECK(h.round_robin_cursor() == ids[2]);
    CHECK(h.chain() == std::vector<BucketId>{ids[0], ids[2]});
  }
  SUBCASE("last bucket gone") {
    SloppyHeap h = SloppyHeap::from_buckets(tiny(1), {{3}});
    h.delete_group(1);
    CHECK(h.empty());
    CHECK(h.mode() == Mode::Flat);
    CHECK(h.audit().ok());
  }
}

TEST_CASE("round robin visits every bucket once per cycle") {
  SloppyHeap h = SloppyHeap::from_buckets(HeapConfig::with_k(10), consecutive(layout_3000(80)));
  const std::vector<BucketId> ids = h.chain();
  std::multiset<BucketId> seen;
  for (std::size_t j = 0; j < ids.size(); ++j) seen.insert(h.advance_round_robin());
  for (BucketId id : ids) CHECK(seen.count(id) == 1);

  SloppyHeap one = SloppyHeap::from_buckets(HeapConfig::with_k(10), {{1, 2, 3}});
  const BucketId only = one.chain().front();
  CHECK(one.advance_round_robin() == only);
  CHECK(one.advance_round_robin() == only);
}

TEST_CASE("merge snaps the cursor to the successor") {
  SloppyHeap h = SloppyHeap::from_buckets(
      HeapConfig::with_k(10), consecutive({90, 20, 30, 90, 90, 90, 90, 90, 90, 90, 90, 90, 90,
                                           90, 90, 90, 90, 90, 90, 90, 90, 90, 90, 90, 90,
                                           90, 90, 90, 90, 90, 90, 90, 90, 90, 90}));
  const std::vector<BucketId> ids = h.chain();
  h.advance_round_robin();
  h.advance_round_robin();
  REQUIRE(h.round_robin_cursor() == ids[2]);
  h.merge_test();  // 20 + 30 merge into ids[1]; ids[2] goes away
  CHECK(h.round_robin_cursor() == ids[3]);
  CHECK(h.advance_round_robin() == ids[3]);
  CHECK(h.advance_round_robin() == ids[4]);
}

TEST_CASE("quantile bucket lookup") {
  SloppyHeap h = SloppyHeap::from_buckets(HeapConfig::with_k(10), consecutive(layout_3000(90)));
  // rank 150 = key 150 with consecutive keys 1..3000
  const BucketId b = h.locate_quantile_bucket(1);
  const BucketView v = *h.bucket(b);
  CHECK(v.lo < 150);
  CHECK(*v.hi >= 150);
  const BucketId last = h.locate_quantile_bucket(10);
  const BucketView w = *h.bucket(last);
  // midpoint of [2701, 3000] is 2850
  CHECK(*w.lo < 2850);
  CHECK((!w.hi || *w.hi >= 2850));
  CHECK(h.stats().containment_misses == 0);
}

TEST_CASE("approximate rank") {
  SUBCASE("flat heap of equal keys spans every group") {
    SloppyHeap h(HeapConfig::with_k(4));
    for (int j = 0; j < 10; ++j) h.insert(5);
    CHECK(h.approx_rank(5) == GroupRange{1, 4});
    CHECK(h.approx_rank(-100) == GroupRange{1, 4});
  }
  SUBCASE("key below everything maps to group 1") {
    SloppyHeap h = SloppyHeap::from_buckets(HeapConfig::with_k(10), consecutive(layout_3000(90)));
    CHECK(h.approx_rank(-5).first == 1);
  }
  SUBCASE("bucket spanning ranks 1480..1520") {
    std::vector<std::size_t> s;
    for (int j = 0; j < 14; ++j) s.push_back(100);
    s.push_back(79);
    s.push_back(41);
    for (int j = 0; j < 14; ++j) s.push_back(100);
    s.push_back(80);
    SloppyHeap h = SloppyHeap::from_buckets(HeapConfig::with_k(10), consecutive(s));
    REQUIRE(h.size() == 3000);
    CHECK(h.approx_rank(1500) == GroupRange{5, 6});
    CHECK(h.approx_rank(1499) == GroupRange{5, 6});  // absent keys work too
  }
}

TEST_CASE("mode transitions and hysteresis") {
  SloppyHeap h(HeapConfig::with_k(10));
  for (Key x = 0; x < 360; ++x) h.insert(x * 7 % 360);
  CHECK(h.mode() == Mode::Flat);
  h.transition_mode();
  CHECK(h.mode() == Mode::Bucketized);
  CHECK(h.bucket_count() == 60);
  for (std::size_t s : sizes_of(h)) CHECK(s == 6);
  CHECK(h.audit().ok());

  // Down to 180 stays bucketized, 179 flips back.
  while (h.size() > 180) h.delete_group(1 + h.size() % 10);
  h.transition_mode();
  CHECK(h.mode() == Mode::Bucketized);
  h.delete_group(5);
  h.transition_mode();
  CHECK(h.size() == 179);
  CHECK(h.mode() == Mode::Flat);
  CHECK(h.stats().transitions_up == 1);
  CHECK(h.stats().transitions_down == 1);

  // Back up needs n to reach 360 again.
  while (h.size() < 359) h.insert(static_cast<Key>(h.size()));
  h.transition_mode();
  CHECK(h.mode() == Mode::Flat);
  h.insert(1);
  h.transition_mode();
  CHECK(h.mode() == Mode::Bucketized);
  CHECK(h.stats().transitions_up == 2);
}

TEST_CASE("bucket count stays within 12k during 3000 sequential inserts") {
  SloppyHeap h(HeapConfig::with_k(10));
  for (Key x = 0; x < 3000; ++x) {
    h.insert(x);
    REQUIRE(h.bucket_count() <= 120);
  }
  CHECK(h.audit().ok());
}

TEST_CASE("random workload keeps every invariant") {
  std::mt19937_64 rng(4);
  const std::size_t k = 10;
  SloppyHeap h(HeapConfig::with_k(k));
  OracleSet o;
  for (int j = 0; j < 3000; ++j) {
    const Key x = static_cast<Key>(rng() % 100000);
    h.insert(x);
    o.insert(x);
  }
  for (int step = 0; step < 100000; ++step) {
    if (rng() % 2) {
      const Key x = static_cast<Key>(rng() % 100000);
      h.insert(x);
      o.insert(x);
    } else {
      const std::size_t i = 1 + rng() % k;
      const Key x = h.delete_group(i);
      REQUIRE(o.is_valid_delete(x, i, k));
      o.erase(x);
    }
    REQUIRE(h.size() == o.size());
    REQUIRE(h.bucket_count() <= 12 * k);
  }
  const AuditReport a = h.audit();
  CHECK_MESSAGE(a.all_ok(), a.to_string());
  CHECK(h.max_bucket_size() <= (h.size() + 29) / 30);
  for (int probe = 0; probe < 100; ++probe) {
    const Key x = static_cast<Key>(rng() % 100000);
    CHECK(h.contains(x) == o.contains(x));
  }
}

TEST_CASE("contains agrees with the oracle through splits") {
  std::mt19937_64 rng(8);
  SloppyHeap h(HeapConfig::with_k(3));
  OracleSet o;
  for (int step = 0; step < 1000; ++step) {
    if (o.size() < 150 || rng() % 3) {
      const Key x = static_cast<Key>(rng() % 400);
      h.insert(x);
      o.insert(x);
    } else {
      const Key x = h.delete_group(1 + rng() % 3);
      o.erase(x);
    }
  }
  for (Key x = -1; x < 401; ++x) CHECK(h.contains(x) == o.contains(x));
}

TEST_CASE("duplicates of a split pivot on both sides") {
  SloppyHeap h(HeapConfig::with_k(3));
  OracleSet o;
  for (int j = 0; j < 3000; ++j) {
    const Key x = j % 5 == 0 ? 7 : j;
    h.insert(x);
    o.insert(x);
  }
  for (int j = 0; j < 2500; ++j) {
    const std::size_t i = 1 + j % 3;
    const Key x = h.delete_group(i);
    REQUIRE(o.is_valid_delete(x, i, 3));
    o.erase(x);
    REQUIRE(h.contains(7) == o.contains(7));
  }
  CHECK(h.audit().ok());
}

TEST_CASE("meter snapshots") {
  SloppyHeap h(HeapConfig::with_k(10));
  h.insert(1);
  const CostMeter flat = h.snapshot_meter();
  CHECK(h.snapshot_meter() == CostMeter{});
  SloppyHeap b = SloppyHeap::from_buckets(HeapConfig::with_k(10), consecutive(layout_3000(91)));
  b.maybe_start_split(b.chain().front());
  b.snapshot_meter();
  b.insert(5);  // ticks the splitting bucket
  const CostMeter busy = b.snapshot_meter();
  CHECK(flat.total() * 20 < busy.total());
}

TEST_CASE("audit") {
  SUBCASE("empty heap passes") { CHECK(SloppyHeap(HeapConfig::with_k(3)).audit().all_ok()); }
  SUBCASE("a stale adjacency key is reported") {
    SloppyHeap h = SloppyHeap::from_buckets(HeapConfig::with_k(10), consecutive(layout_3000(90)));
    CHECK(h.audit().ok());
    h.corrupt_adjacency_for_test(h.chain().front(), 1);
    const AuditReport a = h.audit();
    CHECK(!a.ok());
    CHECK(!a.find("adjacency_fresh")->passed);
  }
}
