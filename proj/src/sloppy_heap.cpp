#include "sloppy/sloppy_heap.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <utility>

namespace sloppy {

namespace {

// Reference constants for the event-time checks. They stay fixed when the
// configured thresholds change, which is what makes a fault-injected config
// observable.
constexpr Fraction kSplitLow{4, 30};
constexpr Fraction kSplitHigh{6, 30};
constexpr Fraction kMergeBound{5, 30};
constexpr Fraction kDeadline{1, 120};
constexpr std::uint64_t kPhaseAFactor = 10;

constexpr auto kUnlimited = std::numeric_limits<std::uint64_t>::max();

std::string fmt_bound(const std::optional<Key>& v, const char* inf) {
  return v ? std::to_string(*v) : std::string(inf);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

HeapConfig HeapConfig::with_k(std::size_t k) {
  HeapConfig c;
  c.k = k;
  c.boot_up = 36 * k;
  c.boot_down = 18 * k;
  c.initial_buckets = 6 * k;
  return c;
}

void HeapConfig::validate() const {
  if (k == 0) throw ConfigError("k must be at least 1");
  if (boot_down >= boot_up) throw ConfigError("boot_down must be below boot_up");
  if (boot_down == 0) throw ConfigError("boot_down must be positive");
  if (initial_buckets == 0 || initial_buckets > 12 * k)
    throw ConfigError("initial_buckets must lie in [1, 12k]");
  if (initial_buckets > boot_up)
    throw ConfigError("initial_buckets must not exceed boot_up");
  if (phase_a_budget == 0 || phase_b_items == 0)
    throw ConfigError("background rates must be positive");
  for (const Fraction* f :
       {&large_threshold, &merge_threshold, &max_bucket, &p1_fraction})
    if (f->den == 0) throw ConfigError("zero denominator");
  // p1 < large, compared as cross products.
  if (p1_fraction.num * large_threshold.den >=
      large_threshold.num * p1_fraction.den)
    throw ConfigError("p1_fraction must be below large_threshold");
}

// ---------------------------------------------------------------------------
// Audit report

bool AuditReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AuditCheck& c) { return c.passed || !c.hard; });
}

bool AuditReport::all_ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AuditCheck& c) { return c.passed; });
}

const AuditCheck* AuditReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string AuditReport::to_string() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "ok   " : (c.hard ? "FAIL " : "warn ")) << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Internal state

struct SloppyHeap::SplitJob {
  enum class Stage : std::uint8_t { Gathering, Selecting, Partitioning, Ready };

  std::size_t n0 = 0;
  std::size_t p1_target = 0;
  Stage stage = Stage::Gathering;
  // While gathering, `source` still holds the P1 elements not yet moved;
  // afterwards it is exactly P2.
  ElementStore source;
  std::vector<Key> gathered;
  std::optional<selection::SelectJob> select;
  Key pivot = 0;
  std::vector<Key> lower, upper;
  std::size_t accesses_used = 0;
  std::uint64_t phase_a_cost = 0;  // selection only; gathering is not counted

  std::size_t p2_size() const {
    if (stage == Stage::Gathering)
      return source.size() - (p1_target - gathered.size());
    return source.size();
  }
  SplitPhase phase() const {
    switch (stage) {
      case Stage::Gathering:
      case Stage::Selecting:
        return SplitPhase::SelectingMedian;
      case Stage::Partitioning:
        return SplitPhase::Partitioning;
      case Stage::Ready:
        break;
    }
    return SplitPhase::ReadyToFinalize;
  }
  std::vector<Key> release() && {
    std::vector<Key> out = std::move(source).to_vector();
    out.insert(out.end(), gathered.begin(), gathered.end());
    if (select) {
      auto held = std::move(*select).release();
      out.insert(out.end(), held.begin(), held.end());
    }
    if (stage == Stage::Partitioning || stage == Stage::Ready) {
      out.insert(out.end(), lower.begin(), lower.end());
      out.push_back(pivot);
      out.insert(out.end(), upper.begin(), upper.end());
    }
    return out;
  }
};

struct SloppyHeap::Bucket {
  bool alive = false;
  std::size_t size = 0;
  ElementStore store;
  std::optional<Key> lo, hi;
  bool lo_closed = false;
  BucketId prev = kNoBucket, next = kNoBucket;
  std::unique_ptr<SplitJob> job;
};

SloppyHeap::SloppyHeap(HeapConfig config) : config_(config) {
  config_.validate();
}

SloppyHeap::~SloppyHeap() = default;
SloppyHeap::SloppyHeap(SloppyHeap&&) noexcept = default;
SloppyHeap& SloppyHeap::operator=(SloppyHeap&&) noexcept = default;

SloppyHeap SloppyHeap::from_buckets(HeapConfig config,
                                    std::vector<std::vector<Key>> buckets) {
  SloppyHeap h(config);
  if (buckets.empty()) return h;
  std::optional<Key> prev_max;
  for (const auto& b : buckets) {
    if (b.empty()) throw std::invalid_argument("from_buckets: empty bucket");
    auto [mn, mx] = std::minmax_element(b.begin(), b.end());
    if (prev_max && *mn < *prev_max)
      throw std::invalid_argument("from_buckets: buckets out of key order");
    prev_max = *mx;
    h.n_ += b.size();
  }
  h.install(std::move(buckets));
  return h;
}

SloppyHeap::Bucket& SloppyHeap::at(BucketId b) { return buckets_[b]; }
const SloppyHeap::Bucket& SloppyHeap::at(BucketId b) const {
  return buckets_[b];
}

bool SloppyHeap::alive(BucketId b) const {
  return b != kNoBucket && b < buckets_.size() && buckets_[b].alive;
}

BucketId SloppyHeap::allocate() {
  BucketId id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
  } else {
    id = static_cast<BucketId>(buckets_.size());
    buckets_.emplace_back();
  }
  at(id) = Bucket{};
  at(id).alive = true;
  ++t_;
  return id;
}

void SloppyHeap::release(BucketId b) {
  at(b) = Bucket{};
  free_.push_back(b);
  --t_;
}

// ---------------------------------------------------------------------------
// Mode transitions

void SloppyHeap::transition_mode() {
  if (mode_ == Mode::Flat && n_ >= config_.boot_up)
    to_bucketized();
  else if (mode_ == Mode::Bucketized && n_ < config_.boot_down)
    to_flat();
}

void SloppyHeap::to_bucketized() {
  const std::size_t parts = std::min(config_.initial_buckets, flat_.size());
  selection::partition_into_groups(flat_, parts, &meter_);
  std::vector<std::vector<Key>> groups;
  groups.reserve(parts);
  const std::size_t n = flat_.size();
  for (std::size_t j = 0; j < parts; ++j) {
    auto first = flat_.begin() + static_cast<std::ptrdiff_t>(j * n / parts);
    auto last = flat_.begin() + static_cast<std::ptrdiff_t>((j + 1) * n / parts);
    groups.emplace_back(first, last);
    meter_.moves += groups.back().size();
  }
  flat_.clear();
  flat_.shrink_to_fit();
  install(std::move(groups));
  ++stats_.transitions_up;
}

void SloppyHeap::install(std::vector<std::vector<Key>> groups) {
  buckets_.clear();
  free_.clear();
  t_ = 0;
  pairs_.clear();
  mode_ = Mode::Bucketized;

  std::vector<BucketIndex::Item> items;
  BucketId prev = kNoBucket;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const Key mx = *std::max_element(groups[j].begin(), groups[j].end());
    const Key mn = *std::min_element(groups[j].begin(), groups[j].end());
    meter_.comparisons += 2 * groups[j].size();
    BucketId id = allocate();
    Bucket& b = at(id);
    b.size = groups[j].size();
    b.store = ElementStore(std::move(groups[j]));
    b.prev = prev;
    if (prev == kNoBucket) {
      head_ = id;
    } else {
      Bucket& p = at(prev);
      p.next = id;
      b.lo = p.hi;
      b.lo_closed = *p.hi == mn;
    }
    if (j + 1 < groups.size()) b.hi = mx;
    items.push_back({id, b.size, b.hi});
    prev = id;
  }
  index_.build(items);
  for (BucketId id = head_; at(id).next != kNoBucket; id = at(id).next)
    pairs_.push(id, at(id).size + at(at(id).next).size, meter_);
  cursor_ = head_;
  cursor_snapped_ = false;
}

void SloppyHeap::to_flat() {
  std::vector<Key> all;
  all.reserve(n_);
  for (BucketId id = head_; id != kNoBucket; id = at(id).next) {
    Bucket& b = at(id);
    std::vector<Key> part;
    if (b.job) {
      part = std::move(*b.job).release();
      ++stats_.jobs_abandoned;
    } else {
      part = std::move(b.store).to_vector();
    }
    meter_.moves += part.size();
    all.insert(all.end(), part.begin(), part.end());
  }
  buckets_.clear();
  free_.clear();
  t_ = 0;
  head_ = cursor_ = kNoBucket;
  cursor_snapped_ = false;
  index_.clear();
  pairs_.clear();
  flat_ = std::move(all);
  mode_ = Mode::Flat;
  ++stats_.transitions_down;
}

// ---------------------------------------------------------------------------
// Public operations

void SloppyHeap::insert(Key x) {
  transition_mode();
  if (mode_ == Mode::Flat) {
    flat_.push_back(x);
    ++meter_.moves;
    ++n_;
    return;
  }
  const BucketId b = index_.route(x, meter_);
  Bucket& bucket = at(b);
  if (bucket.job)
    bucket.job->source.push_back(x);
  else
    bucket.store.push_back(x);
  ++meter_.moves;
  ++n_;
  resize_bucket(b, +1);
  tick(b);
}

Key SloppyHeap::delete_group(std::size_t i) {
  if (i < 1 || i > config_.k) throw std::out_of_range("group index");
  if (n_ == 0) throw EmptyHeapError();
  transition_mode();
  if (mode_ == Mode::Flat) return flat_select(i, true);

  BucketId b = locate_quantile_bucket(i);
  const Key x = take_from(b);
  --n_;
  resize_bucket(b, -1);
  if (at(b).size == 0) {
    remove_bucket(b);
    b = kNoBucket;
  }
  if (mode_ == Mode::Bucketized) tick(b);
  return x;
}

Key SloppyHeap::read_group(std::size_t i) {
  if (i < 1 || i > config_.k) throw std::out_of_range("group index");
  if (n_ == 0) throw EmptyHeapError();
  transition_mode();
  if (mode_ == Mode::Flat) return flat_select(i, false);

  const BucketId b = locate_quantile_bucket(i);
  const Key x = peek(b);
  tick(b);
  return x;
}

Key SloppyHeap::flat_select(std::size_t i, bool remove) {
  // Rank selection even for n < k, where any element would do; for group 1
  // this returns the minimum, which keeps drains ordered near the end.
  const GroupInterval g = group_interval(n_, config_.k, i);
  const std::size_t mid = std::clamp<std::size_t>((g.lo + g.hi) / 2, 1, n_);
  const Key x = selection::select_kth(flat_, mid, &meter_);
  if (remove) {
    std::swap(flat_[mid - 1], flat_.back());
    flat_.pop_back();
    ++meter_.moves;
    --n_;
  }
  return x;
}

GroupRange SloppyHeap::approx_rank(Key x) const {
  if (n_ == 0) throw EmptyHeapError();
  const std::size_t k = config_.k;
  if (mode_ == Mode::Flat)
    return {group_of_rank(n_, k, 1), group_of_rank(n_, k, n_)};
  const BucketId b = index_.route(x, meter_);
  const std::size_t before = index_.prefix_before(b, meter_);
  return {group_of_rank(n_, k, before + 1),
          group_of_rank(n_, k, before + at(b).size)};
}

bool SloppyHeap::contains(Key x) const {
  if (n_ == 0) return false;
  if (mode_ == Mode::Flat) {
    meter_.comparisons += flat_.size();
    return std::find(flat_.begin(), flat_.end(), x) != flat_.end();
  }
  auto scan = [&](BucketId id) {
    const Bucket& b = at(id);
    meter_.comparisons += b.size;
    if (!b.job) return b.store.contains(x);
    const SplitJob& j = *b.job;
    if (j.source.contains(x)) return true;
    if (std::find(j.gathered.begin(), j.gathered.end(), x) != j.gathered.end())
      return true;
    if (j.select) {
      std::vector<Key> held = selection::SelectJob(*j.select).release();
      if (std::find(held.begin(), held.end(), x) != held.end()) return true;
    }
    if (j.stage == SplitJob::Stage::Partitioning ||
        j.stage == SplitJob::Stage::Ready) {
      if (j.pivot == x) return true;
      if (std::find(j.lower.begin(), j.lower.end(), x) != j.lower.end())
        return true;
      if (std::find(j.upper.begin(), j.upper.end(), x) != j.upper.end())
        return true;
    }
    return false;
  };
  BucketId b = index_.route(x, meter_);
  if (scan(b)) return true;
  // Keys equal to a split pivot may sit on both sides of the boundary.
  for (BucketId nb = at(b).next;
       nb != kNoBucket && at(nb).lo_closed && at(nb).lo == x; nb = at(nb).next)
    if (scan(nb)) return true;
  return false;
}

CostMeter SloppyHeap::snapshot_meter() {
  CostMeter out = meter_;
  meter_ = CostMeter{};
  return out;
}

std::size_t SloppyHeap::max_bucket_size() const {
  std::size_t mx = 0;
  for (const Bucket& b : buckets_)
    if (b.alive) mx = std::max(mx, b.size);
  return mx;
}

// ---------------------------------------------------------------------------
// Bucket-level steps

BucketId SloppyHeap::locate_quantile_bucket(std::size_t i) {
  const GroupInterval g = group_interval(n_, config_.k, i);
  const std::size_t mid = std::clamp<std::size_t>((g.lo + g.hi) / 2, 1, n_);
  const auto hit = index_.find_rank(mid, meter_);
  const std::size_t first = hit.before + 1;
  const std::size_t last = hit.before + at(hit.id).size;
  if (n_ >= config_.k && !g.contains(first, last)) ++stats_.containment_misses;
  return hit.id;
}

BucketId SloppyHeap::advance_round_robin() {
  if (cursor_snapped_) {
    cursor_snapped_ = false;
    return cursor_;
  }
  const BucketId next = at(cursor_).next;
  cursor_ = next == kNoBucket ? head_ : next;
  return cursor_;
}

void SloppyHeap::tick(BucketId op) {
  const BucketId rr = advance_round_robin();
  const BucketId current[2] = {op, rr == op ? kNoBucket : rr};
  for (BucketId b : current)
    if (alive(b)) run_background(b);
  for (BucketId b : current)
    if (alive(b)) maybe_start_split(b);
}

void SloppyHeap::refresh_pair(BucketId left) {
  if (left == kNoBucket) return;
  const BucketId right = at(left).next;
  if (right == kNoBucket) return;
  pairs_.update(left, at(left).size + at(right).size, meter_);
}

void SloppyHeap::resize_bucket(BucketId b, std::ptrdiff_t delta) {
  Bucket& bucket = at(b);
  bucket.size = static_cast<std::size_t>(
      static_cast<std::ptrdiff_t>(bucket.size) + delta);
  index_.add_size(b, delta, meter_);
  refresh_pair(b);
  refresh_pair(bucket.prev);
}

Key SloppyHeap::peek(BucketId b) const {
  const Bucket& bucket = at(b);
  if (!bucket.job) return bucket.store.back();
  const SplitJob& j = *bucket.job;
  if (!j.source.empty()) return j.source.back();
  switch (j.stage) {
    case SplitJob::Stage::Gathering:
      return j.gathered.back();
    case SplitJob::Stage::Selecting:
      return j.select->any_element();
    case SplitJob::Stage::Partitioning:
    case SplitJob::Stage::Ready:
      break;
  }
  return j.pivot;
}

Key SloppyHeap::take_from(BucketId b) {
  Bucket& bucket = at(b);
  ++meter_.moves;
  if (!bucket.job) {
    const Key x = bucket.store.back();
    bucket.store.pop_back();
    return x;
  }
  SplitJob& j = *bucket.job;
  if (j.p2_size() > 0) {
    const Key x = j.source.back();
    j.source.pop_back();
    return x;
  }
  // P2 is exhausted: finish the selection now, then take from the larger
  // side of the pivot. The whole bucket lies inside the group either way.
  ++stats_.p2_underflows;
  if (j.stage == SplitJob::Stage::Gathering ||
      j.stage == SplitJob::Stage::Selecting)
    finish_phase_a(b);
  std::vector<Key>& side = j.lower.size() >= j.upper.size() ? j.lower : j.upper;
  if (!side.empty()) {
    const Key x = side.back();
    side.pop_back();
    return x;
  }
  // Only the pivot is left; the bucket is about to become empty.
  const Key x = j.pivot;
  bucket.job.reset();
  ++stats_.jobs_abandoned;
  return x;
}

void SloppyHeap::finish_phase_a(BucketId b) {
  SplitJob& j = *at(b).job;
  if (j.stage == SplitJob::Stage::Gathering) {
    while (j.gathered.size() < j.p1_target) {
      j.gathered.push_back(j.source.back());
      j.source.pop_back();
      ++meter_.moves;
    }
    j.select.emplace(std::move(j.gathered));
    j.gathered.clear();
    j.stage = SplitJob::Stage::Selecting;
  }
  if (j.stage == SplitJob::Stage::Selecting) {
    const CostMeter before = j.select->meter();
    j.select->step(kUnlimited);
    const CostMeter& after = j.select->meter();
    meter_.comparisons += after.comparisons - before.comparisons;
    meter_.moves += after.moves - before.moves;
    j.phase_a_cost += after.elementary() - before.elementary();
    auto result = j.select->take_result();
    j.select.reset();
    j.pivot = result.pivot;
    j.lower = std::move(result.lower);
    j.upper = std::move(result.upper);
    j.stage = SplitJob::Stage::Partitioning;
    const double ratio = static_cast<double>(j.phase_a_cost) /
                         static_cast<double>(j.p1_target);
    stats_.max_phase_a_ratio = std::max(stats_.max_phase_a_ratio, ratio);
    if (j.phase_a_cost > kPhaseAFactor * j.p1_target) ++stats_.phase_a_over_budget;
  }
}

void SloppyHeap::run_background(BucketId b) {
  Bucket& bucket = at(b);
  if (!bucket.job) return;
  SplitJob& j = *bucket.job;
  ++j.accesses_used;

  std::uint64_t budget = config_.phase_a_budget;
  if (j.stage == SplitJob::Stage::Gathering) {
    while (budget > 0 && j.gathered.size() < j.p1_target) {
      j.gathered.push_back(j.source.back());
      j.source.pop_back();
      ++meter_.moves;
      --budget;
    }
    if (j.gathered.size() == j.p1_target) {
      j.select.emplace(std::move(j.gathered));
      j.gathered.clear();
      j.stage = SplitJob::Stage::Selecting;
    }
  }
  if (j.stage == SplitJob::Stage::Selecting && budget > 0) {
    const CostMeter before = j.select->meter();
    j.select->step(budget);
    const CostMeter& after = j.select->meter();
    meter_.comparisons += after.comparisons - before.comparisons;
    meter_.moves += after.moves - before.moves;
    j.phase_a_cost += after.elementary() - before.elementary();
    if (j.select->done()) {
      finish_phase_a(b);
    } else if (j.phase_a_cost > kPhaseAFactor * j.p1_target) {
      ++stats_.phase_a_overruns;
      finish_phase_a(b);
    }
  }
  if (j.stage == SplitJob::Stage::Partitioning) {
    selection::partition_step(j.pivot, j.lower, j.upper, j.source,
                              config_.phase_b_items, meter_);
    if (j.source.empty()) j.stage = SplitJob::Stage::Ready;
  }
  if (j.stage == SplitJob::Stage::Ready) finalize_split(b);
}

void SloppyHeap::maybe_start_split(BucketId b) {
  Bucket& bucket = at(b);
  if (bucket.job) return;
  const std::size_t threshold = config_.large_threshold.ceil_of(n_, config_.k);
  if (bucket.size < threshold || bucket.size < 2) return;
  const std::size_t p1 = std::min(
      config_.p1_fraction.ceil_of(n_, config_.k), bucket.size);
  auto job = std::make_unique<SplitJob>();
  job->n0 = n_;
  job->p1_target = p1;
  job->source = std::move(bucket.store);
  job->gathered.reserve(p1);
  bucket.store = ElementStore{};
  bucket.job = std::move(job);
  ++stats_.jobs_started;
}

void SloppyHeap::bound_failure(std::uint64_t& steady_counter) {
  if (n_ >= config_.boot_up)
    ++steady_counter;
  else
    ++stats_.band_bound_failures;
}

void SloppyHeap::finalize_split(BucketId b) {
  std::unique_ptr<SplitJob> job = std::move(at(b).job);
  const std::size_t k = config_.k;

  const std::size_t deadline = kDeadline.ceil_of(job->n0, k);
  stats_.max_split_accesses =
      std::max<std::uint64_t>(stats_.max_split_accesses, job->accesses_used);
  if (job->accesses_used > deadline) bound_failure(stats_.deadline_failures);

  std::vector<Key> lower = std::move(job->lower);
  lower.push_back(job->pivot);
  ++meter_.moves;
  if (job->upper.empty()) {
    // Everything landed on one side; nothing to split.
    at(b).store = ElementStore(std::move(lower));
    ++stats_.degenerate_splits;
    return;
  }

  const std::size_t s1 = lower.size();
  const std::size_t s2 = job->upper.size();
  const BucketId c = allocate();
  Bucket& left = at(b);
  Bucket& right = at(c);

  right.store = ElementStore(std::move(job->upper));
  right.size = s2;
  right.lo = job->pivot;
  right.lo_closed = true;
  right.hi = left.hi;
  right.prev = b;
  right.next = left.next;
  if (left.next != kNoBucket) at(left.next).prev = c;

  left.store = ElementStore(std::move(lower));
  left.size = s1;
  left.hi = job->pivot;
  left.next = c;

  index_.add_size(b, -static_cast<std::ptrdiff_t>(s2), meter_);
  index_.set_hi(b, left.hi);
  index_.insert_after(b, {c, s2, right.hi}, meter_);

  if (right.next != kNoBucket) {
    pairs_.erase(b, meter_);
    pairs_.push(c, s2 + at(right.next).size, meter_);
  }
  pairs_.push(b, s1 + s2, meter_);
  refresh_pair(left.prev);

  if (cursor_ == b) cursor_ = c;

  ++stats_.splits;
  const std::size_t lo_bound = kSplitLow.ceil_of(n_, k) - 1;
  const std::size_t hi_bound = kSplitHigh.floor_of(n_, k) + 1;
  for (std::size_t s : {s1, s2})
    if (s < lo_bound || s > hi_bound) bound_failure(stats_.split_bound_failures);

  merge_test();
}

void SloppyHeap::merge_test() {
  if (t_ < 2) return;
  const auto top = pairs_.top();
  const std::size_t threshold = config_.merge_threshold.floor_of(n_, config_.k);
  if (top->sum > threshold) {
    ++stats_.declined_merge_tests;
    if (top->sum <= kMergeBound.floor_of(n_, config_.k))
      ++stats_.declined_certificate_failures;
    return;
  }
  const BucketId b = top->left;
  const BucketId c = at(b).next;
  if (at(b).job || at(c).job) {
    ++stats_.merge_under_split;
    return;
  }

  Bucket& left = at(b);
  Bucket& right = at(c);
  const std::size_t merged = left.size + right.size;
  left.store.splice_back(std::move(right.store));
  ++meter_.moves;
  left.size = merged;
  left.hi = right.hi;
  left.next = right.next;
  if (right.next != kNoBucket) at(right.next).prev = b;

  pairs_.erase(b, meter_);
  if (right.next != kNoBucket) {
    pairs_.erase(c, meter_);
    pairs_.push(b, merged + at(right.next).size, meter_);
  }
  refresh_pair(left.prev);

  index_.add_size(b, static_cast<std::ptrdiff_t>(at(c).size), meter_);
  index_.set_hi(b, left.hi);
  index_.erase(c, meter_);

  const BucketId successor = right.next;
  release(c);
  snap_cursor_from(c, successor);

  ++stats_.merges;
  if (merged > kMergeBound.floor_of(n_, config_.k))
    bound_failure(stats_.merge_bound_failures);
}

void SloppyHeap::snap_cursor_from(BucketId removed, BucketId successor) {
  if (cursor_ != removed) return;
  cursor_ = successor == kNoBucket ? head_ : successor;
  cursor_snapped_ = true;
}

void SloppyHeap::remove_bucket(BucketId b) {
  Bucket& bucket = at(b);
  const BucketId prev = bucket.prev, next = bucket.next;
  if (prev == kNoBucket && next == kNoBucket) {
    // Last bucket gone: only possible when n reached zero.
    release(b);
    head_ = cursor_ = kNoBucket;
    index_.clear();
    pairs_.clear();
    mode_ = Mode::Flat;
    ++stats_.transitions_down;
    return;
  }

  if (next != kNoBucket) {
    at(next).lo = bucket.lo;
    at(next).lo_closed = bucket.lo_closed;
    at(next).prev = prev;
    pairs_.erase(b, meter_);
  } else {
    at(prev).hi = bucket.hi;
    index_.set_hi(prev, bucket.hi);
  }
  if (prev != kNoBucket) {
    at(prev).next = next;
    if (next != kNoBucket)
      refresh_pair(prev);
    else
      pairs_.erase(prev, meter_);
  } else {
    head_ = next;
  }
  index_.erase(b, meter_);
  release(b);
  snap_cursor_from(b, next);
}

// ---------------------------------------------------------------------------
// Inspection

std::vector<BucketId> SloppyHeap::chain() const {
  std::vector<BucketId> out;
  if (mode_ == Mode::Flat) return out;
  for (BucketId id = head_; id != kNoBucket; id = at(id).next) out.push_back(id);
  return out;
}

std::optional<BucketView> SloppyHeap::bucket(BucketId b) const {
  if (mode_ == Mode::Flat || !alive(b)) return std::nullopt;
  const Bucket& x = at(b);
  std::optional<SplitPhase> phase;
  if (x.job) phase = x.job->phase();
  return BucketView{b, x.size, x.lo, x.lo_closed, x.hi, phase};
}

std::size_t SloppyHeap::p1_size(BucketId b) const {
  const Bucket& x = at(b);
  return x.job ? x.job->p1_target : 0;
}

std::size_t SloppyHeap::p2_size(BucketId b) const {
  const Bucket& x = at(b);
  return x.job ? x.job->p2_size() : 0;
}

std::size_t SloppyHeap::split_accesses(BucketId b) const {
  const Bucket& x = at(b);
  return x.job ? x.job->accesses_used : 0;
}

void SloppyHeap::corrupt_adjacency_for_test(BucketId left, std::size_t sum) {
  pairs_.corrupt_for_test(left, sum);
}

std::vector<BucketView> SloppyHeap::dump() const {
  std::vector<BucketView> out;
  for (BucketId id : chain()) out.push_back(*bucket(id));
  return out;
}

std::string SloppyHeap::dump_string() const {
  std::ostringstream out;
  if (mode_ == Mode::Flat) {
    out << "flat n=" << n_ << '\n';
    return out.str();
  }
  out << "buckets t=" << t_ << " n=" << n_ << '\n';
  for (const BucketView& v : dump()) {
    out << (v.lo_closed ? '[' : '(') << fmt_bound(v.lo, "-inf") << ", "
        << fmt_bound(v.hi, "+inf") << "] size=" << v.size;
    if (v.split_phase) out << " splitting";
    out << '\n';
  }
  return out.str();
}

AuditReport SloppyHeap::audit(AuditDepth depth) const {
  AuditReport r;
  auto check = [&](std::string name, bool passed, std::string detail = {},
                   bool hard = true) {
    r.checks.push_back({std::move(name), passed, hard, std::move(detail)});
  };
  const std::size_t k = config_.k;

  auto counter = [&](const char* name, std::uint64_t v) {
    check(name, v == 0, v ? std::to_string(v) + " events" : std::string{});
  };
  counter("split_size_bounds", stats_.split_bound_failures);
  counter("merge_size_bound", stats_.merge_bound_failures);
  counter("declined_merge_certificate", stats_.declined_certificate_failures);
  counter("split_deadline", stats_.deadline_failures);
  check("band_bounds", stats_.band_bound_failures == 0,
        stats_.band_bound_failures
            ? std::to_string(stats_.band_bound_failures) + " events below boot_up"
            : std::string{},
        false);
  counter("no_merge_under_split", stats_.merge_under_split);
  counter("quantile_bucket_containment", stats_.containment_misses);

  if (mode_ == Mode::Flat) {
    check("conservation", flat_.size() == n_,
          "flat " + std::to_string(flat_.size()) + " vs n " + std::to_string(n_));
    return r;
  }

  const std::vector<BucketId> ids = chain();
  check("bucket_count_bound", t_ <= 12 * k,
        "t=" + std::to_string(t_) + " N=" + std::to_string(12 * k));
  check("chain_count", ids.size() == t_);

  std::size_t total = 0, mx = 0;
  bool nonempty = true;
  for (BucketId id : ids) {
    total += at(id).size;
    mx = std::max(mx, at(id).size);
    if (at(id).size == 0) nonempty = false;
  }
  check("buckets_nonempty", nonempty);
  check("conservation", total == n_ && index_.total() == n_,
        "sum=" + std::to_string(total) + " index=" +
            std::to_string(index_.total()) + " n=" + std::to_string(n_));

  const std::size_t cap = config_.max_bucket.ceil_of(n_, k);
  check("i1_max_bucket", mx <= cap,
        "max=" + std::to_string(mx) + " cap=" + std::to_string(cap), false);
  const std::size_t lower_t = cap ? n_ / cap : 0;
  check("i2_min_buckets", t_ >= lower_t,
        "t=" + std::to_string(t_) + " floor=" + std::to_string(lower_t), false);

  check("adjacency_count", pairs_.size() + 1 == t_,
        std::to_string(pairs_.size()) + " entries");
  bool fresh = true;
  std::string stale;
  for (BucketId id : ids) {
    const BucketId nx = at(id).next;
    if (nx == kNoBucket) continue;
    auto s = pairs_.sum_of(id);
    if (!s || *s != at(id).size + at(nx).size) {
      fresh = false;
      stale = "bucket " + std::to_string(id);
    }
  }
  check("adjacency_fresh", fresh, stale);
  const auto& heap = pairs_.entries();
  bool ordered = true;
  for (std::size_t p = 1; p < heap.size(); ++p)
    if (heap[p].sum < heap[(p - 1) / 2].sum) ordered = false;
  check("adjacency_order", ordered);

  check("index_consistent", index_.sums_consistent() && index_.in_order() == ids);
  check("cursor_live", alive(cursor_));

  if (depth == AuditDepth::Quick) return r;

  bool intervals = true, members = true, counts = true;
  std::string where;
  for (std::size_t p = 0; p < ids.size(); ++p) {
    const Bucket& b = at(ids[p]);
    if (p == 0 && b.lo) intervals = false;
    if (p + 1 == ids.size() && b.hi) intervals = false;
    if (p + 1 < ids.size()) {
      const Bucket& nb = at(ids[p + 1]);
      if (!b.hi || !nb.lo || *b.hi != *nb.lo) intervals = false;
    }
    std::vector<Key> keys;
    if (b.job) {
      // Reconstruct the held elements without disturbing the job.
      SplitJob tmp;
      tmp.stage = b.job->stage;
      ElementStore src;
      b.job->source.for_each([&](Key x) { src.push_back(x); });
      tmp.source = std::move(src);
      tmp.gathered = b.job->gathered;
      if (b.job->select) tmp.select.emplace(*b.job->select);
      tmp.pivot = b.job->pivot;
      tmp.lower = b.job->lower;
      tmp.upper = b.job->upper;
      keys = std::move(tmp).release();
    } else {
      b.store.for_each([&](Key x) { keys.push_back(x); });
    }
    if (keys.size() != b.size) {
      counts = false;
      where = "bucket " + std::to_string(ids[p]);
    }
    for (Key x : keys) {
      const bool above_lo = !b.lo || (b.lo_closed ? x >= *b.lo : x > *b.lo);
      const bool below_hi = !b.hi || x <= *b.hi;
      if (!above_lo || !below_hi) {
        members = false;
        where = "key " + std::to_string(x) + " in bucket " + std::to_string(ids[p]);
      }
    }
  }
  check("interval_chain", intervals);
  check("stored_counts", counts, where);
  check("keys_within_intervals", members, where);
  return r;
}

}  // namespace sloppy
