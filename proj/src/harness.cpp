#include "sloppy/harness.hpp"

#include <algorithm>
#include <ostream>
#include <random>

#include "sloppy/applications.hpp"
#include "sloppy/oracle.hpp"
#include "sloppy/variant1.hpp"

namespace sloppy {

namespace {

std::string_view op_name(OpType op) {
  switch (op) {
    case OpType::Insert:
      return "insert";
    case OpType::DeleteGroup:
      return "delete";
    case OpType::ReadGroup:
      break;
  }
  return "read";
}

// Tracks stretches of ops during which some bucket exceeds ceil(n/3k).
class ExcursionTracker {
 public:
  ExcursionTracker(RunReport& rep, std::size_t window) : rep_(rep), window_(window) {}

  void observe(std::size_t idx, bool over) {
    if (over) {
      if (!start_) {
        start_ = idx;
        flagged_ = false;
        ++rep_.i1_excursions;
      } else if (!flagged_ && idx - *start_ > window_) {
        flagged_ = true;
        ++rep_.i1_unhealed;
      }
      return;
    }
    if (start_) {
      rep_.i1_longest = std::max(rep_.i1_longest, idx - *start_);
      start_.reset();
    }
  }

  void finish(std::size_t end) {
    if (!start_) return;
    rep_.i1_longest = std::max(rep_.i1_longest, end - *start_);
    if (!flagged_ && end - *start_ > window_) ++rep_.i1_unhealed;
  }

 private:
  RunReport& rep_;
  std::size_t window_;
  std::optional<std::size_t> start_;
  bool flagged_ = false;
};

void run_variant1(const Trace& trace, std::size_t k, RunReport& rep) {
  Variant1Heap v1(k);
  OracleSet oracle;
  std::size_t bad = 0;
  for (const TraceRecord& r : trace.ops) {
    if (r.op == OpType::Insert) {
      v1.insert(r.value);
      oracle.insert(r.value);
      ++rep.v1_ops;
      continue;
    }
    if (r.op == OpType::ReadGroup || v1.size() == 0) continue;
    const Key x = v1.delete_group(r.group());
    ++rep.v1_ops;
    if (!oracle.contains(x)) {
      ++bad;
      continue;
    }
    if (!oracle.is_valid_delete(x, r.group(), k)) ++bad;
    oracle.erase(x);
  }
  rep.v1_violations = bad;
  rep.v1_cost = v1.meter().total();
}

RunReport run(const Trace& trace, std::size_t k, const RunOptions& opts) {
  const HeapConfig cfg = opts.config.value_or(HeapConfig::with_k(k));
  SloppyHeap heap(cfg);
  OracleSet oracle;
  RunReport rep;
  rep.k = k;
  rep.ops = trace.ops.size();
  if (opts.keep_records) rep.records.reserve(trace.ops.size());
  ExcursionTracker i1(rep, opts.heal_window ? opts.heal_window : 12 * k);
  std::array<std::uint64_t, 3> cost_sum{};

  for (std::size_t idx = 0; idx < trace.ops.size(); ++idx) {
    const TraceRecord& r = trace.ops[idx];
    const HeapStats before = heap.stats();
    OpRecord rec;
    rec.index = idx;
    rec.op = r.op;
    if (r.op == OpType::Insert) {
      heap.insert(r.value);
      if (opts.with_oracle) oracle.insert(r.value);
    } else {
      rec.group = r.group();
      const bool remove = r.op == OpType::DeleteGroup;
      try {
        const Key x = remove ? heap.delete_group(rec.group) : heap.read_group(rec.group);
        rec.result = x;
        if (opts.with_oracle) {
          ++rep.checked;
          bool ok = oracle.contains(x) && oracle.is_valid_delete(x, rec.group, k);
          rec.valid = ok;
          if (!ok) ++rep.violations;
          if (remove && oracle.contains(x)) oracle.erase(x);
        }
      } catch (const EmptyHeapError&) {
        ++rep.empty_errors;
      }
    }
    const HeapStats& after = heap.stats();
    rec.cost = heap.snapshot_meter().total();
    rec.n = heap.size();
    rec.buckets = heap.bucket_count();
    rec.splits = after.splits - before.splits;
    rec.merges = after.merges - before.merges;
    rec.transition = after.transitions_up != before.transitions_up ||
                     after.transitions_down != before.transitions_down;

    auto& summary = rep.by_type[static_cast<std::size_t>(r.op)];
    ++summary.count;
    summary.max_cost = std::max(summary.max_cost, rec.cost);
    cost_sum[static_cast<std::size_t>(r.op)] += rec.cost;
    rep.max_cost = std::max(rep.max_cost, rec.cost);
    const bool bucketized = heap.mode() == Mode::Bucketized;
    if (bucketized && !rec.transition && idx >= opts.measure_from) {
      ++rep.steady_ops;
      rep.steady_max_cost = std::max(rep.steady_max_cost, rec.cost);
    }

    if (heap.bucket_count() > heap.bucket_ceiling()) ++rep.bucket_count_failures;
    const bool steady = bucketized && heap.size() >= cfg.boot_up;
    i1.observe(idx, steady && heap.max_bucket_size() >
                                  cfg.max_bucket.ceil_of(heap.size(), k));

    if (opts.audit_every && (idx + 1) % opts.audit_every == 0) {
      const AuditReport a = heap.audit(AuditDepth::Full);
      ++rep.audits;
      if (!a.ok()) {
        if (rep.audit_failures++ == 0)
          rep.first_audit_failure = "op " + std::to_string(idx) + ": " + a.to_string();
      }
    }
    if (opts.keep_records) rep.records.push_back(rec);
  }
  i1.finish(trace.ops.size());

  const AuditReport a = heap.audit(AuditDepth::Full);
  ++rep.audits;
  if (!a.ok() && rep.audit_failures++ == 0)
    rep.first_audit_failure = "end: " + a.to_string();

  for (std::size_t t = 0; t < 3; ++t)
    if (rep.by_type[t].count)
      rep.by_type[t].mean_cost =
          static_cast<double>(cost_sum[t]) / static_cast<double>(rep.by_type[t].count);
  rep.stats = heap.stats();
  if (opts.with_variant1) run_variant1(trace, k, rep);
  return rep;
}

}  // namespace

RunReport run_verify(const Trace& trace, std::size_t k, RunOptions opts) {
  opts.with_oracle = true;
  return run(trace, k, opts);
}

RunReport run_bench(const Trace& trace, std::size_t k, RunOptions opts) {
  opts.with_oracle = false;
  return run(trace, k, opts);
}

void write_csv(std::ostream& out, const RunReport& report) {
  out << kCsvHeader << '\n';
  for (const OpRecord& r : report.records) {
    out << r.index << ',' << op_name(r.op) << ',';
    if (r.group) out << r.group;
    out << ',';
    if (r.result) out << *r.result;
    out << ',';
    if (r.valid) out << (*r.valid ? 1 : 0);
    out << ',' << r.cost << ',' << r.n << ',' << r.buckets << ',' << r.splits << ','
        << r.merges << ',' << (r.transition ? 1 : 0) << '\n';
  }
}

void write_summary(std::ostream& out, const RunReport& r) {
  if (!r.header.empty()) out << "# " << r.header << '\n';
  out << "k=" << r.k << " ops=" << r.ops << " checked=" << r.checked
      << " violations=" << r.violations << " empty_errors=" << r.empty_errors << '\n';
  for (OpType t : {OpType::Insert, OpType::DeleteGroup, OpType::ReadGroup}) {
    const OpSummary& s = r.by_type[static_cast<std::size_t>(t)];
    out << op_name(t) << ": count=" << s.count << " max_cost=" << s.max_cost
        << " mean_cost=" << s.mean_cost << '\n';
  }
  out << "max_cost=" << r.max_cost << " steady_max_cost=" << r.steady_max_cost
      << " steady_ops=" << r.steady_ops << '\n';
  out << "splits=" << r.stats.splits << " merges=" << r.stats.merges
      << " transitions_up=" << r.stats.transitions_up
      << " transitions_down=" << r.stats.transitions_down
      << " jobs_abandoned=" << r.stats.jobs_abandoned
      << " phase_a_overruns=" << r.stats.phase_a_overruns << '\n';
  out << "bucket_count_failures=" << r.bucket_count_failures << " audits=" << r.audits
      << " audit_failures=" << r.audit_failures << " i1_excursions=" << r.i1_excursions
      << " i1_unhealed=" << r.i1_unhealed << " i1_longest=" << r.i1_longest << '\n';
  if (r.v1_violations)
    out << "variant1: ops=" << r.v1_ops << " violations=" << *r.v1_violations
        << " cost=" << r.v1_cost << '\n';
  if (!r.first_audit_failure.empty()) out << "audit: " << r.first_audit_failure << '\n';
  out << (r.passed() ? "PASS" : "FAIL") << '\n';
}

Trace plateau_trace(std::uint64_t seed, std::size_t n_target, std::size_t n_steady,
                    std::size_t k) {
  std::mt19937_64 rng(seed);
  Trace t;
  t.k = k;
  t.ops.reserve(n_target + n_steady);
  constexpr Key kRange = 4'000'000'000'000;
  auto key = [&] { return static_cast<Key>(rng() % kRange); };
  for (std::size_t j = 0; j < n_target; ++j) t.ops.push_back(TraceRecord::insert(key()));
  Key next = kRange;
  for (std::size_t j = 0; j < n_steady; ++j) {
    if (j % 2 == 0)
      t.ops.push_back(TraceRecord::insert(next++));
    else
      t.ops.push_back(TraceRecord::remove(rng() % k + 1));
  }
  return t;
}

std::vector<Key> parse_integers(std::string_view text) {
  // Reuse the trace reader: every value line becomes `i <value>`.
  std::vector<Key> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::string body = "i " + std::string(line);
    try {
      out.push_back(parse_trace(body).ops.front().value);
    } catch (const TraceParseError&) {
      throw TraceParseError(line_no, "not an integer: '" + std::string(line) + "'");
    }
  }
  return out;
}

SortReport run_sort(std::span<const Key> input, std::size_t k) {
  SortReport rep;
  rep.n = input.size();
  rep.k = k;
  rep.L = sort_window(input.size(), k);
  rep.budget = fixup_budget(rep.n, rep.L);
  if (input.empty()) {
    rep.exact = true;
    return rep;
  }
  const std::vector<Key> approx = approx_sort(input, k);
  const DeviationProfile prof = deviation_profile(approx, rep.L);
  rep.max_overshoot = prof.max_overshoot;
  rep.max_undershoot = prof.max_undershoot;
  FixupResult fix = fixup_sort(approx, rep.L);
  rep.comparisons = fix.comparisons;
  std::vector<Key> reference(input.begin(), input.end());
  std::sort(reference.begin(), reference.end());
  rep.exact = fix.sorted == reference;
  rep.sorted = std::move(fix.sorted);
  return rep;
}

void write_summary(std::ostream& out, const SortReport& r) {
  out << "n=" << r.n << " k=" << r.k << " L=" << r.L
      << " max_overshoot=" << r.max_overshoot << " max_undershoot=" << r.max_undershoot
      << " comparisons=" << r.comparisons << " budget=" << r.budget
      << " exact=" << (r.exact ? 1 : 0) << '\n'
      << (r.passed() ? "PASS" : "FAIL") << '\n';
}

}  // namespace sloppy
