#include <doctest.h>

#include <sstream>
#include <string>

#include "sloppy/harness.hpp"
#include "sloppy/trace.hpp"

using namespace sloppy;

TEST_CASE("distribution names round trip") {
  for (Distribution d : {Distribution::Uniform, Distribution::Skew, Distribution::Ascending,
                         Distribution::AdversarialShrink})
    CHECK(parse_distribution(distribution_name(d)) == d);
  CHECK_THROWS_AS(parse_distribution("zipf"), std::invalid_argument);
}

TEST_CASE("generated traces") {
  for (Distribution d : {Distribution::Uniform, Distribution::Skew, Distribution::Ascending,
                         Distribution::AdversarialShrink}) {
    const Trace a = gen_trace(d, 7, 20000, 5);
    const Trace b = gen_trace(d, 7, 20000, 5);
    CHECK(a.ops == b.ops);
    CHECK(a.ops.size() == 20000);
    CHECK(gen_trace(d, 8, 20000, 5).ops != a.ops);
    std::size_t n = 0, low = n;
    for (const TraceRecord& r : a.ops) {
      if (r.op == OpType::Insert) {
        ++n;
        continue;
      }
      REQUIRE(n > 0);
      REQUIRE(r.group() >= 1);
      REQUIRE(r.group() <= 5);
      if (r.op == OpType::DeleteGroup) --n;
    }
    low = n;
    if (d == Distribution::AdversarialShrink) CHECK(low < 18 * 5);
  }
}

TEST_CASE("trace parsing") {
  const Trace t = parse_trace("# k=3\n\ni 5\n# comment\nd 2\nr 3\n");
  CHECK(t.k == 3u);
  REQUIRE(t.ops.size() == 3);
  CHECK(t.ops[0] == TraceRecord::insert(5));
  CHECK(t.ops[1] == TraceRecord::remove(2));
  CHECK(t.ops[2] == TraceRecord::read(3));
  CHECK(parse_trace("i -12\n").ops[0].value == -12);

  auto line_of = [](std::string_view text, std::optional<std::size_t> k) -> std::size_t {
    try {
      parse_trace(text, k);
    } catch (const TraceParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("i 1\nd 0\n", 3) == 2);
  CHECK(line_of("i 1\ni 2\nd 4\n", 3) == 3);
  CHECK(line_of("# k=3\ni 1\nd 4\n", std::nullopt) == 3);
  CHECK(line_of("x 1\n", 3) == 1);
  CHECK(line_of("i abc\n", 3) == 1);
  CHECK(line_of("i 1 2\n", 3) == 1);
}

TEST_CASE("emit and parse round trip") {
  const Trace t = gen_trace(Distribution::Skew, 2, 3000, 4);
  const Trace back = parse_trace(emit_trace(t));
  CHECK(back.k == t.k);
  CHECK(back.ops == t.ops);
}

TEST_CASE("integer lists") {
  CHECK(parse_integers("3\n 1\n\n# x\n-2\n") == std::vector<Key>{3, 1, -2});
  try {
    parse_integers("1\n2\nfoo\n");
    FAIL("expected a parse error");
  } catch (const TraceParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("run_verify on generated traces") {
  for (Distribution d : {Distribution::Uniform, Distribution::AdversarialShrink}) {
    const Trace t = gen_trace(d, 1, 30000, 4);
    RunOptions o;
    o.audit_every = 5000;
    const RunReport r = run_verify(t, 4, o);
    CHECK(r.passed());
    CHECK(r.violations == 0);
    CHECK(r.empty_errors == 0);
    CHECK(r.records.size() == t.ops.size());
    CHECK(r.checked > 0);
    CHECK(r.audits == 7);

    const RunReport again = run_verify(t, 4, o);
    CHECK(again.max_cost == r.max_cost);
    CHECK(again.stats.splits == r.stats.splits);
  }
}

TEST_CASE("CSV output") {
  std::ostringstream empty;
  write_csv(empty, run_verify(Trace{}, 3));
  CHECK(empty.str() == std::string(kCsvHeader) + "\n");

  Trace t;
  t.ops = {TraceRecord::insert(4), TraceRecord::insert(1), TraceRecord::remove(1),
           TraceRecord::read(2)};
  const RunReport r = run_verify(t, 2);
  std::ostringstream out;
  write_csv(out, r);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  CHECK(line == "0,insert,,,,1,1,0,0,0,0");
  std::size_t rows = 1;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 4);
  std::ostringstream summary;
  write_summary(summary, r);
  CHECK(summary.str().find("PASS") != std::string::npos);
}

TEST_CASE("a larger merge threshold breaks the size bounds") {
  // Merging up to 10/30 of n/k instead of 5/30 lets merged buckets exceed the
  // 6/30 merge bound; the audit must notice.
  HeapConfig cfg = HeapConfig::with_k(4);
  cfg.merge_threshold = {10, 30};
  RunOptions o;
  o.config = cfg;
  o.audit_every = 1000;
  o.keep_records = false;
  const RunReport r = run_verify(gen_trace(Distribution::Uniform, 3, 60000, 4), 4, o);
  CHECK(r.stats.merge_bound_failures > 0);
}

TEST_CASE("sorting through the harness") {
  const std::vector<Key> in{5, 1, 4, 1, 3};
  const SortReport one = run_sort(in, 1);
  CHECK(one.L == 5);
  CHECK(one.exact);
  CHECK(one.passed());
  const SortReport all = run_sort(in, 5);
  CHECK(all.L == 1);
  CHECK(all.sorted == std::vector<Key>{1, 1, 3, 4, 5});
  CHECK(all.passed());
  CHECK(run_sort(std::vector<Key>{}, 3).passed());
}

TEST_CASE("plateau traces hold n near the target") {
  const Trace t = plateau_trace(1, 5000, 4000, 8);
  CHECK(t.ops.size() == 9000);
  std::size_t n = 0, lo = SIZE_MAX, hi = 0;
  for (std::size_t j = 0; j < t.ops.size(); ++j) {
    n += t.ops[j].op == OpType::Insert ? 1 : std::size_t(-1);
    if (j >= 5000) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
  }
  CHECK(lo >= 4999);
  CHECK(hi <= 5001);
}
