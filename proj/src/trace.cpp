#include "sloppy/trace.hpp"

#include <charconv>
#include <random>
#include <sstream>

namespace sloppy {

Distribution parse_distribution(std::string_view name) {
  if (name == "uniform") return Distribution::Uniform;
  if (name == "skew") return Distribution::Skew;
  if (name == "ascending") return Distribution::Ascending;
  if (name == "adversarial-shrink") return Distribution::AdversarialShrink;
  throw std::invalid_argument("unknown distribution: " + std::string(name));
}

std::string_view distribution_name(Distribution d) {
  switch (d) {
    case Distribution::Uniform:
      return "uniform";
    case Distribution::Skew:
      return "skew";
    case Distribution::Ascending:
      return "ascending";
    case Distribution::AdversarialShrink:
      break;
  }
  return "adversarial-shrink";
}

Trace gen_trace(Distribution dist, std::uint64_t seed, std::size_t n_ops,
                std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::mt19937_64 rng(seed);
  // Plain modulo keeps traces identical across standard libraries.
  auto below = [&](std::uint64_t m) { return rng() % m; };
  auto chance = [&](unsigned percent) { return below(100) < percent; };

  constexpr std::size_t kRamp = 10'000;
  constexpr Key kWide = 1'000'000'000'000;
  constexpr Key kNarrow = 5'000;
  Key next_ascending = 0;

  auto draw_key = [&]() -> Key {
    switch (dist) {
      case Distribution::Skew:
        return static_cast<Key>(below(kNarrow));
      case Distribution::Ascending:
        return next_ascending++;
      default:
        return static_cast<Key>(below(2 * kWide)) - kWide;
    }
  };
  auto draw_group = [&]() -> std::size_t {
    if (dist == Distribution::Skew && chance(80)) return 1;
    return static_cast<std::size_t>(below(k)) + 1;
  };

  Trace trace;
  trace.k = k;
  trace.ops.reserve(n_ops);
  std::size_t n = 0;
  const std::size_t shrink_ramp = n_ops * 2 / 5;
  for (std::size_t op = 0; op < n_ops; ++op) {
    bool insert;
    if (dist == Distribution::AdversarialShrink)
      insert = op < shrink_ramp || chance(10);
    else
      insert = op < kRamp || chance(50);
    if (insert || n == 0) {
      trace.ops.push_back(TraceRecord::insert(draw_key()));
      ++n;
      continue;
    }
    const std::size_t g = draw_group();
    if (dist != Distribution::AdversarialShrink && chance(10)) {
      trace.ops.push_back(TraceRecord::read(g));
    } else {
      trace.ops.push_back(TraceRecord::remove(g));
      --n;
    }
  }
  return trace;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Trace parse_trace(std::string_view text, std::optional<std::size_t> k) {
  Trace trace;
  trace.k = k;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (body.starts_with("k=")) {
        std::size_t header_k = 0;
        if (!parse_number(body.substr(2), header_k) || header_k == 0)
          throw TraceParseError(line_no, "bad k header");
        if (!k) trace.k = header_k;
      }
      continue;
    }
    if (line.size() < 3 || line[1] != ' ')
      throw TraceParseError(line_no, "expected '<op> <value>'");
    const char op = line[0];
    const std::string_view arg = line.substr(2);
    if (op == 'i') {
      Key key = 0;
      if (!parse_number(arg, key)) throw TraceParseError(line_no, "bad key");
      trace.ops.push_back(TraceRecord::insert(key));
    } else if (op == 'd' || op == 'r') {
      std::size_t g = 0;
      if (!parse_number(arg, g) || g == 0)
        throw TraceParseError(line_no, "bad group index");
      if (trace.k && g > *trace.k)
        throw TraceParseError(line_no, "group index exceeds k");
      trace.ops.push_back(op == 'd' ? TraceRecord::remove(g) : TraceRecord::read(g));
    } else {
      throw TraceParseError(line_no, std::string("unknown op '") + op + "'");
    }
  }
  return trace;
}

std::string emit_trace(const Trace& trace) {
  std::ostringstream out;
  if (trace.k) out << "# k=" << *trace.k << '\n';
  for (const TraceRecord& r : trace.ops) {
    switch (r.op) {
      case OpType::Insert:
        out << "i ";
        break;
      case OpType::DeleteGroup:
        out << "d ";
        break;
      case OpType::ReadGroup:
        out << "r ";
        break;
    }
    out << r.value << '\n';
  }
  return out.str();
}

}  // namespace sloppy
