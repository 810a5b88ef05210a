#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sloppy/types.hpp"

namespace sloppy {

enum class OpType : std::uint8_t { Insert, DeleteGroup, ReadGroup };

/// One line of a trace: `i <key>`, `d <group>` or `r <group>`.
struct TraceRecord {
  OpType op = OpType::Insert;
  Key value = 0;  // key for Insert, group index otherwise

  static TraceRecord insert(Key x) { return {OpType::Insert, x}; }
  static TraceRecord remove(std::size_t i) {
    return {OpType::DeleteGroup, static_cast<Key>(i)};
  }
  static TraceRecord read(std::size_t i) {
    return {OpType::ReadGroup, static_cast<Key>(i)};
  }
  std::size_t group() const { return static_cast<std::size_t>(value); }
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::optional<std::size_t> k;  // from the `# k=` header
  std::vector<TraceRecord> ops;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Distribution : std::uint8_t { Uniform, Skew, Ascending, AdversarialShrink };

/// Throws std::invalid_argument for an unknown name.
Distribution parse_distribution(std::string_view name);
std::string_view distribution_name(Distribution d);

inline constexpr std::string_view kGeneratorName = "mt19937_64";

/// Deterministic workload for (dist, seed, n_ops, k). The generator tracks
/// the element count and never emits a group op on an empty structure.
///  - uniform: a 10^4-op insert ramp, then half inserts and half group ops
///    (9 deletes per read), uniform keys and groups.
///  - skew: as uniform, but 80% of group ops target group 1 and keys come
///    from a small range, so ties are common.
///  - ascending: as uniform, with strictly increasing keys.
///  - adversarial-shrink: inserts for the first 40% of ops, then 90% deletes
///    spread over all groups until the structure collapses.
Trace gen_trace(Distribution dist, std::uint64_t seed, std::size_t n_ops,
                std::size_t k);

/// `k` (when given) validates group indices; otherwise the header decides.
/// Throws TraceParseError naming the offending line.
Trace parse_trace(std::string_view text,
                  std::optional<std::size_t> k = std::nullopt);
std::string emit_trace(const Trace& trace);

}  // namespace sloppy
