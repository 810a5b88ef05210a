#include "sloppy/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace sloppy {

void OracleSet::insert(Key x) {
  sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), x), x);
}

void OracleSet::erase(Key x) {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  if (it == sorted_.end() || *it != x)
    throw std::invalid_argument("oracle erase: key absent");
  sorted_.erase(it);
}

bool OracleSet::contains(Key x) const {
  return std::binary_search(sorted_.begin(), sorted_.end(), x);
}

std::size_t OracleSet::count_less(Key x) const {
  return static_cast<std::size_t>(
      std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
}

std::size_t OracleSet::count_leq(Key x) const {
  return static_cast<std::size_t>(
      std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
}

RankInterval OracleSet::feasible_ranks(Key x) const {
  const std::size_t less = count_less(x), leq = count_leq(x);
  if (less == leq) throw std::invalid_argument("feasible_ranks: key absent");
  return {less + 1, leq};
}

bool OracleSet::is_valid_delete(Key x, std::size_t i, std::size_t k) const {
  const RankInterval r = feasible_ranks(x);
  if (size() < k) return true;
  return group_interval(size(), k, i).intersects(r.lo, r.hi);
}

}  // namespace sloppy
