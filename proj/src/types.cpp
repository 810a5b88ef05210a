#include "sloppy/types.hpp"

namespace sloppy {

GroupInterval group_interval(std::size_t n, std::size_t k, std::size_t i) {
  if (k == 0 || i < 1 || i > k) throw std::out_of_range("group index");
  return GroupInterval{(i - 1) * n / k + 1, i * n / k};
}

std::size_t group_of_rank(std::size_t n, std::size_t k, std::size_t r) {
  if (n == 0 || r < 1 || r > n) throw std::out_of_range("rank");
  return (r * k + n - 1) / n;
}

}  // namespace sloppy
