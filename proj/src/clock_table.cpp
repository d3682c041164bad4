#include "heatchain/clock_table.hpp"

#include <bit>

#include "heatchain/errors.hpp"

namespace heatchain {

ClockTable::ClockTable(std::span<const double> rates)
    : size_(rates.size()),
      leaves_(std::bit_ceil(rates.size() ? rates.size() : std::size_t{1})),
      tree_(2 * leaves_, 0.0) {
  for (std::size_t i = 0; i < size_; ++i) {
    if (!(rates[i] >= 0.0)) throw DomainError("clock rates must be >= 0");
    tree_[leaves_ + i] = rates[i];
  }
  rebuild();
}

void ClockTable::set_rate(std::size_t bond, double rate) {
  std::size_t node = leaves_ + bond;
  tree_[node] = rate;
  for (node >>= 1; node >= 1; node >>= 1) {
    tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
  }
}

std::size_t ClockTable::select(double target) const {
  std::size_t node = 1;
  while (node < leaves_) {
    const std::size_t left = 2 * node;
    const double left_sum = tree_[left];
    // Rounding can push target past a subtree's sum; never descend into an
    // empty subtree.
    if ((target < left_sum && left_sum > 0.0) || tree_[left + 1] <= 0.0) {
      node = left;
    } else {
      target -= left_sum;
      node = left + 1;
    }
  }
  return node - leaves_;
}

void ClockTable::rebuild() {
  for (std::size_t node = leaves_ - 1; node >= 1; --node) {
    tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
  }
}

std::vector<double> ClockTable::rates() const {
  return {tree_.begin() + static_cast<std::ptrdiff_t>(leaves_),
          tree_.begin() + static_cast<std::ptrdiff_t>(leaves_ + size_)};
}

}  // namespace heatchain
