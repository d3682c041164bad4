#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace heatchain {

/// Per-bond exponential clock rates held in a complete binary sum tree.
/// Updating one rate and selecting a bond proportionally to its rate are
/// both O(log B). Every internal node is recomputed from its two children
/// on update, so the root never accumulates drift from incremental
/// add/subtract; rebuild() re-derives all internal nodes anyway.
class ClockTable {
 public:
  ClockTable() = default;
  explicit ClockTable(std::span<const double> rates);

  std::size_t size() const { return size_; }
  double rate(std::size_t bond) const { return tree_[leaves_ + bond]; }
  double total_rate() const { return size_ ? tree_[1] : 0.0; }

  void set_rate(std::size_t bond, double rate);

  /// Bond whose cumulative-rate interval contains `target`, for target in
  /// [0, total_rate()). Zero-rate bonds are never returned while the
  /// total rate is positive.
  std::size_t select(double target) const;

  void rebuild();

  std::vector<double> rates() const;

 private:
  std::size_t size_ = 0;
  std::size_t leaves_ = 1;
  std::vector<double> tree_;
};

}  // namespace heatchain
