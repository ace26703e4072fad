#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "adasamp/rng.hpp"

namespace adasamp {

/// Categorical distribution over {0, ..., n-1} backed by a sum-labeled full
/// binary tree. Sampling walks root to leaf flipping one biased coin per
/// level; re-weighting adds the weight delta along the leaf's root path.
/// Both are O(log n).
///
/// Labels live in a flat 1-based heap array: the root is nodes_[1], the
/// children of node k are 2k and 2k+1, and leaf i sits at capacity + i.
/// Leaves n .. capacity-1 are padding and stay 0.
///
/// Single writer. A tree may be moved between threads between operations.
class WeightTree {
 public:
  /// Full rebuild cadence used to bound accumulated floating-point drift.
  static constexpr std::uint64_t kRebuildInterval = std::uint64_t{1} << 20;

  explicit WeightTree(std::span<const double> weights);

  /// n leaves, all weight 1.
  static WeightTree uniform(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t depth() const { return depth_; }
  double total() const { return nodes_[1]; }
  double weight(std::size_t i) const;

  double prob(std::size_t i) const;
  std::vector<double> distribution() const;

  /// Draws a leaf. `draw` must return uniforms in [0, 1); exactly depth()
  /// of them are consumed. At each node the walk goes left iff
  /// u * (left + right) < left.
  template <class UniformSource>
    requires std::invocable<UniformSource&>
  std::size_t sample(UniformSource&& draw) const {
    if (!(nodes_[1] > 0.0)) {
      throw std::domain_error("WeightTree::sample: total weight is zero");
    }
    std::size_t node = 1;
    std::uint64_t touched = 0;
    while (node < capacity_) {
      const double left = nodes_[2 * node];
      const double right = nodes_[2 * node + 1];
      const double u = draw();
      node = (u * (left + right) < left) ? 2 * node : 2 * node + 1;
      ++touched;
    }
    touches_ = touched;
    return node - capacity_;
  }

  std::size_t sample(Rng& rng) const {
    return sample([&rng] { return rng.uniform(); });
  }

  /// Sets leaf i to `w` and adds the delta to every ancestor.
  void update(std::size_t i, double w);

  /// Recomputes every internal label bottom-up from the leaves.
  void rebuild();

  /// Node labels touched by the most recent sample() or update().
  std::uint64_t last_touch_count() const { return touches_; }

  /// Largest |label - (left + right)| over internal nodes. Diagnostic, O(n).
  double max_sum_deviation() const;

  /// Raw label array in heap order (index 0 unused).
  std::span<const double> labels() const { return nodes_; }

 private:
  void check_index(std::size_t i) const;

  std::size_t n_ = 0;
  std::size_t capacity_ = 1;
  std::size_t depth_ = 0;
  std::vector<double> nodes_;
  std::uint64_t updates_since_rebuild_ = 0;
  mutable std::uint64_t touches_ = 0;
};

/// ceil(log2(n)) for n >= 1.
std::size_t ceil_log2(std::size_t n);

}  // namespace adasamp
