#include "adasamp/weight_tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adasamp {

std::size_t ceil_log2(std::size_t n) {
  std::size_t d = 0;
  while ((std::size_t{1} << d) < n) ++d;
  return d;
}

WeightTree::WeightTree(std::span<const double> weights) : n_(weights.size()) {
  if (n_ == 0) throw std::invalid_argument("WeightTree: need at least one weight");
  bool any_positive = false;
  for (std::size_t i = 0; i < n_; ++i) {
    const double w = weights[i];
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("WeightTree: weight " + std::to_string(i) +
                                  " is negative or not finite");
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("WeightTree: all weights are zero");

  depth_ = ceil_log2(n_);
  capacity_ = std::size_t{1} << depth_;
  nodes_.assign(2 * capacity_, 0.0);
  std::copy(weights.begin(), weights.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(capacity_));
  rebuild();
}

WeightTree WeightTree::uniform(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return WeightTree(ones);
}

void WeightTree::check_index(std::size_t i) const {
  if (i >= n_) {
    throw std::out_of_range("WeightTree: index " + std::to_string(i) + " outside [0, " +
                            std::to_string(n_) + ")");
  }
}

double WeightTree::weight(std::size_t i) const {
  check_index(i);
  return nodes_[capacity_ + i];
}

double WeightTree::prob(std::size_t i) const {
  check_index(i);
  if (!(nodes_[1] > 0.0)) throw std::domain_error("WeightTree::prob: total weight is zero");
  return nodes_[capacity_ + i] / nodes_[1];
}

std::vector<double> WeightTree::distribution() const {
  if (!(nodes_[1] > 0.0)) {
    throw std::domain_error("WeightTree::distribution: total weight is zero");
  }
  // Normalize by the exact leaf sum so the result sums to 1 regardless of
  // drift in the root label.
  double sum = 0.0;
  for (std::size_t i = 0; i < n_; ++i) sum += nodes_[capacity_ + i];
  std::vector<double> p(n_);
  for (std::size_t i = 0; i < n_; ++i) p[i] = nodes_[capacity_ + i] / sum;
  return p;
}

void WeightTree::update(std::size_t i, double w) {
  check_index(i);
  if (!std::isfinite(w) || w < 0.0) {
    throw std::invalid_argument("WeightTree::update: weight is negative or not finite");
  }
  std::size_t node = capacity_ + i;
  const double delta = w - nodes_[node];
  nodes_[node] = w;
  std::uint64_t touched = 1;
  for (node /= 2; node >= 1; node /= 2) {
    nodes_[node] = std::max(0.0, nodes_[node] + delta);
    ++touched;
  }
  touches_ = touched;
  if (++updates_since_rebuild_ >= kRebuildInterval) rebuild();
}

void WeightTree::rebuild() {
  for (std::size_t k = capacity_ - 1; k >= 1; --k) {
    nodes_[k] = nodes_[2 * k] + nodes_[2 * k + 1];
  }
  updates_since_rebuild_ = 0;
}

double WeightTree::max_sum_deviation() const {
  double worst = 0.0;
  for (std::size_t k = 1; k < capacity_; ++k) {
    worst = std::max(worst, std::abs(nodes_[k] - (nodes_[2 * k] + nodes_[2 * k + 1])));
  }
  return worst;
}

}  // namespace adasamp
