#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adasamp/rng.hpp"
#include "adasamp/weight_tree.hpp"

namespace adasamp {

struct GoodnessOfFit {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson chi-square test of observed counts against expected
/// probabilities. Cells with expected count below 5 are pooled.
GoodnessOfFit chi_square_test(std::span<const std::size_t> counts,
                              std::span<const double> probs);

struct SamplerCheck {
  std::size_t n = 0;
  std::size_t draws = 0;
  double max_prob_error = 0.0;  ///< max |tree.prob(i) - w_i / sum(w)|
  GoodnessOfFit fit;
  std::uint64_t sample_touches = 0;  ///< node touches of the last draw
  std::uint64_t update_touches = 0;  ///< node touches of one update
  std::size_t depth = 0;
};

/// Builds a tree from `weights`, compares its probabilities with naive
/// normalization, draws `draws` samples and runs the goodness-of-fit test.
SamplerCheck verify_sampler(std::span<const double> weights, std::size_t draws, Rng& rng);

}  // namespace adasamp
