#include "adasamp/sampler_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace adasamp {

GoodnessOfFit chi_square_test(std::span<const std::size_t> counts,
                              std::span<const double> probs) {
  if (counts.size() != probs.size()) throw std::invalid_argument("chi_square_test: size mismatch");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (total <= 0.0) throw std::invalid_argument("chi_square_test: no observations");

  GoodnessOfFit fit;
  std::size_t cells = 0;
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = probs[i] * total;
    const double observed = static_cast<double>(counts[i]);
    if (expected <= 0.0) {
      if (observed > 0.0) {
        // An impossible outcome was observed.
        fit.statistic = std::numeric_limits<double>::infinity();
        fit.p_value = 0.0;
        return fit;
      }
      continue;
    }
    if (expected < 5.0) {
      pooled_obs += observed;
      pooled_exp += expected;
      continue;
    }
    fit.statistic += (observed - expected) * (observed - expected) / expected;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    fit.statistic += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  if (cells < 2) return fit;
  fit.dof = cells - 1;
  boost::math::chi_squared dist(static_cast<double>(fit.dof));
  fit.p_value = boost::math::cdf(boost::math::complement(dist, fit.statistic));
  return fit;
}

SamplerCheck verify_sampler(std::span<const double> weights, std::size_t draws, Rng& rng) {
  WeightTree tree(weights);
  SamplerCheck out;
  out.n = weights.size();
  out.draws = draws;
  out.depth = tree.depth();

  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> naive(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    naive[i] = weights[i] / sum;
    out.max_prob_error = std::max(out.max_prob_error, std::abs(tree.prob(i) - naive[i]));
  }

  std::vector<std::size_t> counts(weights.size(), 0);
  for (std::size_t k = 0; k < draws; ++k) ++counts[tree.sample(rng)];
  out.sample_touches = tree.last_touch_count();
  out.fit = chi_square_test(counts, naive);

  tree.update(0, tree.weight(0));
  out.update_touches = tree.last_touch_count();
  return out;
}

}  // namespace adasamp
