#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adasamp/model.hpp"
#include "adasamp/optim.hpp"
#include "adasamp/rng.hpp"
#include "adasamp/weight_tree.hpp"

namespace adasamp {

enum class UtilityKind { zero_one, l1 };

std::string to_string(UtilityKind k);
/// Accepts "01"/"zero_one" and "l1".
UtilityKind parse_utility_kind(const std::string& s);

/// Knobs of adaptive sampling SGD.
struct SamplerConfig {
  double amplitude = 1.0;  ///< alpha >= 0
  double decay = 0.5;      ///< lambda in (0, 1)
  UtilityKind utility = UtilityKind::l1;
  std::size_t batch_size = 1;
  std::size_t iterations = 1;  ///< T
  bool track_full_conditional_kl = false;

  /// Log-weights stay in [0, alpha / (1 - lambda)]; this cap keeps exp() of
  /// them inside double range.
  static constexpr double kMaxLogWeight = 700.0;

  void validate() const;
};

/// U0 = 1{argmax != y}; U1 = 1 - p_y. Both lie in [0, 1].
double utility(UtilityKind kind, const Example& z, const Hypothesis& h);

/// w^lambda * exp(alpha * u), evaluated in the log domain.
double weight_update(double w, double u, double alpha, double lambda);

/// Sum_i q_i ln(n q_i): KL from the uniform distribution to q.
double conditional_kl(std::span<const double> q);
double conditional_kl(const WeightTree& tree);

/// Expected utility under q_next minus (1/alpha) KL(q_next || q_ref^lambda),
/// where q_ref^lambda is q_ref raised elementwise to lambda and renormalized.
double posterior_objective(std::span<const double> q_next, std::span<const double> utilities,
                           std::span<const double> q_ref, double alpha, double lambda);

/// Maximizer of posterior_objective: q(i) proportional to
/// q_ref(i)^lambda exp(alpha U_i).
std::vector<double> posterior_update(std::span<const double> q_ref,
                                     std::span<const double> utilities, double alpha,
                                     double lambda);

/// Everything recorded for one iteration t.
struct IterationRecord {
  std::vector<std::size_t> indices;       ///< the batch, in draw order
  std::vector<double> draw_probs;         ///< Q_t(i) of each draw, read before the draw
  std::vector<std::size_t> updated;       ///< unique batch indices, first-seen order
  std::vector<double> utilities;          ///< U(z_i, h_t) for each updated index
  double step = 0.0;                      ///< eta_t
  double batch_objective = 0.0;           ///< mean F(h_{t-1}, z) over the batch
  double log_ratio_sum = 0.0;             ///< sum over draws of ln(n Q_t(i))
  double accum_drawn = 0.0;               ///< sum over draws of A_i at the start of t
  double accum_mean = 0.0;                ///< (1/n) sum_i A_i at the start of t
  std::optional<double> conditional_kl;   ///< KL(Q_t || P_t) when tracked
};

/// Per-run record. A_i is the lambda-discounted sum of the utilities
/// observed for i, so ln w_i = alpha A_i at every point of the run.
struct TrainTrace {
  std::size_t n = 0;
  std::size_t batch_size = 1;
  double amplitude = 0.0;
  double decay = 0.5;
  UtilityKind utility = UtilityKind::l1;
  std::vector<IterationRecord> iterations;
  std::vector<double> accumulators;        ///< A_i after the last iteration
  std::vector<double> log_weights;         ///< ln w_i after the last iteration
  std::vector<std::size_t> occurrences;    ///< number of weight updates of i

  /// Concatenated draw stream i_1, i_2, ...
  std::vector<std::size_t> index_stream() const;
};

struct TrainSettings {
  double mu = 0.0;
  double loss_max = kDefaultLossMax;
  double projection_radius = std::numeric_limits<double>::infinity();
};

struct TrainResult {
  Hypothesis hypothesis;
  TrainTrace trace;
};

/// Called after iteration t with h_t and the trace so far.
using IterationObserver =
    std::function<void(std::size_t t, const Hypothesis& h, const TrainTrace& trace)>;

template <class S>
concept WeightedSampler = requires(S& s, const S& cs, std::size_t i, double w, Rng& rng) {
  { cs.size() } -> std::convertible_to<std::size_t>;
  { cs.prob(i) } -> std::convertible_to<double>;
  { cs.sample(rng) } -> std::convertible_to<std::size_t>;
  { cs.distribution() } -> std::convertible_to<std::vector<double>>;
  s.update(i, w);
};

/// Adaptive sampling SGD over an arbitrary weighted sampler whose weights
/// start at 1. `rng` is the sampling stream and is consumed only by draws.
template <WeightedSampler S>
TrainResult train_with(S& sampler, const Dataset& ds, const SamplerConfig& cfg,
                       const StepSchedule& sched, UpdateRuleState rule,
                       const TrainSettings& settings, Hypothesis h, Rng& rng,
                       const IterationObserver& observer = {}) {
  cfg.validate();
  sched.validate();
  const std::size_t n = ds.size();
  if (sampler.size() != n) throw std::invalid_argument("train: sampler size != dataset size");
  if (h.classes != ds.num_classes() || h.dim != ds.dim()) {
    throw std::invalid_argument("train: hypothesis shape does not match dataset");
  }

  TrainTrace trace;
  trace.n = n;
  trace.batch_size = cfg.batch_size;
  trace.amplitude = cfg.amplitude;
  trace.decay = cfg.decay;
  trace.utility = cfg.utility;
  trace.iterations.reserve(cfg.iterations);
  trace.accumulators.assign(n, 0.0);
  trace.log_weights.assign(n, 0.0);
  trace.occurrences.assign(n, 0);

  const double nd = static_cast<double>(n);
  double accum_sum = 0.0;
  // Iteration stamp per index, used to dedupe the batch in O(batch).
  std::vector<std::size_t> last_seen(n, 0);
  std::vector<std::vector<double>> grads(cfg.batch_size);

  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    IterationRecord rec;
    if (cfg.track_full_conditional_kl) rec.conditional_kl = conditional_kl(sampler.distribution());
    rec.accum_mean = accum_sum / nd;
    rec.indices.reserve(cfg.batch_size);
    rec.draw_probs.reserve(cfg.batch_size);

    double objective = 0.0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const std::size_t i = sampler.sample(rng);
      const double q = sampler.prob(i);
      rec.indices.push_back(i);
      rec.draw_probs.push_back(q);
      rec.log_ratio_sum += std::log(nd * q);
      rec.accum_drawn += trace.accumulators[i];
      grads[b] = objective_grad(h, ds[i], settings.mu);
      objective += objective_value(h, ds[i], settings.mu);
    }
    rec.batch_objective = objective / static_cast<double>(cfg.batch_size);
    rec.step = step_size(sched, t);
    h = apply_update(std::move(h), grads, t, sched, rule, settings.projection_radius);

    for (std::size_t i : rec.indices) {
      if (last_seen[i] == t) continue;
      last_seen[i] = t;
      const double u = utility(cfg.utility, ds[i], h);
      rec.updated.push_back(i);
      rec.utilities.push_back(u);
      const double a_old = trace.accumulators[i];
      trace.accumulators[i] = cfg.decay * a_old + u;
      accum_sum += trace.accumulators[i] - a_old;
      trace.log_weights[i] = cfg.decay * trace.log_weights[i] + cfg.amplitude * u;
      ++trace.occurrences[i];
      sampler.update(i, std::exp(trace.log_weights[i]));
    }
    trace.iterations.push_back(std::move(rec));
    if (observer) observer(t, h, trace);
  }
  return TrainResult{std::move(h), std::move(trace)};
}

/// Adaptive sampling SGD backed by a WeightTree.
TrainResult train(const Dataset& ds, const SamplerConfig& cfg, const StepSchedule& sched,
                  UpdateRuleState rule, const TrainSettings& settings, Hypothesis h0, Rng& rng,
                  const IterationObserver& observer = {});

}  // namespace adasamp
