#include "adasamp/stability_probe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adasamp/experiment.hpp"
#include "adasamp/rng.hpp"

namespace adasamp {

void ProbeConfig::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("probe: mu must be > 0 (strongly convex regime)");
  if (!(loss_max > 0.0)) throw std::invalid_argument("probe: M must be > 0");
  if (iterations < 1 || perturbations < 1 || shared_sequences < 1 || test_points < 1) {
    throw std::invalid_argument("probe: counts must be >= 1");
  }
  synth.validate();
}

Hypothesis run_index_sequence(const Dataset& ds, std::span<const std::size_t> sequence,
                              const StepSchedule& sched, double mu, double projection_radius,
                              Hypothesis h) {
  UpdateRuleState rule = UpdateRuleState::sgd();
  std::vector<std::vector<double>> grad(1);
  for (std::size_t t = 1; t <= sequence.size(); ++t) {
    grad[0] = objective_grad(h, ds[sequence[t - 1]], mu);
    h = apply_update(std::move(h), grad, t, sched, rule, projection_radius);
  }
  return h;
}

double data_perturbation_gap(const Dataset& s, const Dataset& s_prime,
                             std::span<const std::vector<std::size_t>> sequences,
                             std::span<const Example> eval_points, const StepSchedule& sched,
                             double mu, double projection_radius, double loss_max) {
  std::vector<double> diff(eval_points.size(), 0.0);
  const auto h0 = Hypothesis::zeros(s.num_classes(), s.dim());
  for (const auto& r : sequences) {
    const auto h = run_index_sequence(s, r, sched, mu, projection_radius, h0);
    const auto hp = run_index_sequence(s_prime, r, sched, mu, projection_radius, h0);
    for (std::size_t k = 0; k < eval_points.size(); ++k) {
      diff[k] += bounded_loss(h, eval_points[k], loss_max) -
                 bounded_loss(hp, eval_points[k], loss_max);
    }
  }
  double worst = 0.0;
  for (double d : diff) worst = std::max(worst, std::abs(d) / static_cast<double>(sequences.size()));
  return worst;
}

double hyper_perturbation_gap(const Dataset& s, std::span<const std::size_t> r,
                              std::span<const std::size_t> r_prime,
                              std::span<const Example> eval_points, const StepSchedule& sched,
                              double mu, double projection_radius, double loss_max) {
  const auto h0 = Hypothesis::zeros(s.num_classes(), s.dim());
  const auto h = run_index_sequence(s, r, sched, mu, projection_radius, h0);
  const auto hp = run_index_sequence(s, r_prime, sched, mu, projection_radius, h0);
  double worst = 0.0;
  for (const auto& z : eval_points) {
    worst = std::max(worst, std::abs(bounded_loss(h, z, loss_max) - bounded_loss(hp, z, loss_max)));
  }
  return worst;
}

ProbeResult probe_stability(const ProbeConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.synth.n;
  // One draw from the generator covers the training set, the replacement
  // pool and the fresh evaluation points.
  SynthConfig pool_cfg = cfg.synth;
  pool_cfg.n = n + cfg.perturbations + cfg.test_points;
  const Dataset pool = synth_data(pool_cfg);
  std::vector<std::size_t> train_idx(n);
  for (std::size_t i = 0; i < n; ++i) train_idx[i] = i;
  const Dataset s = pool.subset(train_idx);
  const auto& all = pool.examples();
  const std::vector<Example> fresh(all.begin() + static_cast<std::ptrdiff_t>(n + cfg.perturbations),
                                   all.end());

  ProbeResult out;
  // Constants over the whole pool so L also covers replacements and test points.
  out.constants = regularity_constants(pool, cfg.mu, cfg.loss_max);
  const double radius = out.constants.domain_radius;
  const auto sched = StepSchedule::strongly_convex(cfg.mu, out.constants.smooth_beta);
  const double l2 = 2.0 * out.constants.lipschitz * out.constants.lipschitz;
  out.beta_bound = l2 / (cfg.mu * static_cast<double>(n));
  out.gamma_bound = l2 / (cfg.mu * static_cast<double>(cfg.iterations));

  Rng rng = make_stream(cfg.seed, Stream::probe);
  auto random_sequence = [&] {
    std::vector<std::size_t> r(cfg.iterations);
    for (auto& i : r) i = rng.index(n);
    return r;
  };

  for (std::size_t p = 0; p < cfg.perturbations; ++p) {
    const std::size_t k = rng.index(n);
    std::vector<Example> replaced = s.examples();
    replaced[k] = all[n + p];
    const Dataset s_prime(std::move(replaced), s.num_classes());
    std::vector<std::vector<std::size_t>> seqs;
    for (std::size_t j = 0; j < cfg.shared_sequences; ++j) seqs.push_back(random_sequence());
    std::vector<Example> eval = fresh;
    eval.push_back(s[k]);
    eval.push_back(all[n + p]);
    out.data_gaps.push_back(data_perturbation_gap(s, s_prime, seqs, eval, sched, cfg.mu, radius,
                                                  cfg.loss_max));
  }

  for (std::size_t p = 0; p < cfg.perturbations; ++p) {
    const auto r = random_sequence();
    auto r_prime = r;
    const std::size_t pos = rng.index(cfg.iterations);
    if (n > 1) r_prime[pos] = (r[pos] + 1 + rng.index(n - 1)) % n;
    std::vector<Example> eval = fresh;
    eval.push_back(s[r[pos]]);
    eval.push_back(s[r_prime[pos]]);
    out.hyper_gaps.push_back(
        hyper_perturbation_gap(s, r, r_prime, eval, sched, cfg.mu, radius, cfg.loss_max));
  }

  out.beta_empirical = *std::max_element(out.data_gaps.begin(), out.data_gaps.end());
  out.gamma_empirical = *std::max_element(out.hyper_gaps.begin(), out.hyper_gaps.end());
  out.beta_median = median(out.data_gaps);
  out.gamma_median = median(out.hyper_gaps);
  return out;
}

}  // namespace adasamp
