#include "adasamp/adaptive.hpp"

#include <algorithm>
#include <numeric>

namespace adasamp {

std::string to_string(UtilityKind k) { return k == UtilityKind::zero_one ? "01" : "l1"; }

UtilityKind parse_utility_kind(const std::string& s) {
  if (s == "01" || s == "zero_one") return UtilityKind::zero_one;
  if (s == "l1") return UtilityKind::l1;
  throw std::invalid_argument("unknown utility '" + s + "' (expected 01 or l1)");
}

void SamplerConfig::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("sampler config: amplitude must be finite and >= 0");
  }
  if (!(decay > 0.0 && decay < 1.0)) {
    throw std::invalid_argument("sampler config: decay must lie in (0, 1)");
  }
  if (amplitude / (1.0 - decay) > kMaxLogWeight) {
    throw std::invalid_argument("sampler config: amplitude / (1 - decay) exceeds 700");
  }
  if (batch_size < 1) throw std::invalid_argument("sampler config: batch size must be >= 1");
  if (iterations < 1) throw std::invalid_argument("sampler config: iterations must be >= 1");
}

double utility(UtilityKind kind, const Example& z, const Hypothesis& h) {
  if (kind == UtilityKind::zero_one) {
    return predict_label(h, z.features) != z.label ? 1.0 : 0.0;
  }
  const auto p = predict_proba(h, z.features);
  return std::clamp(1.0 - p.at(z.label), 0.0, 1.0);
}

double weight_update(double w, double u, double alpha, double lambda) {
  if (!(w > 0.0)) throw std::invalid_argument("weight_update: weight must be > 0");
  return std::exp(lambda * std::log(w) + alpha * u);
}

double conditional_kl(std::span<const double> q) {
  const double n = static_cast<double>(q.size());
  double kl = 0.0;
  for (double p : q) {
    if (p > 0.0) kl += p * std::log(n * p);
  }
  return std::max(kl, 0.0);
}

double conditional_kl(const WeightTree& tree) { return conditional_kl(tree.distribution()); }

namespace {

std::vector<double> tempered(std::span<const double> q, double lambda) {
  std::vector<double> r(q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    r[i] = q[i] > 0.0 ? std::pow(q[i], lambda) : 0.0;
    sum += r[i];
  }
  for (double& v : r) v /= sum;
  return r;
}

}  // namespace

double posterior_objective(std::span<const double> q_next, std::span<const double> utilities,
                           std::span<const double> q_ref, double alpha, double lambda) {
  if (!(alpha > 0.0)) throw std::invalid_argument("posterior_objective: alpha must be > 0");
  if (q_next.size() != utilities.size() || q_next.size() != q_ref.size()) {
    throw std::invalid_argument("posterior_objective: length mismatch");
  }
  const auto ref = tempered(q_ref, lambda);
  double expected = 0.0;
  double kl = 0.0;
  for (std::size_t i = 0; i < q_next.size(); ++i) {
    expected += q_next[i] * utilities[i];
    if (q_next[i] > 0.0) {
      if (!(ref[i] > 0.0)) return -std::numeric_limits<double>::infinity();
      kl += q_next[i] * std::log(q_next[i] / ref[i]);
    }
  }
  return expected - kl / alpha;
}

std::vector<double> posterior_update(std::span<const double> q_ref,
                                     std::span<const double> utilities, double alpha,
                                     double lambda) {
  if (q_ref.size() != utilities.size()) {
    throw std::invalid_argument("posterior_update: length mismatch");
  }
  // Work in logs, shifted by the max, to stay finite for large alpha.
  std::vector<double> logq(q_ref.size(), -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q_ref.size(); ++i) {
    if (q_ref[i] > 0.0) logq[i] = lambda * std::log(q_ref[i]) + alpha * utilities[i];
    top = std::max(top, logq[i]);
  }
  std::vector<double> q(q_ref.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = std::exp(logq[i] - top);
    sum += q[i];
  }
  for (double& v : q) v /= sum;
  return q;
}

std::vector<std::size_t> TrainTrace::index_stream() const {
  std::vector<std::size_t> s;
  s.reserve(iterations.size() * batch_size);
  for (const auto& rec : iterations) s.insert(s.end(), rec.indices.begin(), rec.indices.end());
  return s;
}

TrainResult train(const Dataset& ds, const SamplerConfig& cfg, const StepSchedule& sched,
                  UpdateRuleState rule, const TrainSettings& settings, Hypothesis h0, Rng& rng,
                  const IterationObserver& observer) {
  auto tree = WeightTree::uniform(ds.size());
  return train_with(tree, ds, cfg, sched, std::move(rule), settings, std::move(h0), rng,
                    observer);
}

}  // namespace adasamp
