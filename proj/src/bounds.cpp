#include "adasamp/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace adasamp {

namespace {

constexpr const char* kDecayingStepCondition =
    "assumes eta_t in [0, eta/t] under uniform sampling; not enforced";

void require_positive_counts(std::size_t n, std::size_t t, const char* who) {
  if (n < 1 || t < 1) throw std::invalid_argument(std::string(who) + ": n and T must be >= 1");
}

void require_delta(double delta, const char* who) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument(std::string(who) + ": delta must lie in (0, 1)");
  }
}

void require_nonneg(double v, const char* what, const char* who) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(who) + ": " + what + " must be finite and >= 0");
  }
}

// Shared square-root term of the KL bounds.
double kl_root(double kl, double log_term, double loss_max, double n, double t, double beta,
               double gamma) {
  const double lead = loss_max + 2.0 * n * beta;
  return std::sqrt(2.0 * (kl + log_term) * (lead * lead / n + 4.0 * t * gamma * gamma));
}

}  // namespace

StabilityCoefficients stab_convex(double lipschitz, double eta, std::size_t iterations,
                                  std::size_t n) {
  require_positive_counts(n, iterations, "stab_convex");
  require_nonneg(eta, "eta", "stab_convex");
  StabilityCoefficients s;
  s.beta_data = 2.0 * lipschitz * lipschitz * eta *
                (std::log(static_cast<double>(iterations)) + 1.0) / static_cast<double>(n);
  s.provenance = "convex";
  s.conditions = std::string(kDecayingStepCondition) + "; eta <= 2/beta_smooth";
  return s;
}

StabilityCoefficients stab_nonconvex(double lipschitz, double beta_smooth, double eta,
                                     std::size_t iterations, std::size_t n, double loss_max) {
  if (n < 2) throw std::invalid_argument("stab_nonconvex: n must be >= 2");
  require_positive_counts(n, iterations, "stab_nonconvex");
  if (!(eta > 0.0) || !(beta_smooth > 0.0)) {
    throw std::invalid_argument("stab_nonconvex: eta and beta_smooth must be > 0");
  }
  const double be = beta_smooth * eta;
  StabilityCoefficients s;
  s.beta_data = (loss_max + 1.0 / be) / static_cast<double>(n - 1) *
                std::pow(2.0 * lipschitz * lipschitz * eta, 1.0 / (be + 1.0)) *
                std::pow(static_cast<double>(iterations), be / (be + 1.0));
  s.provenance = "nonconvex";
  s.conditions = kDecayingStepCondition;
  return s;
}

StabilityCoefficients stab_pointwise_datadep(double lipschitz, double eta,
                                             std::size_t iterations, std::size_t n,
                                             double beta_smooth, double risk_h0) {
  require_positive_counts(n, iterations, "stab_pointwise_datadep");
  if (!(risk_h0 >= 0.0)) throw std::invalid_argument("stab_pointwise_datadep: risk must be >= 0");
  StabilityCoefficients s;
  s.beta_data = 2.0 * lipschitz * eta * (std::log(static_cast<double>(iterations)) + 1.0) *
                std::sqrt(2.0 * beta_smooth * risk_h0) / static_cast<double>(n);
  s.provenance = "pointwise_datadep";
  s.conditions = std::string(kDecayingStepCondition) + "; eta <= 2/beta_smooth";
  return s;
}

StabilityCoefficients stab_strongly_convex(double lipschitz, double mu, std::size_t n,
                                           std::size_t iterations) {
  if (!(mu > 0.0)) throw std::invalid_argument("stab_strongly_convex: mu must be > 0");
  require_positive_counts(n, iterations, "stab_strongly_convex");
  const double l2 = 2.0 * lipschitz * lipschitz;
  StabilityCoefficients s;
  s.beta_data = l2 / (mu * static_cast<double>(n));
  s.gamma_hyper = l2 / (mu * static_cast<double>(iterations));
  s.provenance = "strongly_convex";
  s.conditions = "assumes eta_t = 1/(mu t + beta_smooth) under uniform sampling";
  return s;
}

namespace {

void check_distributions(std::span<const double> q, std::span<const double> p, const char* who) {
  if (q.size() != p.size() || q.empty()) {
    throw std::invalid_argument(std::string(who) + ": distributions differ in length");
  }
  double sq = 0.0, sp = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= 0.0) || !(p[i] >= 0.0)) {
      throw std::invalid_argument(std::string(who) + ": negative probability");
    }
    if (q[i] > 0.0 && !(p[i] > 0.0)) {
      throw std::invalid_argument(std::string(who) + ": q is not absolutely continuous wrt p");
    }
    sq += q[i];
    sp += p[i];
  }
  if (std::abs(sq - 1.0) > 1e-9 || std::abs(sp - 1.0) > 1e-9) {
    throw std::invalid_argument(std::string(who) + ": inputs must sum to 1");
  }
}

}  // namespace

double kl_divergence(std::span<const double> q, std::span<const double> p) {
  check_distributions(q, p, "kl_divergence");
  double kl = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) kl += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(kl, 0.0);
}

double chisq_divergence(std::span<const double> q, std::span<const double> p) {
  check_distributions(q, p, "chisq_divergence");
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (p[i] > 0.0) s += q[i] * q[i] / p[i];
  }
  return std::max(s - 1.0, 0.0);
}

nlohmann::json BoundReport::to_json() const {
  nlohmann::json j;
  j["formula"] = formula;
  j["value"] = value;
  j["inputs"] = inputs;
  if (!conditions.empty()) j["conditions"] = conditions;
  return j;
}

BoundReport gen_bound_chisq(double chisq, double loss_max, std::size_t n, double beta_data,
                            double delta) {
  require_delta(delta, "gen_bound_chisq");
  require_nonneg(chisq, "chi^2 divergence", "gen_bound_chisq");
  require_nonneg(beta_data, "beta", "gen_bound_chisq");
  if (n < 1) throw std::invalid_argument("gen_bound_chisq: n must be >= 1");
  const double nd = static_cast<double>(n);
  BoundReport r;
  r.formula = "chisq_pointwise";
  r.value = std::sqrt((chisq + 1.0) / delta *
                      (2.0 * loss_max * loss_max / nd + 12.0 * loss_max * beta_data));
  r.inputs = {{"chisq", chisq}, {"M", loss_max}, {"n", nd}, {"beta", beta_data},
              {"delta", delta}};
  return r;
}

BoundReport gen_bound_kl(double kl, double loss_max, std::size_t n, std::size_t iterations,
                         double beta_data, double gamma_hyper, double delta) {
  require_delta(delta, "gen_bound_kl");
  require_nonneg(kl, "KL divergence", "gen_bound_kl");
  require_nonneg(beta_data, "beta", "gen_bound_kl");
  require_nonneg(gamma_hyper, "gamma", "gen_bound_kl");
  require_positive_counts(n, iterations, "gen_bound_kl");
  const double nd = static_cast<double>(n);
  const double td = static_cast<double>(iterations);
  BoundReport r;
  r.formula = "kl_uniform_stability";
  r.value = beta_data +
            kl_root(kl, std::log(2.0 / delta), loss_max, nd, td, beta_data, gamma_hyper);
  r.inputs = {{"kl", kl},     {"M", loss_max},         {"n", nd},
              {"T", td},      {"beta", beta_data},     {"gamma", gamma_hyper},
              {"delta", delta}};
  return r;
}

BoundReport gen_bound_sgd_strongly_convex(double kl, double loss_max, double lipschitz,
                                          double mu, std::size_t n, std::size_t iterations,
                                          double delta) {
  const auto stab = stab_strongly_convex(lipschitz, mu, n, iterations);
  auto r = gen_bound_kl(kl, loss_max, n, iterations, stab.beta_data, *stab.gamma_hyper, delta);
  r.formula = "kl_sgd_strongly_convex";
  r.inputs["L"] = lipschitz;
  r.inputs["mu"] = mu;
  r.conditions = stab.conditions;
  return r;
}

BoundReport gen_bound_derand(double kl, double loss_max, std::size_t n, std::size_t iterations,
                             double beta_data, double gamma_hyper, double delta) {
  require_delta(delta, "gen_bound_derand");
  require_nonneg(kl, "KL divergence", "gen_bound_derand");
  require_nonneg(beta_data, "beta", "gen_bound_derand");
  require_nonneg(gamma_hyper, "gamma", "gen_bound_derand");
  require_positive_counts(n, iterations, "gen_bound_derand");
  const double nd = static_cast<double>(n);
  const double td = static_cast<double>(iterations);
  BoundReport r;
  r.formula = "kl_derandomized";
  r.value = beta_data + gamma_hyper * std::sqrt(2.0 * td * std::log(2.0 / delta)) +
            kl_root(kl, std::log(4.0 / delta), loss_max, nd, td, beta_data, gamma_hyper);
  r.inputs = {{"kl", kl},     {"M", loss_max},         {"n", nd},
              {"T", td},      {"beta", beta_data},     {"gamma", gamma_hyper},
              {"delta", delta}};
  return r;
}

double kl_drift_statistic(const TrainTrace& trace) {
  if (trace.batch_size != 1) {
    throw std::invalid_argument("kl_drift_statistic: defined for single-draw traces only");
  }
  double s = 0.0;
  for (std::size_t t = 1; t < trace.iterations.size(); ++t) {
    const auto& rec = trace.iterations[t];
    s += rec.accum_drawn - rec.accum_mean;
  }
  return trace.amplitude * s;
}

double kl_utility_statistic(const TrainTrace& trace) {
  double s = 0.0;
  const std::size_t last = trace.iterations.empty() ? 0 : trace.iterations.size() - 1;
  for (std::size_t t = 0; t < last; ++t) {
    for (double u : trace.iterations[t].utilities) {
      if (u < 0.0) throw std::invalid_argument("kl_utility_statistic: negative utility in trace");
      s += u;
    }
  }
  return trace.amplitude / (1.0 - trace.decay) * s;
}

double path_log_ratio(const TrainTrace& trace) {
  double s = 0.0;
  for (const auto& rec : trace.iterations) s += rec.log_ratio_sum;
  return s;
}

namespace {

// Replay state for one enumerated prefix. Weights are kept as plain
// log-weights and normalized directly; no tree is involved.
struct ReplayState {
  Hypothesis h;
  UpdateRuleState rule;
  std::vector<double> log_w;
  std::vector<double> accum;
};

struct EnumContext {
  const Dataset& ds;
  const SamplerConfig& cfg;
  const StepSchedule& sched;
  const TrainSettings& settings;
  ExactKl out;
};

void enumerate(EnumContext& ctx, const ReplayState& state, std::size_t t, double path_prob,
               double kl_acc, double drift_acc, double utility_acc) {
  const auto& cfg = ctx.cfg;
  const std::size_t n = ctx.ds.size();
  if (t > cfg.iterations) {
    ctx.out.kl += path_prob * kl_acc;
    ctx.out.drift += path_prob * drift_acc;
    ctx.out.utility += path_prob * utility_acc;
    ++ctx.out.paths;
    return;
  }
  double z = 0.0;
  for (double lw : state.log_w) z += std::exp(lw);
  double accum_mean = 0.0;
  for (double a : state.accum) accum_mean += a;
  accum_mean /= static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double q = std::exp(state.log_w[i]) / z;
    if (!(q > 0.0)) continue;
    ReplayState next = state;
    std::vector<std::vector<double>> grad{objective_grad(next.h, ctx.ds[i], ctx.settings.mu)};
    next.h = apply_update(std::move(next.h), grad, t, ctx.sched, next.rule,
                          ctx.settings.projection_radius);
    const double u = utility(cfg.utility, ctx.ds[i], next.h);
    next.log_w[i] = cfg.decay * next.log_w[i] + cfg.amplitude * u;
    next.accum[i] = cfg.decay * next.accum[i] + u;

    const double kl_step = std::log(static_cast<double>(n) * q);
    const double drift_step = t >= 2 ? cfg.amplitude * (state.accum[i] - accum_mean) : 0.0;
    const double utility_step =
        t + 1 <= cfg.iterations ? cfg.amplitude / (1.0 - cfg.decay) * u : 0.0;
    enumerate(ctx, next, t + 1, path_prob * q, kl_acc + kl_step, drift_acc + drift_step,
              utility_acc + utility_step);
  }
}

MonteCarloEstimate summarize(double sum, double sum_sq, std::size_t k) {
  const double kd = static_cast<double>(k);
  MonteCarloEstimate e;
  e.mean = sum / kd;
  const double var = k > 1 ? std::max(0.0, (sum_sq - kd * e.mean * e.mean) / (kd - 1.0)) : 0.0;
  e.std_error = std::sqrt(var / kd);
  return e;
}

}  // namespace

ExactKl kl_exact_enum(const Dataset& ds, const SamplerConfig& cfg, const StepSchedule& sched,
                      const UpdateRuleState& rule, const TrainSettings& settings,
                      const Hypothesis& h0) {
  cfg.validate();
  if (ds.size() > 4 || cfg.iterations > 5 || cfg.batch_size != 1) {
    throw std::invalid_argument("kl_exact_enum: instance too large (need n <= 4, T <= 5, batch 1)");
  }
  EnumContext ctx{ds, cfg, sched, settings, {}};
  ReplayState root{h0, rule, std::vector<double>(ds.size(), 0.0),
                   std::vector<double>(ds.size(), 0.0)};
  enumerate(ctx, root, 1, 1.0, 0.0, 0.0, 0.0);
  return ctx.out;
}

KlMonteCarlo kl_monte_carlo(const Dataset& ds, const SamplerConfig& cfg,
                            const StepSchedule& sched, const UpdateRuleState& rule,
                            const TrainSettings& settings, const Hypothesis& h0,
                            std::size_t seeds, std::uint64_t base_seed) {
  if (seeds < 1) throw std::invalid_argument("kl_monte_carlo: need at least one seed");
  double s_kl = 0, q_kl = 0, s5 = 0, q5 = 0, s6 = 0, q6 = 0;
  const bool single = cfg.batch_size == 1;
  for (std::size_t k = 0; k < seeds; ++k) {
    Rng rng(mix_seed(base_seed, k));
    const auto res = train(ds, cfg, sched, rule, settings, h0, rng);
    const double kl = path_log_ratio(res.trace);
    const double t6 = kl_utility_statistic(res.trace);
    s_kl += kl;
    q_kl += kl * kl;
    s6 += t6;
    q6 += t6 * t6;
    if (single) {
      const double t5 = kl_drift_statistic(res.trace);
      s5 += t5;
      q5 += t5 * t5;
    }
  }
  KlMonteCarlo mc;
  mc.seeds = seeds;
  mc.kl = summarize(s_kl, q_kl, seeds);
  mc.utility = summarize(s6, q6, seeds);
  if (single) {
    mc.drift = summarize(s5, q5, seeds);
  } else {
    mc.drift = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }
  return mc;
}

}  // namespace adasamp
