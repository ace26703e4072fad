#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "adasamp/adaptive.hpp"
#include "adasamp/model.hpp"
#include "adasamp/optim.hpp"

namespace adasamp {

/// Data stability beta and (when available) hyperparameter stability gamma.
struct StabilityCoefficients {
  double beta_data = 0.0;
  std::optional<double> gamma_hyper;
  std::string provenance;
  /// Preconditions the formula assumes but the evaluator does not enforce.
  std::string conditions;

  /// 2 beta + M / n, the data-stability term of the generalization error.
  double beta_hat(double loss_max, std::size_t n) const {
    return 2.0 * beta_data + loss_max / static_cast<double>(n);
  }
};

/// Convex, L-Lipschitz, smooth objective with eta_t <= eta / t:
/// 2 L^2 eta (ln T + 1) / n.
StabilityCoefficients stab_convex(double lipschitz, double eta, std::size_t iterations,
                                  std::size_t n);

/// Non-convex smooth objective with eta_t <= eta / t:
/// (M + 1/(beta eta)) / (n - 1) * (2 L^2 eta)^(1/(beta eta + 1)) * T^(beta eta/(beta eta + 1)).
StabilityCoefficients stab_nonconvex(double lipschitz, double beta_smooth, double eta,
                                     std::size_t iterations, std::size_t n, double loss_max);

/// Data-dependent pointwise hypothesis stability from the risk of h0:
/// 2 L eta (ln T + 1) sqrt(2 beta risk_h0) / n.
StabilityCoefficients stab_pointwise_datadep(double lipschitz, double eta,
                                             std::size_t iterations, std::size_t n,
                                             double beta_smooth, double risk_h0);

/// Strongly convex objective with eta_t = 1/(mu t + beta):
/// beta = 2 L^2 / (mu n), gamma = 2 L^2 / (mu T).
StabilityCoefficients stab_strongly_convex(double lipschitz, double mu, std::size_t n,
                                           std::size_t iterations);

/// KL(q || p) = sum q ln(q/p).
double kl_divergence(std::span<const double> q, std::span<const double> p);
/// chi^2(q || p) = sum q^2 / p - 1.
double chisq_divergence(std::span<const double> q, std::span<const double> p);

struct BoundReport {
  std::string formula;
  double value = 0.0;
  std::map<std::string, double> inputs;
  std::string conditions;

  nlohmann::json to_json() const;
};

/// sqrt((chi2 + 1)/delta * (2 M^2/n + 12 M beta)).
BoundReport gen_bound_chisq(double chisq, double loss_max, std::size_t n, double beta_data,
                            double delta);

/// beta + sqrt(2 (KL + ln(2/delta)) ((M + 2 n beta)^2 / n + 4 T gamma^2)).
BoundReport gen_bound_kl(double kl, double loss_max, std::size_t n, std::size_t iterations,
                         double beta_data, double gamma_hyper, double delta);

/// gen_bound_kl evaluated at the strongly convex stability coefficients.
BoundReport gen_bound_sgd_strongly_convex(double kl, double loss_max, double lipschitz,
                                          double mu, std::size_t n, std::size_t iterations,
                                          double delta);

/// Derandomized bound for product posteriors:
/// beta + gamma sqrt(2 T ln(2/delta))
///   + sqrt(2 (KL + ln(4/delta)) ((M + 2 n beta)^2 / n + 4 T gamma^2)).
BoundReport gen_bound_derand(double kl, double loss_max, std::size_t n, std::size_t iterations,
                             double beta_data, double gamma_hyper, double delta);

/// Path statistic alpha * sum_{t>=2} (A_{i_t} - mean_i A_i), with A read at
/// the start of iteration t. Its expectation bounds KL(Q || P). Single-draw
/// traces only.
double kl_drift_statistic(const TrainTrace& trace);

/// Path statistic alpha / (1 - lambda) * sum_{t=1}^{T-1} U(z_{i_t}, h_t).
/// For mini-batch traces the inner term sums over the batch's updated
/// indices.
double kl_utility_statistic(const TrainTrace& trace);

/// Realized sum over draws of ln(n Q_t(i_t)); its expectation is KL(Q || P).
double path_log_ratio(const TrainTrace& trace);

struct ExactKl {
  double kl = 0.0;
  double drift = 0.0;
  double utility = 0.0;
  std::size_t paths = 0;
};

/// Exact KL(Q || P) and exact expectations of the two path statistics by
/// enumerating all n^T index sequences. Requires n <= 4, T <= 5, batch 1.
ExactKl kl_exact_enum(const Dataset& ds, const SamplerConfig& cfg, const StepSchedule& sched,
                      const UpdateRuleState& rule, const TrainSettings& settings,
                      const Hypothesis& h0);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct KlMonteCarlo {
  MonteCarloEstimate kl;
  MonteCarloEstimate drift;  ///< NaN for mini-batch runs
  MonteCarloEstimate utility;
  std::size_t seeds = 0;
};

/// Runs `seeds` independent trainings (sampling stream k derived from
/// `base_seed`) and averages the path statistics.
KlMonteCarlo kl_monte_carlo(const Dataset& ds, const SamplerConfig& cfg,
                            const StepSchedule& sched, const UpdateRuleState& rule,
                            const TrainSettings& settings, const Hypothesis& h0,
                            std::size_t seeds, std::uint64_t base_seed);

}  // namespace adasamp
