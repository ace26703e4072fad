#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adasamp/data.hpp"
#include "adasamp/model.hpp"
#include "adasamp/optim.hpp"

namespace adasamp {

/// Empirical probes of uniform data stability (replace one training
/// example) and hyperparameter stability (replace one index of the
/// sampling sequence) for uniformly sampled SGD with the strongly convex
/// step schedule 1/(mu t + beta).
struct ProbeConfig {
  SynthConfig synth;              ///< synth.n is the training-set size n
  double mu = 0.1;
  double loss_max = kDefaultLossMax;
  std::size_t iterations = 500;  ///< T
  std::size_t perturbations = 50;
  std::size_t shared_sequences = 20;  ///< r draws averaged in each data probe
  std::size_t test_points = 20;       ///< fresh points z the loss gap is taken over
  std::uint64_t seed = 1;

  void validate() const;
};

struct ProbeResult {
  RegularityConstants constants;
  double beta_bound = 0.0;   ///< 2 L^2 / (mu n)
  double gamma_bound = 0.0;  ///< 2 L^2 / (mu T)
  std::vector<double> data_gaps;   ///< one per replace-one-example probe
  std::vector<double> hyper_gaps;  ///< one per replace-one-index probe
  double beta_empirical = 0.0;     ///< max of data_gaps
  double gamma_empirical = 0.0;    ///< max of hyper_gaps
  double beta_median = 0.0;
  double gamma_median = 0.0;
};

ProbeResult probe_stability(const ProbeConfig& cfg);

/// Deterministic SGD over an explicit index sequence, one example per step.
Hypothesis run_index_sequence(const Dataset& ds, std::span<const std::size_t> sequence,
                              const StepSchedule& sched, double mu, double projection_radius,
                              Hypothesis h0);

/// max over z of |mean_r L(A(S,r),z) - mean_r L(A(S',r),z)|.
double data_perturbation_gap(const Dataset& s, const Dataset& s_prime,
                             std::span<const std::vector<std::size_t>> sequences,
                             std::span<const Example> eval_points, const StepSchedule& sched,
                             double mu, double projection_radius, double loss_max);

/// max over z of |L(A(S,r),z) - L(A(S,r'),z)|.
double hyper_perturbation_gap(const Dataset& s, std::span<const std::size_t> r,
                              std::span<const std::size_t> r_prime,
                              std::span<const Example> eval_points, const StepSchedule& sched,
                              double mu, double projection_radius, double loss_max);

}  // namespace adasamp
