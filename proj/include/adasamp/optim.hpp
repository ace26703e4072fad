#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "adasamp/model.hpp"

namespace adasamp {

enum class ScheduleKind { constant, inverse_decay, strongly_convex };

/// Step-size schedules:
///   constant         eta_t = eta
///   inverse_decay    eta_t = eta / (1 + kappa t)
///   strongly_convex  eta_t = 1 / (mu t + beta)
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::inverse_decay;
  double eta = 0.1;
  double kappa = 0.0;
  double mu = 0.0;
  double beta_smooth = 0.0;

  static StepSchedule constant(double eta);
  static StepSchedule inverse_decay(double eta, double kappa);
  static StepSchedule strongly_convex(double mu, double beta_smooth);

  void validate() const;
};

double step_size(const StepSchedule& s, std::size_t t);

enum class RuleKind { sgd, adagrad };

struct UpdateRuleState {
  RuleKind kind = RuleKind::sgd;
  std::vector<double> accum;  ///< AdaGrad sum of squared mean gradients
  double eps = 1e-8;

  static UpdateRuleState sgd();
  static UpdateRuleState adagrad(std::size_t num_params, double eps = 1e-8);
};

/// One hypothesis update on the plain average of `grads`:
///   SGD:     h - eta_t * g
///   AdaGrad: accum += g^2, then h_j - eta_t * g_j / sqrt(accum_j + eps)
/// followed by projection onto the ball of `projection_radius`.
Hypothesis apply_update(Hypothesis h, std::span<const std::vector<double>> grads, std::size_t t,
                        const StepSchedule& sched, UpdateRuleState& state,
                        double projection_radius = std::numeric_limits<double>::infinity());

std::string to_string(ScheduleKind k);
std::string to_string(RuleKind k);
ScheduleKind parse_schedule_kind(const std::string& s);
RuleKind parse_rule_kind(const std::string& s);

}  // namespace adasamp
