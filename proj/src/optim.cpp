#include "adasamp/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace adasamp {

StepSchedule StepSchedule::constant(double eta) {
  StepSchedule s;
  s.kind = ScheduleKind::constant;
  s.eta = eta;
  s.validate();
  return s;
}

StepSchedule StepSchedule::inverse_decay(double eta, double kappa) {
  StepSchedule s;
  s.kind = ScheduleKind::inverse_decay;
  s.eta = eta;
  s.kappa = kappa;
  s.validate();
  return s;
}

StepSchedule StepSchedule::strongly_convex(double mu, double beta_smooth) {
  StepSchedule s;
  s.kind = ScheduleKind::strongly_convex;
  s.mu = mu;
  s.beta_smooth = beta_smooth;
  s.validate();
  return s;
}

void StepSchedule::validate() const {
  switch (kind) {
    case ScheduleKind::constant:
      if (!(eta > 0.0)) throw std::invalid_argument("step schedule: eta must be > 0");
      break;
    case ScheduleKind::inverse_decay:
      if (!(eta > 0.0)) throw std::invalid_argument("step schedule: eta must be > 0");
      if (!(kappa >= 0.0)) throw std::invalid_argument("step schedule: kappa must be >= 0");
      break;
    case ScheduleKind::strongly_convex:
      if (!(mu > 0.0) || !(beta_smooth > 0.0)) {
        throw std::invalid_argument("step schedule: strongly_convex needs mu > 0 and beta > 0");
      }
      break;
  }
}

double step_size(const StepSchedule& s, std::size_t t) {
  if (t < 1) throw std::invalid_argument("step_size: iteration must be >= 1");
  const double td = static_cast<double>(t);
  switch (s.kind) {
    case ScheduleKind::constant:
      return s.eta;
    case ScheduleKind::inverse_decay:
      return s.eta / (1.0 + s.kappa * td);
    case ScheduleKind::strongly_convex:
      return 1.0 / (s.mu * td + s.beta_smooth);
  }
  throw std::logic_error("step_size: unknown schedule");
}

UpdateRuleState UpdateRuleState::sgd() { return UpdateRuleState{}; }

UpdateRuleState UpdateRuleState::adagrad(std::size_t num_params, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("AdaGrad: eps must be > 0");
  UpdateRuleState s;
  s.kind = RuleKind::adagrad;
  s.accum.assign(num_params, 0.0);
  s.eps = eps;
  return s;
}

Hypothesis apply_update(Hypothesis h, std::span<const std::vector<double>> grads, std::size_t t,
                        const StepSchedule& sched, UpdateRuleState& state,
                        double projection_radius) {
  if (grads.empty()) throw std::invalid_argument("apply_update: empty gradient list");
  const std::size_t p = h.params.size();
  std::vector<double> mean(p, 0.0);
  for (const auto& g : grads) {
    if (g.size() != p) throw std::invalid_argument("apply_update: gradient shape mismatch");
    for (std::size_t j = 0; j < p; ++j) mean[j] += g[j];
  }
  const double inv = 1.0 / static_cast<double>(grads.size());
  for (double& v : mean) v *= inv;

  const double eta = step_size(sched, t);
  if (state.kind == RuleKind::sgd) {
    for (std::size_t j = 0; j < p; ++j) h.params[j] -= eta * mean[j];
  } else {
    if (state.accum.size() != p) {
      throw std::invalid_argument("apply_update: AdaGrad accumulator shape mismatch");
    }
    for (std::size_t j = 0; j < p; ++j) {
      state.accum[j] += mean[j] * mean[j];
      h.params[j] -= eta * mean[j] / std::sqrt(state.accum[j] + state.eps);
    }
  }
  project_to_ball(h.params, projection_radius);
  return h;
}

std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::inverse_decay: return "inverse_decay";
    case ScheduleKind::strongly_convex: return "strongly_convex";
  }
  return "?";
}

std::string to_string(RuleKind k) { return k == RuleKind::sgd ? "sgd" : "adagrad"; }

ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "inverse_decay") return ScheduleKind::inverse_decay;
  if (s == "strongly_convex") return ScheduleKind::strongly_convex;
  throw std::invalid_argument("unknown step schedule '" + s + "'");
}

RuleKind parse_rule_kind(const std::string& s) {
  if (s == "sgd") return RuleKind::sgd;
  if (s == "adagrad") return RuleKind::adagrad;
  throw std::invalid_argument("unknown update rule '" + s + "'");
}

}  // namespace adasamp
