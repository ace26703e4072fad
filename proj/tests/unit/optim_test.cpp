#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "adasamp/model.hpp"
#include "adasamp/optim.hpp"
#include "adasamp/rng.hpp"
#include "oracles.hpp"

using namespace adasamp;

TEST(StepSize, StronglyConvexHandValue) {
  EXPECT_DOUBLE_EQ(step_size(StepSchedule::strongly_convex(1.0, 1.0), 1), 0.5);
  const auto s = StepSchedule::strongly_convex(0.1, 2.0);
  for (std::size_t t = 1; t < 1000; t += 37) EXPECT_LE(step_size(s, t), 1.0 / 2.0);
}

TEST(StepSize, InverseDecay) {
  const auto flat = StepSchedule::inverse_decay(0.1, 0.0);
  for (std::size_t t : {1u, 2u, 100u, 100000u}) EXPECT_EQ(step_size(flat, t), 0.1);
  const auto s = StepSchedule::inverse_decay(0.3, 0.05);
  EXPECT_DOUBLE_EQ(step_size(s, 10), 0.3 / 1.5);
  for (std::size_t t = 1; t < 5000; t += 13) {
    EXPECT_LE(step_size(s, t), 0.3 / (0.05 * static_cast<double>(t)));
  }
  EXPECT_EQ(step_size(StepSchedule::constant(0.7), 99), 0.7);
}

TEST(StepSize, NonincreasingAndPositive) {
  for (const auto& s : {StepSchedule::constant(0.2), StepSchedule::inverse_decay(0.2, 0.3),
                        StepSchedule::strongly_convex(0.5, 3.0)}) {
    double prev = step_size(s, 1);
    for (std::size_t t = 2; t < 2000; ++t) {
      const double cur = step_size(s, t);
      EXPECT_GT(cur, 0.0);
      EXPECT_LE(cur, prev);
      prev = cur;
    }
  }
}

TEST(StepSize, RejectsBadInput) {
  EXPECT_THROW(step_size(StepSchedule::constant(0.1), 0), std::invalid_argument);
  EXPECT_THROW(StepSchedule::constant(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(StepSchedule::inverse_decay(0.1, -1.0).validate(), std::invalid_argument);
  EXPECT_THROW(StepSchedule::strongly_convex(0.0, 1.0).validate(), std::invalid_argument);
  EXPECT_THROW(StepSchedule::strongly_convex(1.0, 0.0).validate(), std::invalid_argument);
  EXPECT_THROW(parse_schedule_kind("cosine"), std::invalid_argument);
  EXPECT_THROW(parse_rule_kind("adam"), std::invalid_argument);
  EXPECT_EQ(parse_rule_kind(to_string(RuleKind::adagrad)), RuleKind::adagrad);
  EXPECT_EQ(parse_schedule_kind(to_string(ScheduleKind::strongly_convex)),
            ScheduleKind::strongly_convex);
}

TEST(ApplyUpdate, SgdSingleStep) {
  auto rule = UpdateRuleState::sgd();
  const std::vector<std::vector<double>> g{{1.0, -2.0, 0.5, 4.0}};
  const auto h = apply_update(Hypothesis::zeros(2, 2), g, 1, StepSchedule::constant(0.1), rule);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(h.params[j], -0.1 * g[0][j]);
}

TEST(ApplyUpdate, MiniBatchUsesPlainMean) {
  auto rule = UpdateRuleState::sgd();
  const std::vector<std::vector<double>> g{{1.0, 0.0}, {3.0, -2.0}};
  const auto h = apply_update(Hypothesis::zeros(1, 2), g, 1, StepSchedule::constant(1.0), rule);
  EXPECT_DOUBLE_EQ(h.params[0], -2.0);
  EXPECT_DOUBLE_EQ(h.params[1], 1.0);
}

TEST(ApplyUpdate, ZeroGradientIsIdentity) {
  Rng rng(1);
  const auto h0 = oracle::random_hypothesis(3, 2, 1.0, rng);
  const std::vector<std::vector<double>> zero{std::vector<double>(6, 0.0)};
  auto sgd = UpdateRuleState::sgd();
  EXPECT_EQ(apply_update(h0, zero, 3, StepSchedule::constant(0.5), sgd).params, h0.params);
  auto ada = UpdateRuleState::adagrad(6);
  const auto h1 = apply_update(h0, zero, 1, StepSchedule::constant(0.5), ada);
  EXPECT_EQ(h1.params, h0.params);
  for (double a : ada.accum) EXPECT_EQ(a, 0.0);
}

TEST(ApplyUpdate, AdagradFirstStepIsSignStep) {
  auto rule = UpdateRuleState::adagrad(4, 1e-300);
  const std::vector<std::vector<double>> g{{0.3, -0.3, 0.3, -0.3}};
  const auto h = apply_update(Hypothesis::zeros(2, 2), g, 1, StepSchedule::constant(0.1), rule);
  EXPECT_NEAR(h.params[0], -0.1, 1e-12);
  EXPECT_NEAR(h.params[1], 0.1, 1e-12);
  EXPECT_NEAR(h.params[2], -0.1, 1e-12);
  EXPECT_NEAR(h.params[3], 0.1, 1e-12);
}

TEST(ApplyUpdate, AdagradAccumulatorMonotone) {
  Rng rng(2);
  auto rule = UpdateRuleState::adagrad(5);
  auto h = Hypothesis::zeros(1, 5);
  std::vector<double> prev = rule.accum;
  for (std::size_t t = 1; t <= 200; ++t) {
    std::vector<std::vector<double>> g{std::vector<double>(5)};
    for (auto& v : g[0]) v = rng.normal();
    h = apply_update(h, g, t, StepSchedule::inverse_decay(0.1, 0.01), rule);
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_GE(rule.accum[j], prev[j]);
      EXPECT_NEAR(rule.accum[j] - prev[j], g[0][j] * g[0][j], 1e-12 * (1.0 + rule.accum[j]));
    }
    prev = rule.accum;
  }
}

TEST(ApplyUpdate, ProjectionAndShapeErrors) {
  auto rule = UpdateRuleState::sgd();
  const std::vector<std::vector<double>> g{{-30.0, -40.0}};
  const auto h = apply_update(Hypothesis::zeros(1, 2), g, 1, StepSchedule::constant(1.0), rule, 5.0);
  EXPECT_NEAR(l2_norm(h.params), 5.0, 1e-12);
  const std::vector<std::vector<double>> bad{{1.0}};
  EXPECT_THROW(apply_update(Hypothesis::zeros(1, 2), bad, 1, StepSchedule::constant(1.0), rule),
               std::invalid_argument);
  EXPECT_THROW(apply_update(Hypothesis::zeros(1, 2), {}, 1, StepSchedule::constant(1.0), rule),
               std::invalid_argument);
  auto ada = UpdateRuleState::adagrad(3);
  EXPECT_THROW(apply_update(Hypothesis::zeros(1, 2), g, 1, StepSchedule::constant(1.0), ada),
               std::invalid_argument);
  EXPECT_THROW(UpdateRuleState::adagrad(2, 0.0), std::invalid_argument);
}

TEST(ApplyUpdate, Deterministic) {
  Rng rng(3);
  const auto h0 = oracle::random_hypothesis(3, 3, 1.0, rng);
  std::vector<std::vector<double>> g(4, std::vector<double>(9));
  for (auto& v : g) {
    for (auto& e : v) e = rng.normal();
  }
  auto a = UpdateRuleState::adagrad(9), b = UpdateRuleState::adagrad(9);
  const auto s = StepSchedule::inverse_decay(0.2, 0.1);
  EXPECT_EQ(apply_update(h0, g, 7, s, a).params, apply_update(h0, g, 7, s, b).params);
}

// For mu-strongly convex F and eta_t = 1/(mu t + beta), one SGD step on the
// same example is a contraction with coefficient (1 - eta_t mu).
TEST(ApplyUpdate, StronglyConvexStepIsContractive) {
  Rng rng(4);
  const Dataset ds = oracle::random_dataset(30, 3, 3, rng);
  for (int rep = 0; rep < 100; ++rep) {
    const double mu = 0.05 + rng.uniform();
    const auto k = regularity_constants(ds, mu, 5.0);
    const auto sched = StepSchedule::strongly_convex(mu, k.smooth_beta);
    const std::size_t t = 1 + rng.index(500);
    const auto h = oracle::random_hypothesis(3, 3, 2.0, rng);
    const auto hp = oracle::random_hypothesis(3, 3, 2.0, rng);
    const auto& z = ds[rng.index(ds.size())];
    auto rule = UpdateRuleState::sgd();
    const std::vector<std::vector<double>> g{objective_grad(h, z, mu)};
    const std::vector<std::vector<double>> gp{objective_grad(hp, z, mu)};
    const auto u = apply_update(h, g, t, sched, rule);
    const auto up = apply_update(hp, gp, t, sched, rule);
    std::vector<double> d0(h.size()), d1(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) {
      d0[j] = h.params[j] - hp.params[j];
      d1[j] = u.params[j] - up.params[j];
    }
    const double eta = step_size(sched, t);
    EXPECT_LE(l2_norm(d1), (1.0 - eta * mu) * l2_norm(d0) + 1e-9);
  }
}
