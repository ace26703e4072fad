#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adasamp/adaptive.hpp"
#include "adasamp/bounds.hpp"
#include "adasamp/data.hpp"
#include "adasamp/model.hpp"
#include "adasamp/optim.hpp"

namespace adasamp {

struct ExperimentConfig {
  // Data: a CSV file when csv_path is set, otherwise synthetic. The first
  // n_train examples train, the rest are held out for risk estimates.
  std::string csv_path;
  SynthConfig synth;
  std::size_t n_train = 0;  ///< 0 means 80% of the data

  // Model.
  double mu = 0.0;
  double loss_max = kDefaultLossMax;
  double domain_radius = std::numeric_limits<double>::quiet_NaN();  ///< NaN: default
  std::optional<bool> project;  ///< default: on iff mu > 0
  double init_scale = 0.01;     ///< std of the initial hypothesis entries

  SamplerConfig sampler;
  StepSchedule schedule;
  RuleKind rule = RuleKind::sgd;
  double adagrad_eps = 1e-8;

  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::size_t cadence = 10;
  double delta = 0.05;
  std::size_t threads = 0;  ///< 0: one per hardware thread, capped at trials

  std::string out_dir;

  void validate() const;
};

/// Imbalanced binary task with a small hard subset relabeled just across the
/// class boundary (linearly separable with a thin margin), trained with
/// mini-batches of 100 under an inverse-decay schedule. Synthetic data seed
/// is derived from `seed`.
ExperimentConfig desk_experiment_config(std::uint64_t seed = 1);

struct MetricsRecord {
  std::size_t t = 0;
  double train_loss = 0.0;      ///< mean cross-entropy on the training set
  double empirical_risk = 0.0;  ///< mean clamped loss on the training set
  double heldout_risk = 0.0;    ///< mean clamped loss on the held-out split (risk estimate)
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::optional<double> conditional_kl;
  double utility_kl_cumulative = 0.0;

  std::string to_jsonl() const;
};

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Hypothesis hypothesis;
  std::vector<MetricsRecord> metrics;
  std::vector<double> conditional_kl;  ///< per iteration, when tracked
  double utility_kl_statistic = 0.0;
  double log_ratio_sum = 0.0;
  bool complete = false;
  std::string error;
};

struct PreparedData {
  Dataset train;
  Dataset test;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

/// Seed of trial k, derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);

/// Trains one trial and records metrics every `cadence` iterations (plus
/// t = 0 and t = T).
TrialResult run_trial(const ExperimentConfig& cfg, const PreparedData& data, std::size_t trial);

struct ExperimentResult {
  ExperimentConfig config;
  RegularityConstants constants;
  std::vector<TrialResult> trials;
  nlohmann::json report;
  bool complete = false;
};

/// Runs every trial, builds the final report and, when cfg.out_dir is set,
/// writes metrics_trial<k>.jsonl, metrics.csv and report.json there.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Final report: per-trial risks, stability coefficients, bound values with
/// the utility-sum KL statistic substituted for KL(Q||P), and aggregates.
nlohmann::json build_report(const ExperimentConfig& cfg, const RegularityConstants& k,
                            std::size_t n_train, const std::vector<TrialResult>& trials);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// First metrics tick whose train loss is <= target, if any.
std::optional<std::size_t> iterations_to_target(const std::vector<MetricsRecord>& metrics,
                                                double target);

/// Train loss at the tick with the largest t <= at.
double train_loss_at(const std::vector<MetricsRecord>& metrics, std::size_t at);

struct ComparisonResult {
  ExperimentResult uniform;
  ExperimentResult adaptive;
  std::vector<double> targets;
  std::vector<std::optional<std::size_t>> uniform_hits;
  std::vector<std::optional<std::size_t>> adaptive_hits;
  double uniform_median = 0.0;   ///< unreached counts as T + 1
  double adaptive_median = 0.0;
  nlohmann::json summary;
};

/// Uniform (alpha = 0) versus the configured adaptive sampler on shared
/// data and trial seeds. Each trial's target is target_factor times the
/// uniform run's train loss at T/2.
ComparisonResult compare_uniform_adaptive(const ExperimentConfig& cfg,
                                          double target_factor = 1.2);

double median(std::vector<double> v);

}  // namespace adasamp
