#include "adasamp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace adasamp {

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (cadence < 1) throw std::invalid_argument("experiment: cadence must be >= 1");
  if (!(mu >= 0.0)) throw std::invalid_argument("experiment: mu must be >= 0");
  if (!(loss_max > 0.0)) throw std::invalid_argument("experiment: M must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("experiment: delta must lie in (0, 1)");
  if (!(init_scale >= 0.0 && std::isfinite(init_scale))) {
    throw std::invalid_argument("experiment: init scale must be finite and >= 0");
  }
  sampler.validate();
  schedule.validate();
}

ExperimentConfig desk_experiment_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.synth.n = 2500;
  c.synth.dim = 10;
  c.synth.classes = 2;
  c.synth.imbalance = 0.7;
  c.synth.noise = 0.05;
  c.synth.separation = 8.0;
  c.synth.boundary_spread = 0.1;
  c.synth.boundary_offset = 0.3;
  c.synth.seed = mix_seed(seed, static_cast<std::uint64_t>(Stream::data));
  c.n_train = 2000;
  c.sampler.amplitude = 2.0;
  c.sampler.decay = 0.5;
  c.sampler.utility = UtilityKind::l1;
  c.sampler.batch_size = 100;
  c.sampler.iterations = 4000;
  c.sampler.track_full_conditional_kl = true;
  c.schedule = StepSchedule::inverse_decay(0.5, 0.01);
  c.rule = RuleKind::sgd;
  c.trials = 10;
  c.seed = seed;
  c.cadence = 10;
  return c;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  return mix_seed(master, 1000 + static_cast<std::uint64_t>(trial));
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  Dataset all = cfg.csv_path.empty() ? synth_data(cfg.synth) : load_csv(cfg.csv_path);
  std::size_t n_train = cfg.n_train;
  if (n_train == 0) n_train = std::max<std::size_t>(1, all.size() * 4 / 5);
  if (n_train >= all.size()) {
    throw std::invalid_argument("experiment: train split leaves no held-out examples");
  }
  auto [train, test] = split_dataset(all, n_train);
  return PreparedData{std::move(train), std::move(test)};
}

namespace {

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return format_double(v);
}

double projection_radius(const ExperimentConfig& cfg, const Dataset& train) {
  const bool project = cfg.project.value_or(cfg.mu > 0.0);
  if (!project) return std::numeric_limits<double>::infinity();
  if (!std::isnan(cfg.domain_radius)) return cfg.domain_radius;
  return default_domain_radius(train, cfg.mu);
}

MetricsRecord measure(std::size_t t, const Hypothesis& h, const PreparedData& data,
                      double loss_max, std::optional<double> kl, double utility) {
  MetricsRecord m;
  m.t = t;
  m.train_loss = mean_surrogate_loss(h, data.train);
  m.empirical_risk = empirical_risk(h, data.train, loss_max);
  m.heldout_risk = empirical_risk(h, data.test, loss_max);
  m.train_accuracy = accuracy(h, data.train);
  m.test_accuracy = accuracy(h, data.test);
  m.conditional_kl = kl;
  m.utility_kl_cumulative = utility;
  return m;
}

}  // namespace

std::string MetricsRecord::to_jsonl() const {
  std::ostringstream os;
  os << "{\"t\":" << t << ",\"train_loss\":" << json_number(train_loss)
     << ",\"empirical_risk\":" << json_number(empirical_risk)
     << ",\"heldout_risk\":" << json_number(heldout_risk)
     << ",\"train_accuracy\":" << json_number(train_accuracy)
     << ",\"test_accuracy\":" << json_number(test_accuracy) << ",\"conditional_kl\":"
     << (conditional_kl ? json_number(*conditional_kl) : std::string("null"))
     << ",\"utility_kl_cumulative\":" << json_number(utility_kl_cumulative) << "}";
  return os.str();
}

TrialResult run_trial(const ExperimentConfig& cfg, const PreparedData& data, std::size_t trial) {
  TrialResult out;
  out.trial = trial;
  out.seed = trial_seed(cfg.seed, trial);
  const auto& train = data.train;

  Rng init = make_stream(out.seed, Stream::init);
  Hypothesis h0 = Hypothesis::zeros(train.num_classes(), train.dim());
  for (double& v : h0.params) v = cfg.init_scale * init.normal();

  UpdateRuleState rule = cfg.rule == RuleKind::sgd ? UpdateRuleState::sgd()
                                                   : UpdateRuleState::adagrad(h0.size(), cfg.adagrad_eps);
  TrainSettings settings{cfg.mu, cfg.loss_max, projection_radius(cfg, train)};
  const std::size_t total = cfg.sampler.iterations;
  const double utility_kl_scale = cfg.sampler.amplitude / (1.0 - cfg.sampler.decay);

  out.metrics.push_back(measure(0, h0, data, cfg.loss_max,
                                cfg.sampler.track_full_conditional_kl ? std::optional<double>(0.0)
                                                                      : std::nullopt,
                                0.0));
  double utility_sum_before = 0.0;  // sum of utilities of iterations < t
  double utility_sum_through = 0.0;
  auto observer = [&](std::size_t t, const Hypothesis& h, const TrainTrace& trace) {
    const auto& rec = trace.iterations.back();
    utility_sum_before = utility_sum_through;
    for (double u : rec.utilities) utility_sum_through += u;
    if (rec.conditional_kl) out.conditional_kl.push_back(*rec.conditional_kl);
    if (t % cfg.cadence == 0 || t == total || t == total / 2) {
      out.metrics.push_back(
          measure(t, h, data, cfg.loss_max, rec.conditional_kl, utility_kl_scale * utility_sum_before));
    }
  };

  Rng sampling = make_stream(out.seed, Stream::sampling);
  auto result = adasamp::train(train, cfg.sampler, cfg.schedule, std::move(rule), settings, std::move(h0),
                      sampling, observer);
  for (double v : result.hypothesis.params) {
    if (!std::isfinite(v)) throw std::runtime_error("training diverged: non-finite parameters");
  }
  out.hypothesis = std::move(result.hypothesis);
  out.utility_kl_statistic = kl_utility_statistic(result.trace);
  out.log_ratio_sum = path_log_ratio(result.trace);
  out.complete = true;
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

nlohmann::json summarize(const std::vector<double>& v) {
  return {{"mean", mean(v)}, {"median", median(v)}};
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["csv_path"] = cfg.csv_path;
  j["synth"] = {{"n", cfg.synth.n},
                {"dim", cfg.synth.dim},
                {"classes", cfg.synth.classes},
                {"imbalance", cfg.synth.imbalance},
                {"noise", cfg.synth.noise},
                {"separation", cfg.synth.separation},
                {"boundary_spread", cfg.synth.boundary_spread},
                {"boundary_offset", cfg.synth.boundary_offset},
                {"radius", cfg.synth.radius},
                {"seed", cfg.synth.seed}};
  j["n_train"] = cfg.n_train;
  j["mu"] = cfg.mu;
  j["M"] = cfg.loss_max;
  j["project"] = cfg.project.value_or(cfg.mu > 0.0);
  j["init_scale"] = cfg.init_scale;
  j["sampler"] = {{"alpha", cfg.sampler.amplitude},
                  {"lambda", cfg.sampler.decay},
                  {"utility", to_string(cfg.sampler.utility)},
                  {"batch", cfg.sampler.batch_size},
                  {"iters", cfg.sampler.iterations},
                  {"track_kl", cfg.sampler.track_full_conditional_kl}};
  j["schedule"] = {{"kind", to_string(cfg.schedule.kind)},
                   {"eta", cfg.schedule.eta},
                   {"kappa", cfg.schedule.kappa},
                   {"mu", cfg.schedule.mu},
                   {"beta_smooth", cfg.schedule.beta_smooth}};
  j["rule"] = to_string(cfg.rule);
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["cadence"] = cfg.cadence;
  j["delta"] = cfg.delta;
  return j;
}

nlohmann::json build_report(const ExperimentConfig& cfg, const RegularityConstants& k,
                            std::size_t n_train, const std::vector<TrialResult>& trials) {
  const std::size_t iters = cfg.sampler.iterations;
  nlohmann::json report;
  report["config"] = config_to_json(cfg);
  report["regularity"] = {{"L", k.lipschitz},
                          {"beta_smooth", k.smooth_beta},
                          {"mu", k.strong_mu},
                          {"M", k.loss_max},
                          {"domain_radius", std::isfinite(k.domain_radius)
                                                ? nlohmann::json(k.domain_radius)
                                                : nlohmann::json(nullptr)}};

  StabilityCoefficients stab;
  if (k.strong_mu > 0.0) {
    stab = stab_strongly_convex(k.lipschitz, k.strong_mu, n_train, iters);
  } else {
    stab = stab_convex(k.lipschitz, cfg.schedule.eta, iters, n_train);
  }
  report["stability"] = {{"provenance", stab.provenance},
                         {"beta", stab.beta_data},
                         {"gamma", stab.gamma_hyper ? nlohmann::json(*stab.gamma_hyper)
                                                    : nlohmann::json(nullptr)},
                         {"conditions", stab.conditions}};

  bool complete = true;
  std::vector<double> final_loss, emp_risk, held_risk, train_acc, test_acc, utility, kl_bound,
      sc_bound, derand;
  nlohmann::json per_trial = nlohmann::json::array();
  for (const auto& tr : trials) {
    nlohmann::json jt;
    jt["trial"] = tr.trial;
    jt["seed"] = tr.seed;
    jt["complete"] = tr.complete;
    if (!tr.complete) {
      complete = false;
      jt["error"] = tr.error;
      per_trial.push_back(jt);
      continue;
    }
    const auto& last = tr.metrics.back();
    jt["train_loss"] = last.train_loss;
    jt["empirical_risk"] = last.empirical_risk;
    jt["heldout_risk_estimate"] = last.heldout_risk;
    jt["train_accuracy"] = last.train_accuracy;
    jt["test_accuracy"] = last.test_accuracy;
    jt["utility_kl_statistic"] = tr.utility_kl_statistic;
    jt["path_log_ratio"] = tr.log_ratio_sum;
    final_loss.push_back(last.train_loss);
    emp_risk.push_back(last.empirical_risk);
    held_risk.push_back(last.heldout_risk);
    train_acc.push_back(last.train_accuracy);
    test_acc.push_back(last.test_accuracy);
    utility.push_back(tr.utility_kl_statistic);

    nlohmann::json jb;
    if (stab.gamma_hyper) {
      const auto b2 = gen_bound_kl(tr.utility_kl_statistic, k.loss_max, n_train, iters, stab.beta_data,
                                   *stab.gamma_hyper, cfg.delta);
      const auto b3 = gen_bound_derand(tr.utility_kl_statistic, k.loss_max, n_train, iters,
                                       stab.beta_data, *stab.gamma_hyper, cfg.delta);
      const auto c1 = gen_bound_sgd_strongly_convex(tr.utility_kl_statistic, k.loss_max, k.lipschitz,
                                                    k.strong_mu, n_train, iters, cfg.delta);
      jb["kl_uniform_stability"] = b2.to_json();
      jb["kl_sgd_strongly_convex"] = c1.to_json();
      jb["kl_derandomized"] = b3.to_json();
      kl_bound.push_back(b2.value);
      sc_bound.push_back(c1.value);
      derand.push_back(b3.value);
    } else {
      jb["note"] = "KL bounds need hyperparameter stability; only available for mu > 0";
    }
    jt["bounds"] = jb;
    per_trial.push_back(jt);
  }
  report["trials"] = per_trial;
  nlohmann::json agg;
  agg["train_loss"] = summarize(final_loss);
  agg["empirical_risk"] = summarize(emp_risk);
  agg["heldout_risk_estimate"] = summarize(held_risk);
  agg["train_accuracy"] = summarize(train_acc);
  agg["test_accuracy"] = summarize(test_acc);
  agg["utility_kl_statistic"] = summarize(utility);
  if (!kl_bound.empty()) {
    agg["kl_uniform_stability"] = summarize(kl_bound);
    agg["kl_sgd_strongly_convex"] = summarize(sc_bound);
    agg["kl_derandomized"] = summarize(derand);
  }
  report["aggregate"] = agg;
  report["risk_note"] = "held-out risk is an estimate of the true risk";
  report["complete"] = complete;
  return report;
}

namespace {

std::vector<TrialResult> run_trials(const ExperimentConfig& cfg, const PreparedData& data) {
  std::vector<TrialResult> results(cfg.trials);
  std::size_t workers = cfg.threads;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.trials);

  auto run_one = [&](std::size_t k) {
    try {
      results[k] = run_trial(cfg, data, k);
    } catch (const std::exception& e) {
      results[k].trial = k;
      results[k].seed = trial_seed(cfg.seed, k);
      results[k].complete = false;
      results[k].error = e.what();
    }
  };
  if (workers <= 1) {
    for (std::size_t k = 0; k < cfg.trials; ++k) run_one(k);
    return results;
  }
  // Static round-robin assignment; each trial owns its state.
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < cfg.trials; k += workers) run_one(k);
    });
  }
  for (auto& th : pool) th.join();
  return results;
}

void write_outputs(const ExperimentResult& res) {
  namespace fs = std::filesystem;
  const fs::path dir(res.config.out_dir);
  fs::create_directories(dir);
  std::ofstream csv(dir / "metrics.csv");
  csv << "trial,t,train_loss,empirical_risk,heldout_risk,train_accuracy,test_accuracy,"
         "conditional_kl,utility_kl_cumulative\n";
  for (const auto& tr : res.trials) {
    std::ofstream jl(dir / ("metrics_trial" + std::to_string(tr.trial) + ".jsonl"));
    for (const auto& m : tr.metrics) {
      jl << m.to_jsonl() << '\n';
      csv << tr.trial << ',' << m.t << ',' << format_double(m.train_loss) << ','
          << format_double(m.empirical_risk) << ',' << format_double(m.heldout_risk) << ','
          << format_double(m.train_accuracy) << ',' << format_double(m.test_accuracy) << ','
          << (m.conditional_kl ? format_double(*m.conditional_kl) : std::string()) << ','
          << format_double(m.utility_kl_cumulative) << '\n';
    }
  }
  std::ofstream rep(dir / "report.json");
  rep << res.report.dump(2) << '\n';
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult res;
  res.config = config;
  auto& cfg = res.config;
  const auto data = prepare_data(cfg);
  res.constants = regularity_constants(data.train, cfg.mu, cfg.loss_max,
                                       projection_radius(cfg, data.train));
  // A strongly convex schedule left unparameterized takes mu and beta from
  // the training data.
  if (cfg.schedule.kind == ScheduleKind::strongly_convex) {
    if (!(cfg.schedule.mu > 0.0)) cfg.schedule.mu = cfg.mu;
    if (!(cfg.schedule.beta_smooth > 0.0)) cfg.schedule.beta_smooth = res.constants.smooth_beta;
  }
  cfg.validate();
  res.trials = run_trials(cfg, data);
  res.report = build_report(cfg, res.constants, data.train.size(), res.trials);
  res.complete = res.report["complete"].get<bool>();
  if (!cfg.out_dir.empty()) write_outputs(res);
  return res;
}

std::optional<std::size_t> iterations_to_target(const std::vector<MetricsRecord>& metrics,
                                                double target) {
  for (const auto& m : metrics) {
    if (m.train_loss <= target) return m.t;
  }
  return std::nullopt;
}

double train_loss_at(const std::vector<MetricsRecord>& metrics, std::size_t at) {
  double v = std::numeric_limits<double>::quiet_NaN();
  for (const auto& m : metrics) {
    if (m.t <= at) v = m.train_loss;
  }
  return v;
}

ComparisonResult compare_uniform_adaptive(const ExperimentConfig& cfg, double target_factor) {
  ComparisonResult out;
  ExperimentConfig uni = cfg;
  uni.sampler.amplitude = 0.0;
  ExperimentConfig ada = cfg;
  if (!cfg.out_dir.empty()) {
    uni.out_dir = (std::filesystem::path(cfg.out_dir) / "uniform").string();
    ada.out_dir = (std::filesystem::path(cfg.out_dir) / "adaptive").string();
  }
  out.uniform = run_experiment(uni);
  out.adaptive = run_experiment(ada);

  const std::size_t iters = cfg.sampler.iterations;
  const double unreached = static_cast<double>(iters + 1);
  std::vector<double> u_iters, a_iters;
  nlohmann::json per_trial = nlohmann::json::array();
  for (std::size_t k = 0; k < cfg.trials; ++k) {
    const auto& ut = out.uniform.trials[k];
    const auto& at = out.adaptive.trials[k];
    if (!ut.complete || !at.complete) {
      out.targets.push_back(std::numeric_limits<double>::quiet_NaN());
      out.uniform_hits.push_back(std::nullopt);
      out.adaptive_hits.push_back(std::nullopt);
      continue;
    }
    const double target = target_factor * train_loss_at(ut.metrics, iters / 2);
    out.targets.push_back(target);
    out.uniform_hits.push_back(iterations_to_target(ut.metrics, target));
    out.adaptive_hits.push_back(iterations_to_target(at.metrics, target));
    const double u = out.uniform_hits.back() ? static_cast<double>(*out.uniform_hits.back()) : unreached;
    const double a = out.adaptive_hits.back() ? static_cast<double>(*out.adaptive_hits.back()) : unreached;
    u_iters.push_back(u);
    a_iters.push_back(a);
    per_trial.push_back({{"trial", k},
                         {"target", target},
                         {"uniform_iterations", u},
                         {"adaptive_iterations", a},
                         {"uniform_final_loss", ut.metrics.back().train_loss},
                         {"adaptive_final_loss", at.metrics.back().train_loss}});
  }
  out.uniform_median = median(u_iters);
  out.adaptive_median = median(a_iters);
  out.summary = {{"target_factor", target_factor},
                 {"unreached_value", unreached},
                 {"uniform_median_iterations", out.uniform_median},
                 {"adaptive_median_iterations", out.adaptive_median},
                 {"trials", per_trial},
                 {"complete", out.uniform.complete && out.adaptive.complete}};
  if (!cfg.out_dir.empty()) {
    std::ofstream f(std::filesystem::path(cfg.out_dir) / "comparison.json");
    f << out.summary.dump(2) << '\n';
  }
  return out;
}

}  // namespace adasamp
