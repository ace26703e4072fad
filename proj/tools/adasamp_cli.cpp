// adasamp command-line front end.
//
// Every shared option lives on the top-level app so a flat `key = value`
// config file (--config) can set it; flags given on the command line win.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adasamp/adaptive.hpp"
#include "adasamp/bounds.hpp"
#include "adasamp/data.hpp"
#include "adasamp/experiment.hpp"
#include "adasamp/optim.hpp"
#include "adasamp/rng.hpp"
#include "adasamp/sampler_check.hpp"
#include "adasamp/stability_probe.hpp"

using namespace adasamp;
using nlohmann::json;

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

// Flat view of the experiment settings that the options bind to.
struct Options {
  std::uint64_t seed = 1;
  std::size_t n = 0;
  std::size_t test_n = 0;
  std::size_t dim = 0;
  std::size_t classes = 0;
  double imbalance = 0.0;
  double noise = 0.0;
  double separation = 0.0;
  double spread = 0.0;
  double offset = 0.0;
  double radius = 0.0;
  std::string csv;

  std::size_t iters = 0;
  double alpha = 0.0;
  double lambda = 0.0;
  std::string utility;
  std::string rule;
  std::size_t batch = 0;
  double mu = 0.0;
  double loss_max = 0.0;
  double domain_radius = kUnset;
  std::string schedule;
  double eta = 0.0;
  double kappa = 0.0;
  double adagrad_eps = 0.0;
  double delta = 0.0;
  double init_scale = 0.0;

  std::string out;
  bool track_kl = false;  // costs O(n) per iteration, so off unless asked for
  std::size_t trials = 0;
  std::size_t cadence = 0;
  std::size_t threads = 0;
  double target_factor = 1.2;
};

// Defaults are the desk-scale synthetic task.
Options default_options() {
  const ExperimentConfig c = desk_experiment_config();
  Options o;
  o.seed = c.seed;
  o.n = c.n_train;
  o.test_n = c.synth.n - c.n_train;
  o.dim = c.synth.dim;
  o.classes = c.synth.classes;
  o.imbalance = c.synth.imbalance;
  o.noise = c.synth.noise;
  o.separation = c.synth.separation;
  o.spread = c.synth.boundary_spread;
  o.offset = c.synth.boundary_offset;
  o.radius = c.synth.radius;
  o.iters = c.sampler.iterations;
  o.alpha = c.sampler.amplitude;
  o.lambda = c.sampler.decay;
  o.utility = c.sampler.utility == UtilityKind::l1 ? "l1" : "01";
  o.rule = to_string(c.rule);
  o.batch = c.sampler.batch_size;
  o.mu = c.mu;
  o.loss_max = c.loss_max;
  o.schedule = to_string(c.schedule.kind);
  o.eta = c.schedule.eta;
  o.kappa = c.schedule.kappa;
  o.adagrad_eps = c.adagrad_eps;
  o.delta = c.delta;
  o.init_scale = c.init_scale;
  o.trials = c.trials;
  o.cadence = c.cadence;
  o.threads = c.threads;
  return o;
}

SynthConfig synth_config(const Options& o, std::size_t n) {
  SynthConfig s;
  s.n = n;
  s.dim = o.dim;
  s.classes = o.classes;
  s.imbalance = o.imbalance;
  s.noise = o.noise;
  s.separation = o.separation;
  s.boundary_spread = o.spread;
  s.boundary_offset = o.offset;
  s.radius = o.radius;
  s.seed = mix_seed(o.seed, static_cast<std::uint64_t>(Stream::data));
  return s;
}

StepSchedule make_schedule(const Options& o) {
  StepSchedule s;
  s.kind = parse_schedule_kind(o.schedule);
  s.eta = o.eta;
  s.kappa = o.kappa;
  // Filled from the training data by run_experiment.
  if (s.kind == ScheduleKind::strongly_convex) s.mu = o.mu;
  return s;
}

ExperimentConfig experiment_config(const Options& o) {
  ExperimentConfig c;
  c.csv_path = o.csv;
  if (o.csv.empty()) {
    c.synth = synth_config(o, o.n + o.test_n);
    c.n_train = o.n;
  } else {
    c.n_train = o.n;
  }
  c.mu = o.mu;
  c.loss_max = o.loss_max;
  c.domain_radius = o.domain_radius;
  c.init_scale = o.init_scale;
  c.sampler.amplitude = o.alpha;
  c.sampler.decay = o.lambda;
  c.sampler.utility = parse_utility_kind(o.utility);
  c.sampler.batch_size = o.batch;
  c.sampler.iterations = o.iters;
  c.sampler.track_full_conditional_kl = o.track_kl;
  c.schedule = make_schedule(o);
  c.rule = parse_rule_kind(o.rule);
  c.adagrad_eps = o.adagrad_eps;
  c.trials = o.trials;
  c.seed = o.seed;
  c.cadence = o.cadence;
  c.delta = o.delta;
  c.threads = o.threads;
  c.out_dir = o.out;
  return c;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

json brief(const ExperimentResult& r) {
  return {{"complete", r.complete},
          {"aggregate", r.report["aggregate"]},
          {"regularity", r.report["regularity"]},
          {"stability", r.report["stability"]}};
}

int cmd_train(const Options& o) {
  const auto res = run_experiment(experiment_config(o));
  print_json(brief(res));
  return res.complete ? 0 : 1;
}

int cmd_compare(const Options& o) {
  const auto res = compare_uniform_adaptive(experiment_config(o), o.target_factor);
  json j = res.summary;
  j["uniform"] = brief(res.uniform);
  j["adaptive"] = brief(res.adaptive);
  print_json(j);
  return j["complete"].get<bool>() ? 0 : 1;
}

int cmd_synth(const Options& o) {
  const auto ds = synth_data(synth_config(o, o.n));
  if (o.out.empty()) {
    write_csv(ds, std::cout);
  } else {
    write_csv(ds, o.out);
  }
  return 0;
}

struct BoundOptions {
  std::string formula = "all";
  double lipschitz = kUnset;
  double beta_smooth = kUnset;
  double kl = 0.0;
  double chisq = 0.0;
  double beta = kUnset;
  double gamma = kUnset;
  double risk0 = kUnset;
};

double require(double v, const char* name) {
  if (std::isnan(v)) throw std::invalid_argument(std::string("bounds: --") + name + " is required");
  return v;
}

json stab_json(const StabilityCoefficients& s) {
  return {{"beta", s.beta_data},
          {"gamma", s.gamma_hyper ? json(*s.gamma_hyper) : json(nullptr)},
          {"provenance", s.provenance},
          {"conditions", s.conditions}};
}

int cmd_bounds(const Options& o, const BoundOptions& b) {
  const std::size_t n = o.n;
  const std::size_t t = o.iters;
  const bool all = b.formula == "all";
  json out;
  bool any = false;
  auto want = [&](const char* name) {
    const bool w = all || b.formula == name;
    any = any || w;
    return w;
  };
  // "all" evaluates whatever the supplied inputs allow.
  auto have = [&](double v) { return !all || !std::isnan(v); };

  if (want("convex") && have(b.lipschitz)) {
    out["convex"] = stab_json(stab_convex(require(b.lipschitz, "L"), o.eta, t, n));
  }
  if (want("nonconvex") && have(b.lipschitz) && have(b.beta_smooth)) {
    out["nonconvex"] = stab_json(stab_nonconvex(require(b.lipschitz, "L"),
                                                require(b.beta_smooth, "beta-smooth"), o.eta, t,
                                                n, o.loss_max));
  }
  if (want("pointwise") && have(b.lipschitz) && have(b.beta_smooth) && have(b.risk0)) {
    out["pointwise"] = stab_json(stab_pointwise_datadep(
        require(b.lipschitz, "L"), o.eta, t, n, require(b.beta_smooth, "beta-smooth"),
        require(b.risk0, "risk0")));
  }
  if (want("strongly-convex") && have(b.lipschitz)) {
    out["strongly-convex"] = stab_json(stab_strongly_convex(require(b.lipschitz, "L"), o.mu, n, t));
  }
  if (want("chisq") && have(b.beta)) {
    out["chisq"] = gen_bound_chisq(b.chisq, o.loss_max, n, require(b.beta, "beta"), o.delta).to_json();
  }
  if (want("kl") && have(b.beta) && have(b.gamma)) {
    out["kl"] = gen_bound_kl(b.kl, o.loss_max, n, t, require(b.beta, "beta"),
                             require(b.gamma, "gamma"), o.delta)
                    .to_json();
  }
  if (want("sgd-strongly-convex") && have(b.lipschitz)) {
    out["sgd-strongly-convex"] = gen_bound_sgd_strongly_convex(b.kl, o.loss_max,
                                                               require(b.lipschitz, "L"), o.mu,
                                                               n, t, o.delta)
                                     .to_json();
  }
  if (want("derand") && have(b.beta) && have(b.gamma)) {
    out["derand"] = gen_bound_derand(b.kl, o.loss_max, n, t, require(b.beta, "beta"),
                                     require(b.gamma, "gamma"), o.delta)
                        .to_json();
  }
  if (!any) throw std::invalid_argument("bounds: unknown formula '" + b.formula + "'");
  if (out.empty()) throw std::invalid_argument("bounds: inputs cover no formula");
  print_json(out);
  return 0;
}

struct ProbeOptions {
  std::size_t perturbations = 50;
  std::size_t sequences = 20;
  std::size_t test_points = 20;
};

int cmd_probe(const Options& o, const ProbeOptions& p) {
  ProbeConfig cfg;
  cfg.synth = synth_config(o, o.n);
  cfg.mu = o.mu;
  cfg.loss_max = o.loss_max;
  cfg.iterations = o.iters;
  cfg.perturbations = p.perturbations;
  cfg.shared_sequences = p.sequences;
  cfg.test_points = p.test_points;
  cfg.seed = o.seed;
  const auto r = probe_stability(cfg);
  const bool ok = r.beta_empirical <= r.beta_bound && r.gamma_empirical <= r.gamma_bound;
  print_json({{"L", r.constants.lipschitz},
              {"beta_bound", r.beta_bound},
              {"gamma_bound", r.gamma_bound},
              {"beta_empirical", r.beta_empirical},
              {"gamma_empirical", r.gamma_empirical},
              {"beta_median", r.beta_median},
              {"gamma_median", r.gamma_median},
              {"within_bounds", ok}});
  return ok ? 0 : 1;
}

int cmd_verify(const Options& o, std::size_t draws) {
  Rng rng = make_stream(o.seed, Stream::sampling);
  Rng wrng = make_stream(o.seed, Stream::data);
  std::vector<double> w(o.n);
  for (auto& x : w) x = wrng.uniform();
  const auto r = verify_sampler(w, draws, rng);
  const bool ok = r.max_prob_error <= 1e-12 && r.fit.p_value > 1e-3 &&
                  r.sample_touches == r.depth && r.update_touches == r.depth + 1;
  print_json({{"n", r.n},
              {"draws", r.draws},
              {"depth", r.depth},
              {"max_prob_error", r.max_prob_error},
              {"chi_square", r.fit.statistic},
              {"dof", r.fit.dof},
              {"p_value", r.fit.p_value},
              {"sample_touches", r.sample_touches},
              {"update_touches", r.update_touches},
              {"pass", ok}});
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-sampling SGD with generalization bounds"};
  app.set_config("--config", "", "flat key = value file; command-line flags override it");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  Options o = default_options();
  app.add_option("--seed", o.seed, "master seed")->capture_default_str();
  app.add_option("--n", o.n, "training examples (synthetic) or train split size (CSV, 0 = 80%)")
      ->capture_default_str();
  app.add_option("--test-n", o.test_n, "held-out synthetic examples")->capture_default_str();
  app.add_option("--dim", o.dim)->capture_default_str();
  app.add_option("--classes", o.classes)->capture_default_str();
  app.add_option("--imbalance", o.imbalance, "class c gets share (1-imbalance)^c")
      ->capture_default_str();
  app.add_option("--noise", o.noise, "fraction of relabeled boundary examples")
      ->capture_default_str();
  app.add_option("--separation", o.separation)->capture_default_str();
  app.add_option("--spread", o.spread, "std of boundary examples")->capture_default_str();
  app.add_option("--offset", o.offset, "shift of boundary examples toward their new class")
      ->capture_default_str();
  app.add_option("--radius", o.radius, "max feature norm after rescaling")->capture_default_str();
  app.add_option("--csv", o.csv, "load data from CSV instead of synthesizing");
  app.add_option("--iters", o.iters, "iterations T")->capture_default_str();
  app.add_option("--alpha", o.alpha, "sampler amplitude")->capture_default_str();
  app.add_option("--lambda", o.lambda, "sampler decay")->capture_default_str();
  app.add_option("--utility", o.utility)
      ->check(CLI::IsMember({"01", "zero_one", "l1"}))
      ->capture_default_str();
  app.add_option("--rule", o.rule)->check(CLI::IsMember({"sgd", "adagrad"}))->capture_default_str();
  app.add_option("--batch", o.batch)->capture_default_str();
  app.add_option("--mu", o.mu, "L2 regularization strength")->capture_default_str();
  app.add_option("--M", o.loss_max, "loss clamp")->capture_default_str();
  app.add_option("--domain-radius", o.domain_radius, "projection radius (default from data)");
  app.add_option("--schedule", o.schedule)
      ->check(CLI::IsMember({"constant", "inverse_decay", "strongly_convex"}))
      ->capture_default_str();
  app.add_option("--eta", o.eta)->capture_default_str();
  app.add_option("--kappa", o.kappa)->capture_default_str();
  app.add_option("--adagrad-eps", o.adagrad_eps)->capture_default_str();
  app.add_option("--delta", o.delta, "bound confidence parameter")->capture_default_str();
  app.add_option("--init-scale", o.init_scale)->capture_default_str();
  app.add_option("--out", o.out, "output directory (synth-data: CSV file)");
  app.add_flag("--track-kl", o.track_kl, "record conditional KL every iteration");
  app.add_option("--trials", o.trials)->capture_default_str();
  app.add_option("--cadence", o.cadence, "metrics every this many iterations")
      ->capture_default_str();
  app.add_option("--threads", o.threads, "0 = hardware concurrency")->capture_default_str();
  app.add_option("--target-factor", o.target_factor)->capture_default_str();

  auto* train = app.add_subcommand("train", "run trials and write metrics and a report");
  auto* compare = app.add_subcommand("compare", "uniform vs adaptive on a shared config");
  auto* bounds = app.add_subcommand("bounds", "evaluate stability and bound formulas");
  auto* probe = app.add_subcommand("probe-stability", "empirical stability probes");
  auto* synth = app.add_subcommand("synth-data", "write a synthetic dataset as CSV");
  auto* verify = app.add_subcommand("verify-sampler", "statistical checks of the sampling tree");
  for (auto* sub : {train, compare, bounds, probe, synth, verify}) sub->fallthrough();

  BoundOptions b;
  bounds->add_option("--formula", b.formula)
      ->check(CLI::IsMember({"all", "convex", "nonconvex", "pointwise", "strongly-convex",
                             "chisq", "kl", "sgd-strongly-convex", "derand"}))
      ->capture_default_str();
  bounds->add_option("--L", b.lipschitz, "Lipschitz constant");
  bounds->add_option("--beta-smooth", b.beta_smooth, "smoothness constant");
  bounds->add_option("--kl", b.kl, "KL(Q||P)")->capture_default_str();
  bounds->add_option("--chisq", b.chisq, "chi^2(Q||P)")->capture_default_str();
  bounds->add_option("--beta", b.beta, "data stability");
  bounds->add_option("--gamma", b.gamma, "hyperparameter stability");
  bounds->add_option("--risk0", b.risk0, "risk of the initial hypothesis");

  ProbeOptions p;
  probe->add_option("--perturbations", p.perturbations)->capture_default_str();
  probe->add_option("--sequences", p.sequences, "shared index sequences per data probe")
      ->capture_default_str();
  probe->add_option("--test-points", p.test_points)->capture_default_str();

  std::size_t draws = 100000;
  verify->add_option("--draws", draws)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.get_exit_code();
  }

  try {
    if (*train) return cmd_train(o);
    if (*compare) return cmd_compare(o);
    if (*bounds) return cmd_bounds(o, b);
    if (*probe) return cmd_probe(o, p);
    if (*synth) return cmd_synth(o);
    if (*verify) return cmd_verify(o, draws);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "adasamp: error: %s\n", e.what());
    return 2;
  }
  return 0;
}
