#include "adasamp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace adasamp {

Dataset::Dataset(std::vector<Example> examples, std::size_t num_classes)
    : examples_(std::move(examples)), num_classes_(num_classes) {
  if (examples_.empty()) throw std::invalid_argument("Dataset: no examples");
  if (num_classes_ == 0) throw std::invalid_argument("Dataset: zero classes");
  dim_ = examples_.front().features.size();
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& z = examples_[i];
    if (z.features.size() != dim_) {
      throw std::invalid_argument("Dataset: example " + std::to_string(i) +
                                  " has inconsistent feature dimension");
    }
    if (z.label >= num_classes_) {
      throw std::invalid_argument("Dataset: example " + std::to_string(i) +
                                  " has label outside the class range");
    }
    const double norm = l2_norm(z.features);
    if (!std::isfinite(norm)) {
      throw std::invalid_argument("Dataset: example " + std::to_string(i) +
                                  " has non-finite features");
    }
    radius_ = std::max(radius_, norm);
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Example> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(examples_.at(i));
  return Dataset(std::move(picked), num_classes_);
}

Hypothesis Hypothesis::zeros(std::size_t classes, std::size_t dim) {
  return Hypothesis{classes, dim, std::vector<double>(classes * dim, 0.0)};
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

namespace {

void check_dims(const Hypothesis& h, std::span<const double> x) {
  if (h.params.size() != h.classes * h.dim || x.size() != h.dim) {
    throw std::invalid_argument("dimension mismatch between hypothesis and features");
  }
}

}  // namespace

std::vector<double> class_scores(const Hypothesis& h, std::span<const double> x) {
  check_dims(h, x);
  std::vector<double> s(h.classes);
  for (std::size_t c = 0; c < h.classes; ++c) {
    auto w = h.row(c);
    s[c] = std::inner_product(w.begin(), w.end(), x.begin(), 0.0);
  }
  return s;
}

std::vector<double> predict_proba(const Hypothesis& h, std::span<const double> x) {
  auto p = class_scores(h, x);
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

std::size_t predict_label(const Hypothesis& h, std::span<const double> x) {
  auto s = class_scores(h, x);
  return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
}

double surrogate_loss(const Hypothesis& h, const Example& z) {
  const auto p = predict_proba(h, z.features);
  return -std::log(std::max(p.at(z.label), kProbFloor));
}

double objective_value(const Hypothesis& h, const Example& z, double mu) {
  const double n = l2_norm(h.params);
  return surrogate_loss(h, z) + 0.5 * mu * n * n;
}

std::vector<double> objective_grad(const Hypothesis& h, const Example& z, double mu) {
  auto p = predict_proba(h, z.features);
  p.at(z.label) -= 1.0;
  std::vector<double> g(h.params.size());
  for (std::size_t c = 0; c < h.classes; ++c) {
    for (std::size_t j = 0; j < h.dim; ++j) {
      g[c * h.dim + j] = p[c] * z.features[j] + mu * h.params[c * h.dim + j];
    }
  }
  return g;
}

double bounded_loss(const Hypothesis& h, const Example& z, double loss_max) {
  if (!(loss_max > 0.0)) throw std::invalid_argument("bounded_loss: M must be positive");
  return std::min(surrogate_loss(h, z), loss_max);
}

double default_domain_radius(const Dataset& ds, double mu) {
  if (mu <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0) * ds.feature_radius() / mu;
}

RegularityConstants regularity_constants(const Dataset& ds, double mu, double loss_max,
                                         double domain_radius) {
  if (ds.size() == 0) throw std::invalid_argument("regularity_constants: empty dataset");
  if (!(mu >= 0.0)) throw std::invalid_argument("regularity_constants: mu must be >= 0");
  if (!(loss_max > 0.0)) throw std::invalid_argument("regularity_constants: M must be > 0");
  if (std::isnan(domain_radius)) domain_radius = default_domain_radius(ds, mu);
  const double r = ds.feature_radius();
  RegularityConstants k;
  // ||p - e_y|| <= sqrt(2); the softmax Hessian block diag(p) - pp^T has
  // spectral norm at most 1/2.
  k.lipschitz = std::sqrt(2.0) * r + (mu > 0.0 ? mu * domain_radius : 0.0);
  k.smooth_beta = 0.5 * r * r + mu;
  k.strong_mu = mu;
  k.loss_max = loss_max;
  k.domain_radius = domain_radius;
  return k;
}

void project_to_ball(std::vector<double>& params, double radius) {
  if (!std::isfinite(radius)) return;
  const double n = l2_norm(params);
  if (n > radius) {
    const double s = radius / n;
    for (double& v : params) v *= s;
  }
}

double mean_surrogate_loss(const Hypothesis& h, const Dataset& ds) {
  double s = 0.0;
  for (const auto& z : ds.examples()) s += surrogate_loss(h, z);
  return s / static_cast<double>(ds.size());
}

double empirical_risk(const Hypothesis& h, const Dataset& ds, double loss_max) {
  double s = 0.0;
  for (const auto& z : ds.examples()) s += bounded_loss(h, z, loss_max);
  return s / static_cast<double>(ds.size());
}

double accuracy(const Hypothesis& h, const Dataset& ds) {
  std::size_t hits = 0;
  for (const auto& z : ds.examples()) hits += predict_label(h, z.features) == z.label;
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace adasamp
