#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace adasamp {

struct Example {
  std::vector<double> features;
  std::size_t label = 0;
};

/// Ordered training set. Every example shares one feature dimension and
/// carries a label below num_classes().
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Example> examples, std::size_t num_classes);

  std::size_t size() const { return examples_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t num_classes() const { return num_classes_; }
  /// max ||x|| over the examples.
  double feature_radius() const { return radius_; }

  const Example& operator[](std::size_t i) const { return examples_[i]; }
  const std::vector<Example>& examples() const { return examples_; }

  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<Example> examples_;
  std::size_t dim_ = 0;
  std::size_t num_classes_ = 0;
  double radius_ = 0.0;
};

/// Linear multiclass model: a C x d weight matrix stored row-major.
struct Hypothesis {
  std::size_t classes = 0;
  std::size_t dim = 0;
  std::vector<double> params;

  static Hypothesis zeros(std::size_t classes, std::size_t dim);

  std::span<const double> row(std::size_t c) const {
    return std::span<const double>(params).subspan(c * dim, dim);
  }
  std::size_t size() const { return params.size(); }
};

struct RegularityConstants {
  double lipschitz = 0.0;     ///< L: bound on ||grad F|| over the domain
  double smooth_beta = 0.0;   ///< beta: Lipschitz constant of grad F
  double strong_mu = 0.0;     ///< mu: strong convexity modulus (0 = merely convex)
  double loss_max = 0.0;      ///< M: bound on the clamped loss
  double domain_radius = std::numeric_limits<double>::infinity();
};

inline constexpr double kProbFloor = 1e-12;
inline constexpr double kDefaultLossMax = 5.0;

std::vector<double> class_scores(const Hypothesis& h, std::span<const double> x);
std::vector<double> predict_proba(const Hypothesis& h, std::span<const double> x);
std::size_t predict_label(const Hypothesis& h, std::span<const double> x);

/// Cross-entropy, -ln max(p_y, 1e-12).
double surrogate_loss(const Hypothesis& h, const Example& z);

/// Cross-entropy plus (mu/2)||h||^2.
double objective_value(const Hypothesis& h, const Example& z, double mu);

/// Gradient of objective_value with respect to the flattened parameters.
std::vector<double> objective_grad(const Hypothesis& h, const Example& z, double mu);

/// min(surrogate_loss, M).
double bounded_loss(const Hypothesis& h, const Example& z, double loss_max);

/// Projection radius used when none is configured: sqrt(2) R / mu, which
/// contains the regularized minimizer. Infinite for mu == 0.
double default_domain_radius(const Dataset& ds, double mu);

/// Constants for softmax cross-entropy plus L2 over the ball of radius
/// `domain_radius` (defaulted as above when NaN is passed):
///   L = sqrt(2) R + mu * radius,  beta = R^2 / 2 + mu.
RegularityConstants regularity_constants(const Dataset& ds, double mu, double loss_max,
                                         double domain_radius =
                                             std::numeric_limits<double>::quiet_NaN());

/// Scales `params` onto the Euclidean ball of the given radius if outside.
void project_to_ball(std::vector<double>& params, double radius);

double l2_norm(std::span<const double> v);

// Dataset-level summaries.
double mean_surrogate_loss(const Hypothesis& h, const Dataset& ds);
double empirical_risk(const Hypothesis& h, const Dataset& ds, double loss_max);
double accuracy(const Hypothesis& h, const Dataset& ds);

}  // namespace adasamp
