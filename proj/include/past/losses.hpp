#pragma once

// GLM-type losses l(yhat, y) = -phi(yhat) * y + Phi(yhat) and the squared loss,
// together with their links and the Lipschitz / strong-convexity constants the
// bound evaluators consume.

#include "past/common.hpp"

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace past {

enum class LossKind { Squared, LogisticGLM, PoissonGLM, BinaryKL };

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
};

/// Probability clamp used by the BinaryKL and logistic domains.
inline constexpr double kProbabilityClamp = 1e-6;

/// Immutable description of a loss. Construct through the named factories.
struct LossSpec {
  LossKind kind = LossKind::Squared;
  /// Squared: use -yhat*y + yhat^2/2 instead of (yhat-y)^2.
  /// BinaryKL: use cross-entropy instead of the divergence. Both forms differ
  /// from the default by a y-only term, so minimizers coincide.
  bool glm_form = false;
  Interval domain;    ///< valid predictions
  Interval response;  ///< valid responses
  double lipschitz_L = 0.0;
  double convexity_gamma = 0.0;

  static LossSpec squared(double bound = std::numeric_limits<double>::infinity(), bool glm_form = false);
  static LossSpec logistic(double clamp = kProbabilityClamp);
  static LossSpec poisson(double log_bound = 6.0);
  static LossSpec binary_kl(double clamp = kProbabilityClamp, bool cross_entropy_form = false);
};

std::string_view to_string(LossKind kind) noexcept;
/// "squared" | "logistic" | "poisson" | "binary_kl"; throws ConfigError otherwise.
LossSpec loss_from_name(std::string_view name);

/// phi and Phi of the GLM-type representation.
double loss_phi(const LossSpec& spec, double yhat);
double loss_Phi(const LossSpec& spec, double yhat);
/// Phi'(yhat): the mean response implied by a prediction (canonical kinds).
double loss_mean(const LossSpec& spec, double yhat);

/// l(yhat, y). Throws InvalidArgument outside the domain or response range.
double loss_value(const LossSpec& spec, double yhat, double y);
/// d l / d yhat.
double loss_grad_first(const LossSpec& spec, double yhat, double y);
/// psi(mean): the population minimizer for a given conditional mean.
double link(const LossSpec& spec, double mean);

struct LipschitzConvexityReport {
  double max_lipschitz_ratio = 0.0;  ///< worst |l(a,y)-l(b,y)| / |a-b|
  double min_curvature = 0.0;        ///< smallest second divided difference in yhat
  std::size_t pairs_checked = 0;
  std::size_t triples_checked = 0;
  bool lipschitz_ok = true;  ///< max ratio <= L
  bool convexity_ok = true;  ///< min curvature >= gamma
};

/// Sweeps the grid of (yhat, y) points. Pairs and triples are formed among
/// points that share the same y.
LipschitzConvexityReport check_lipschitz_convexity(const LossSpec& spec,
                                                   std::span<const std::pair<double, double>> grid);

// Link-scale helpers used by the GLM fitter: the loss as a function of the
// linear predictor eta and its derivative in eta.
double loss_on_linear_predictor(const LossSpec& spec, double eta, double y);
double loss_grad_linear_predictor(const LossSpec& spec, double eta, double y);
/// Maps a linear predictor to the loss's prediction space.
double prediction_from_linear_predictor(const LossSpec& spec, double eta);

double sigmoid(double t) noexcept;
double softplus(double t) noexcept;
double logit(double p);

}  // namespace past
