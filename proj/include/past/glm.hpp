#pragma once

#include "past/common.hpp"
#include "past/features.hpp"
#include "past/losses.hpp"

namespace past {

struct GlmOptions {
  int max_iters = 5000;
  double tol = 1e-6;          ///< stop when ||gradient|| < tol
  double initial_step = 1.0;  ///< first trial step; later trials use Barzilai-Borwein
  double armijo = 1e-4;
};

/// Linear predictor eta = <beta, features(x)> mapped to the loss's prediction space.
struct GlmModel {
  FeatureMap feature_map;
  Vector coefficients;
  LossSpec loss;
  double reg = 0.0;
  int iterations = 0;
  double final_grad_norm = 0.0;

  double linear_predictor(const Vector& x) const { return coefficients.dot(feature_map.expand(x)); }
  double predict(const Vector& x) const { return prediction_from_linear_predictor(loss, linear_predictor(x)); }
};

/// Objective (1/n) sum l(eta_i, y_i) + reg * ||beta without intercept||^2 on
/// the linear-predictor scale.
double glm_objective(const Matrix& features, const Vector& targets, const LossSpec& loss, double reg,
                     Index intercept, const Vector& beta);

/// Full-batch gradient descent with backtracking. Every accepted step lowers
/// the objective. Throws NumericalError carrying the final gradient norm when
/// max_iters is exhausted.
GlmModel fit_glm(const FeatureMap& map, const Matrix& inputs, const Vector& targets, const LossSpec& loss,
                 double reg, const GlmOptions& opts = {});

/// Objective values after each accepted step of the most recent fit on this
/// thread (diagnostics for monotonicity tests).
const std::vector<double>& glm_last_trace();

}  // namespace past
