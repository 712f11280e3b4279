#pragma once

#include "past/common.hpp"
#include "past/features.hpp"

#include <optional>

namespace past {

/// f(x) = <coefficients, feature_map(x)>.
struct LinearModel {
  FeatureMap feature_map;
  Vector coefficients;
  double ridge_lambda = 0.0;

  double predict(const Vector& x) const { return coefficients.dot(feature_map.expand(x)); }
};

/// Minimizes ||features * beta - targets||^2 + ridge * ||beta||^2, leaving the
/// column `unpenalized` (the intercept) out of the penalty. Solved through the
/// normal equations with column equilibration and a Cholesky factorization.
/// With ridge == 0 a numerically singular system raises NumericalError asking
/// for a positive ridge.
Vector solve_ridge(const Matrix& features, const Vector& targets, double ridge,
                   std::optional<Index> unpenalized = std::nullopt);

/// Expands `inputs` through `map` and fits the coefficients by solve_ridge.
LinearModel fit_linear(const FeatureMap& map, const Matrix& inputs, const Vector& targets, double ridge);

}  // namespace past
