#include "past/linear.hpp"

#include <cmath>
#include <string>

namespace past {

Vector solve_ridge(const Matrix& features, const Vector& targets, double ridge, std::optional<Index> unpenalized) {
  if (features.rows() < 1) throw InvalidArgument("fit_linear: no rows");
  if (features.rows() != targets.size()) throw InvalidArgument("fit_linear: row/target count mismatch");
  if (!(ridge >= 0.0)) throw InvalidArgument("fit_linear: ridge must be non-negative");
  const Index p = features.cols();

  // Equilibrate columns so the Gram matrix has a unit diagonal; monomial
  // features otherwise span several orders of magnitude.
  Vector scale(p);
  for (Index j = 0; j < p; ++j) {
    const double nrm = features.col(j).norm();
    scale(j) = nrm > 0.0 ? 1.0 / nrm : 1.0;
  }
  const Matrix scaled = features * scale.asDiagonal();
  Matrix gram = scaled.transpose() * scaled;
  const Vector rhs = scaled.transpose() * targets;
  if (ridge > 0.0) {
    for (Index j = 0; j < p; ++j) {
      if (unpenalized && *unpenalized == j) continue;
      gram(j, j) += ridge * scale(j) * scale(j);
    }
  }

  Eigen::LLT<Matrix> llt(gram);
  const bool ok = llt.info() == Eigen::Success && llt.rcond() > 1e-15;
  if (!ok) {
    if (ridge == 0.0)
      throw NumericalError("fit_linear: normal equations are singular; use a positive ridge_lambda");
    const double jitter = 1e-10 * gram.trace() / static_cast<double>(p);
    gram.diagonal().array() += jitter;
    llt.compute(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("fit_linear: factorization failed after jitter");
  }
  const Vector scaled_beta = llt.solve(rhs);
  return scale.asDiagonal() * scaled_beta;
}

LinearModel fit_linear(const FeatureMap& map, const Matrix& inputs, const Vector& targets, double ridge) {
  const Matrix features = map.expand_rows(inputs);
  std::optional<Index> intercept;
  if (map.intercept_index() >= 0) intercept = map.intercept_index();
  return LinearModel{map, solve_ridge(features, targets, ridge, intercept), ridge};
}

}  // namespace past
