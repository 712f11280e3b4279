#include "past/glm.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace past {

namespace {

thread_local std::vector<double> t_trace;

struct ObjectiveGrad {
  double value;
  Vector grad;
};

ObjectiveGrad evaluate(const Matrix& features, const Vector& targets, const LossSpec& loss, double reg,
                       Index intercept, const Vector& beta) {
  const Vector eta = features * beta;
  const double n = static_cast<double>(features.rows());
  Vector dl(eta.size());
  double value = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    value += loss_on_linear_predictor(loss, eta(i), targets(i));
    dl(i) = loss_grad_linear_predictor(loss, eta(i), targets(i));
  }
  value /= n;
  Vector grad = features.transpose() * dl / n;
  for (Index j = 0; j < beta.size(); ++j) {
    if (j == intercept) continue;
    value += reg * beta(j) * beta(j);
    grad(j) += 2.0 * reg * beta(j);
  }
  return {value, std::move(grad)};
}

}  // namespace

double glm_objective(const Matrix& features, const Vector& targets, const LossSpec& loss, double reg,
                     Index intercept, const Vector& beta) {
  return evaluate(features, targets, loss, reg, intercept, beta).value;
}

const std::vector<double>& glm_last_trace() { return t_trace; }

GlmModel fit_glm(const FeatureMap& map, const Matrix& inputs, const Vector& targets, const LossSpec& loss,
                 double reg, const GlmOptions& opts) {
  if (inputs.rows() < 1 || inputs.rows() != targets.size()) throw InvalidArgument("fit_glm: bad data shape");
  for (Index i = 0; i < targets.size(); ++i)
    if (!loss.response.contains(targets(i))) throw InvalidArgument("fit_glm: target outside the response range");

  const Matrix features = map.expand_rows(inputs);
  const Index intercept = map.intercept_index();
  Vector beta = Vector::Zero(features.cols());
  ObjectiveGrad cur = evaluate(features, targets, loss, reg, intercept, beta);
  t_trace.assign(1, cur.value);

  double step = opts.initial_step;
  Vector prev_beta, prev_grad;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const double gnorm = cur.grad.norm();
    if (gnorm < opts.tol) break;
    if (it > 0) {
      // Barzilai-Borwein trial step; backtracking below keeps descent monotone.
      const Vector s = beta - prev_beta;
      const Vector y = cur.grad - prev_grad;
      const double sy = s.dot(y);
      if (sy > 0.0) step = s.squaredNorm() / sy;
    }
    double t = step;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      Vector trial = beta - t * cur.grad;
      ObjectiveGrad next = evaluate(features, targets, loss, reg, intercept, trial);
      if (std::isfinite(next.value) && next.value <= cur.value - opts.armijo * t * gnorm * gnorm) {
        prev_beta = std::move(beta);
        prev_grad = std::move(cur.grad);
        beta = std::move(trial);
        cur = std::move(next);
        t_trace.push_back(cur.value);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no further decrease representable in floating point
  }

  const double final_norm = cur.grad.norm();
  if (final_norm >= opts.tol) {
    std::ostringstream msg;
    msg << "fit_glm: no convergence after " << it << " iterations (gradient norm " << final_norm << ")";
    throw NumericalError(msg.str());
  }
  GlmModel model{map, std::move(beta), loss, reg, it, final_norm};
  return model;
}

}  // namespace past
