#include "past/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace past {

double sigmoid(double t) noexcept {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) noexcept { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("logit: argument must lie in (0, 1)");
  return std::log(p / (1.0 - p));
}

LossSpec LossSpec::squared(double bound, bool glm_form) {
  LossSpec s;
  s.kind = LossKind::Squared;
  s.glm_form = glm_form;
  s.domain = {-bound, bound};
  s.response = {-bound, bound};
  // (yhat-y)^2: |d/dyhat| = 2|yhat-y| <= 4B, curvature 2.
  // -yhat*y + yhat^2/2: |d/dyhat| = |yhat-y| <= 2B, curvature 1.
  s.lipschitz_L = glm_form ? 2.0 * bound : 4.0 * bound;
  s.convexity_gamma = glm_form ? 1.0 : 2.0;
  return s;
}

LossSpec LossSpec::logistic(double clamp) {
  LossSpec s;
  s.kind = LossKind::LogisticGLM;
  s.glm_form = true;
  const double b = std::log((1.0 - clamp) / clamp);
  s.domain = {-b, b};
  s.response = {0.0, 1.0};
  // d/dyhat = sigmoid(yhat) - y in [-1, 1]; d/dy = -yhat bounded by b.
  s.lipschitz_L = std::max(1.0, b);
  s.convexity_gamma = clamp * (1.0 - clamp);
  return s;
}

LossSpec LossSpec::poisson(double log_bound) {
  LossSpec s;
  s.kind = LossKind::PoissonGLM;
  s.glm_form = true;
  s.domain = {-log_bound, log_bound};
  s.response = {0.0, std::exp(log_bound)};
  s.lipschitz_L = std::max(std::exp(log_bound), log_bound);
  s.convexity_gamma = std::exp(-log_bound);
  return s;
}

LossSpec LossSpec::binary_kl(double clamp, bool cross_entropy_form) {
  LossSpec s;
  s.kind = LossKind::BinaryKL;
  s.glm_form = cross_entropy_form;
  s.domain = {clamp, 1.0 - clamp};
  s.response = {0.0, 1.0};
  // |d/df| = |f - y| / (f (1 - f)) <= 1 / clamp on the clamped domain.
  s.lipschitz_L = 1.0 / clamp;
  // y/f^2 + (1-y)/(1-f)^2 >= 1 for all f, y in [0, 1].
  s.convexity_gamma = 1.0;
  return s;
}

std::string_view to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::Squared: return "squared";
    case LossKind::LogisticGLM: return "logistic";
    case LossKind::PoissonGLM: return "poisson";
    case LossKind::BinaryKL: return "binary_kl";
  }
  return "unknown";
}

LossSpec loss_from_name(std::string_view name) {
  if (name == "squared") return LossSpec::squared();
  if (name == "logistic") return LossSpec::logistic();
  if (name == "poisson") return LossSpec::poisson();
  if (name == "binary_kl") return LossSpec::binary_kl();
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

namespace {

void check_args(const LossSpec& spec, double yhat, double y) {
  if (!spec.domain.contains(yhat))
    throw InvalidArgument("loss: prediction outside the domain of " + std::string(to_string(spec.kind)));
  if (!spec.response.contains(y))
    throw InvalidArgument("loss: response outside the range of " + std::string(to_string(spec.kind)));
}

double xlogx_ratio(double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); }

}  // namespace

double loss_phi(const LossSpec& spec, double yhat) {
  switch (spec.kind) {
    case LossKind::Squared: return spec.glm_form ? yhat : 2.0 * yhat;
    case LossKind::LogisticGLM:
    case LossKind::PoissonGLM: return yhat;
    case LossKind::BinaryKL: return logit(yhat);
  }
  return 0.0;
}

double loss_Phi(const LossSpec& spec, double yhat) {
  switch (spec.kind) {
    case LossKind::Squared: return spec.glm_form ? 0.5 * yhat * yhat : yhat * yhat;
    case LossKind::LogisticGLM: return softplus(yhat);
    case LossKind::PoissonGLM: return std::exp(yhat);
    case LossKind::BinaryKL: return -std::log1p(-yhat);
  }
  return 0.0;
}

double loss_mean(const LossSpec& spec, double yhat) {
  switch (spec.kind) {
    case LossKind::Squared:
    case LossKind::BinaryKL: return yhat;
    case LossKind::LogisticGLM: return sigmoid(yhat);
    case LossKind::PoissonGLM: return std::exp(yhat);
  }
  return 0.0;
}

double loss_value(const LossSpec& spec, double yhat, double y) {
  check_args(spec, yhat, y);
  switch (spec.kind) {
    case LossKind::Squared:
      return spec.glm_form ? -yhat * y + 0.5 * yhat * yhat : (yhat - y) * (yhat - y);
    case LossKind::LogisticGLM: return -yhat * y + softplus(yhat);
    case LossKind::PoissonGLM: return -yhat * y + std::exp(yhat);
    case LossKind::BinaryKL:
      if (spec.glm_form) return -y * logit(yhat) - std::log1p(-yhat);
      return xlogx_ratio(y, yhat) + xlogx_ratio(1.0 - y, 1.0 - yhat);
  }
  return 0.0;
}

double loss_grad_first(const LossSpec& spec, double yhat, double y) {
  check_args(spec, yhat, y);
  switch (spec.kind) {
    case LossKind::Squared: return spec.glm_form ? yhat - y : 2.0 * (yhat - y);
    case LossKind::LogisticGLM: return sigmoid(yhat) - y;
    case LossKind::PoissonGLM: return std::exp(yhat) - y;
    case LossKind::BinaryKL: return (yhat - y) / (yhat * (1.0 - yhat));
  }
  return 0.0;
}

double link(const LossSpec& spec, double mean) {
  switch (spec.kind) {
    case LossKind::Squared:
    case LossKind::BinaryKL: return mean;
    case LossKind::LogisticGLM:
      if (!(mean > 0.0 && mean < 1.0)) throw InvalidArgument("link: logistic mean must lie in (0, 1)");
      return std::log(mean / (1.0 - mean));
    case LossKind::PoissonGLM:
      if (!(mean > 0.0)) throw InvalidArgument("link: poisson mean must be positive");
      return std::log(mean);
  }
  return 0.0;
}

double loss_on_linear_predictor(const LossSpec& spec, double eta, double y) {
  switch (spec.kind) {
    case LossKind::Squared: return spec.glm_form ? -eta * y + 0.5 * eta * eta : (eta - y) * (eta - y);
    case LossKind::LogisticGLM: return softplus(eta) - eta * y;
    case LossKind::PoissonGLM: return std::exp(eta) - eta * y;
    // f = sigmoid(eta): cross-entropy = softplus(eta) - eta*y; the divergence
    // subtracts the y-only entropy, which does not move the minimizer.
    case LossKind::BinaryKL: return softplus(eta) - eta * y;
  }
  return 0.0;
}

double loss_grad_linear_predictor(const LossSpec& spec, double eta, double y) {
  switch (spec.kind) {
    case LossKind::Squared: return spec.glm_form ? eta - y : 2.0 * (eta - y);
    case LossKind::LogisticGLM:
    case LossKind::BinaryKL: return sigmoid(eta) - y;
    case LossKind::PoissonGLM: return std::exp(eta) - y;
  }
  return 0.0;
}

double prediction_from_linear_predictor(const LossSpec& spec, double eta) {
  if (spec.kind == LossKind::BinaryKL) return spec.domain.clamp(sigmoid(eta));
  return eta;
}

LipschitzConvexityReport check_lipschitz_convexity(const LossSpec& spec,
                                                   std::span<const std::pair<double, double>> grid) {
  LipschitzConvexityReport report;
  std::map<double, std::vector<std::pair<double, double>>> by_y;  // y -> (yhat, loss)
  for (const auto& [yhat, y] : grid) by_y[y].emplace_back(yhat, loss_value(spec, yhat, y));

  bool first_curvature = true;
  for (auto& [y, pts] : by_y) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              pts.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double ratio = std::abs(pts[j].second - pts[i].second) / (pts[j].first - pts[i].first);
        report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, ratio);
        ++report.pairs_checked;
      }
    }
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const auto& [a, la] = pts[i - 1];
      const auto& [b, lb] = pts[i];
      const auto& [c, lc] = pts[i + 1];
      const double curv = 2.0 * ((lc - lb) / (c - b) - (lb - la) / (b - a)) / (c - a);
      report.min_curvature = first_curvature ? curv : std::min(report.min_curvature, curv);
      first_curvature = false;
      ++report.triples_checked;
    }
  }
  report.lipschitz_ok = report.max_lipschitz_ratio <= spec.lipschitz_L * (1.0 + 1e-9);
  report.convexity_ok = report.triples_checked == 0 ||
                        report.min_curvature >= spec.convexity_gamma * (1.0 - 1e-6) - 1e-9;
  return report;
}

}  // namespace past
