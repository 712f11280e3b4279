#include "past/ensembles.hpp"

#include "past/losses.hpp"

#include <algorithm>
#include <cmath>

namespace past {

std::string_view to_string(EnsembleKind k) noexcept {
  switch (k) {
    case EnsembleKind::PartialLinearOne: return "partial_linear_1";
    case EnsembleKind::PartialLinearTwo: return "partial_linear_2";
    case EnsembleKind::HardSoft: return "hard_soft";
    case EnsembleKind::NoisyLabel: return "noisy_label";
  }
  return "partial_linear_1";
}

EnsembleKind ensemble_from_name(std::string_view name) {
  if (name == "partial_linear_1") return EnsembleKind::PartialLinearOne;
  if (name == "partial_linear_2") return EnsembleKind::PartialLinearTwo;
  if (name == "hard_soft") return EnsembleKind::HardSoft;
  if (name == "noisy_label") return EnsembleKind::NoisyLabel;
  throw ConfigError("unknown ensemble '" + std::string(name) + "'");
}

namespace {

Vector normal_vector(Index d, double scale, Rng& rng) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = scale * standard_normal(rng);
  return v;
}

bool partially_linear(EnsembleKind k) {
  return k == EnsembleKind::PartialLinearOne || k == EnsembleKind::PartialLinearTwo;
}

}  // namespace

void EnsembleSpec::check() const {
  const auto& p = params_;
  if (p.dim_x < 1) throw InvalidArgument("ensemble: dim_x must be positive");
  if (partially_linear(kind_)) {
    if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw InvalidArgument("ensemble: lambda must lie in [0, 1]");
    if (!(p.sigma > 0.0)) throw InvalidArgument("ensemble: sigma must be positive");
    if (p.degree < 1) throw InvalidArgument("ensemble: degree must be positive");
    if (kind_ == EnsembleKind::PartialLinearTwo && p.d2 < 1) throw InvalidArgument("ensemble: d2 must be positive");
  } else {
    if (!(p.nu >= 0.0)) throw InvalidArgument("ensemble: nu must be non-negative");
    if (!(p.theta_norm > 0.0)) throw InvalidArgument("ensemble: theta_norm must be positive");
  }
}

EnsembleSpec::EnsembleSpec(EnsembleKind kind, const EnsembleParams& params, Rng& coef_rng)
    : kind_(kind), params_(params) {
  check();
  if (partially_linear(kind_)) {
    map_ = FeatureMap::polynomial(params_.dim_x, params_.degree);
    coefs_.beta = normal_vector(map_.output_dim(), params_.beta_scale, coef_rng);
    if (kind_ == EnsembleKind::PartialLinearTwo) coefs_.alpha = normal_vector(params_.d2, params_.alpha_scale, coef_rng);
  } else {
    Vector t = normal_vector(params_.dim_x, 1.0, coef_rng);
    coefs_.theta = t * (params_.theta_norm / t.norm());
  }
}

EnsembleSpec::EnsembleSpec(EnsembleKind kind, const EnsembleParams& params, EnsembleCoefficients coefs)
    : kind_(kind), params_(params), coefs_(std::move(coefs)) {
  check();
  if (partially_linear(kind_)) {
    map_ = FeatureMap::polynomial(params_.dim_x, params_.degree);
    if (coefs_.beta.size() != map_.output_dim()) throw InvalidArgument("ensemble: beta has the wrong length");
    if (kind_ == EnsembleKind::PartialLinearTwo && coefs_.alpha.size() != params_.d2)
      throw InvalidArgument("ensemble: alpha has the wrong length");
  } else if (coefs_.theta.size() != params_.dim_x) {
    throw InvalidArgument("ensemble: theta has the wrong length");
  }
}

EnsembleSpec EnsembleSpec::with_params(const EnsembleParams& params) const {
  return EnsembleSpec(kind_, params, coefs_);
}

Index EnsembleSpec::dim_w() const noexcept {
  return kind_ == EnsembleKind::PartialLinearTwo ? 1 + params_.d2 : 1;
}

bool EnsembleSpec::is_classification() const noexcept { return !partially_linear(kind_); }

Vector EnsembleSpec::sample_x(Rng& rng) const {
  Vector x(params_.dim_x);
  for (Index i = 0; i < x.size(); ++i) x(i) = uniform01(rng);
  return x;
}

double EnsembleSpec::h_Z(const Vector& x) const {
  const double s = sigmoid(params_.nu * coefs_.theta.dot(x));
  if (kind_ == EnsembleKind::HardSoft) return s;
  if (kind_ == EnsembleKind::NoisyLabel) return std::clamp(1.8 * std::abs(s - 0.5), 0.0, 1.0);
  throw InvalidArgument("h_Z: only defined for hard_soft and noisy_label");
}

double EnsembleSpec::h_W(const Vector& x) const {
  if (kind_ != EnsembleKind::HardSoft) throw InvalidArgument("h_W: only defined for hard_soft");
  return 1.0 - 1.8 * std::abs(sigmoid(params_.nu * coefs_.theta.dot(x)) - 0.5);
}

double EnsembleSpec::h_Y(const Vector& x) const {
  if (kind_ != EnsembleKind::NoisyLabel) throw InvalidArgument("h_Y: only defined for noisy_label");
  return sigmoid(coefs_.theta.dot(x));
}

double EnsembleSpec::w_probability(const Vector& x) const {
  if (kind_ == EnsembleKind::HardSoft) return h_W(x);
  if (kind_ == EnsembleKind::NoisyLabel) {
    const double hy = h_Y(x), hz = h_Z(x);
    return hy * (1.0 - hz) + (1.0 - hy) * hz;
  }
  throw InvalidArgument("w_probability: only defined for Bernoulli helpers");
}

LabeledTriple EnsembleSpec::sample(Rng& rng) const {
  Vector x = sample_x(rng);
  return sample_at(x, rng);
}

LabeledTriple EnsembleSpec::sample_at(const Vector& x, Rng& rng) const {
  if (x.size() != params_.dim_x) throw InvalidArgument("sample_at: x has the wrong dimension");
  LabeledTriple t;
  t.x = x;
  const double lam = params_.lambda, sig = params_.sigma;
  switch (kind_) {
    case EnsembleKind::PartialLinearOne: {
      const double w = sig * standard_normal(rng);
      const double eps = sig * standard_normal(rng);
      t.w = Vector::Constant(1, w);
      t.y = f_star(t.x) + lam * w + (1.0 - lam) * eps;
      break;
    }
    case EnsembleKind::PartialLinearTwo: {
      t.w.resize(1 + params_.d2);
      t.w(0) = sig * standard_normal(rng);
      for (Index j = 0; j < params_.d2; ++j) t.w(1 + j) = 2.0 * uniform01(rng) - 1.0;
      const double eps = sig * standard_normal(rng);
      t.y = f_star(t.x) + lam * t.w(0) + coefs_.alpha.dot(t.w.tail(params_.d2)) + (1.0 - lam) * eps;
      break;
    }
    case EnsembleKind::HardSoft: {
      // W and Z from separate sub-streams given x.
      Rng w_rng = split(rng);
      Rng z_rng = split(rng);
      const double w = bernoulli(w_rng, h_W(t.x)) ? 1.0 : 0.0;
      const double z = bernoulli(z_rng, h_Z(t.x)) ? 1.0 : 0.0;
      t.w = Vector::Constant(1, w);
      t.y = z * w;
      break;
    }
    case EnsembleKind::NoisyLabel: {
      const bool y = bernoulli(rng, h_Y(t.x));
      const bool z = bernoulli(rng, h_Z(t.x));
      t.w = Vector::Constant(1, (y != z) ? 1.0 : 0.0);
      t.y = y ? 1.0 : 0.0;
      break;
    }
  }
  return t;
}

std::vector<LabeledTriple> EnsembleSpec::generate(std::size_t n, Rng& rng) const {
  if (n < 1) throw InvalidArgument("generate: n must be at least 1");
  std::vector<LabeledTriple> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample(rng));
  return out;
}

double EnsembleSpec::f_star(const Vector& x) const {
  switch (kind_) {
    case EnsembleKind::PartialLinearOne:
    case EnsembleKind::PartialLinearTwo: return coefs_.beta.dot(map_.expand(x));
    case EnsembleKind::HardSoft: return h_W(x) * h_Z(x);
    case EnsembleKind::NoisyLabel: return h_Y(x);
  }
  return 0.0;
}

double EnsembleSpec::g_star(const Vector& x, const Vector& w) const {
  switch (kind_) {
    case EnsembleKind::PartialLinearOne: return f_star(x) + params_.lambda * w(0);
    case EnsembleKind::PartialLinearTwo:
      return f_star(x) + params_.lambda * w(0) + coefs_.alpha.dot(w.tail(params_.d2));
    case EnsembleKind::HardSoft: return w(0) * h_Z(x);
    case EnsembleKind::NoisyLabel: {
      // P[Y=1 | x, w] over the four (Y, Z) cells.
      const double hy = h_Y(x), hz = h_Z(x);
      const bool w1 = w(0) >= 0.5;
      const double num = w1 ? hy * (1.0 - hz) : hy * hz;
      const double den = w1 ? num + (1.0 - hy) * hz : num + (1.0 - hy) * (1.0 - hz);
      return den > 0.0 ? num / den : (w1 ? 1.0 : 0.0);
    }
  }
  return 0.0;
}

WQuadrature EnsembleSpec::w_given_x(const Vector& x, std::size_t draws, Rng& rng) const {
  WQuadrature q;
  if (!partially_linear(kind_)) {
    const double p1 = w_probability(x);
    q.points = {Vector::Zero(1), Vector::Ones(1)};
    q.weights = {1.0 - p1, p1};
    return q;
  }
  const std::size_t pairs = std::max<std::size_t>(1, draws / 2);
  const double wt = 0.5 / static_cast<double>(pairs);
  q.points.reserve(2 * pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    Vector w(dim_w());
    w(0) = params_.sigma * standard_normal(rng);
    for (Index j = 1; j < w.size(); ++j) w(j) = 2.0 * uniform01(rng) - 1.0;
    q.points.push_back(w);
    q.points.push_back(-w);
    q.weights.push_back(wt);
    q.weights.push_back(wt);
  }
  return q;
}

double misscalibration_bias(const EnsembleSpec& spec, const Vector& x) {
  const double hz = spec.h_Z(x);
  return spec.h_W(x) * ((hz >= 0.5 ? 1.0 : 0.0) - hz);
}

double noisy_direct_bias(const EnsembleSpec& spec, const Vector& x) {
  return 2.0 * spec.h_Z(x) * (0.5 - spec.h_Y(x));
}

}  // namespace past
