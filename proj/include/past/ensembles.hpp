#pragma once

// Synthetic data-generating processes with analytic ground truth:
//   partial_linear_1  Y = f*(X) + lambda W + (1 - lambda) eps
//   partial_linear_2  Y = f*(X) + lambda U + <alpha*, V> + (1 - lambda) eps
//   hard_soft         Y = Z W,   W ~ Ber(h_W(X)), Z ~ Ber(h_Z(X))
//   noisy_label       W = Y xor Z, Y ~ Ber(h_Y(X)), Z ~ Ber(h_Z(X))
// X ~ Unif([0,1]^5) throughout.

#include "past/datamodel.hpp"
#include "past/features.hpp"
#include "past/rng.hpp"

#include <string_view>
#include <vector>

namespace past {

enum class EnsembleKind { PartialLinearOne, PartialLinearTwo, HardSoft, NoisyLabel };

std::string_view to_string(EnsembleKind k) noexcept;
/// partial_linear_1 | partial_linear_2 | hard_soft | noisy_label
EnsembleKind ensemble_from_name(std::string_view name);

struct EnsembleParams {
  Index dim_x = 5;
  // partially linear
  double lambda = 0.5;
  double sigma = 1.0;
  int degree = 3;            ///< 3 for ensemble one, 2 for ensemble two
  Index d2 = 50;             ///< dimension of V (ensemble two)
  double beta_scale = 1.0;   ///< beta* entries ~ N(0, beta_scale^2)
  double alpha_scale = 1.0;  ///< alpha* entries ~ N(0, alpha_scale^2)
  // classification
  double nu = 1.0;
  double theta_norm = 1.0;  ///< theta* ~ N(0, I) rescaled to this norm
};

/// Coefficient draws, made once per experiment.
struct EnsembleCoefficients {
  Vector beta;
  Vector alpha;
  Vector theta;
};

/// Law of W given X = x as weighted points.
struct WQuadrature {
  std::vector<Vector> points;
  std::vector<double> weights;
};

class EnsembleSpec {
 public:
  /// Validates parameters (lambda in [0,1], sigma > 0, nu >= 0, ...) and
  /// draws the coefficients from `coef_rng`.
  EnsembleSpec(EnsembleKind kind, const EnsembleParams& params, Rng& coef_rng);
  /// Uses given coefficients (dimensions checked).
  EnsembleSpec(EnsembleKind kind, const EnsembleParams& params, EnsembleCoefficients coefs);

  EnsembleKind kind() const noexcept { return kind_; }
  const EnsembleParams& params() const noexcept { return params_; }
  const EnsembleCoefficients& coefficients() const noexcept { return coefs_; }
  /// Feature map of f* (partially linear kinds).
  const FeatureMap& feature_map() const noexcept { return map_; }
  Index dim_x() const noexcept { return params_.dim_x; }
  Index dim_w() const noexcept;
  bool is_classification() const noexcept;

  /// Same coefficients, different sweep parameters.
  EnsembleSpec with_params(const EnsembleParams& params) const;

  Vector sample_x(Rng& rng) const;
  LabeledTriple sample(Rng& rng) const;
  /// (W, Y) drawn from their law given X = x.
  LabeledTriple sample_at(const Vector& x, Rng& rng) const;
  std::vector<LabeledTriple> generate(std::size_t n, Rng& rng) const;

  double f_star(const Vector& x) const;
  double g_star(const Vector& x, const Vector& w) const;

  double h_W(const Vector& x) const;  ///< hard_soft
  double h_Z(const Vector& x) const;  ///< hard_soft and noisy_label
  double h_Y(const Vector& x) const;  ///< noisy_label
  /// P[W = 1 | X = x] for the Bernoulli kinds.
  double w_probability(const Vector& x) const;

  /// Bernoulli kinds: the exact two-point law. Partially linear kinds:
  /// `draws` Monte-Carlo points in antithetic pairs (w, -w), so the mean of
  /// the points is exactly zero.
  WQuadrature w_given_x(const Vector& x, std::size_t draws, Rng& rng) const;

 private:
  void check() const;

  EnsembleKind kind_;
  EnsembleParams params_;
  EnsembleCoefficients coefs_;
  FeatureMap map_;
};

/// f~_hard - f* for the ideal proxy on hard_soft: h_W (1[h_Z >= 1/2] - h_Z).
double misscalibration_bias(const EnsembleSpec& spec, const Vector& x);
/// E[Y|x] - E[W|x] on noisy_label: 2 h_Z (1/2 - h_Y).
double noisy_direct_bias(const EnsembleSpec& spec, const Vector& x);

}  // namespace past
