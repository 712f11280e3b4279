#pragma once

// Numerical versions of the oracle accuracy r_n, the higher-order terms, the
// Theorem 1 / Theorem 2 bounds, the two ensemble guarantees and the terms of
// the basic error decomposition.

#include "past/ensembles.hpp"
#include "past/features.hpp"
#include "past/metrics.hpp"
#include "past/parallel.hpp"
#include "past/predictor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace past {

struct ComplexityEstimate {
  double t = 0.0;
  double value = 0.0;  ///< R_n(t)
  std::size_t mc_draws = 0;
  double std_error = 0.0;
};

/// {theta' Psi(x)} with the second-moment matrix Sigma = E[Psi Psi'] and a
/// sampler for X.
struct LinearClass {
  FeatureMap map;
  Matrix second_moment;
  XSampler sample_x;
};

/// Identity features on X ~ N(0, I_d); Sigma = I.
LinearClass identity_linear_class(Index d);
/// Estimates Sigma from `draws` samples of the given sampler.
LinearClass linear_class_from_samples(const FeatureMap& map, XSampler sample_x, std::size_t draws, Rng& rng);

/// Per-draw values of ||Sigma^{-1/2} (1/n) sum eps_i Psi(X_i)||, i.e. the
/// localized supremum at t = 1. Draw k uses derive_seed(seed, {k}).
struct UnitComplexity {
  std::vector<double> draws;
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<std::string> warnings;  ///< e.g. jittered singular Sigma
};

UnitComplexity rademacher_unit(const LinearClass& cls, std::size_t n, std::size_t mc_draws, Rng& rng,
                               parallel::Backend backend);
UnitComplexity rademacher_unit(const LinearClass& cls, std::size_t n, std::size_t mc_draws, Rng& rng);

/// R_n(t) = t * (unit estimate); exact homogeneity in t.
ComplexityEstimate rademacher_complexity_mc(const LinearClass& cls, double t, std::size_t n, std::size_t mc_draws,
                                            Rng& rng);
ComplexityEstimate complexity_at(const UnitComplexity& unit, double t);

struct CriticalRadius {
  double radius = 0.0;
  UnitComplexity unit;
};

/// Smallest t with t/16 >= R_n(t)/t: first hit on the grid 1e-4 * 2^{k/8}
/// up to 4B, then bisection to 1e-3 relative width. Throws NumericalError
/// when the grid has no crossing.
CriticalRadius critical_radius_from(const UnitComplexity& unit, double B = 1.0);
CriticalRadius critical_radius(const LinearClass& cls, std::size_t n, std::size_t mc_draws, Rng& rng,
                               double B = 1.0);

struct TheoryInputs {
  double sigma = 1.0;
  double B = 1.0;
  double L = 1.0;
  double gamma = 1.0;
  std::size_t n = 1000;
  std::size_t n_L = 100;
  std::size_t n_U = 900;
  double delta = 0.05;
  double r_n = 0.1;
};

void validate(const TheoryInputs& in);

/// Squared loss: max{20,10 sigma} sqrt(2 log(4 phi/delta)/n)
///             + max{640,80 sigma} log(4 phi/delta)/(r_n n), phi = log2(4 sigma/r_n).
double tau_sqloss(const TheoryInputs& in);
/// GLM-type loss: (12/sqrt n) sqrt(L/gamma) sqrt(log(phi/delta)), phi = log2(4B/r_n).
double tau_glm(const TheoryInputs& in);

/// (11 + 10 sigma) r_n + 3 defect + 2 tau; tau defaults to tau_sqloss.
double bound_thm1(const TheoryInputs& in, double smoothed_defect, std::optional<double> tau = std::nullopt);

enum class Thm2Variant { Slow, Glm };

/// Slow: (2L/gamma + 1) r_n + sqrt(8 L/gamma * defect) + tau(delta).
/// Glm:  (2L/gamma + 1) r_n + (2/gamma) defect + (1 + sqrt(L/gamma)) tau(delta/2).
/// An explicit tau replaces tau_glm at delta (Slow) or delta/2 (Glm).
double bound_thm2(const TheoryInputs& in, Thm2Variant variant, double defect,
                  std::optional<double> tau = std::nullopt);

/// sigma sqrt(d1/n) + sigma (1 - lambda) sqrt(d1/n_L)
double guarantee_ensemble_one(double sigma, double lambda, double d1, double n, double n_L);
/// sigma sqrt(d1/n) + sigma (1 - lambda) (sqrt(d1/n_L) + (d1 + d2)/n_L)
double guarantee_ensemble_two(double sigma, double lambda, double d1, double d2, double n, double n_L);

/// Least-squares C minimizing sum (empirical - C * theory)^2.
double fit_overlay_constant(std::span<const double> theory, std::span<const double> empirical);
double pearson_correlation(std::span<const double> a, std::span<const double> b);

struct DecompositionTerms {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  double t5 = 0.0;           ///< ||f^ - g*||_n^2 - ||f* - g*||_n^2
  double t5_identity = 0.0;  ///< ||f^ - f*||_n^2 + 2 P_n[(f^ - f*)(f* - g*)]
  double lhs_mc = 0.0;       ///< ||f^ - f*||^2 on the Monte-Carlo draws
  double lhs_n = 0.0;        ///< ||f^ - f*||_n^2
  double mc_std_error = 0.0; ///< SE of the Monte-Carlo cross term 2<f^ - f*, f* - g*>
  std::size_t mc_draws = 0;

  double upper() const noexcept { return t1 + t2 + t3 + t4; }
};

/// Population norms use `mc_draws` fresh (X, W) draws from `spec`; the
/// empirical norms run over all n rows of `data` (labeled first).
DecompositionTerms decomposition_terms(const XFunction& f_hat, const EnsembleSpec& spec,
                                       const AuxiliaryPredictor& g_tilde, const XFunction& f_tilde,
                                       const HybridDataset& data, std::size_t mc_draws, Rng& rng);

/// Monte-Carlo E[(f(X) - f*(X)) (f*(X) - g*(X, W))] with its SE, per probe.
std::vector<McEstimate> orthogonality_check(const EnsembleSpec& spec, std::span<const XFunction> probes,
                                            std::size_t mc_draws, Rng& rng);

/// max |f*(X)| over `draws` samples; the bound B used for the ensembles.
double empirical_sup(const XFunction& f, const XSampler& sample_x, std::size_t draws, Rng& rng);

}  // namespace past
