#pragma once

// Algorithm 1: fit g~ on labeled (x, w, y), impute pseudo-responses, then run
// ERM over x alone. Also the naive (labeled-only) and oracle (fully labeled)
// baselines, which share PAST's final-stage stream.

#include "past/datamodel.hpp"
#include "past/losses.hpp"
#include "past/predictor.hpp"

#include <optional>
#include <span>
#include <string_view>

namespace past {

enum class LabelingPolicy { Raw, Hard, StochasticSoft };
enum class ImputationPolicy { UnlabeledOnly, AllPseudo };

std::string_view to_string(LabelingPolicy p) noexcept;
std::string_view to_string(ImputationPolicy p) noexcept;
/// "raw" | "hard" | "soft"; throws ConfigError otherwise.
LabelingPolicy labeling_from_name(std::string_view name);
/// "unlabeled_only" | "all_pseudo"; throws ConfigError otherwise.
ImputationPolicy imputation_from_name(std::string_view name);

struct PastConfig {
  FitterSpec auxiliary = LinearFitter{};
  FitterSpec final_fitter = LinearFitter{};
  LossSpec loss = LossSpec::squared();
  LabelingPolicy labeling = LabelingPolicy::Raw;
  ImputationPolicy imputation = ImputationPolicy::UnlabeledOnly;
  /// When set, the auxiliary stage wraps this function instead of fitting.
  std::optional<AuxiliaryPredictor::Analytic> oracle_gstar;
};

/// Throws ConfigError when labeling is not Raw for a squared loss with an
/// unbounded response range.
void validate(const PastConfig& config);

/// Hard: 1[v >= 1/2]; StochasticSoft: Bernoulli(v); Raw: v. Probability
/// policies clamp v to [0, 1] first. `rng` is only used by StochasticSoft.
double labelize(double value, LabelingPolicy policy, Rng& rng);
/// Conditional mean of labelize(value) given value: the clamped value for
/// StochasticSoft.
double labelize_mean(double value, LabelingPolicy policy);

AuxiliaryPredictor fit_auxiliary(const PastConfig& config, const HybridDataset& data, Rng& rng);

struct LabelingCounts {
  std::size_t true_labels = 0;
  std::size_t pseudo_labels = 0;
  std::size_t pseudo_ones = 0;  ///< pseudo rows labeled 1 (Hard / StochasticSoft)
  std::size_t clamped = 0;      ///< auxiliary outputs outside [0, 1] (probability policies)
};

/// Rows are ordered labeled first, then unlabeled.
PseudoLabeledDataset generate_pseudo_responses(const AuxiliaryPredictor& g_tilde, const HybridDataset& data,
                                               LabelingPolicy labeling, ImputationPolicy imputation, Rng& rng,
                                               LabelingCounts* counts = nullptr);

Predictor fit_final(const PastConfig& config, const PseudoLabeledDataset& pseudo, Rng& rng);

/// Audit trail of one PAST fit.
struct PastProvenance {
  std::uint64_t stage_seed = 0;
  std::string auxiliary_kind;
  std::string final_kind;
  LabelingPolicy labeling = LabelingPolicy::Raw;
  ImputationPolicy imputation = ImputationPolicy::UnlabeledOnly;
  LabelingCounts counts;
};

struct PastFit {
  Predictor f_hat;
  AuxiliaryPredictor g_tilde;
  PastProvenance provenance;
};

/// Draws one stage seed from `rng`; the auxiliary, labeling and final stages
/// use streams derived from it. Errors carry the stage name.
PastFit past_fit(const PastConfig& config, const HybridDataset& data, Rng& rng);

/// ERM on the labeled rows only. Consumes `rng` exactly like past_fit, so with
/// n_U = 0 both return the same model.
Predictor naive_fit(const PastConfig& config, const HybridDataset& data, Rng& rng);

/// ERM on every row with its true response.
Predictor oracle_fit(const PastConfig& config, std::span<const LabeledTriple> fully_labeled, Rng& rng);

}  // namespace past
