#pragma once

#include "past/datamodel.hpp"
#include "past/ensembles.hpp"
#include "past/parallel.hpp"
#include "past/past.hpp"
#include "past/predictor.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace past {

using XFunction = std::function<double(const Vector&)>;
using XSampler = std::function<Vector(Rng&)>;

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// sqrt(E (f(X) - f*(X))^2) over `probe_draws` fresh X; SE by the delta
/// method. X draws are serial; evaluation runs on `backend`.
McEstimate l2_error_mc(const XFunction& f, const XFunction& truth, const XSampler& sample_x,
                       std::size_t probe_draws, Rng& rng, parallel::Backend backend);
McEstimate l2_error_mc(const XFunction& f, const XFunction& truth, const XSampler& sample_x,
                       std::size_t probe_draws, Rng& rng);

/// sqrt(mean of diffs^2).
double empirical_norm(std::span<const double> diffs);
/// sqrt((1/|rows|) sum diff(row)^2).
template <class Row, class Diff>
double empirical_norm(std::span<const Row> rows, Diff&& diff) {
  std::vector<double> d;
  d.reserve(rows.size());
  for (const Row& r : rows) d.push_back(diff(r));
  return empirical_norm(d);
}

/// f~(x) = E[labelize(g~(x, W)) | X = x] under the ensemble's law of W | X.
/// Row i of a defect computation uses the stream derive_seed(seed, {i}), so
/// results do not depend on evaluation order.
struct SmoothedPredictor {
  const AuxiliaryPredictor* base = nullptr;
  const EnsembleSpec* law = nullptr;
  LabelingPolicy labelization = LabelingPolicy::Raw;
  std::size_t mc_draws = 2000;
  std::uint64_t seed = 0;
};

double smoothed_predict(const SmoothedPredictor& sp, const Vector& x, Rng& rng);
/// Deterministic variant using the stream derive_seed(sp.seed, {row}).
double smoothed_predict_row(const SmoothedPredictor& sp, const Vector& x, std::uint64_t row);

/// Fallback when W | X is unknown: regress g~(x_i, w_i) on x_i with `fitter`.
/// An estimator of f~, not ground truth.
Predictor smoothed_by_regression(const AuxiliaryPredictor& g_tilde, const HybridDataset& data,
                                 const FitterSpec& fitter, Rng& rng);

/// ||f~ - f*||_U over the unlabeled rows.
double smoothed_defect(const SmoothedPredictor& sp, const XFunction& truth, const HybridDataset& data,
                       parallel::Backend backend);
double smoothed_defect(const SmoothedPredictor& sp, const XFunction& truth, const HybridDataset& data);

/// ||g~ - g*||_U over the unlabeled rows.
double auxiliary_defect(const AuxiliaryPredictor& g_tilde, const EnsembleSpec& spec, const HybridDataset& data);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct ClassificationReport {
  double accuracy = 0.0;  ///< predicted label 1[score >= 1/2]
  std::vector<RocPoint> roc;  ///< from (0,0) to (1,1)
  double auc = 0.0;           ///< NaN when one class is absent
};

/// Labels must be 0 or 1. Equal scores form a single threshold step.
ClassificationReport classification_metrics(std::span<const double> scores, std::span<const double> labels);

/// 1 - SS_res / SS_tot; NaN when the targets are constant.
double r_squared(std::span<const double> predictions, std::span<const double> targets);

void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc);

}  // namespace past
