#pragma once

#include "past/common.hpp"
#include "past/forest.hpp"
#include "past/glm.hpp"
#include "past/linear.hpp"
#include "past/rng.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace past {

struct ConstantModel {
  double value = 0.0;
  Index input_dim = 0;
};

/// A fitted map x -> prediction. Immutable and cheap to copy (the model is
/// shared).
class Predictor {
 public:
  using Model = std::variant<ConstantModel, LinearModel, GlmModel, RandomForestModel>;

  Predictor() : Predictor(ConstantModel{}) {}
  explicit Predictor(Model model);

  double predict(const Vector& x) const;
  double operator()(const Vector& x) const { return predict(x); }
  Vector predict_batch(const Matrix& x) const;

  const Model& model() const noexcept { return *model_; }
  Index input_dim() const noexcept;
  std::string kind_name() const;

 private:
  std::shared_ptr<const Model> model_;
};

/// Pseudo-response function (x, w) -> real. Either a fitted Predictor over the
/// concatenation (x, w) or an injected analytic function (oracle g*).
class AuxiliaryPredictor {
 public:
  using Analytic = std::function<double(const Vector& x, const Vector& w)>;

  AuxiliaryPredictor(Predictor fitted, Index dim_x, Index dim_w);
  static AuxiliaryPredictor analytic(Analytic fn, std::string label = "analytic");

  double predict(const Vector& x, const Vector& w) const;
  double operator()(const Vector& x, const Vector& w) const { return predict(x, w); }

  bool is_analytic() const noexcept { return static_cast<bool>(analytic_); }
  /// Underlying fitted model; throws for analytic predictors.
  const Predictor& fitted() const;
  const std::string& label() const noexcept { return label_; }

 private:
  AuxiliaryPredictor() = default;
  std::optional<Predictor> fitted_;
  Analytic analytic_;
  Index dim_x_ = 0;
  Index dim_w_ = 0;
  std::string label_;
};

// ----- fitter descriptors ---------------------------------------------------

struct LinearFitter {
  FeatureMap map;  ///< over x; the auxiliary stage appends w as passthrough
  double ridge = 0.0;
};

struct GlmFitter {
  FeatureMap map;
  LossSpec loss = LossSpec::logistic();
  double reg = 0.0;
  GlmOptions opts;
};

struct ForestFitter {
  ForestTask task = ForestTask::Regression;
  ForestParams params;
  std::vector<ForestParams> cv_grid;  ///< empty: use params directly
  int cv_folds = 3;
};

using FitterSpec = std::variant<LinearFitter, GlmFitter, ForestFitter>;

std::string fitter_name(const FitterSpec& spec);

/// Fits `spec` to rows of `inputs`. `passthrough` trailing input columns are
/// appended unexpanded by linear/GLM feature maps.
Predictor fit_predictor(const FitterSpec& spec, const Matrix& inputs, const Vector& targets, Rng& rng,
                        Index passthrough = 0);

// ----- cross-validation ------------------------------------------------------

struct CvResult {
  std::size_t best_index = 0;
  std::vector<double> mean_loss;  ///< NaN for skipped entries
  std::vector<std::string> warnings;
};

/// Deterministic k-fold split: rows are permuted once with `rng` and cut into
/// k contiguous folds. Returns the fold index of each row.
std::vector<int> make_folds(std::size_t n, int k_folds, Rng& rng);

using CvFit = std::function<Predictor(std::size_t grid_index, const Matrix& x, const Vector& y, Rng& rng)>;
using CvLoss = std::function<double(double prediction, double target)>;
/// Minimum training rows a grid entry needs; entries failing it on any fold are skipped.
using CvMinRows = std::function<std::size_t(std::size_t grid_index)>;

/// Returns the grid entry with minimal mean held-out loss; ties go to the
/// earliest entry. Throws InvalidArgument if every entry was skipped.
CvResult cross_validate(std::size_t grid_size, const CvFit& fit, const CvLoss& loss, const CvMinRows& min_rows,
                        const Matrix& x, const Vector& y, int k_folds, Rng& rng);

/// Forest convenience wrapper with squared held-out loss.
CvResult cross_validate_forest(std::span<const ForestParams> grid, ForestTask task, const Matrix& x,
                               const Vector& y, int k_folds, Rng& rng);

/// Default forest grid: max_depth in {4, 8, 16} x min_leaf in {1, 5, 20}.
std::vector<ForestParams> default_forest_grid(const ForestParams& base);

}  // namespace past
