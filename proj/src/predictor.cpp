#include "past/predictor.hpp"

#include "past/datamodel.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace past {

Predictor::Predictor(Model model) : model_(std::make_shared<const Model>(std::move(model))) {}

double Predictor::predict(const Vector& x) const {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantModel>) {
          return m.value;
        } else {
          return m.predict(x);
        }
      },
      *model_);
}

Vector Predictor::predict_batch(const Matrix& x) const {
  if (const auto* rf = std::get_if<RandomForestModel>(model_.get())) return rf->predict_batch(x);
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) out(i) = predict(x.row(i).transpose());
  return out;
}

Index Predictor::input_dim() const noexcept {
  return std::visit(
      [](const auto& m) -> Index {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantModel>) {
          return m.input_dim;
        } else if constexpr (std::is_same_v<M, RandomForestModel>) {
          return m.input_dim();
        } else {
          return m.feature_map.input_dim() + m.feature_map.passthrough();
        }
      },
      *model_);
}

std::string Predictor::kind_name() const {
  switch (model_->index()) {
    case 0: return "constant";
    case 1: return "linear";
    case 2: return "glm";
    default: return "random_forest";
  }
}

AuxiliaryPredictor::AuxiliaryPredictor(Predictor fitted, Index dim_x, Index dim_w)
    : fitted_(std::move(fitted)), dim_x_(dim_x), dim_w_(dim_w), label_(fitted_->kind_name()) {
  if (fitted_->input_dim() != dim_x + dim_w)
    throw InvalidArgument("AuxiliaryPredictor: model input dimension must equal dim_x + dim_w");
}

AuxiliaryPredictor AuxiliaryPredictor::analytic(Analytic fn, std::string label) {
  AuxiliaryPredictor a;
  a.analytic_ = std::move(fn);
  a.label_ = std::move(label);
  return a;
}

double AuxiliaryPredictor::predict(const Vector& x, const Vector& w) const {
  if (analytic_) return analytic_(x, w);
  if (x.size() != dim_x_ || w.size() != dim_w_) throw InvalidArgument("AuxiliaryPredictor: dimension mismatch");
  return fitted_->predict(concat(x, w));
}

const Predictor& AuxiliaryPredictor::fitted() const {
  if (!fitted_) throw InvalidArgument("AuxiliaryPredictor: analytic predictor has no fitted model");
  return *fitted_;
}

std::string fitter_name(const FitterSpec& spec) {
  switch (spec.index()) {
    case 0: return "linear";
    case 1: return "glm";
    default: return "forest";
  }
}

std::vector<ForestParams> default_forest_grid(const ForestParams& base) {
  std::vector<ForestParams> grid;
  for (int depth : {4, 8, 16}) {
    for (int leaf : {1, 5, 20}) {
      ForestParams p = base;
      p.max_depth = depth;
      p.min_leaf = leaf;
      grid.push_back(p);
    }
  }
  return grid;
}

Predictor fit_predictor(const FitterSpec& spec, const Matrix& inputs, const Vector& targets, Rng& rng,
                        Index passthrough) {
  return std::visit(
      [&](const auto& f) -> Predictor {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, LinearFitter>) {
          const FeatureMap map = f.map.with_passthrough(passthrough);
          return Predictor(fit_linear(map, inputs, targets, f.ridge));
        } else if constexpr (std::is_same_v<F, GlmFitter>) {
          const FeatureMap map = f.map.with_passthrough(passthrough);
          return Predictor(fit_glm(map, inputs, targets, f.loss, f.reg, f.opts));
        } else {
          ForestParams params = f.params;
          if (!f.cv_grid.empty()) {
            Rng cv_rng = split(rng);
            const CvResult cv = cross_validate_forest(f.cv_grid, f.task, inputs, targets, f.cv_folds, cv_rng);
            params = f.cv_grid[cv.best_index];
          }
          return Predictor(fit_random_forest(inputs, targets, f.task, params, rng));
        }
      },
      spec);
}

std::vector<int> make_folds(std::size_t n, int k_folds, Rng& rng) {
  if (k_folds < 2) throw InvalidArgument("cross_validate: k_folds must be at least 2");
  if (n < static_cast<std::size_t>(k_folds)) throw InvalidArgument("cross_validate: fewer rows than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = std::min(i - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)));
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<int> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos)
    fold[perm[pos]] = static_cast<int>(pos * static_cast<std::size_t>(k_folds) / n);
  return fold;
}

CvResult cross_validate(std::size_t grid_size, const CvFit& fit, const CvLoss& loss, const CvMinRows& min_rows,
                        const Matrix& x, const Vector& y, int k_folds, Rng& rng) {
  if (grid_size == 0) throw InvalidArgument("cross_validate: empty grid");
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::vector<int> fold = make_folds(n, k_folds, rng);
  const std::uint64_t fit_base = rng();

  CvResult result;
  result.mean_loss.assign(grid_size, std::numeric_limits<double>::quiet_NaN());
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t g = 0; g < grid_size; ++g) {
    double total = 0.0;
    std::size_t count = 0;
    bool skipped = false;
    for (int k = 0; k < k_folds && !skipped; ++k) {
      std::vector<Index> train, test;
      for (std::size_t i = 0; i < n; ++i) (fold[i] == k ? test : train).push_back(static_cast<Index>(i));
      if (train.size() < min_rows(g)) {
        result.warnings.push_back("grid entry " + std::to_string(g) + " skipped: fold " + std::to_string(k) +
                                  " has " + std::to_string(train.size()) + " training rows, needs " +
                                  std::to_string(min_rows(g)));
        skipped = true;
        break;
      }
      Matrix xt(static_cast<Index>(train.size()), x.cols());
      Vector yt(static_cast<Index>(train.size()));
      for (std::size_t i = 0; i < train.size(); ++i) {
        xt.row(static_cast<Index>(i)) = x.row(train[i]);
        yt(static_cast<Index>(i)) = y(train[i]);
      }
      // Same stream per (fold) across grid entries: entries are compared on
      // identical randomness.
      Rng fit_rng(derive_seed(fit_base, {static_cast<std::uint64_t>(k)}));
      const Predictor p = fit(g, xt, yt, fit_rng);
      for (Index i : test) {
        total += loss(p.predict(x.row(i).transpose()), y(i));
        ++count;
      }
    }
    if (skipped) continue;
    result.mean_loss[g] = total / static_cast<double>(count);
    if (result.mean_loss[g] < best) {
      best = result.mean_loss[g];
      result.best_index = g;
      any = true;
    }
  }
  if (!any) throw InvalidArgument("cross_validate: every grid entry was skipped");
  return result;
}

CvResult cross_validate_forest(std::span<const ForestParams> grid, ForestTask task, const Matrix& x,
                               const Vector& y, int k_folds, Rng& rng) {
  const auto fit = [&](std::size_t g, const Matrix& xt, const Vector& yt, Rng& r) {
    return Predictor(fit_random_forest(xt, yt, task, grid[g], r));
  };
  const auto loss = [](double p, double t) { return (p - t) * (p - t); };
  const auto min_rows = [&](std::size_t g) { return 2 * static_cast<std::size_t>(grid[g].min_leaf); };
  return cross_validate(grid.size(), fit, loss, min_rows, x, y, k_folds, rng);
}

}  // namespace past
