#pragma once

// CART trees and random forests: axis-aligned splits at midpoints between
// consecutive distinct feature values, squared-error splits for regression and
// Gini splits for probability classification.

#include "past/common.hpp"
#include "past/parallel.hpp"
#include "past/rng.hpp"

#include <span>
#include <vector>

namespace past {

enum class ForestTask { Regression, ProbabilityClassification };

struct ForestParams {
  int n_trees = 200;
  int max_depth = 8;
  int min_leaf = 5;
  /// Fraction of features considered per split; <= 0 selects sqrt(d)/d.
  double feature_fraction = -1.0;
  bool bootstrap = true;

  /// Number of candidate features per split for input dimension d (at least 1).
  int features_per_split(Index d) const;
  bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
  int feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  ///< leaf mean (class-1 frequency for classification)
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  /// x[feature] <= threshold goes left.
  double predict(const double* x) const;
  double predict(const Vector& x) const { return predict(x.data()); }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
};

/// Grows one tree on the multiset of `rows` (repeats allowed, as produced by
/// bootstrap sampling).
DecisionTree fit_tree(const Matrix& x, const Vector& y, std::span<const int> rows, ForestTask task,
                      const ForestParams& params, Rng& rng);

class RandomForestModel {
 public:
  RandomForestModel() = default;
  RandomForestModel(std::vector<DecisionTree> trees, ForestTask task, ForestParams params, Index input_dim)
      : trees_(std::move(trees)), task_(task), params_(params), input_dim_(input_dim) {}

  /// Mean of the tree outputs.
  double predict(const Vector& x) const;
  Vector predict_batch(const Matrix& x, parallel::Backend backend) const;
  Vector predict_batch(const Matrix& x) const { return predict_batch(x, parallel::default_backend()); }

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  ForestTask task() const noexcept { return task_; }
  const ForestParams& params() const noexcept { return params_; }
  Index input_dim() const noexcept { return input_dim_; }

 private:
  std::vector<DecisionTree> trees_;
  ForestTask task_ = ForestTask::Regression;
  ForestParams params_;
  Index input_dim_ = 0;
};

/// Fits n_trees trees, each on its own stream derived from one draw of `rng`,
/// so the serial and OpenMP backends give identical forests.
/// Requires at least 2 * min_leaf rows.
RandomForestModel fit_random_forest(const Matrix& x, const Vector& y, ForestTask task, const ForestParams& params,
                                    Rng& rng, parallel::Backend backend);
RandomForestModel fit_random_forest(const Matrix& x, const Vector& y, ForestTask task, const ForestParams& params,
                                    Rng& rng);

}  // namespace past
