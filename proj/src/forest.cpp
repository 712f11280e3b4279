#include "past/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace past {

int ForestParams::features_per_split(Index d) const {
  const double frac = feature_fraction > 0.0 ? std::min(feature_fraction, 1.0)
                                             : std::sqrt(static_cast<double>(d)) / static_cast<double>(d);
  const int m = static_cast<int>(std::lround(frac * static_cast<double>(d)));
  return std::clamp(m, 1, static_cast<int>(std::max<Index>(d, 1)));
}

double DecisionTree::predict(const double* x) const {
  int k = 0;
  while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
    const TreeNode& nd = nodes_[static_cast<std::size_t>(k)];
    k = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes_[static_cast<std::size_t>(k)].value;
}

int DecisionTree::depth() const {
  // Nodes are appended parent-before-children.
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    best = std::max(best, d[k]);
    if (nodes_[k].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[k].left)] = d[k] + 1;
      d[static_cast<std::size_t>(nodes_[k].right)] = d[k] + 1;
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

// Node impurity from count, sum and sum of squares. For 0/1 responses the two
// criteria differ by a factor 2; fractional (soft) responses are handled by
// treating the node mean as the class-1 probability.
double impurity(ForestTask task, double n, double sum, double sumsq) {
  if (n <= 0) return 0.0;
  if (task == ForestTask::Regression) return std::max(0.0, sumsq - sum * sum / n);
  const double p = sum / n;
  return n * 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, ForestTask task, const ForestParams& params, Rng& rng)
      : x_(x), y_(y), task_(task), params_(params), rng_(rng), m_(params.features_per_split(x.cols())) {}

  std::vector<TreeNode> build(std::vector<int> rows) {
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<int> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double sum = 0.0, sumsq = 0.0;
    for (int r : rows) {
      sum += y_(r);
      sumsq += y_(r) * y_(r);
    }
    const double n = static_cast<double>(rows.size());
    nodes_[static_cast<std::size_t>(id)].value = n > 0 ? sum / n : 0.0;
    const double parent = impurity(task_, n, sum, sumsq);

    if (depth >= params_.max_depth || rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf) ||
        parent <= 1e-12)
      return id;

    const std::vector<int> features = candidate_features();
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = parent - 1e-12 * std::max(1.0, parent);
    std::vector<std::pair<double, double>> vals(rows.size());
    for (int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = {x_(rows[i], f), y_(rows[i])};
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double ls = 0.0, lss = 0.0;
      const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        ls += vals[i].second;
        lss += vals[i].second * vals[i].second;
        const std::size_t nl = i + 1;
        const std::size_t nr = vals.size() - nl;
        if (vals[i].first == vals[i + 1].first || nl < min_leaf || nr < min_leaf) continue;
        const double score = impurity(task_, static_cast<double>(nl), ls, lss) +
                             impurity(task_, static_cast<double>(nr), sum - ls, sumsq - lss);
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<int> left, right;
    for (int r : rows) (x_(r, best_feature) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    nodes_[static_cast<std::size_t>(id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
    const int l = grow(std::move(left), depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    const int r = grow(std::move(right), depth + 1);
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(x_.cols());
    std::vector<int> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    if (m_ >= d) return all;
    for (int i = 0; i < m_; ++i) {
      const int j = i + static_cast<int>(uniform01(rng_) * (d - i));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(std::min(j, d - 1))]);
    }
    all.resize(static_cast<std::size_t>(m_));
    std::sort(all.begin(), all.end());
    return all;
  }

  const Matrix& x_;
  const Vector& y_;
  ForestTask task_;
  const ForestParams& params_;
  Rng& rng_;
  int m_;
  std::vector<TreeNode> nodes_;
};

void check_params(const ForestParams& p) {
  if (p.n_trees < 1 || p.max_depth < 0 || p.min_leaf < 1)
    throw InvalidArgument("random forest: n_trees >= 1, max_depth >= 0 and min_leaf >= 1 are required");
}

}  // namespace

DecisionTree fit_tree(const Matrix& x, const Vector& y, std::span<const int> rows, ForestTask task,
                      const ForestParams& params, Rng& rng) {
  check_params(params);
  TreeBuilder builder(x, y, task, params, rng);
  return DecisionTree(builder.build(std::vector<int>(rows.begin(), rows.end())));
}

double RandomForestModel::predict(const Vector& x) const {
  if (x.size() != input_dim_) throw InvalidArgument("random forest: input dimension mismatch");
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(x.data());
  return s / static_cast<double>(trees_.size());
}

Vector RandomForestModel::predict_batch(const Matrix& x, parallel::Backend backend) const {
  if (x.cols() != input_dim_) throw InvalidArgument("random forest: input dimension mismatch");
  const auto out = parallel::map_indices(
      static_cast<std::size_t>(x.rows()),
      [&](std::size_t i) { return predict(x.row(static_cast<Index>(i)).transpose()); }, backend);
  return Eigen::Map<const Vector>(out.data(), static_cast<Index>(out.size()));
}

RandomForestModel fit_random_forest(const Matrix& x, const Vector& y, ForestTask task, const ForestParams& params,
                                    Rng& rng, parallel::Backend backend) {
  check_params(params);
  if (x.rows() != y.size()) throw InvalidArgument("random forest: row/target count mismatch");
  if (x.rows() < 2 * static_cast<Index>(params.min_leaf))
    throw InvalidArgument("random forest: need at least 2 * min_leaf rows, got " + std::to_string(x.rows()));
  if (task == ForestTask::ProbabilityClassification) {
    for (Index i = 0; i < y.size(); ++i)
      if (!(y(i) >= 0.0 && y(i) <= 1.0)) throw InvalidArgument("random forest: classification targets must lie in [0, 1]");
  }

  const std::uint64_t base = rng();
  const int n = static_cast<int>(x.rows());
  std::vector<DecisionTree> trees(static_cast<std::size_t>(params.n_trees));
  parallel::for_each_index(
      trees.size(),
      [&](std::size_t t) {
        Rng tree_rng(derive_seed(base, {t}));
        std::vector<int> rows(static_cast<std::size_t>(n));
        if (params.bootstrap) {
          for (int& r : rows) r = std::min(n - 1, static_cast<int>(uniform01(tree_rng) * n));
        } else {
          std::iota(rows.begin(), rows.end(), 0);
        }
        TreeBuilder builder(x, y, task, params, tree_rng);
        trees[t] = DecisionTree(builder.build(std::move(rows)));
      },
      backend);
  return RandomForestModel(std::move(trees), task, params, x.cols());
}

RandomForestModel fit_random_forest(const Matrix& x, const Vector& y, ForestTask task, const ForestParams& params,
                                    Rng& rng) {
  return fit_random_forest(x, y, task, params, rng, parallel::default_backend());
}

}  // namespace past
