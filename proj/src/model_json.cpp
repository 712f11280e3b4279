#include "past/model_json.hpp"

#include <json.hpp>

namespace past {

using nlohmann::json;

namespace {

json vec_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

json map_to_json(const FeatureMap& m) {
  return {{"kind", m.kind() == FeatureKind::Identity ? "identity" : "polynomial"},
          {"input_dim", m.input_dim()},
          {"degree", m.degree()},
          {"passthrough", m.passthrough()}};
}

FeatureMap map_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const Index d = j.at("input_dim").get<Index>();
  const Index pass = j.at("passthrough").get<Index>();
  if (kind == "identity") return FeatureMap::identity(d, pass);
  if (kind == "polynomial") return FeatureMap::polynomial(d, j.at("degree").get<int>(), pass);
  throw ConfigError("model json: unknown feature map kind '" + kind + "'");
}

json loss_to_json(const LossSpec& l) {
  return {{"kind", std::string(to_string(l.kind))},
          {"glm_form", l.glm_form},
          {"domain", {l.domain.lo, l.domain.hi}},
          {"response", {l.response.lo, l.response.hi}},
          {"L", l.lipschitz_L},
          {"gamma", l.convexity_gamma}};
}

// Infinite bounds are stored as null by nlohmann; restore them explicitly.
double bound_from_json(const json& j, double inf_value) { return j.is_null() ? inf_value : j.get<double>(); }

LossSpec loss_from_json(const json& j) {
  LossSpec l = loss_from_name(j.at("kind").get<std::string>());
  l.glm_form = j.at("glm_form").get<bool>();
  const double inf = std::numeric_limits<double>::infinity();
  l.domain = {bound_from_json(j.at("domain")[0], -inf), bound_from_json(j.at("domain")[1], inf)};
  l.response = {bound_from_json(j.at("response")[0], -inf), bound_from_json(j.at("response")[1], inf)};
  l.lipschitz_L = bound_from_json(j.at("L"), inf);
  l.convexity_gamma = j.at("gamma").get<double>();
  return l;
}

json params_to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth},
          {"min_leaf", p.min_leaf},
          {"feature_fraction", p.feature_fraction},
          {"bootstrap", p.bootstrap}};
}

ForestParams params_from_json(const json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<int>();
  p.max_depth = j.at("max_depth").get<int>();
  p.min_leaf = j.at("min_leaf").get<int>();
  p.feature_fraction = j.at("feature_fraction").get<double>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  return p;
}

// Trees as parallel arrays: feature, threshold, left, right, value.
json tree_to_json(const DecisionTree& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       value = json::array();
  for (const TreeNode& n : t.nodes()) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

DecisionTree tree_from_json(const json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const std::size_t m = feature.size();
  if (threshold.size() != m || left.size() != m || right.size() != m || value.size() != m)
    throw ConfigError("model json: ragged tree arrays");
  std::vector<TreeNode> nodes(m);
  for (std::size_t i = 0; i < m; ++i) {
    nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
    if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                            left[i] >= static_cast<int>(m) || right[i] >= static_cast<int>(m)))
      throw ConfigError("model json: tree child index out of range");
  }
  return DecisionTree(std::move(nodes));
}

}  // namespace

std::string predictor_to_json(const Predictor& p, int indent) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = p.kind_name();
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantModel>) {
          doc["value"] = m.value;
          doc["input_dim"] = m.input_dim;
        } else if constexpr (std::is_same_v<M, LinearModel>) {
          doc["feature_map"] = map_to_json(m.feature_map);
          doc["coefficients"] = vec_to_json(m.coefficients);
          doc["ridge_lambda"] = m.ridge_lambda;
        } else if constexpr (std::is_same_v<M, GlmModel>) {
          doc["feature_map"] = map_to_json(m.feature_map);
          doc["coefficients"] = vec_to_json(m.coefficients);
          doc["loss"] = loss_to_json(m.loss);
          doc["reg"] = m.reg;
          doc["iterations"] = m.iterations;
          doc["final_grad_norm"] = m.final_grad_norm;
        } else {
          doc["task"] = m.task() == ForestTask::Regression ? "regression" : "probability_classification";
          doc["params"] = params_to_json(m.params());
          doc["input_dim"] = m.input_dim();
          json trees = json::array();
          for (const DecisionTree& t : m.trees()) trees.push_back(tree_to_json(t));
          doc["trees"] = std::move(trees);
        }
      },
      p.model());
  return doc.dump(indent);
}

Predictor predictor_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw ConfigError("model json: unsupported format_version " + std::to_string(version));
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "constant") return Predictor(ConstantModel{doc.at("value").get<double>(), doc.at("input_dim").get<Index>()});
    if (kind == "linear") {
      LinearModel m{map_from_json(doc.at("feature_map")), vec_from_json(doc.at("coefficients")),
                    doc.at("ridge_lambda").get<double>()};
      if (m.coefficients.size() != m.feature_map.output_dim()) throw ConfigError("model json: coefficient length mismatch");
      return Predictor(std::move(m));
    }
    if (kind == "glm") {
      GlmModel m;
      m.feature_map = map_from_json(doc.at("feature_map"));
      m.coefficients = vec_from_json(doc.at("coefficients"));
      m.loss = loss_from_json(doc.at("loss"));
      m.reg = doc.at("reg").get<double>();
      m.iterations = doc.at("iterations").get<int>();
      m.final_grad_norm = doc.at("final_grad_norm").get<double>();
      if (m.coefficients.size() != m.feature_map.output_dim()) throw ConfigError("model json: coefficient length mismatch");
      return Predictor(std::move(m));
    }
    if (kind == "random_forest") {
      const auto task_name = doc.at("task").get<std::string>();
      const ForestTask task = task_name == "regression" ? ForestTask::Regression : ForestTask::ProbabilityClassification;
      std::vector<DecisionTree> trees;
      for (const json& t : doc.at("trees")) trees.push_back(tree_from_json(t));
      return Predictor(RandomForestModel(std::move(trees), task, params_from_json(doc.at("params")),
                                         doc.at("input_dim").get<Index>()));
    }
    throw ConfigError("model json: unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model json: ") + e.what());
  }
}

}  // namespace past
