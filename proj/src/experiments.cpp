#include "past/experiments.hpp"

#include "past/csv.hpp"
#include "past/metrics.hpp"
#include "past/parallel.hpp"
#include "past/svg.hpp"
#include "past/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <ostream>
#include <thread>

namespace past {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kCoefficientStream = 0xFFFFFFFFFFFFFFFFULL;

enum TrialStream : std::uint64_t { kData = 0, kSplit = 1, kFit = 2, kProbe = 3, kSmooth = 4, kTest = 5 };

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"past", "past_raw", "past_hard", "past_soft", "naive", "oracle", "direct"};
  return m;
}

bool is_past_method(const std::string& m) { return m.rfind("past", 0) == 0; }

LabelingPolicy method_labeling(const std::string& m, LabelingPolicy fallback) {
  if (m == "past_raw") return LabelingPolicy::Raw;
  if (m == "past_hard") return LabelingPolicy::Hard;
  if (m == "past_soft") return LabelingPolicy::StochasticSoft;
  return fallback;
}

FeatureMap map_from_config(const Config& c, const std::string& s, Index dim_x, int default_degree) {
  const std::string kind = c.get_string(s + ".features", "polynomial");
  if (kind == "identity") return FeatureMap::identity(dim_x);
  if (kind == "polynomial") {
    const auto deg = c.get_int(s + ".degree", default_degree);
    if (deg < 1 || deg > 8) throw ConfigError(s + ".degree must lie in [1, 8]");
    return FeatureMap::polynomial(dim_x, static_cast<int>(deg));
  }
  throw ConfigError(s + ".features must be polynomial or identity");
}

FitterSpec fitter_from_config(const Config& c, const std::string& s, const ExperimentConfig& e) {
  const bool classification = e.ensemble == EnsembleKind::HardSoft || e.ensemble == EnsembleKind::NoisyLabel;
  const std::string kind = c.get_string(s + ".fitter", classification ? "forest" : "linear");
  if (kind == "linear") {
    LinearFitter f{map_from_config(c, s, e.params.dim_x, e.params.degree), c.get_double(s + ".ridge", 0.0)};
    if (f.ridge < 0.0) throw ConfigError(s + ".ridge must be non-negative");
    return f;
  }
  if (kind == "glm") {
    GlmFitter f;
    f.map = map_from_config(c, s, e.params.dim_x, 1);
    f.loss = loss_from_name(c.get_string(s + ".loss", "logistic"));
    f.reg = c.get_double(s + ".reg", 0.0);
    f.opts.max_iters = static_cast<int>(c.get_int(s + ".max_iters", f.opts.max_iters));
    f.opts.tol = c.get_double(s + ".tol", f.opts.tol);
    return f;
  }
  if (kind == "forest") {
    ForestFitter f;
    const std::string task = c.get_string(s + ".task", classification ? "classification" : "regression");
    if (task == "classification") f.task = ForestTask::ProbabilityClassification;
    else if (task == "regression") f.task = ForestTask::Regression;
    else throw ConfigError(s + ".task must be regression or classification");
    f.params.n_trees = static_cast<int>(c.get_int(s + ".n_trees", 100));
    f.params.max_depth = static_cast<int>(c.get_int(s + ".max_depth", f.params.max_depth));
    f.params.min_leaf = static_cast<int>(c.get_int(s + ".min_leaf", f.params.min_leaf));
    f.params.feature_fraction = c.get_double(s + ".feature_fraction", f.params.feature_fraction);
    f.params.bootstrap = c.get_bool(s + ".bootstrap", f.params.bootstrap);
    if (f.params.n_trees < 1 || f.params.max_depth < 0 || f.params.min_leaf < 1)
      throw ConfigError(s + ": forest needs n_trees >= 1, max_depth >= 0, min_leaf >= 1");
    if (c.get_bool(s + ".cv", false)) f.cv_grid = default_forest_grid(f.params);
    f.cv_folds = static_cast<int>(c.get_int(s + ".cv_folds", 3));
    return f;
  }
  throw ConfigError(s + ".fitter must be linear, glm or forest");
}

json fitter_to_json(const FitterSpec& spec) {
  return std::visit(
      [](const auto& f) -> json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, LinearFitter>) {
          return {{"fitter", "linear"}, {"degree", f.map.degree()}, {"features", f.map.kind() == FeatureKind::Identity ? "identity" : "polynomial"},
                  {"ridge", f.ridge}};
        } else if constexpr (std::is_same_v<F, GlmFitter>) {
          return {{"fitter", "glm"}, {"degree", f.map.degree()}, {"features", f.map.kind() == FeatureKind::Identity ? "identity" : "polynomial"},
                  {"loss", std::string(to_string(f.loss.kind))}, {"reg", f.reg}, {"max_iters", f.opts.max_iters}, {"tol", f.opts.tol}};
        } else {
          return {{"fitter", "forest"},
                  {"task", f.task == ForestTask::Regression ? "regression" : "classification"},
                  {"n_trees", f.params.n_trees},
                  {"max_depth", f.params.max_depth},
                  {"min_leaf", f.params.min_leaf},
                  {"feature_fraction", f.params.feature_fraction},
                  {"bootstrap", f.params.bootstrap},
                  {"cv", !f.cv_grid.empty()},
                  {"cv_folds", f.cv_folds}};
        }
      },
      spec);
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

// NaN and infinities are not JSON numbers; store them as strings.
json number_json(double v) { return std::isfinite(v) ? json(v) : json(csv::format_double(v)); }

json config_to_json(const ExperimentConfig& e) {
  json p = {{"dim_x", e.params.dim_x},         {"lambda", e.params.lambda},       {"sigma", e.params.sigma},
            {"degree", e.params.degree},       {"d2", e.params.d2},               {"beta_scale", e.params.beta_scale},
            {"alpha_scale", e.params.alpha_scale}, {"nu", e.params.nu},           {"theta_norm", e.params.theta_norm}};
  return {{"name", e.name},
          {"ensemble", std::string(to_string(e.ensemble))},
          {"params", p},
          {"sweep", std::string(to_string(e.sweep))},
          {"grid", e.grid},
          {"trials", e.trials},
          {"n", e.n},
          {"n_labeled", e.n_labeled},
          {"methods", e.methods},
          {"labeling", std::string(to_string(e.past.labeling))},
          {"imputation", std::string(to_string(e.past.imputation))},
          {"loss", std::string(to_string(e.past.loss.kind))},
          {"oracle_gstar", e.oracle_gstar},
          {"auxiliary", fitter_to_json(e.past.auxiliary)},
          {"final", fitter_to_json(e.past.final_fitter)},
          {"base_seed", std::to_string(e.base_seed)},
          {"probe_draws", e.probe_draws},
          {"smoother_draws", e.smoother_draws},
          {"test_size", e.test_size},
          {"overlay", e.overlay == OverlayKind::None ? "none" : (e.overlay == OverlayKind::EnsembleOne ? "ensemble_one" : "ensemble_two")}};
}

struct TrialInputs {
  EnsembleSpec spec;
  std::size_t n_labeled;
};

TrialInputs trial_inputs(const ExperimentConfig& cfg, const EnsembleSpec& base, double v) {
  EnsembleParams p = cfg.params;
  std::size_t n_labeled = cfg.n_labeled;
  switch (cfg.sweep) {
    case SweepVariable::Lambda: p.lambda = v; break;
    case SweepVariable::Nu: p.nu = v; break;
    case SweepVariable::Sigma: p.sigma = v; break;
    case SweepVariable::LabeledFraction: n_labeled = labeled_count(cfg.n, v); break;
  }
  return {base.with_params(p), n_labeled};
}

// One trial: every method on the same data, with metric values laid out as
// [method][metric].
std::vector<double> run_trial(const ExperimentConfig& cfg, const std::vector<std::string>& metrics,
                              const EnsembleSpec& base, std::size_t sweep_index, int trial) {
  const double v = cfg.grid[sweep_index];
  const TrialInputs in = trial_inputs(cfg, base, v);
  const EnsembleSpec& spec = in.spec;
  const std::uint64_t seed = derive_seed(cfg.base_seed, {sweep_index, static_cast<std::uint64_t>(trial)});

  Rng data_rng(derive_seed(seed, {kData}));
  const std::vector<LabeledTriple> full = spec.generate(cfg.n, data_rng);
  Rng split_rng(derive_seed(seed, {kSplit}));
  const HybridDataset data = split_dataset_count(full, in.n_labeled, split_rng);

  const XFunction fstar = [&spec](const Vector& x) { return spec.f_star(x); };
  const XSampler sample_x = [&spec](Rng& r) { return spec.sample_x(r); };

  std::vector<LabeledTriple> test;
  if (spec.is_classification()) {
    Rng test_rng(derive_seed(seed, {kTest}));
    test = spec.generate(cfg.test_size, test_rng);
  }
  double p_z1 = kNaN;
  if (spec.is_classification()) {
    double s = 0.0;
    for (const auto& t : full) s += spec.h_Z(t.x);
    p_z1 = s / static_cast<double>(full.size());
  }

  std::vector<double> out;
  out.reserve(cfg.methods.size() * metrics.size());
  for (const std::string& method : cfg.methods) {
    PastConfig pc = cfg.past;
    pc.labeling = method_labeling(method, cfg.past.labeling);
    if (cfg.oracle_gstar) pc.oracle_gstar = [spec](const Vector& x, const Vector& w) { return spec.g_star(x, w); };

    Rng fit_rng(derive_seed(seed, {kFit}));
    std::optional<Predictor> f_hat;
    std::optional<AuxiliaryPredictor> g_tilde;
    if (is_past_method(method)) {
      PastFit fit = past_fit(pc, data, fit_rng);
      f_hat = std::move(fit.f_hat);
      g_tilde = std::move(fit.g_tilde);
    } else if (method == "naive") {
      f_hat = naive_fit(pc, data, fit_rng);
    } else if (method == "oracle") {
      f_hat = oracle_fit(pc, full, fit_rng);
    } else {  // direct: W treated as the label on every row
      std::vector<LabeledTriple> relabeled = full;
      for (auto& t : relabeled) t.y = t.w(0);
      f_hat = oracle_fit(pc, relabeled, fit_rng);
    }

    const XFunction fh = [&f_hat](const Vector& x) { return f_hat->predict(x); };
    for (const std::string& metric : metrics) {
      double value = kNaN;
      if (metric == "rmse" || metric == "rmse_se") {
        Rng probe(derive_seed(seed, {kProbe}));
        const McEstimate e = l2_error_mc(fh, fstar, sample_x, cfg.probe_draws, probe);
        value = metric == "rmse" ? e.value : e.std_error;
      } else if (metric == "defect_smoothed" && g_tilde) {
        SmoothedPredictor sp{&*g_tilde, &spec, pc.labeling, cfg.smoother_draws, derive_seed(seed, {kSmooth})};
        value = smoothed_defect(sp, fstar, data);
      } else if (metric == "defect_aux" && g_tilde) {
        value = auxiliary_defect(*g_tilde, spec, data);
      } else if ((metric == "defect_pseudo" || metric == "defect_pseudo_se") && g_tilde) {
        // Conditional mean of the pseudo-response given (x, w) versus g*.
        std::vector<double> sq;
        for (const auto& u : data.unlabeled()) {
          const double d = labelize_mean(g_tilde->predict(u.x, u.w), pc.labeling) - spec.g_star(u.x, u.w);
          sq.push_back(d * d);
        }
        const double m = parallel::pairwise_sum(sq) / static_cast<double>(sq.size());
        if (metric == "defect_pseudo") {
          value = std::sqrt(m);
        } else {
          double ss = 0.0;
          for (double s : sq) ss += (s - m) * (s - m);
          value = sq.size() > 1 ? std::sqrt(ss / static_cast<double>(sq.size() - 1) / static_cast<double>(sq.size())) : 0.0;
        }
      } else if (metric == "p_z1") {
        value = p_z1;
      } else if (metric == "accuracy" || metric == "auc") {
        std::vector<double> scores, labels;
        for (const auto& t : test) {
          scores.push_back(f_hat->predict(t.x));
          labels.push_back(t.y);
        }
        const ClassificationReport rep = classification_metrics(scores, labels);
        value = metric == "accuracy" ? rep.accuracy : rep.auc;
      }
      out.push_back(value);
    }
  }
  return out;
}

std::string timestamp_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view to_string(SweepVariable v) noexcept {
  switch (v) {
    case SweepVariable::Lambda: return "lambda";
    case SweepVariable::Nu: return "nu";
    case SweepVariable::LabeledFraction: return "labeled_fraction";
    case SweepVariable::Sigma: return "sigma";
  }
  return "lambda";
}

SweepVariable sweep_from_name(std::string_view name) {
  if (name == "lambda") return SweepVariable::Lambda;
  if (name == "nu") return SweepVariable::Nu;
  if (name == "labeled_fraction") return SweepVariable::LabeledFraction;
  if (name == "sigma") return SweepVariable::Sigma;
  throw ConfigError("unknown sweep variable '" + std::string(name) + "'");
}

ExperimentConfig experiment_from_config(const Config& c) {
  ExperimentConfig e;
  e.name = c.get_string("experiment.name", e.name);
  e.ensemble = ensemble_from_name(c.get_string("experiment.ensemble"));
  const bool classification = e.ensemble == EnsembleKind::HardSoft || e.ensemble == EnsembleKind::NoisyLabel;

  EnsembleParams& p = e.params;
  p.dim_x = c.get_int("ensemble.dim_x", p.dim_x);
  p.lambda = c.get_double("ensemble.lambda", p.lambda);
  p.sigma = c.get_double("ensemble.sigma", p.sigma);
  p.degree = static_cast<int>(c.get_int("ensemble.degree", e.ensemble == EnsembleKind::PartialLinearTwo ? 2 : 3));
  p.d2 = c.get_int("ensemble.d2", p.d2);
  p.beta_scale = c.get_double("ensemble.beta_scale", p.beta_scale);
  p.alpha_scale = c.get_double("ensemble.alpha_scale", p.alpha_scale);
  p.nu = c.get_double("ensemble.nu", p.nu);
  p.theta_norm = c.get_double("ensemble.theta_norm", p.theta_norm);

  e.sweep = sweep_from_name(c.get_string("experiment.sweep", classification ? "nu" : "lambda"));
  e.grid = c.get_doubles("experiment.grid", {});
  const auto trials = c.get_int("experiment.trials", e.trials);
  if (trials < 1 || trials > 1000000) throw ConfigError("experiment.trials must be at least 1");
  e.trials = static_cast<int>(trials);
  const auto n = c.get_int("experiment.n", static_cast<std::int64_t>(e.n));
  if (n < 1) throw ConfigError("experiment.n must be positive");
  e.n = static_cast<std::size_t>(n);
  if (c.has("experiment.labeled_fraction")) {
    const double f = c.get_double("experiment.labeled_fraction");
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("experiment.labeled_fraction must lie in (0, 1]");
    e.n_labeled = labeled_count(e.n, f);
  }
  const auto nl = c.get_int("experiment.n_labeled", static_cast<std::int64_t>(e.n_labeled));
  if (nl < 1) throw ConfigError("experiment.n_labeled must be positive");
  e.n_labeled = static_cast<std::size_t>(nl);
  e.methods = c.get_strings("experiment.methods", classification ? std::vector<std::string>{"past_hard", "past_soft"}
                                                                  : std::vector<std::string>{"past", "naive", "oracle"});
  e.base_seed = static_cast<std::uint64_t>(c.get_int("experiment.base_seed", 1));
  e.probe_draws = static_cast<std::size_t>(c.get_int("experiment.probe_draws", 10000));
  e.smoother_draws = static_cast<std::size_t>(c.get_int("experiment.smoother_draws", 2000));
  e.test_size = static_cast<std::size_t>(c.get_int("experiment.test_size", 2000));
  const std::string overlay = c.get_string("experiment.overlay", "none");
  if (overlay == "none") e.overlay = OverlayKind::None;
  else if (overlay == "ensemble_one") e.overlay = OverlayKind::EnsembleOne;
  else if (overlay == "ensemble_two") e.overlay = OverlayKind::EnsembleTwo;
  else throw ConfigError("experiment.overlay must be none, ensemble_one or ensemble_two");

  e.past.loss = loss_from_name(c.get_string("past.loss", classification ? "binary_kl" : "squared"));
  // binary responses: squared loss is bounded on [0, 1]
  if (classification) e.past.loss.response = {0.0, 1.0};
  e.past.labeling = labeling_from_name(c.get_string("past.labeling", "raw"));
  e.past.imputation = imputation_from_name(c.get_string("past.imputation", "unlabeled_only"));
  e.oracle_gstar = c.get_bool("past.oracle_gstar", false);
  e.past.auxiliary = fitter_from_config(c, "auxiliary", e);
  e.past.final_fitter = fitter_from_config(c, "final", e);

  c.require_all_used();
  validate(e);
  return e;
}

void validate(const ExperimentConfig& e) {
  if (e.grid.empty()) throw ConfigError("experiment.grid must not be empty");
  if (e.trials < 1) throw ConfigError("experiment.trials must be at least 1");
  if (e.methods.empty()) throw ConfigError("experiment.methods must not be empty");
  if (e.n_labeled > e.n) throw ConfigError("experiment.n_labeled exceeds experiment.n");
  if (e.probe_draws < 2) throw ConfigError("experiment.probe_draws must be at least 2");
  const bool classification = e.ensemble == EnsembleKind::HardSoft || e.ensemble == EnsembleKind::NoisyLabel;
  for (const auto& m : e.methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw ConfigError("unknown method '" + m + "'");
    if (m == "direct" && !classification) throw ConfigError("method 'direct' needs a classification ensemble");
    if ((m == "past_hard" || m == "past_soft") && !classification)
      throw ConfigError("method '" + m + "' needs a classification ensemble");
  }
  if (std::set<std::string>(e.methods.begin(), e.methods.end()).size() != e.methods.size())
    throw ConfigError("experiment.methods contains duplicates");
  for (double v : e.grid) {
    if (e.sweep == SweepVariable::LabeledFraction && !(v > 0.0 && v <= 1.0))
      throw ConfigError("labeled_fraction grid values must lie in (0, 1]");
    if (e.sweep == SweepVariable::Lambda && !(v >= 0.0 && v <= 1.0)) throw ConfigError("lambda grid values must lie in [0, 1]");
    if (e.sweep == SweepVariable::Nu && !(v >= 0.0)) throw ConfigError("nu grid values must be non-negative");
    if (e.sweep == SweepVariable::Sigma && !(v > 0.0)) throw ConfigError("sigma grid values must be positive");
  }
  if ((e.sweep == SweepVariable::Nu) != classification && e.sweep != SweepVariable::LabeledFraction)
    throw ConfigError("sweep '" + std::string(to_string(e.sweep)) + "' does not apply to ensemble " +
                      std::string(to_string(e.ensemble)));
  if (e.overlay != OverlayKind::None && e.sweep != SweepVariable::Lambda)
    throw ConfigError("theory overlays need a lambda sweep");
  if (e.overlay == OverlayKind::EnsembleOne && e.ensemble != EnsembleKind::PartialLinearOne)
    throw ConfigError("overlay ensemble_one needs ensemble partial_linear_1");
  if (e.overlay == OverlayKind::EnsembleTwo && e.ensemble != EnsembleKind::PartialLinearTwo)
    throw ConfigError("overlay ensemble_two needs ensemble partial_linear_2");
  for (const auto& m : e.methods) {
    PastConfig pc = e.past;
    pc.labeling = method_labeling(m, e.past.labeling);
    validate(pc);
  }
}

std::vector<std::string> metric_names(const ExperimentConfig& cfg) {
  std::vector<std::string> m{"rmse", "rmse_se", "defect_smoothed", "defect_aux", "defect_pseudo", "defect_pseudo_se"};
  if (cfg.ensemble == EnsembleKind::HardSoft || cfg.ensemble == EnsembleKind::NoisyLabel) {
    m.push_back("p_z1");
    m.push_back("accuracy");
    m.push_back("auc");
  }
  return m;
}

EnsembleSpec experiment_ensemble(const ExperimentConfig& cfg) {
  Rng coef(derive_seed(cfg.base_seed, {kCoefficientStream}));
  return EnsembleSpec(cfg.ensemble, cfg.params, coef);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  validate(cfg);
  ExperimentResult res;
  res.config = cfg;
  res.methods = cfg.methods;
  res.metrics = metric_names(cfg);
  const EnsembleSpec base = experiment_ensemble(cfg);

  const std::size_t tasks = cfg.grid.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<double>> outputs(tasks);
  std::vector<std::exception_ptr> errors(tasks);

  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks));
  const auto work = [&](std::size_t task) {
    try {
      outputs[task] = run_trial(cfg, res.metrics, base, task / static_cast<std::size_t>(cfg.trials),
                                static_cast<int>(task % static_cast<std::size_t>(cfg.trials)));
    } catch (...) {
      errors[task] = std::current_exception();
    }
  };
  if (jobs <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) work(t);
  } else {
    // Workers run the inner kernels serially; both backends give identical
    // results, so this only avoids oversubscription.
    const parallel::Backend saved = parallel::default_backend();
    parallel::set_default_backend(parallel::Backend::Serial);
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < tasks; t = next++) work(t);
      });
    for (auto& th : pool) th.join();
    parallel::set_default_backend(saved);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t t = 0; t < tasks; ++t) {
    const std::size_t s = t / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(t % static_cast<std::size_t>(cfg.trials));
    std::size_t k = 0;
    for (const auto& m : res.methods)
      for (const auto& metric : res.metrics) res.rows.push_back({cfg.grid[s], trial, m, metric, outputs[t][k++]});
  }

  json manifest;
  manifest["format"] = "past-experiment-manifest";
  manifest["version"] = 1;
  manifest["config"] = config_to_json(cfg);
  manifest["coefficients"] = {{"beta", vector_json(base.coefficients().beta)},
                              {"alpha", vector_json(base.coefficients().alpha)},
                              {"theta", vector_json(base.coefficients().theta)}};
  manifest["methods"] = res.methods;
  manifest["metrics"] = res.metrics;
  manifest["row_count"] = res.rows.size();

  res.overlay_constant = kNaN;
  const bool has_oracle = std::count(res.methods.begin(), res.methods.end(), "oracle") > 0;
  if (cfg.overlay != OverlayKind::None && has_oracle) {
    const double d1 = static_cast<double>(base.feature_map().output_dim());
    const double d2 = static_cast<double>(cfg.params.d2);
    const double n = static_cast<double>(cfg.n), nl = static_cast<double>(cfg.n_labeled);
    const double sigma = cfg.params.sigma;
    const auto oracle = summarize(res, "oracle", "rmse");
    std::vector<double> rate, oracle_means, guarantee;
    for (std::size_t s = 0; s < cfg.grid.size(); ++s) {
      rate.push_back(sigma * std::sqrt(d1 / n));
      oracle_means.push_back(oracle[s].mean);
      guarantee.push_back(cfg.overlay == OverlayKind::EnsembleOne
                              ? guarantee_ensemble_one(sigma, cfg.grid[s], d1, n, nl)
                              : guarantee_ensemble_two(sigma, cfg.grid[s], d1, d2, n, nl));
    }
    const double c = fit_overlay_constant(rate, oracle_means);
    res.overlay_constant = c;
    std::vector<double> curve;
    for (double g : guarantee) curve.push_back(c * g);
    json ov = {{"kind", cfg.overlay == OverlayKind::EnsembleOne ? "ensemble_one" : "ensemble_two"},
               {"d1", d1},
               {"constant", c},
               {"curve", curve}};
    for (const auto& m : res.methods) {
      if (!is_past_method(m)) continue;
      std::vector<double> means;
      for (const auto& p : summarize(res, m, "rmse")) means.push_back(p.mean);
      ov["correlation_" + m] = number_json(pearson_correlation(curve, means));
    }
    manifest["overlay"] = ov;
  }
  const std::string hashed = manifest.dump();
  char hash_buf[17];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx", static_cast<unsigned long long>(fnv1a64(hashed)));
  res.manifest_hash = hash_buf;
  manifest["manifest_hash"] = res.manifest_hash;
  manifest["timestamp"] = timestamp_utc();
  res.manifest_json = manifest.dump(2);
  return res;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

ExperimentResult run_ensemble_one(const ExperimentConfig& cfg, int jobs) {
  require(cfg.ensemble == EnsembleKind::PartialLinearOne && cfg.sweep == SweepVariable::Lambda,
          "run_ensemble_one: needs partial_linear_1 with a lambda sweep");
  return run_experiment(cfg, jobs);
}

ExperimentResult run_ensemble_two(const ExperimentConfig& cfg, int jobs) {
  require(cfg.ensemble == EnsembleKind::PartialLinearTwo && cfg.sweep == SweepVariable::Lambda,
          "run_ensemble_two: needs partial_linear_2 with a lambda sweep");
  return run_experiment(cfg, jobs);
}

ExperimentResult run_hardsoft(const ExperimentConfig& cfg, int jobs) {
  require(cfg.ensemble == EnsembleKind::HardSoft && cfg.sweep == SweepVariable::Nu,
          "run_hardsoft: needs hard_soft with a nu sweep");
  return run_experiment(cfg, jobs);
}

ExperimentResult run_noisy(const ExperimentConfig& cfg, int jobs) {
  require(cfg.ensemble == EnsembleKind::NoisyLabel && cfg.sweep == SweepVariable::Nu,
          "run_noisy: needs noisy_label with a nu sweep");
  return run_experiment(cfg, jobs);
}

ExperimentResult run_label_fraction_sweep(const ExperimentConfig& cfg, int jobs) {
  require(cfg.sweep == SweepVariable::LabeledFraction, "run_label_fraction_sweep: needs a labeled_fraction sweep");
  return run_experiment(cfg, jobs);
}

void write_results_csv(std::ostream& out, const ExperimentResult& r) {
  out << "sweep_value,trial,method,metric,value,manifest_hash\n";
  for (const ResultRow& row : r.rows)
    out << csv::format_double(row.sweep_value) << ',' << row.trial << ',' << row.method << ',' << row.metric << ','
        << csv::format_double(row.value) << ',' << r.manifest_hash << '\n';
}

std::vector<SummaryPoint> summarize(const ExperimentResult& result, const std::string& method,
                                    const std::string& metric) {
  const auto& grid = result.config.grid;
  std::vector<std::vector<double>> vals(grid.size());
  const std::size_t per_sweep = static_cast<std::size_t>(result.config.trials) * result.methods.size() *
                                result.metrics.size();
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const ResultRow& r = result.rows[i];
    if (r.method == method && r.metric == metric && std::isfinite(r.value)) vals[i / per_sweep].push_back(r.value);
  }
  std::vector<SummaryPoint> out;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    SummaryPoint p;
    p.sweep_value = grid[s];
    p.count = vals[s].size();
    if (p.count == 0) {
      p.mean = p.std_error = kNaN;
    } else {
      p.mean = parallel::pairwise_sum(vals[s]) / static_cast<double>(p.count);
      double ss = 0.0;
      for (double v : vals[s]) ss += (v - p.mean) * (v - p.mean);
      p.std_error = p.count > 1 ? std::sqrt(ss / static_cast<double>(p.count - 1) / static_cast<double>(p.count)) : 0.0;
    }
    out.push_back(p);
  }
  return out;
}

void write_outputs(const ExperimentResult& result, const std::string& dir, bool with_svg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / "results.csv");
    if (!f) throw ConfigError("cannot write " + (fs::path(dir) / "results.csv").string());
    write_results_csv(f, result);
  }
  {
    std::ofstream f(fs::path(dir) / "manifest.json");
    if (!f) throw ConfigError("cannot write manifest.json in " + dir);
    f << result.manifest_json << '\n';
  }
  if (!with_svg) return;

  const auto& cfg = result.config;
  const bool fraction = cfg.sweep == SweepVariable::LabeledFraction;
  const bool noisy = cfg.ensemble == EnsembleKind::NoisyLabel && !fraction;
  const std::string metric = fraction && cfg.ensemble != EnsembleKind::PartialLinearOne &&
                                     cfg.ensemble != EnsembleKind::PartialLinearTwo
                                 ? "accuracy"
                                 : "rmse";
  svg::Plot plot;
  plot.title = cfg.name;
  plot.x_label = noisy ? "empirical P[Z = 1]" : std::string(to_string(cfg.sweep));
  plot.y_label = metric == "rmse" ? "RMSE ||f^ - f*||_2" : "test accuracy";
  std::vector<double> xs = cfg.grid;
  if (noisy) {
    const auto pz = summarize(result, result.methods.front(), "p_z1");
    for (std::size_t s = 0; s < xs.size(); ++s) xs[s] = pz[s].mean;
  }
  for (std::size_t m = 0; m < result.methods.size(); ++m) {
    svg::Series s;
    s.label = result.methods[m];
    s.color = svg::palette(m);
    s.x = xs;
    for (const auto& p : summarize(result, result.methods[m], metric)) {
      s.y.push_back(p.mean);
      s.err.push_back(p.std_error);
    }
    plot.series.push_back(std::move(s));
  }
  if (std::isfinite(result.overlay_constant)) {
    const auto doc = json::parse(result.manifest_json);
    svg::Series s;
    s.label = "theory overlay";
    s.color = "#555555";
    s.dashed = true;
    s.x = xs;
    s.y = doc.at("overlay").at("curve").get<std::vector<double>>();
    plot.series.push_back(std::move(s));
    plot.notes.push_back("overlay constant C = " + csv::format_double(std::round(result.overlay_constant * 1e4) / 1e4));
  }
  plot.notes.push_back(std::to_string(cfg.trials) + " trials per point; bars are +/- 1 trial SE");
  std::ofstream f(fs::path(dir) / "figure.svg");
  if (!f) throw ConfigError("cannot write figure.svg in " + dir);
  f << svg::render(plot);
}

TheoryRun run_theory(const Config& c) {
  TheoryRun run;
  const std::string cls_name = c.get_string("theory.class", "identity");
  if (cls_name != "identity") throw ConfigError("theory.class: only \"identity\" is supported");
  run.d = c.get_int("theory.d", 5);
  if (run.d < 1) throw ConfigError("theory.d must be positive");
  const auto ns = c.get_doubles("theory.n", {250, 1000, 4000});
  const auto draws = c.get_int("theory.mc_draws", 2000);
  if (draws < 2) throw ConfigError("theory.mc_draws must be at least 2");
  const auto seed = static_cast<std::uint64_t>(c.get_int("theory.base_seed", 1));
  const double B = c.get_double("theory.B", 1.0);
  const LinearClass cls = identity_linear_class(run.d);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] >= 1) || std::floor(ns[i]) != ns[i]) throw ConfigError("theory.n entries must be positive integers");
    const auto n = static_cast<std::size_t>(ns[i]);
    Rng rng(derive_seed(seed, {i}));
    const CriticalRadius cr = critical_radius(cls, n, static_cast<std::size_t>(draws), rng, B);
    run.fixed_points.push_back({n, cr.radius, cr.radius * std::sqrt(static_cast<double>(n) / static_cast<double>(run.d))});
    for (int j = -8; j <= 8; ++j) {
      const ComplexityEstimate e = complexity_at(cr.unit, cr.radius * std::exp2(j / 4.0));
      run.curve.push_back({n, e.t, e.value, e.std_error});
    }
  }
  const bool bounds = c.has("bounds.sigma") || c.has("bounds.delta") || c.has("bounds.defect");
  if (bounds && !run.fixed_points.empty()) {
    TheoryInputs in;
    in.sigma = c.get_double("bounds.sigma", 1.0);
    in.delta = c.get_double("bounds.delta", 0.05);
    in.L = c.get_double("bounds.L", 1.0);
    in.gamma = c.get_double("bounds.gamma", 1.0);
    in.B = B;
    const double defect = c.get_double("bounds.defect", 0.0);
    const auto nl = c.get_int("bounds.n_labeled", 100);
    for (const auto& fp : run.fixed_points) {
      in.n = fp.n;
      in.n_L = static_cast<std::size_t>(nl);
      in.n_U = fp.n > in.n_L ? fp.n - in.n_L : 0;
      in.r_n = fp.radius;
      const std::string tag = "n=" + std::to_string(fp.n) + " ";
      run.bounds.push_back({tag + "r_n", fp.radius});
      try {
        run.bounds.push_back({tag + "tau_sqloss", tau_sqloss(in)});
        run.bounds.push_back({tag + "bound_thm1", bound_thm1(in, defect)});
      } catch (const InvalidArgument&) {
        run.bounds.push_back({tag + "tau_sqloss", kNaN});
      }
      try {
        run.bounds.push_back({tag + "tau_glm", tau_glm(in)});
        run.bounds.push_back({tag + "bound_thm2_slow", bound_thm2(in, Thm2Variant::Slow, defect)});
        run.bounds.push_back({tag + "bound_thm2_glm", bound_thm2(in, Thm2Variant::Glm, defect)});
      } catch (const InvalidArgument&) {
        run.bounds.push_back({tag + "tau_glm", kNaN});
      }
    }
  }
  c.require_all_used();
  return run;
}

void write_theory_curve_csv(std::ostream& out, const TheoryRun& run) {
  out << "n,t,R_n,std_error\n";
  for (const auto& p : run.curve)
    out << p.n << ',' << csv::format_double(p.t) << ',' << csv::format_double(p.value) << ','
        << csv::format_double(p.std_error) << '\n';
}

void write_fixed_points_csv(std::ostream& out, const TheoryRun& run) {
  out << "n,r_n,r_n_sqrt_n_over_d\n";
  for (const auto& p : run.fixed_points)
    out << p.n << ',' << csv::format_double(p.radius) << ',' << csv::format_double(p.scaled) << '\n';
}

}  // namespace past
