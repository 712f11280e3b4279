#include "past/past.hpp"

#include <algorithm>
#include <cmath>

namespace past {

namespace {

enum StageStream : std::uint64_t { kAuxStream = 0, kLabelStream = 1, kFinalStream = 2 };

template <class Fn>
auto run_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const NumericalError& e) {
    throw StageError(stage, e.what());
  } catch (const InvalidArgument& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

std::string_view to_string(LabelingPolicy p) noexcept {
  switch (p) {
    case LabelingPolicy::Raw: return "raw";
    case LabelingPolicy::Hard: return "hard";
    case LabelingPolicy::StochasticSoft: return "soft";
  }
  return "raw";
}

std::string_view to_string(ImputationPolicy p) noexcept {
  return p == ImputationPolicy::UnlabeledOnly ? "unlabeled_only" : "all_pseudo";
}

LabelingPolicy labeling_from_name(std::string_view name) {
  if (name == "raw") return LabelingPolicy::Raw;
  if (name == "hard") return LabelingPolicy::Hard;
  if (name == "soft") return LabelingPolicy::StochasticSoft;
  throw ConfigError("unknown labeling policy '" + std::string(name) + "' (expected raw, hard or soft)");
}

ImputationPolicy imputation_from_name(std::string_view name) {
  if (name == "unlabeled_only") return ImputationPolicy::UnlabeledOnly;
  if (name == "all_pseudo") return ImputationPolicy::AllPseudo;
  throw ConfigError("unknown imputation policy '" + std::string(name) + "' (expected unlabeled_only or all_pseudo)");
}

void validate(const PastConfig& config) {
  const bool unbounded = !std::isfinite(config.loss.response.lo) || !std::isfinite(config.loss.response.hi);
  if (config.loss.kind == LossKind::Squared && unbounded && config.labeling != LabelingPolicy::Raw)
    throw ConfigError("labeling must be raw for squared loss on unbounded responses");
}

double labelize(double value, LabelingPolicy policy, Rng& rng) {
  switch (policy) {
    case LabelingPolicy::Raw: return value;
    case LabelingPolicy::Hard: return std::clamp(value, 0.0, 1.0) >= 0.5 ? 1.0 : 0.0;
    case LabelingPolicy::StochasticSoft: return bernoulli(rng, std::clamp(value, 0.0, 1.0)) ? 1.0 : 0.0;
  }
  return value;
}

double labelize_mean(double value, LabelingPolicy policy) {
  switch (policy) {
    case LabelingPolicy::Raw: return value;
    case LabelingPolicy::Hard: return std::clamp(value, 0.0, 1.0) >= 0.5 ? 1.0 : 0.0;
    case LabelingPolicy::StochasticSoft: return std::clamp(value, 0.0, 1.0);
  }
  return value;
}

AuxiliaryPredictor fit_auxiliary(const PastConfig& config, const HybridDataset& data, Rng& rng) {
  if (config.oracle_gstar) return AuxiliaryPredictor::analytic(*config.oracle_gstar, "oracle");
  return run_stage("auxiliary", [&] {
    const auto& lab = data.labeled();
    Matrix xw(static_cast<Index>(lab.size()), data.dim_x() + data.dim_w());
    Vector y(static_cast<Index>(lab.size()));
    for (std::size_t i = 0; i < lab.size(); ++i) {
      xw.row(static_cast<Index>(i)) << lab[i].x.transpose(), lab[i].w.transpose();
      y(static_cast<Index>(i)) = lab[i].y;
    }
    Predictor p = fit_predictor(config.auxiliary, xw, y, rng, data.dim_w());
    return AuxiliaryPredictor(std::move(p), data.dim_x(), data.dim_w());
  });
}

PseudoLabeledDataset generate_pseudo_responses(const AuxiliaryPredictor& g_tilde, const HybridDataset& data,
                                               LabelingPolicy labeling, ImputationPolicy imputation, Rng& rng,
                                               LabelingCounts* counts) {
  const auto& lab = data.labeled();
  const auto& unl = data.unlabeled();
  const Index n = static_cast<Index>(data.n());
  PseudoLabeledDataset out;
  out.x.resize(n, data.dim_x());
  out.y.resize(n);
  out.provenance.resize(static_cast<std::size_t>(n));
  LabelingCounts c;

  const auto pseudo = [&](const Vector& x, const Vector& w) {
    const double v = g_tilde.predict(x, w);
    if (labeling != LabelingPolicy::Raw && (v < 0.0 || v > 1.0)) ++c.clamped;
    const double label = labelize(v, labeling, rng);
    ++c.pseudo_labels;
    if (labeling != LabelingPolicy::Raw && label == 1.0) ++c.pseudo_ones;
    return label;
  };

  Index row = 0;
  for (const LabeledTriple& t : lab) {
    out.x.row(row) = t.x.transpose();
    if (imputation == ImputationPolicy::UnlabeledOnly) {
      out.y(row) = t.y;
      out.provenance[static_cast<std::size_t>(row)] = Provenance::TrueLabel;
      ++c.true_labels;
    } else {
      out.y(row) = pseudo(t.x, t.w);
      out.provenance[static_cast<std::size_t>(row)] = Provenance::PseudoLabel;
    }
    ++row;
  }
  for (const UnlabeledPair& u : unl) {
    out.x.row(row) = u.x.transpose();
    out.y(row) = pseudo(u.x, u.w);
    out.provenance[static_cast<std::size_t>(row)] = Provenance::PseudoLabel;
    ++row;
  }
  if (counts) *counts = c;
  return out;
}

Predictor fit_final(const PastConfig& config, const PseudoLabeledDataset& pseudo, Rng& rng) {
  if (pseudo.size() == 0) throw StageError("final", "empty pseudo-labeled dataset");
  return run_stage("final", [&] { return fit_predictor(config.final_fitter, pseudo.x, pseudo.y, rng); });
}

PastFit past_fit(const PastConfig& config, const HybridDataset& data, Rng& rng) {
  validate(config);
  const std::uint64_t seed = rng();
  Rng aux_rng(derive_seed(seed, {kAuxStream}));
  Rng label_rng(derive_seed(seed, {kLabelStream}));
  Rng final_rng(derive_seed(seed, {kFinalStream}));

  AuxiliaryPredictor g = fit_auxiliary(config, data, aux_rng);
  LabelingCounts counts;
  const PseudoLabeledDataset pseudo =
      generate_pseudo_responses(g, data, config.labeling, config.imputation, label_rng, &counts);
  Predictor f = fit_final(config, pseudo, final_rng);

  PastProvenance prov;
  prov.stage_seed = seed;
  prov.auxiliary_kind = g.is_analytic() ? g.label() : g.fitted().kind_name();
  prov.final_kind = f.kind_name();
  prov.labeling = config.labeling;
  prov.imputation = config.imputation;
  prov.counts = counts;
  return PastFit{std::move(f), std::move(g), prov};
}

Predictor naive_fit(const PastConfig& config, const HybridDataset& data, Rng& rng) {
  const std::uint64_t seed = rng();
  Rng final_rng(derive_seed(seed, {kFinalStream}));
  PseudoLabeledDataset d;
  d.x = x_matrix(data.labeled());
  d.y = y_vector(data.labeled());
  d.provenance.assign(d.size(), Provenance::TrueLabel);
  return fit_final(config, d, final_rng);
}

Predictor oracle_fit(const PastConfig& config, std::span<const LabeledTriple> fully_labeled, Rng& rng) {
  if (fully_labeled.empty()) throw InvalidArgument("oracle_fit: empty dataset");
  const std::uint64_t seed = rng();
  Rng final_rng(derive_seed(seed, {kFinalStream}));
  PseudoLabeledDataset d;
  d.x = x_matrix(fully_labeled);
  d.y = y_vector(fully_labeled);
  d.provenance.assign(d.size(), Provenance::TrueLabel);
  return fit_final(config, d, final_rng);
}

}  // namespace past
