#include "past/metrics.hpp"

#include "past/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace past {

McEstimate l2_error_mc(const XFunction& f, const XFunction& truth, const XSampler& sample_x,
                       std::size_t probe_draws, Rng& rng, parallel::Backend backend) {
  if (probe_draws < 2) throw InvalidArgument("l2_error_mc: need at least 2 probe draws");
  std::vector<Vector> xs(probe_draws);
  for (auto& x : xs) x = sample_x(rng);
  const std::vector<double> sq = parallel::map_indices(
      probe_draws,
      [&](std::size_t i) {
        const double d = f(xs[i]) - truth(xs[i]);
        return d * d;
      },
      backend);
  const double m = static_cast<double>(probe_draws);
  const double mean = parallel::pairwise_sum(sq) / m;
  std::vector<double> dev(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) dev[i] = (sq[i] - mean) * (sq[i] - mean);
  const double var = parallel::pairwise_sum(dev) / (m - 1.0);
  McEstimate out;
  out.value = std::sqrt(mean);
  // d sqrt(u) = du / (2 sqrt(u))
  out.std_error = mean > 0.0 ? std::sqrt(var / m) / (2.0 * out.value) : 0.0;
  return out;
}

McEstimate l2_error_mc(const XFunction& f, const XFunction& truth, const XSampler& sample_x,
                       std::size_t probe_draws, Rng& rng) {
  return l2_error_mc(f, truth, sample_x, probe_draws, rng, parallel::default_backend());
}

double empirical_norm(std::span<const double> diffs) {
  if (diffs.empty()) throw InvalidArgument("empirical_norm: no rows");
  std::vector<double> sq(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) sq[i] = diffs[i] * diffs[i];
  return std::sqrt(parallel::pairwise_sum(sq) / static_cast<double>(sq.size()));
}

double smoothed_predict(const SmoothedPredictor& sp, const Vector& x, Rng& rng) {
  if (!sp.base || !sp.law) throw InvalidArgument("smoothed_predict: missing predictor or law");
  const WQuadrature q = sp.law->w_given_x(x, sp.mc_draws, rng);
  std::vector<double> terms(q.points.size());
  for (std::size_t k = 0; k < q.points.size(); ++k)
    terms[k] = q.weights[k] * labelize_mean(sp.base->predict(x, q.points[k]), sp.labelization);
  return parallel::pairwise_sum(terms);
}

double smoothed_predict_row(const SmoothedPredictor& sp, const Vector& x, std::uint64_t row) {
  Rng rng(derive_seed(sp.seed, {row}));
  return smoothed_predict(sp, x, rng);
}

Predictor smoothed_by_regression(const AuxiliaryPredictor& g_tilde, const HybridDataset& data,
                                 const FitterSpec& fitter, Rng& rng) {
  const Matrix x = data.x_matrix();
  Vector t(x.rows());
  Index r = 0;
  for (const auto& l : data.labeled()) t(r++) = g_tilde.predict(l.x, l.w);
  for (const auto& u : data.unlabeled()) t(r++) = g_tilde.predict(u.x, u.w);
  return fit_predictor(fitter, x, t, rng);
}

double smoothed_defect(const SmoothedPredictor& sp, const XFunction& truth, const HybridDataset& data,
                       parallel::Backend backend) {
  const auto& unl = data.unlabeled();
  if (unl.empty()) throw InvalidArgument("smoothed_defect: no unlabeled rows");
  const std::vector<double> d = parallel::map_indices(
      unl.size(),
      [&](std::size_t i) { return smoothed_predict_row(sp, unl[i].x, i) - truth(unl[i].x); }, backend);
  return empirical_norm(d);
}

double smoothed_defect(const SmoothedPredictor& sp, const XFunction& truth, const HybridDataset& data) {
  return smoothed_defect(sp, truth, data, parallel::default_backend());
}

double auxiliary_defect(const AuxiliaryPredictor& g_tilde, const EnsembleSpec& spec, const HybridDataset& data) {
  return empirical_norm(std::span<const UnlabeledPair>(data.unlabeled()), [&](const UnlabeledPair& u) {
    return g_tilde.predict(u.x, u.w) - spec.g_star(u.x, u.w);
  });
}

ClassificationReport classification_metrics(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("classification_metrics: length mismatch");
  if (scores.empty()) throw InvalidArgument("classification_metrics: no scores");
  ClassificationReport rep;
  std::size_t pos = 0, correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) throw InvalidArgument("classification_metrics: labels must be 0 or 1");
    pos += labels[i] == 1.0;
    correct += ((scores[i] >= 0.5) ? 1.0 : 0.0) == labels[i];
  }
  const std::size_t neg = labels.size() - pos;
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const double inf = std::numeric_limits<double>::infinity();
  rep.roc.push_back({inf, 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (labels[order[k]] == 1.0 ? tp : fp) += 1;
      ++k;
    }
    rep.roc.push_back({s, neg ? static_cast<double>(fp) / static_cast<double>(neg) : 0.0,
                       pos ? static_cast<double>(tp) / static_cast<double>(pos) : 0.0});
  }
  if (pos == 0 || neg == 0) {
    rep.auc = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  double auc = 0.0;
  for (std::size_t k = 1; k < rep.roc.size(); ++k)
    auc += (rep.roc[k].fpr - rep.roc[k - 1].fpr) * 0.5 * (rep.roc[k].tpr + rep.roc[k - 1].tpr);
  rep.auc = auc;
  return rep;
}

double r_squared(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size() || targets.empty())
    throw InvalidArgument("r_squared: lengths must match and be non-zero");
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  if (ss_tot == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - ss_res / ss_tot;
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc) {
  out << "fpr,tpr\n";
  for (const RocPoint& p : roc) out << csv::format_double(p.fpr) << ',' << csv::format_double(p.tpr) << '\n';
}

}  // namespace past
