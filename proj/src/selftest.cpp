#include "past/selftest.hpp"

#include "past/config.hpp"
#include "past/csv.hpp"
#include "past/datamodel.hpp"
#include "past/ensembles.hpp"
#include "past/experiments.hpp"
#include "past/forest.hpp"
#include "past/glm.hpp"
#include "past/linear.hpp"
#include "past/metrics.hpp"
#include "past/past.hpp"
#include "past/theory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace past {

bool SelfTestReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

void SelfTestReport::print(std::ostream& out) const {
  for (const auto& c : checks) out << (c.passed ? "ok   " : "FAIL ") << c.name << "  " << c.detail << '\n';
  const auto failed = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; });
  out << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size() << " checks passed\n";
}

namespace {

// Prediction and response grids strictly inside the valid ranges.
std::pair<double, double> grid_point(const LossSpec& spec, int i, int points) {
  const double u = (i + 0.5) / points;
  double yhat = 0.0, y = 0.0;
  switch (spec.kind) {
    case LossKind::Squared:
      yhat = -3.0 + 6.0 * u;
      y = std::sin(7.0 * i);
      break;
    case LossKind::LogisticGLM:
      yhat = -8.0 + 16.0 * u;
      y = (i % 3) / 2.0;
      break;
    case LossKind::PoissonGLM:
      yhat = -5.0 + 10.0 * u;
      y = static_cast<double>(i % 7);
      break;
    case LossKind::BinaryKL:
      yhat = 0.01 + 0.98 * u;
      y = (i % 5) / 4.0;
      break;
  }
  return {yhat, y};
}

}  // namespace

double max_gradient_error(const LossSpec& spec, int points) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const auto [yhat, y] = grid_point(spec, i, points);
    const double h = 1e-5 * std::max(1.0, std::abs(yhat)) * (spec.kind == LossKind::BinaryKL ? 0.1 : 1.0);
    const double fd = (loss_value(spec, yhat + h, y) - loss_value(spec, yhat - h, y)) / (2.0 * h);
    const double g = loss_grad_first(spec, yhat, y);
    worst = std::max(worst, std::abs(fd - g) / std::max(std::abs(g), 1.0));
  }
  return worst;
}

double max_link_inverse_error(const LossSpec& spec, int points) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double u = (i + 0.5) / points;
    double m = 0.0;
    switch (spec.kind) {
      case LossKind::Squared: m = -5.0 + 10.0 * u; break;
      case LossKind::LogisticGLM:
      case LossKind::BinaryKL: m = 0.001 + 0.998 * u; break;
      case LossKind::PoissonGLM: m = 0.01 + 50.0 * u; break;
    }
    worst = std::max(worst, std::abs(loss_mean(spec, link(spec, m)) - m));
  }
  return worst;
}

namespace {

std::string fmt(double v) { return csv::format_double(v); }

void add(SelfTestReport& r, std::string name, bool ok, std::string detail) {
  r.checks.push_back({std::move(name), ok, std::move(detail)});
}

template <class Fn>
void guarded(SelfTestReport& r, const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    add(r, name, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

SelfTestReport self_test() {
  SelfTestReport r;

  guarded(r, "losses: gradients", [&] {
    const LossSpec specs[] = {LossSpec::squared(), LossSpec::squared(10.0, true), LossSpec::logistic(),
                              LossSpec::poisson(), LossSpec::binary_kl(), LossSpec::binary_kl(kProbabilityClamp, true)};
    double worst = 0.0;
    for (const auto& s : specs) worst = std::max(worst, max_gradient_error(s));
    add(r, "losses: gradients", worst <= 1e-6, "max relative error " + fmt(worst));
  });

  guarded(r, "losses: link inverse", [&] {
    double worst = 0.0;
    for (const auto& s : {LossSpec::squared(), LossSpec::logistic(), LossSpec::poisson(), LossSpec::binary_kl()})
      worst = std::max(worst, max_link_inverse_error(s));
    add(r, "losses: link inverse", worst <= 1e-10, "max error " + fmt(worst));
  });

  guarded(r, "datamodel: split determinism", [&] {
    std::vector<LabeledTriple> rows;
    for (int i = 0; i < 50; ++i) rows.push_back({Vector::Constant(1, i), Vector::Zero(1), static_cast<double>(i)});
    Rng a(7), b(7);
    const auto d1 = split_dataset(rows, 0.3, a), d2 = split_dataset(rows, 0.3, b);
    bool same = d1.n_labeled() == 15 && d2.n_labeled() == 15;
    for (std::size_t i = 0; same && i < d1.n_labeled(); ++i) same = d1.labeled()[i].y == d2.labeled()[i].y;
    add(r, "datamodel: split determinism", same, "n_L = " + std::to_string(d1.n_labeled()));
  });

  guarded(r, "estimators: normal equations", [&] {
    Rng rng(11);
    Matrix x(200, 3);
    Vector y(200);
    for (Index i = 0; i < 200; ++i) {
      for (Index j = 0; j < 3; ++j) x(i, j) = uniform01(rng);
      y(i) = x(i, 0) - 2 * x(i, 1) * x(i, 2) + standard_normal(rng);
    }
    const FeatureMap map = FeatureMap::polynomial(3, 2);
    const LinearModel m = fit_linear(map, x, y, 0.0);
    const Matrix f = map.expand_rows(x);
    const Vector resid = y - f * m.coefficients;
    const double rel = (f.transpose() * resid).norm() / (f.norm() * y.norm());
    add(r, "estimators: normal equations", rel <= 1e-8, "relative |F'r| " + fmt(rel));
  });

  guarded(r, "estimators: glm monotone", [&] {
    Rng rng(12);
    Matrix x(300, 2);
    Vector y(300);
    for (Index i = 0; i < 300; ++i) {
      x(i, 0) = standard_normal(rng);
      x(i, 1) = standard_normal(rng);
      y(i) = bernoulli(rng, sigmoid(x(i, 0) - x(i, 1))) ? 1.0 : 0.0;
    }
    fit_glm(FeatureMap::polynomial(2, 1), x, y, LossSpec::logistic(), 1e-3);
    const auto& tr = glm_last_trace();
    bool mono = true;
    for (std::size_t i = 1; i < tr.size(); ++i) mono = mono && tr[i] <= tr[i - 1];
    add(r, "estimators: glm monotone", mono, std::to_string(tr.size()) + " accepted steps");
  });

  guarded(r, "estimators: forest serial == openmp", [&] {
    Rng data(13);
    Matrix x(150, 4);
    Vector y(150);
    for (Index i = 0; i < 150; ++i) {
      for (Index j = 0; j < 4; ++j) x(i, j) = uniform01(data);
      y(i) = std::sin(6 * x(i, 0)) + x(i, 1);
    }
    ForestParams p;
    p.n_trees = 20;
    Rng a(5), b(5);
    const auto fa = fit_random_forest(x, y, ForestTask::Regression, p, a, parallel::Backend::Serial);
    const auto fb = fit_random_forest(x, y, ForestTask::Regression, p, b, parallel::Backend::OpenMP);
    const Vector pa = fa.predict_batch(x, parallel::Backend::Serial), pb = fb.predict_batch(x, parallel::Backend::OpenMP);
    add(r, "estimators: forest serial == openmp", pa == pb, "150 predictions compared bitwise");
  });

  guarded(r, "ensembles: conditional mean", [&] {
    Rng coef(21);
    bool ok = true;
    std::string worst;
    for (EnsembleKind k : {EnsembleKind::PartialLinearOne, EnsembleKind::PartialLinearTwo, EnsembleKind::HardSoft,
                           EnsembleKind::NoisyLabel}) {
      EnsembleParams p;
      if (k == EnsembleKind::PartialLinearTwo) p.degree = 2;
      const EnsembleSpec spec(k, p, coef);
      Rng rng(22);
      for (int probe = 0; probe < 4; ++probe) {
        const Vector x = spec.sample_x(rng);
        const int m = 20000;
        double s = 0.0, ss = 0.0;
        for (int i = 0; i < m; ++i) {
          const double y = spec.sample_at(x, rng).y;
          s += y;
          ss += y * y;
        }
        const double mean = s / m, se = std::sqrt((ss / m - mean * mean) / m);
        const double z = std::abs(mean - spec.f_star(x)) / std::max(se, 1e-12);
        if (z > 4.0) {
          ok = false;
          worst = std::string(to_string(k)) + " z = " + fmt(z);
        }
      }
    }
    add(r, "ensembles: conditional mean", ok, ok ? "16 probes within 4 SE" : worst);
  });

  guarded(r, "ensembles: orthogonality", [&] {
    Rng coef(23);
    const EnsembleSpec spec(EnsembleKind::PartialLinearOne, EnsembleParams{}, coef);
    std::vector<XFunction> probes;
    for (int k = 0; k < 5; ++k) probes.push_back([k](const Vector& x) { return std::cos(k * x(0)) + x(1) * k; });
    Rng rng(24);
    const auto est = orthogonality_check(spec, probes, 20000, rng);
    double worst = 0.0;
    for (const auto& e : est) worst = std::max(worst, std::abs(e.value) / e.std_error);
    add(r, "ensembles: orthogonality", worst <= 4.0, "max |mean|/SE " + fmt(worst));
  });

  guarded(r, "theory: complexity homogeneity and rate", [&] {
    const LinearClass cls = identity_linear_class(5);
    Rng rng(31);
    const UnitComplexity u = rademacher_unit(cls, 400, 400, rng);
    const double r1 = complexity_at(u, 1.0).value, r2 = complexity_at(u, 2.0).value;
    const double target = std::sqrt(5.0 / 400.0);
    const bool ok = r2 == 2.0 * r1 && r1 <= target * 1.01 && r1 >= 0.85 * target;
    add(r, "theory: complexity homogeneity and rate", ok, "R(1) = " + fmt(r1) + ", sqrt(d/n) = " + fmt(target));
  });

  guarded(r, "theory: critical radius scaling", [&] {
    const LinearClass cls = identity_linear_class(5);
    Rng a(32), b(33);
    const double r1 = critical_radius(cls, 250, 400, a).radius;
    const double r4 = critical_radius(cls, 1000, 400, b).radius;
    add(r, "theory: critical radius scaling", std::abs(r4 / r1 - 0.5) <= 0.05, "r(4n)/r(n) = " + fmt(r4 / r1));
  });

  guarded(r, "metrics: AUC monotone invariance", [&] {
    Rng rng(41);
    std::vector<double> s, t, y;
    for (int i = 0; i < 300; ++i) {
      const double v = standard_normal(rng);
      s.push_back(v);
      t.push_back(std::exp(3 * v) + 1);
      y.push_back(bernoulli(rng, sigmoid(v)) ? 1.0 : 0.0);
    }
    const double a1 = classification_metrics(s, y).auc, a2 = classification_metrics(t, y).auc;
    add(r, "metrics: AUC monotone invariance", a1 == a2, "AUC " + fmt(a1));
  });

  guarded(r, "past: pipeline and Jensen defect", [&] {
    Rng coef(51);
    EnsembleParams p;
    p.lambda = 0.5;
    const EnsembleSpec spec(EnsembleKind::PartialLinearOne, p, coef);
    Rng rng(52);
    const auto full = spec.generate(400, rng);
    const HybridDataset data = split_dataset_count(full, 100, rng);
    PastConfig pc;
    pc.auxiliary = LinearFitter{FeatureMap::polynomial(5, 3), 0.0};
    pc.final_fitter = LinearFitter{FeatureMap::polynomial(5, 3), 0.0};
    const PastFit fit = past_fit(pc, data, rng);
    SmoothedPredictor sp{&fit.g_tilde, &spec, LabelingPolicy::Raw, 200, 53};
    const XFunction fstar = [&](const Vector& x) { return spec.f_star(x); };
    const double d_s = smoothed_defect(sp, fstar, data);
    const double d_a = auxiliary_defect(fit.g_tilde, spec, data);
    add(r, "past: pipeline and Jensen defect", d_s <= d_a * 1.05, "||f~-f*||_U = " + fmt(d_s) + ", ||g~-g*||_U = " + fmt(d_a));
  });

  guarded(r, "harness: byte-identical replay", [&] {
    const Config c = Config::parse(
        "[experiment]\nensemble = \"partial_linear_1\"\ngrid = [0.5]\ntrials = 2\nn = 200\nn_labeled = 80\n"
        "probe_draws = 500\nsmoother_draws = 20\nbase_seed = 9\n",
        "<selftest>");
    const ExperimentConfig e = experiment_from_config(c);
    std::ostringstream a, b;
    write_results_csv(a, run_experiment(e, 1));
    write_results_csv(b, run_experiment(e, 2));
    add(r, "harness: byte-identical replay", a.str() == b.str(), std::to_string(a.str().size()) + " bytes");
  });

  return r;
}

}  // namespace past
