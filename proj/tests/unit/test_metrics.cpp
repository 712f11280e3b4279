#include "past/metrics.hpp"

#include "doctest.h"

#include <cmath>
#include <sstream>

using namespace past;

namespace {

const XSampler kUnit1 = [](Rng& r) { return Vector::Constant(1, uniform01(r)); };

EnsembleSpec hardsoft(double nu) {
  EnsembleParams p;
  p.nu = nu;
  Rng coef(2);
  return EnsembleSpec(EnsembleKind::HardSoft, p, coef);
}

}  // namespace

TEST_CASE("l2_error_mc closed forms") {
  Rng rng(1);
  const XFunction zero = [](const Vector&) { return 0.0; };
  const XFunction id = [](const Vector& x) { return x(0); };
  CHECK(l2_error_mc(id, id, kUnit1, 1000, rng).value == 0.0);
  const XFunction off = [](const Vector& x) { return x(0) - 0.7; };
  const auto c = l2_error_mc(off, id, kUnit1, 1000, rng);
  CHECK(std::abs(c.value - 0.7) <= 3 * c.std_error + 1e-12);
  const auto e = l2_error_mc(id, zero, kUnit1, 20000, rng);
  CHECK(std::abs(e.value - 1 / std::sqrt(3.0)) <= 3 * e.std_error);
}

TEST_CASE("l2_error_mc SE shrinks like 1/sqrt(draws)") {
  const XFunction sq = [](const Vector& x) { return x(0) * x(0); };
  const XFunction zero = [](const Vector&) { return 0.0; };
  // average over replicates to tame the noise of a single SE estimate
  double s1 = 0, s4 = 0;
  for (int k = 0; k < 20; ++k) {
    Rng a(derive_seed(7, {static_cast<std::uint64_t>(k)})), b(derive_seed(8, {static_cast<std::uint64_t>(k)}));
    s1 += l2_error_mc(sq, zero, kUnit1, 1000, a).std_error;
    s4 += l2_error_mc(sq, zero, kUnit1, 4000, b).std_error;
  }
  CHECK(s1 / s4 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("serial and OpenMP l2_error_mc are bit-identical") {
  const XFunction f = [](const Vector& x) { return std::sin(5 * x(0)); };
  const XFunction z = [](const Vector&) { return 0.1; };
  Rng a(3), b(3);
  const auto s = l2_error_mc(f, z, kUnit1, 5000, a, parallel::Backend::Serial);
  parallel::ThreadCountScope threads(4);
  const auto o = l2_error_mc(f, z, kUnit1, 5000, b, parallel::Backend::OpenMP);
  CHECK(s.value == o.value);
  CHECK(s.std_error == o.std_error);
}

TEST_CASE("empirical norms") {
  const std::vector<double> zero{0, 0, 0};
  CHECK(empirical_norm(zero) == 0.0);
  const std::vector<double> c{-2, -2, -2, -2};
  CHECK(empirical_norm(c) == doctest::Approx(2.0));
  const std::vector<double> d{3, 4};
  CHECK(empirical_norm(d) == doctest::Approx(std::sqrt(12.5)));
  const std::vector<int> rows{1, 2, 3};
  CHECK(empirical_norm(std::span<const int>(rows), [](int r) { return r == 2 ? 3.0 : 0.0; }) ==
        doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("smoothed predictor examples") {
  Rng rng(4);
  EnsembleParams p;
  Rng coef(1);
  const EnsembleSpec one(EnsembleKind::PartialLinearOne, p, coef);
  // w-free g~
  const auto wfree = AuxiliaryPredictor::analytic([](const Vector& x, const Vector&) { return x.sum(); });
  SmoothedPredictor sp{&wfree, &one, LabelingPolicy::Raw, 200, 1};
  const Vector x = one.sample_x(rng);
  CHECK(smoothed_predict(sp, x, rng) == doctest::Approx(x.sum()));

  // linear in w with E[W | X] = 0: the w-term drops exactly (antithetic law)
  const auto lin = AuxiliaryPredictor::analytic([](const Vector& x, const Vector& w) { return x(0) + 3.0 * w(0); });
  SmoothedPredictor sl{&lin, &one, LabelingPolicy::Raw, 200, 1};
  CHECK(smoothed_predict(sl, x, rng) == doctest::Approx(x(0)).epsilon(1e-12));
  CHECK(smoothed_predict_row(sl, x, 5) == smoothed_predict_row(sl, x, 5));

  // hard labelization of the ideal proxy on hard_soft: h_W 1[h_Z >= 1/2]
  const auto hs = hardsoft(2.0);
  const auto g = AuxiliaryPredictor::analytic([&](const Vector& a, const Vector& w) { return hs.g_star(a, w); });
  SmoothedPredictor sh{&g, &hs, LabelingPolicy::Hard, 100, 1};
  SmoothedPredictor ss{&g, &hs, LabelingPolicy::StochasticSoft, 100, 1};
  for (int i = 0; i < 10; ++i) {
    const Vector xi = hs.sample_x(rng);
    CHECK(smoothed_predict(sh, xi, rng) == doctest::Approx(hs.h_W(xi) * (hs.h_Z(xi) >= 0.5 ? 1.0 : 0.0)));
    CHECK(smoothed_predict(ss, xi, rng) == doctest::Approx(hs.f_star(xi)));
  }
}

TEST_CASE("smoothed defects") {
  EnsembleParams p;
  p.lambda = 0.6;
  Rng coef(1);
  const EnsembleSpec one(EnsembleKind::PartialLinearOne, p, coef);
  Rng rng(5);
  const auto data = split_dataset_count(one.generate(300, rng), 50, rng);
  const XFunction fstar = [&](const Vector& x) { return one.f_star(x); };
  const auto gstar = AuxiliaryPredictor::analytic([&](const Vector& x, const Vector& w) { return one.g_star(x, w); });
  SmoothedPredictor sp{&gstar, &one, LabelingPolicy::Raw, 200, 9};
  CHECK(smoothed_defect(sp, fstar, data) < 1e-12);
  CHECK(auxiliary_defect(gstar, one, data) == 0.0);

  // Jensen on a perturbed g~
  const auto gt = AuxiliaryPredictor::analytic(
      [&](const Vector& x, const Vector& w) { return one.g_star(x, w) + 0.3 * std::sin(7 * w(0)) + 0.2 * x(1); });
  SmoothedPredictor spt{&gt, &one, LabelingPolicy::Raw, 400, 9};
  const double ds = smoothed_defect(spt, fstar, data);
  CHECK(ds <= auxiliary_defect(gt, one, data));
  CHECK(ds > 0.0);
  parallel::ThreadCountScope threads(4);
  CHECK(smoothed_defect(spt, fstar, data, parallel::Backend::OpenMP) ==
        smoothed_defect(spt, fstar, data, parallel::Backend::Serial));

  // oracle-hard defect equals the norm of the mis-calibration bias
  const auto hs = hardsoft(1.0);
  const auto hdata = split_dataset_count(hs.generate(400, rng), 100, rng);
  const auto g = AuxiliaryPredictor::analytic([&](const Vector& a, const Vector& w) { return hs.g_star(a, w); });
  SmoothedPredictor sh{&g, &hs, LabelingPolicy::Hard, 50, 3};
  const XFunction hf = [&](const Vector& x) { return hs.f_star(x); };
  double acc = 0;
  for (const auto& u : hdata.unlabeled()) acc += std::pow(misscalibration_bias(hs, u.x), 2);
  CHECK(smoothed_defect(sh, hf, hdata) == doctest::Approx(std::sqrt(acc / 300.0)).epsilon(1e-12));
}

TEST_CASE("regression fallback for f~") {
  EnsembleParams p;
  p.lambda = 0.5;
  Rng coef(1);
  const EnsembleSpec one(EnsembleKind::PartialLinearOne, p, coef);
  Rng rng(6);
  const auto data = split_dataset_count(one.generate(2000, rng), 100, rng);
  const auto g = AuxiliaryPredictor::analytic([](const Vector& x, const Vector& w) { return 2 * x(0) + w(0); });
  const auto f = smoothed_by_regression(g, data, LinearFitter{FeatureMap::polynomial(5, 1), 0.0}, rng);
  Vector x = Vector::Constant(5, 0.5);
  CHECK(f.predict(x) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("classification metrics") {
  const std::vector<double> y{0, 0, 1, 1};
  const std::vector<double> sep{0.1, 0.2, 0.8, 0.9};
  auto r = classification_metrics(sep, y);
  CHECK(r.auc == doctest::Approx(1.0));
  CHECK(r.accuracy == 1.0);
  CHECK(r.roc.front().fpr == 0.0);
  CHECK(r.roc.front().tpr == 0.0);
  CHECK(r.roc.back().fpr == 1.0);
  CHECK(r.roc.back().tpr == 1.0);

  const std::vector<double> flat{0.3, 0.3, 0.3, 0.3};
  r = classification_metrics(flat, y);
  CHECK(r.auc == doctest::Approx(0.5));
  CHECK(r.roc.size() == 2);

  const std::vector<double> flipped{1, 1, 0, 0};
  CHECK(classification_metrics(flipped, y).auc == doctest::Approx(0.0));

  const std::vector<double> ones{1, 1, 1, 1};
  CHECK(std::isnan(classification_metrics(sep, ones).auc));
  const std::vector<double> bad{0, 2, 1, 1};
  CHECK_THROWS_AS(classification_metrics(sep, bad), InvalidArgument);

  // invariance under a strictly increasing transform; brute-force pair oracle
  Rng rng(7);
  std::vector<double> s(200), l(200), t(200);
  for (int i = 0; i < 200; ++i) {
    l[i] = uniform01(rng) < 0.4;
    s[i] = std::round((l[i] * 0.3 + uniform01(rng)) * 20) / 20;  // ties on purpose
    t[i] = std::exp(3 * s[i]) - 7;
  }
  const double a = classification_metrics(s, l).auc;
  CHECK(classification_metrics(t, l).auc == doctest::Approx(a).epsilon(1e-12));
  double wins = 0, pairs = 0;
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 200; ++j)
      if (l[i] == 1 && l[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  CHECK(a == doctest::Approx(wins / pairs).epsilon(1e-12));

  std::stringstream out;
  write_roc_csv(out, classification_metrics(sep, y).roc);
  CHECK(out.str().rfind("fpr,tpr\n0,0\n", 0) == 0);
}

TEST_CASE("r squared") {
  const std::vector<double> t{1, 2, 3};
  CHECK(r_squared(t, t) == 1.0);
  const std::vector<double> m{2, 2, 2};
  CHECK(r_squared(m, t) == doctest::Approx(0.0));
  const std::vector<double> p{1, 2, 4};
  CHECK(r_squared(p, t) == doctest::Approx(0.5));
  CHECK(std::isnan(r_squared(t, m)));
}
