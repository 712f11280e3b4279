#include "past/past.hpp"
#include "past/theory.hpp"

#include "doctest.h"

#include <cmath>

using namespace past;

namespace {

// E||N(0, I_d / n)|| = sqrt(2 / n) Gamma((d + 1) / 2) / Gamma(d / 2)
double chi_mean(double d, double n) { return std::sqrt(2.0 / n) * std::exp(std::lgamma((d + 1) / 2) - std::lgamma(d / 2)); }

TheoryInputs inputs(double sigma, double r, std::size_t n, double delta) {
  TheoryInputs in;
  in.sigma = sigma;
  in.r_n = r;
  in.n = n;
  in.delta = delta;
  return in;
}

}  // namespace

TEST_CASE("tau_sqloss matches the formula oracle") {
  const long double phi = std::log2(4.0L / 0.1L);
  const long double lg = std::log(4.0L * phi / 0.05L);
  const long double want = 20.0L * std::sqrt(2.0L * lg / 1000.0L) + 640.0L * lg / (0.1L * 1000.0L);
  const double got = tau_sqloss(inputs(1.0, 0.1, 1000, 0.05));
  CHECK(got == doctest::Approx(static_cast<double>(want)).epsilon(1e-12));
  CHECK(got == doctest::Approx(40.945).epsilon(1e-4));
  // sigma above the max thresholds switches the constants
  const double big = tau_sqloss(inputs(10.0, 0.1, 1000, 0.05));
  const long double phi10 = std::log2(40.0L / 0.1L), lg10 = std::log(4.0L * phi10 / 0.05L);
  CHECK(big == doctest::Approx(static_cast<double>(100.0L * std::sqrt(2.0L * lg10 / 1000.0L) + 800.0L * lg10 / 100.0L)));
  CHECK(tau_sqloss(inputs(1.0, 0.1, 4000, 0.05)) < got);
  CHECK(tau_sqloss(inputs(1.0, 0.1, 1000, 0.025)) > got);
  CHECK_THROWS_AS(tau_sqloss(inputs(1.0, 4.0, 1000, 0.05)), InvalidArgument);
}

TEST_CASE("tau_glm matches the formula oracle") {
  TheoryInputs in = inputs(1.0, 0.1, 10000, 0.05);
  const double phi = std::log2(40.0);
  CHECK(phi == doctest::Approx(5.322).epsilon(1e-3));
  CHECK(std::log(phi / 0.05) == doctest::Approx(4.668).epsilon(1e-3));
  const double want = 12.0 / 100.0 * std::sqrt(std::log(phi / 0.05));
  CHECK(tau_glm(in) == doctest::Approx(want).epsilon(1e-12));
  CHECK(tau_glm(in) == doctest::Approx(0.25926).epsilon(1e-4));
  in.n = 40000;
  CHECK(tau_glm(in) == doctest::Approx(want / 2).epsilon(1e-12));
  in.n = 10000;
  in.L = 4.0;
  CHECK(tau_glm(in) == doctest::Approx(2 * want).epsilon(1e-12));
}

TEST_CASE("bound arithmetic") {
  TheoryInputs in = inputs(1.0, 0.1, 1000, 0.05);
  CHECK(bound_thm1(in, 0.05, 0.02) == doctest::Approx(2.29).epsilon(1e-12));
  CHECK(bound_thm1(in, 0.0, 0.0) == doctest::Approx(21 * 0.1));
  CHECK(bound_thm1(in, 0.0) == doctest::Approx(2.1 + 2 * tau_sqloss(in)));

  CHECK(bound_thm2(in, Thm2Variant::Glm, 0.04, 0.05) == doctest::Approx(0.48).epsilon(1e-12));
  CHECK(bound_thm2(in, Thm2Variant::Glm, 0.0, 0.0) == doctest::Approx(0.3));
  TheoryInputs half = in;
  half.delta = in.delta / 2;
  CHECK(bound_thm2(in, Thm2Variant::Glm, 0.0) == doctest::Approx(0.3 + 2 * tau_glm(half)));
  CHECK(bound_thm2(in, Thm2Variant::Slow, 0.0) == doctest::Approx(0.3 + tau_glm(in)));
  const double s1 = bound_thm2(in, Thm2Variant::Slow, 0.01, 0.0) - 0.3;
  const double s4 = bound_thm2(in, Thm2Variant::Slow, 0.04, 0.0) - 0.3;
  CHECK(s4 == doctest::Approx(2 * s1));

  // monotone in the defect
  double prev = -1;
  for (double d = 0; d < 1; d += 0.1) {
    const double b = bound_thm1(in, d);
    CHECK(b > prev);
    prev = b;
  }
  prev = -1;
  for (double d = 0; d < 1; d += 0.1) {
    const double b = bound_thm2(in, Thm2Variant::Slow, d);
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("TheoryInputs validation") {
  TheoryInputs in = inputs(1.0, 0.1, 1000, 0.05);
  in.delta = 1.0;
  CHECK_THROWS_AS(validate(in), InvalidArgument);
  in.delta = 0.05;
  in.r_n = 0;
  CHECK_THROWS_AS(validate(in), InvalidArgument);
  in.r_n = 0.1;
  CHECK_NOTHROW(validate(in));
}

TEST_CASE("ensemble guarantees") {
  CHECK(guarantee_ensemble_one(1, 0.5, 56, 1000, 100) == doctest::Approx(std::sqrt(0.056) + 0.5 * std::sqrt(0.56)));
  CHECK(guarantee_ensemble_one(1, 0.5, 56, 1000, 100) == doctest::Approx(0.6108).epsilon(1e-4));
  CHECK(guarantee_ensemble_one(2, 1.0, 56, 1000, 100) == doctest::Approx(2 * std::sqrt(0.056)));
  CHECK(guarantee_ensemble_two(1, 0, 21, 50, 1000, 100) ==
        doctest::Approx(std::sqrt(0.021) + std::sqrt(0.21) + 0.71));
  CHECK(guarantee_ensemble_two(1, 0, 21, 50, 1000, 100) == doctest::Approx(1.3132).epsilon(1e-4));
  CHECK(guarantee_ensemble_two(1, 1, 21, 50, 1000, 100) == doctest::Approx(std::sqrt(0.021)));
  // d2 = n_L / 2 leaves a constant-order (1 - lambda) contribution
  CHECK(guarantee_ensemble_two(1, 0, 21, 50, 1000, 100) - guarantee_ensemble_one(1, 0, 21, 1000, 100) >= 0.5);
  // monotone decreasing in lambda
  double prev = 1e9;
  for (double l = 0; l <= 1.0; l += 0.1) {
    const double g = guarantee_ensemble_one(1, l, 56, 1000, 100);
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("overlay fit and correlation") {
  const std::vector<double> th{1, 2, 3, 4};
  const std::vector<double> em{2.5, 5, 7.5, 10};
  CHECK(fit_overlay_constant(th, em) == doctest::Approx(2.5));
  CHECK(pearson_correlation(th, em) == doctest::Approx(1.0));
  const std::vector<double> neg{4, 3, 2, 1};
  CHECK(pearson_correlation(th, neg) == doctest::Approx(-1.0));
  const std::vector<double> flat{1, 1, 1, 1};
  CHECK(std::isnan(pearson_correlation(th, flat)));
}

TEST_CASE("Rademacher complexity of the identity class") {
  const auto cls = identity_linear_class(5);
  Rng rng(1);
  const auto est = rademacher_complexity_mc(cls, 1.0, 1000, 4000, rng);
  const double want = chi_mean(5, 1000);
  CHECK(std::abs(est.value - want) <= 3 * est.std_error);
  CHECK(est.mc_draws == 4000);
  // (Jensen) slightly below sqrt(d/n)
  CHECK(est.value < std::sqrt(5.0 / 1000));

  Rng r2(2);
  const auto unit = rademacher_unit(cls, 1000, 500, r2);
  CHECK(complexity_at(unit, 0.0).value == 0.0);
  CHECK(complexity_at(unit, 0.6).value == 2 * complexity_at(unit, 0.3).value);
  // R_n(t) / t non-increasing on a grid
  double prev = 1e9;
  for (double t = 0.01; t < 4; t *= 1.5) {
    const double v = complexity_at(unit, t).value / t;
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("critical radius: closed-form crossing, tightness, rate") {
  const auto cls = identity_linear_class(5);
  std::vector<double> r;
  for (std::size_t n : {250u, 1000u, 4000u}) {
    Rng rng(derive_seed(3, {n}));
    const auto cr = critical_radius(cls, n, 2000, rng, 1.0);
    const double se = 16 * cr.unit.std_error;
    CHECK(std::abs(cr.radius - 16 * chi_mean(5, static_cast<double>(n))) <= 3 * se + 2e-3 * cr.radius);
    // tightness
    const auto at = complexity_at(cr.unit, cr.radius);
    CHECK(at.value <= cr.radius * cr.radius / 16 + 2 * at.std_error);
    const double t = cr.radius / 1.1;
    CHECK(complexity_at(cr.unit, t).value > t * t / 16);
    r.push_back(cr.radius);
  }
  CHECK(r[1] / r[0] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(r[2] / r[1] == doctest::Approx(0.5).epsilon(0.1));
  const double ns[] = {250, 1000, 4000};
  for (int i = 0; i < 2; ++i) CHECK(std::sqrt(ns[i]) * r[i] <= 1.05 * std::sqrt(ns[i + 1]) * r[i + 1]);

  // no crossing below 4B
  Rng rng(4);
  CHECK_THROWS_AS(critical_radius(cls, 10, 200, rng, 0.01), NumericalError);
}

TEST_CASE("serial and OpenMP complexity estimates are bit-identical") {
  const auto cls = identity_linear_class(8);
  Rng a(9), b(9);
  const auto s = rademacher_unit(cls, 500, 300, a, parallel::Backend::Serial);
  parallel::ThreadCountScope threads(4);
  const auto o = rademacher_unit(cls, 500, 300, b, parallel::Backend::OpenMP);
  CHECK(s.draws == o.draws);
  CHECK(s.mean == o.mean);
}

TEST_CASE("singular second moment is jittered with a warning") {
  LinearClass cls = identity_linear_class(2);
  cls.second_moment << 1, 1, 1, 1;
  Rng rng(1);
  const auto u = rademacher_unit(cls, 100, 50, rng);
  CHECK_FALSE(u.warnings.empty());
  CHECK(std::isfinite(u.mean));

  // estimated Sigma of the identity features on N(0, I) is close to I
  Rng r2(2);
  const auto est = linear_class_from_samples(FeatureMap::identity(3), identity_linear_class(3).sample_x, 20000, r2);
  CHECK((est.second_moment - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("decomposition identities") {
  EnsembleParams p;
  p.lambda = 0.5;
  Rng coef(1);
  const EnsembleSpec e(EnsembleKind::PartialLinearOne, p, coef);
  Rng rng(2);
  const auto data = split_dataset_count(e.generate(1000, rng), 100, rng);
  const XFunction fstar = [&](const Vector& x) { return e.f_star(x); };
  const auto gstar = AuxiliaryPredictor::analytic([&](const Vector& x, const Vector& w) { return e.g_star(x, w); });

  // f^ = f*: lhs and T4 vanish
  const auto d0 = decomposition_terms(fstar, e, gstar, fstar, data, 2000, rng);
  CHECK(d0.lhs_mc == 0.0);
  CHECK(d0.lhs_n == 0.0);
  CHECK(d0.t4 == 0.0);
  CHECK(std::abs(d0.t5) < 1e-12);

  // a fitted PAST run
  PastConfig c;
  c.auxiliary = LinearFitter{FeatureMap::polynomial(5, 3), 0.0};
  c.final_fitter = LinearFitter{FeatureMap::polynomial(5, 3), 0.0};
  Rng fr(3);
  const auto fit = past_fit(c, data, fr);
  const XFunction fh = [&](const Vector& x) { return fit.f_hat.predict(x); };
  // W | X is independent of X here, so f~(x) = g~(x, 0) for a linear g~
  const XFunction ft = [&](const Vector& x) { return fit.g_tilde.predict(x, Vector::Zero(1)); };
  const auto d = decomposition_terms(fh, e, fit.g_tilde, ft, data, 100000, rng);
  CHECK(std::abs(d.t5 - d.t5_identity) <= 1e-10);
  CHECK(d.lhs_mc <= d.upper() + 3 * d.mc_std_error);
  // population key decomposition: lhs = T1 + T5 up to the MC cross term
  CHECK(std::abs(d.lhs_mc - (d.t1 + d.t5)) <= 3 * d.mc_std_error + 1e-12);
}

TEST_CASE("orthogonality check at 20 probe functions") {
  for (auto kind : {EnsembleKind::PartialLinearOne, EnsembleKind::NoisyLabel}) {
    Rng coef(5);
    EnsembleParams p;
    const EnsembleSpec e(kind, p, coef);
    std::vector<XFunction> probes;
    for (int k = 0; k < 20; ++k)
      probes.push_back([k](const Vector& x) { return std::cos(k * x(0)) + k * x(1) * x(2) - 0.1 * k; });
    Rng rng(6);
    const auto res = orthogonality_check(e, probes, 50000, rng);
    REQUIRE(res.size() == 20);
    int within = 0;
    for (const auto& r : res) within += std::abs(r.value) <= 3 * r.std_error;
    // the 20 estimates share draws; all should sit within 3 SE
    CHECK(within == 20);
  }
}

TEST_CASE("empirical sup") {
  Rng rng(1);
  const XSampler s = [](Rng& r) { return Vector::Constant(1, uniform01(r)); };
  const double sup = empirical_sup([](const Vector& x) { return -3 * x(0); }, s, 5000, rng);
  CHECK(sup <= 3.0);
  CHECK(sup > 2.99);
}
