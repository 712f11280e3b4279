#include "past/losses.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

using namespace past;

namespace {

std::vector<LossSpec> all_specs() {
  return {LossSpec::squared(), LossSpec::squared(10.0, true), LossSpec::logistic(), LossSpec::poisson(),
          LossSpec::binary_kl(), LossSpec::binary_kl(1e-6, true)};
}

// Interior prediction grid of 100 points, kept away from clamped edges.
std::vector<double> interior_grid(const LossSpec& s) {
  double lo = s.domain.lo, hi = s.domain.hi;
  if (!std::isfinite(lo)) lo = -5.0;
  if (!std::isfinite(hi)) hi = 5.0;
  if (s.kind == LossKind::BinaryKL) lo = 0.01, hi = 0.99;
  if (s.kind == LossKind::LogisticGLM || s.kind == LossKind::PoissonGLM) lo = std::max(lo, -5.0), hi = std::min(hi, 5.0);
  std::vector<double> g;
  for (int i = 0; i < 100; ++i) g.push_back(lo + (hi - lo) * (i + 0.5) / 100.0);
  return g;
}

// Golden-section minimizer of a unimodal function on [a, b].
template <class F>
double golden_min(F f, double a, double b) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) < f(d)) b = d;
    else a = c;
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("loss values by hand") {
  CHECK(loss_value(LossSpec::squared(), 0.5, 1.0) == doctest::Approx(0.25));
  CHECK(loss_value(LossSpec::logistic(), 0.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  for (double y : {0.1, 0.5, 0.93}) CHECK(std::abs(loss_value(LossSpec::binary_kl(), y, y)) < 1e-14);
  // GLM form of squared loss differs from (yhat-y)^2 / 2 by y^2 / 2
  const auto g = LossSpec::squared(10.0, true);
  CHECK(loss_value(g, 1.5, 0.2) == doctest::Approx(0.5 * (1.5 - 0.2) * (1.5 - 0.2) - 0.5 * 0.04));
}

TEST_CASE("first derivatives by hand") {
  CHECK(loss_grad_first(LossSpec::squared(), 0.5, 1.0) == doctest::Approx(-1.0));
  CHECK(loss_grad_first(LossSpec::logistic(), 0.0, 1.0) == doctest::Approx(-0.5));
  CHECK(loss_grad_first(LossSpec::logistic(), 0.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("links") {
  CHECK(link(LossSpec::logistic(), 0.5) == doctest::Approx(0.0));
  CHECK(link(LossSpec::poisson(), 1.0) == doctest::Approx(0.0));
  CHECK(link(LossSpec::squared(), 3.7) == 3.7);
  CHECK(link(LossSpec::binary_kl(), 0.3) == 0.3);
  CHECK_THROWS_AS(link(LossSpec::logistic(), 1.0), InvalidArgument);
  CHECK_THROWS_AS(link(LossSpec::poisson(), 0.0), InvalidArgument);
}

TEST_CASE("gradients match centered finite differences on 100-point grids") {
  for (const auto& s : all_specs()) {
    CAPTURE(to_string(s.kind));
    CAPTURE(s.glm_form);
    const std::vector<double> ys = s.kind == LossKind::PoissonGLM ? std::vector<double>{0.0, 1.0, 3.0, 7.5}
                                                                 : std::vector<double>{0.0, 0.3, 1.0};
    for (double y : ys) {
      for (double t : interior_grid(s)) {
        const double h = 1e-5 * std::min(1.0, std::min(t - s.domain.lo, s.domain.hi - t));
        const double fd = (loss_value(s, t + h, y) - loss_value(s, t - h, y)) / (2.0 * h);
        const double g = loss_grad_first(s, t, y);
        CHECK(std::abs(fd - g) / std::max(std::abs(g), 1.0) < 1e-6);
      }
    }
  }
}

TEST_CASE("canonical link inverts Phi'") {
  for (const auto& s : {LossSpec::logistic(), LossSpec::poisson(), LossSpec::squared(10.0, true)}) {
    for (double t : interior_grid(s)) CHECK(std::abs(link(s, loss_mean(s, t)) - t) <= 1e-10);
  }
  // Phi' by finite differences agrees with loss_mean
  const auto lg = LossSpec::logistic();
  for (double t : {-2.0, 0.0, 0.7}) {
    const double h = 1e-6;
    CHECK((loss_Phi(lg, t + h) - loss_Phi(lg, t - h)) / (2 * h) == doctest::Approx(sigmoid(t)).epsilon(1e-8));
  }
}

TEST_CASE("GLM representation reproduces loss_value") {
  for (const auto& s : {LossSpec::logistic(), LossSpec::poisson(), LossSpec::squared(10.0, true),
                        LossSpec::binary_kl(1e-6, true)}) {
    for (double t : interior_grid(s))
      for (double y : {0.0, 1.0})
        CHECK(loss_value(s, t, y) == doctest::Approx(-loss_phi(s, t) * y + loss_Phi(s, t)).epsilon(1e-12));
  }
}

TEST_CASE("constant minimizers follow the link (compatibility)") {
  const std::vector<double> y01{0, 1, 1, 0, 1, 1, 1, 0, 1, 0.5};
  double m = 0;
  for (double v : y01) m += v;
  m /= static_cast<double>(y01.size());
  auto risk = [&](const LossSpec& s) {
    return [&, s](double c) {
      double r = 0;
      for (double v : y01) r += loss_value(s, c, v);
      return r;
    };
  };
  CHECK(golden_min(risk(LossSpec::squared()), -5, 5) == doctest::Approx(m).epsilon(1e-6));
  CHECK(golden_min(risk(LossSpec::binary_kl()), 0.01, 0.99) == doctest::Approx(m).epsilon(1e-6));
  CHECK(golden_min(risk(LossSpec::logistic()), -5, 5) == doctest::Approx(std::log(m / (1 - m))).epsilon(1e-6));
  CHECK(golden_min(risk(LossSpec::poisson()), -5, 5) == doctest::Approx(std::log(m)).epsilon(1e-6));
}

TEST_CASE("binary KL is non-negative and vanishes only on the diagonal") {
  const auto s = LossSpec::binary_kl();
  for (double f = 0.02; f < 1.0; f += 0.07)
    for (double y = 0.0; y <= 1.0; y += 0.1) {
      const double v = loss_value(s, f, y);
      CHECK(v >= -1e-15);
      if (std::abs(f - y) > 1e-3) CHECK(v > 0.0);
    }
}

TEST_CASE("domain and response violations throw") {
  CHECK_THROWS_AS(loss_value(LossSpec::binary_kl(), 0.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(loss_value(LossSpec::binary_kl(), 1.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(loss_value(LossSpec::logistic(), 0.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(loss_value(LossSpec::squared(1.0), 2.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(loss_from_name("hinge"), ConfigError);
  CHECK(loss_from_name("poisson").kind == LossKind::PoissonGLM);
}

TEST_CASE("Lipschitz and convexity report") {
  // squared on [-1, 1]: max |2(a - y)| <= 4
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 4; ++j) grid.emplace_back(-1.0 + 0.1 * i, -1.0 + 0.5 * j);
  const auto r = check_lipschitz_convexity(LossSpec::squared(1.0), grid);
  CHECK(r.max_lipschitz_ratio <= 4.0);
  CHECK(r.max_lipschitz_ratio > 3.5);
  CHECK(r.lipschitz_ok);
  CHECK(r.convexity_ok);
  CHECK(r.min_curvature == doctest::Approx(2.0).epsilon(1e-6));

  std::vector<std::pair<double, double>> lg;
  for (int i = 0; i <= 40; ++i) lg.emplace_back(-4.0 + 0.2 * i, 1.0);
  const auto rl = check_lipschitz_convexity(LossSpec::logistic(), lg);
  CHECK(rl.max_lipschitz_ratio <= 1.0);
  CHECK(rl.lipschitz_ok);

  const std::vector<std::pair<double, double>> one{{0.3, 0.0}};
  const auto r1 = check_lipschitz_convexity(LossSpec::squared(), one);
  CHECK(r1.max_lipschitz_ratio == 0.0);
  CHECK(r1.pairs_checked == 0);
}
