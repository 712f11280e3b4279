// Serial reference path vs OpenMP path for each parallel kernel.
// Arg 0 = serial, 1 = openmp.

#include "past/ensembles.hpp"
#include "past/forest.hpp"
#include "past/metrics.hpp"
#include "past/theory.hpp"

#include <benchmark/benchmark.h>

namespace {

using past::parallel::Backend;

Backend backend_of(const benchmark::State& s) { return s.range(0) ? Backend::OpenMP : Backend::Serial; }

struct ForestData {
  past::Matrix x;
  past::Vector y;
  ForestData() : x(1000, 6), y(1000) {
    past::Rng rng(1);
    for (past::Index i = 0; i < x.rows(); ++i) {
      for (past::Index j = 0; j < x.cols(); ++j) x(i, j) = past::uniform01(rng);
      y(i) = std::sin(5 * x(i, 0)) + x(i, 1) * x(i, 2);
    }
  }
};

const ForestData& forest_data() {
  static const ForestData d;
  return d;
}

void BM_ForestFit(benchmark::State& state) {
  const auto& d = forest_data();
  past::ForestParams p;
  p.n_trees = 64;
  for (auto _ : state) {
    past::Rng rng(2);
    benchmark::DoNotOptimize(past::fit_random_forest(d.x, d.y, past::ForestTask::Regression, p, rng, backend_of(state)));
  }
}

void BM_ForestPredict(benchmark::State& state) {
  const auto& d = forest_data();
  past::ForestParams p;
  p.n_trees = 64;
  past::Rng rng(3);
  const auto model = past::fit_random_forest(d.x, d.y, past::ForestTask::Regression, p, rng, Backend::Serial);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_batch(d.x, backend_of(state)));
}

void BM_L2ErrorMc(benchmark::State& state) {
  past::Rng coef(4);
  const past::EnsembleSpec spec(past::EnsembleKind::PartialLinearOne, past::EnsembleParams{}, coef);
  const past::XFunction f = [](const past::Vector& x) { return x.sum(); };
  const past::XFunction truth = [&](const past::Vector& x) { return spec.f_star(x); };
  const past::XSampler sampler = [&](past::Rng& r) { return spec.sample_x(r); };
  for (auto _ : state) {
    past::Rng rng(5);
    benchmark::DoNotOptimize(past::l2_error_mc(f, truth, sampler, 20000, rng, backend_of(state)));
  }
}

void BM_RademacherUnit(benchmark::State& state) {
  const past::LinearClass cls = past::identity_linear_class(5);
  for (auto _ : state) {
    past::Rng rng(6);
    benchmark::DoNotOptimize(past::rademacher_unit(cls, 1000, 200, rng, backend_of(state)));
  }
}

void BM_SmoothedDefect(benchmark::State& state) {
  past::Rng coef(7);
  const past::EnsembleSpec spec(past::EnsembleKind::PartialLinearOne, past::EnsembleParams{}, coef);
  past::Rng rng(8);
  const auto full = spec.generate(1000, rng);
  const past::HybridDataset data = past::split_dataset_count(full, 100, rng);
  const auto g = past::AuxiliaryPredictor::analytic([&](const past::Vector& x, const past::Vector& w) {
    return spec.g_star(x, w) + 0.1 * x(0);
  });
  const past::SmoothedPredictor sp{&g, &spec, past::LabelingPolicy::Raw, 200, 9};
  const past::XFunction truth = [&](const past::Vector& x) { return spec.f_star(x); };
  for (auto _ : state) benchmark::DoNotOptimize(past::smoothed_defect(sp, truth, data, backend_of(state)));
}

}  // namespace

BENCHMARK(BM_ForestFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestPredict)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_L2ErrorMc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RademacherUnit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SmoothedDefect)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
