#pragma once

// Experiment harness: sweeps an ensemble parameter, replicates trials on
// derived seeds, runs the configured methods and records one row per
// (sweep value, trial, method, metric).

#include "past/config.hpp"
#include "past/ensembles.hpp"
#include "past/past.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace past {

/// Parameter varied across the grid.
enum class SweepVariable { Lambda, Nu, LabeledFraction, Sigma };

std::string_view to_string(SweepVariable v) noexcept;
SweepVariable sweep_from_name(std::string_view name);

enum class OverlayKind { None, EnsembleOne, EnsembleTwo };

struct ExperimentConfig {
  std::string name = "experiment";
  EnsembleKind ensemble = EnsembleKind::PartialLinearOne;
  EnsembleParams params;
  SweepVariable sweep = SweepVariable::Lambda;
  std::vector<double> grid;
  int trials = 50;
  std::size_t n = 1000;
  std::size_t n_labeled = 100;
  /// past, past_raw, past_hard, past_soft, naive, oracle, direct
  std::vector<std::string> methods;
  PastConfig past;
  bool oracle_gstar = false;
  std::uint64_t base_seed = 1;
  std::size_t probe_draws = 10000;
  std::size_t smoother_draws = 2000;
  std::size_t test_size = 2000;  ///< held-out rows for accuracy / AUC
  OverlayKind overlay = OverlayKind::None;
};

/// Reads every section of `cfg` and rejects unknown keys.
ExperimentConfig experiment_from_config(const Config& cfg);
/// Throws ConfigError on empty grids, trials < 1, unknown methods, or
/// methods that do not fit the ensemble.
void validate(const ExperimentConfig& cfg);

/// Metric names recorded for this configuration, in row order.
std::vector<std::string> metric_names(const ExperimentConfig& cfg);

struct ResultRow {
  double sweep_value = 0.0;
  int trial = 0;
  std::string method;
  std::string metric;
  double value = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> methods;
  std::vector<std::string> metrics;
  std::vector<ResultRow> rows;  ///< ordered by (sweep, trial, method, metric)
  std::string manifest_json;    ///< includes a timestamp
  std::string manifest_hash;    ///< FNV-1a 64 of the manifest without its timestamp
  double overlay_constant = 0.0;  ///< NaN when no overlay was fitted
};

/// Runs the whole sweep; trials go to `jobs` worker threads (0 picks the
/// hardware concurrency). Results do not depend on `jobs`.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1);

// Entry points checking that the configuration matches the named figure.
ExperimentResult run_ensemble_one(const ExperimentConfig& cfg, int jobs = 1);
ExperimentResult run_ensemble_two(const ExperimentConfig& cfg, int jobs = 1);
ExperimentResult run_hardsoft(const ExperimentConfig& cfg, int jobs = 1);
ExperimentResult run_noisy(const ExperimentConfig& cfg, int jobs = 1);
ExperimentResult run_label_fraction_sweep(const ExperimentConfig& cfg, int jobs = 1);

/// Columns: sweep_value, trial, method, metric, value, manifest_hash.
void write_results_csv(std::ostream& out, const ExperimentResult& result);

struct SummaryPoint {
  double sweep_value = 0.0;
  double mean = 0.0;
  double std_error = 0.0;  ///< sd / sqrt(count) over trials
  std::size_t count = 0;   ///< finite values
};

/// Per-grid-point mean and trial SE of one (method, metric).
std::vector<SummaryPoint> summarize(const ExperimentResult& result, const std::string& method,
                                    const std::string& metric);

/// Coefficient draws and derived constants of an experiment.
EnsembleSpec experiment_ensemble(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// ----- theory command -------------------------------------------------------

struct TheoryCurvePoint {
  std::size_t n = 0;
  double t = 0.0;
  double value = 0.0;  ///< R_n(t)
  double std_error = 0.0;
};

struct TheoryFixedPoint {
  std::size_t n = 0;
  double radius = 0.0;
  double scaled = 0.0;  ///< radius * sqrt(n / d)
};

struct TheoryRun {
  Index d = 0;
  std::vector<TheoryCurvePoint> curve;
  std::vector<TheoryFixedPoint> fixed_points;
  std::vector<std::pair<std::string, double>> bounds;  ///< empty without a [bounds] section
};

/// [theory] class = "identity", d, n = [...], mc_draws, base_seed, B;
/// optional [bounds] sigma, delta, L, gamma, defect, n_labeled.
TheoryRun run_theory(const Config& cfg);
/// Columns: n, t, R_n, std_error.
void write_theory_curve_csv(std::ostream& out, const TheoryRun& run);
/// Columns: n, r_n, r_n_sqrt_n_over_d.
void write_fixed_points_csv(std::ostream& out, const TheoryRun& run);

/// Writes results.csv, manifest.json and optionally figure.svg into `dir`.
void write_outputs(const ExperimentResult& result, const std::string& dir, bool svg);

}  // namespace past
