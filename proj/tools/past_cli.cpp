// past run <config> [--jobs N] [--out DIR] [--svg]
// past theory <config> [--out DIR]
// past selftest
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 1 anything else (including a failed selftest).

#include "past/config.hpp"
#include "past/experiments.hpp"
#include "past/selftest.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

int cmd_run(const std::string& path, int jobs, const std::string& out_dir, bool svg) {
  const past::Config cfg = past::Config::load(path);
  const past::ExperimentConfig exp = past::experiment_from_config(cfg);
  const past::ExperimentResult res = past::run_experiment(exp, jobs);
  const std::string dir = out_dir.empty() ? "out/" + exp.name : out_dir;
  past::write_outputs(res, dir, svg);
  std::cout << exp.name << ": " << res.rows.size() << " rows, manifest " << res.manifest_hash << " -> " << dir << '\n';
  for (const auto& m : res.methods) {
    std::cout << "  " << m << " rmse:";
    for (const auto& p : past::summarize(res, m, "rmse")) std::cout << ' ' << p.mean;
    std::cout << '\n';
  }
  return 0;
}

int cmd_theory(const std::string& path, const std::string& out_dir) {
  const past::TheoryRun run = past::run_theory(past::Config::load(path));
  if (out_dir.empty()) {
    past::write_theory_curve_csv(std::cout, run);
    std::cout << '\n';
    past::write_fixed_points_csv(std::cout, run);
  } else {
    std::filesystem::create_directories(out_dir);
    std::ofstream curve(std::filesystem::path(out_dir) / "theory.csv");
    std::ofstream fixed(std::filesystem::path(out_dir) / "fixed_points.csv");
    if (!curve || !fixed) throw past::ConfigError("cannot write into " + out_dir);
    past::write_theory_curve_csv(curve, run);
    past::write_fixed_points_csv(fixed, run);
    past::write_fixed_points_csv(std::cout, run);
  }
  for (const auto& [name, value] : run.bounds) std::cout << name << " = " << value << '\n';
  return 0;
}

int cmd_selftest() {
  const past::SelfTestReport rep = past::self_test();
  rep.print(std::cout);
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PAST: prediction aided by surrogate training"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  int jobs = 1;
  bool svg = false;
  auto* run = app.add_subcommand("run", "Run an experiment sweep");
  run->add_option("config", run_config, "Experiment file")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs", jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--out", run_out, "Output directory (default out/<name>)");
  run->add_flag("--svg", svg, "Also write figure.svg");

  std::string theory_config, theory_out;
  auto* theory = app.add_subcommand("theory", "Complexity curve and critical radii");
  theory->add_option("config", theory_config, "Theory file")->required()->check(CLI::ExistingFile);
  theory->add_option("--out", theory_out, "Output directory (default: stdout)");

  auto* selftest = app.add_subcommand("selftest", "Run the property suites at reduced sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_config, jobs, run_out, svg);
    if (*theory) return cmd_theory(theory_config, theory_out);
    if (*selftest) return cmd_selftest();
  } catch (const past::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const past::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const past::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
