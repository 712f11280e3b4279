#include "past/config.hpp"
#include "past/experiments.hpp"
#include "past/selftest.hpp"

#include "doctest.h"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace past;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
# small ensemble-one sweep
[experiment]
name = "small"
ensemble = "partial_linear_1"
sweep = "lambda"
grid = [0, 1]
trials = 3
n = 200
n_labeled = 40
methods = ["past", "naive", "oracle"]
base_seed = 9
probe_draws = 500
smoother_draws = 20
overlay = "ensemble_one"

[ensemble]
degree = 2

[auxiliary]
fitter = "linear"
degree = 2

[final]
fitter = "linear"
degree = 2
)";

ExperimentConfig small_config() { return experiment_from_config(Config::parse(kSmall)); }

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream out;
  write_results_csv(out, r);
  return out.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("past_cli_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PAST_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parser") {
  const auto c = Config::parse(R"(
top = 1
[a]
x = 1.5   # trailing comment
s = "hi # not a comment"
b = true
l = [1, 2, 3]
names = ["p", "q"]
)");
  CHECK(c.get_int("top") == 1);
  CHECK(c.get_double("a.x") == 1.5);
  CHECK(c.get_string("a.s") == "hi # not a comment");
  CHECK(c.get_bool("a.b", false));
  CHECK(c.get_doubles("a.l", {}) == std::vector<double>{1, 2, 3});
  CHECK(c.get_strings("a.names", {}) == std::vector<std::string>{"p", "q"});
  CHECK(c.get_doubles("top", {}) == std::vector<double>{1});
  CHECK(c.get_double("a.missing", 7.0) == 7.0);
  CHECK_NOTHROW(c.require_all_used());

  CHECK_THROWS_AS(Config::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[a\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("x = \"open\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("x 1\n"), ConfigError);
  try {
    Config::parse("a = 1\n\nb = = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  const auto t = Config::parse("x = \"s\"\ny = 1.5\n");
  CHECK_THROWS_AS(t.get_double("x"), ConfigError);
  CHECK_THROWS_AS(t.get_int("y"), ConfigError);
  CHECK_THROWS_AS(t.get_string("zz"), ConfigError);

  const auto u = Config::parse("known = 1\ntypo = 2\n");
  u.get_int("known");
  CHECK(u.unused_keys() == std::vector<std::string>{"typo"});
  CHECK_THROWS_AS(u.require_all_used(), ConfigError);
}

TEST_CASE("experiment config validation") {
  const auto cfg = small_config();
  CHECK(cfg.grid.size() == 2);
  CHECK(cfg.params.degree == 2);
  CHECK(cfg.overlay == OverlayKind::EnsembleOne);

  auto bad = [](const std::string& edit_from, const std::string& edit_to) {
    std::string s = kSmall;
    const auto pos = s.find(edit_from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, edit_from.size(), edit_to);
    return s;
  };
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("grid = [0, 1]", "grid = []"))), ConfigError);
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("trials = 3", "trials = 0"))), ConfigError);
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("\"oracle\"]", "\"magic\"]"))), ConfigError);
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("\"oracle\"]", "\"direct\"]"))), ConfigError);
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("n_labeled = 40", "n_labeled = 400"))), ConfigError);
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("grid = [0, 1]", "grid = [0, 2]"))), ConfigError);
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("degree = 2\n\n[aux", "degre = 2\n\n[aux"))), ConfigError);
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("partial_linear_1", "partial_linear_9"))), ConfigError);
  CHECK_THROWS_AS(experiment_from_config(Config::parse(bad("overlay = \"ensemble_one\"", "overlay = \"ensemble_two\""))),
                  ConfigError);
}

TEST_CASE("experiment rows, determinism and job independence") {
  const auto cfg = small_config();
  const auto a = run_experiment(cfg, 1);
  const auto metrics = metric_names(cfg);
  CHECK(a.rows.size() == cfg.grid.size() * cfg.trials * cfg.methods.size() * metrics.size());
  const auto b = run_experiment(cfg, 1);
  const auto c = run_experiment(cfg, 3);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(csv_of(a) == csv_of(c));
  CHECK(a.manifest_hash == c.manifest_hash);
  CHECK(a.manifest_hash.size() == 16);

  // every row carries the manifest hash
  std::istringstream in(csv_of(a));
  std::string line;
  std::getline(in, line);
  CHECK(line == "sweep_value,trial,method,metric,value,manifest_hash");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == a.manifest_hash);
  }
  CHECK(rows == a.rows.size());

  // manifest records coefficients and the overlay constant; the hash omits the timestamp
  const auto m = nlohmann::json::parse(a.manifest_json);
  CHECK(m.contains("timestamp"));
  CHECK(m.at("coefficients").at("beta").size() == 21);
  CHECK(std::isfinite(a.overlay_constant));
  auto stripped = m;
  stripped.erase("timestamp");
  stripped.erase("manifest_hash");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(stripped.dump())));
  CHECK(a.manifest_hash == buf);

  // non-PAST methods have no defect metrics; PAST at lambda = 1 with the
  // ideal proxy is the oracle
  for (const auto& r : a.rows)
    if (r.method != "past" && r.metric.rfind("defect", 0) == 0) CHECK(std::isnan(r.value));
  const auto s = summarize(a, "past", "rmse");
  REQUIRE(s.size() == 2);
  CHECK(s[0].count == 3);

  // a different seed changes the output
  auto other = cfg;
  other.base_seed = 10;
  CHECK(csv_of(run_experiment(other, 1)) != csv_of(a));
}

TEST_CASE("figure entry points check the ensemble") {
  const auto cfg = small_config();
  CHECK_THROWS_AS(run_ensemble_two(cfg), ConfigError);
  CHECK_THROWS_AS(run_hardsoft(cfg), ConfigError);
  CHECK_THROWS_AS(run_noisy(cfg), ConfigError);
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("selftest and its numeric helpers") {
  for (const auto& s : {LossSpec::squared(), LossSpec::logistic(), LossSpec::poisson(), LossSpec::binary_kl()})
    CHECK(max_gradient_error(s) < 1e-6);
  for (const auto& s : {LossSpec::logistic(), LossSpec::poisson()}) CHECK(max_link_inverse_error(s) < 1e-10);
  const auto report = self_test();
  std::ostringstream out;
  report.print(out);
  CAPTURE(out.str());
  CHECK(report.ok());
  CHECK(report.checks.size() >= 10);
}

TEST_CASE("CLI exit codes and outputs") {
  const fs::path dir = temp_dir("cli");
  const fs::path good = dir / "good.toml";
  std::ofstream(good) << kSmall;
  CHECK(run_cli("run " + good.string() + " --out " + (dir / "out").string() + " --svg") == 0);
  CHECK(fs::exists(dir / "out" / "results.csv"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(slurp(dir / "out" / "figure.svg").find("<svg") != std::string::npos);
  // byte-identical rerun
  CHECK(run_cli("run " + good.string() + " --out " + (dir / "out2").string() + " --jobs 2") == 0);
  CHECK(slurp(dir / "out" / "results.csv") == slurp(dir / "out2" / "results.csv"));

  const fs::path bad = dir / "bad.toml";
  std::ofstream(bad) << "[experiment]\nname = \"x\"\nbogus = 1\n";
  CHECK(run_cli("run " + bad.string() + " --out " + (dir / "o3").string()) == 2);
  CHECK(run_cli("run " + (dir / "missing.toml").string()) == 2);
  CHECK(run_cli("frobnicate") == 2);

  // a forest that cannot be grown on 4 labeled rows: numerical failure in a stage
  std::string s = kSmall;
  s.replace(s.find("n_labeled = 40"), 14, "n_labeled = 4");
  s.replace(s.find("[auxiliary]\nfitter = \"linear\"\ndegree = 2"), 39, "[auxiliary]\nfitter = \"forest\"\nmin_leaf = 5");
  const fs::path numeric = dir / "numeric.toml";
  std::ofstream(numeric) << s;
  CHECK(run_cli("run " + numeric.string() + " --out " + (dir / "o4").string()) == 3);

  const fs::path th = dir / "theory.toml";
  std::ofstream(th) << "[theory]\nd = 3\nn = [100, 400]\nmc_draws = 200\n";
  CHECK(run_cli("theory " + th.string() + " --out " + (dir / "th").string()) == 0);
  CHECK(fs::exists(dir / "th" / "fixed_points.csv"));
  CHECK(run_cli("selftest") == 0);
  fs::remove_all(dir);
}
