#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aoi/config.hpp"
#include "aoi/equilibrium.hpp"
#include "aoi/errors.hpp"
#include "aoi/experiment.hpp"
#include "aoi/ks.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace aoi;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> cells_of(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("aoi_harness_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kTwoClasses =
    "classes[0].fraction = 0.5\n"
    "classes[0].success_prob = 0.9\n"
    "classes[1].fraction = 0.5\n"
    "classes[1].success_prob = 0.2\n";

}  // namespace

TEST_CASE("ks distance basics") {
  const auto eq = solve_equilibrium({{1.0, 1.0, 0.0}});  // unit exponential

  // a single sample at zero against a continuous law: distance one
  OccupancySnapshot snap;
  snap.num_agents = 1;
  snap.rescaled_ages = {{0.0}};
  const auto one = ks_distance(snap, eq);
  CHECK(one.statistic == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(one.n_samples == 1);

  // samples planted at the theory quantiles: distance ~ 1/(2n)
  const int n = 1000;
  OccupancySnapshot quant;
  quant.num_agents = n;
  quant.rescaled_ages.resize(1);
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    quant.rescaled_ages[0].push_back(-std::log(1.0 - u));
  }
  const auto close = ks_distance(quant, eq);
  CHECK(close.statistic <= 1.0 / n + 1e-12);
  CHECK(close.n_samples == n);

  // pooled over classes: two equal classes, both at their conditional
  // quantiles, stay close to the mixture law
  const auto eq2 = solve_equilibrium({{0.5, 1.0, 0.0}, {0.5, 1.0, 0.0}});
  OccupancySnapshot pooled;
  pooled.num_agents = n;
  pooled.rescaled_ages.resize(2);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < n / 2; ++i) {
      const double u = (i + 0.5) / (n / 2);
      pooled.rescaled_ages[static_cast<std::size_t>(c)].push_back(-std::log(1.0 - u));
    }
  const auto mix = ks_distance(pooled, eq2);
  CHECK(mix.statistic <= 2.0 / n + 1e-12);

  // class-count mismatch is an error, as is an empty snapshot
  OccupancySnapshot bad;
  bad.num_agents = 1;
  bad.rescaled_ages = {{0.5}};
  const auto eq_two = solve_equilibrium({{0.5, 1.0, 0.0}, {0.5, 0.5, 0.0}});
  CHECK_THROWS_AS(ks_distance(bad, eq_two), Error);
  OccupancySnapshot empty;
  empty.num_agents = 0;
  empty.rescaled_ages = {{}};
  CHECK_THROWS_AS(ks_distance(empty, eq), Error);
}

TEST_CASE("config parsing fills defaults") {
  const std::string text = std::string("scenario = avg_aoi_vs_N\n") + kTwoClasses +
                           "N_sweep = 50, 100\n";
  const auto cfg = parse_config(text);
  CHECK(cfg.scenario == Scenario::AvgAoiVsN);
  REQUIRE(cfg.classes.size() == 2);
  CHECK(cfg.classes[0].fraction == 0.5);
  CHECK(cfg.classes[1].success_prob == 0.2);
  CHECK(cfg.horizon == 1'000'000);
  CHECK(cfg.seed == 0);
  CHECK(cfg.policy_kind == PolicySpec::Kind::ThresholdRandom);
  CHECK(cfg.thresholds_source == ThresholdSource::Linear);
  CHECK(cfg.n_sweep == std::vector<long long>{50, 100});
  CHECK(effective_epsilon(cfg) == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(effective_replications(cfg) == 5);
  CHECK(effective_initial_ages(cfg) == InitialAges::Kind::Zero);

  // cdf scenario defaults differ
  const auto cdf = parse_config(std::string("scenario = cdf_convergence\n") + kTwoClasses +
                                "N_sweep = 10\nsnapshot_slots = 10,20\n");
  CHECK(effective_replications(cdf) == 1);
  CHECK(effective_initial_ages(cdf) == InitialAges::Kind::Gaussian);

  // explicit overrides win
  const auto cust = parse_config(std::string("scenario = avg_aoi_vs_N\n") + kTwoClasses +
                                 "N_sweep = 10\nepsilon = 0.01\nreplications = 3\n"
                                 "initial_ages = gaussian\nseed = 9\nhorizon = 1234\n");
  CHECK(effective_epsilon(cust) == 0.01);
  CHECK(effective_replications(cust) == 3);
  CHECK(effective_initial_ages(cust) == InitialAges::Kind::Gaussian);
  CHECK(cust.seed == 9);
  CHECK(cust.horizon == 1234);
}

TEST_CASE("config parsing reports errors with line numbers") {
  const std::string base = std::string("scenario = avg_aoi_vs_N\n") + kTwoClasses;
  try {
    parse_config(base + "N_sweep = 10\nbogus_key = 1\n");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("scenario avg_aoi_vs_N\n"), Error);  // missing '='
  CHECK_THROWS_AS(parse_config(base + "horizon = ten\n"), Error);
  CHECK_THROWS_AS(parse_config(base + "scenario = nope\n"), Error);
  CHECK_THROWS_AS(parse_config(base + "emit = yaml\n"), Error);
  CHECK_THROWS_AS(parse_config("preset = a\npreset = b\n"), Error);
  CHECK_THROWS_AS(parse_config("preset = not-a-preset\n"), Error);

  // class fractions must sum to one
  try {
    parse_config(
        "scenario = avg_aoi_vs_N\n"
        "classes[0].fraction = 0.5\n"
        "classes[0].success_prob = 0.9\n"
        "classes[1].fraction = 0.4\n"
        "classes[1].success_prob = 0.2\n"
        "N_sweep = 10\n");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FractionSumMismatch);
  }

  // comments and blank lines are fine
  const auto ok = parse_config("# header\n\nscenario = avg_aoi_vs_N # trailing\n" +
                               std::string(kTwoClasses) + "N_sweep = 10\n");
  CHECK(ok.scenario == Scenario::AvgAoiVsN);
}

TEST_CASE("presets load and can be overridden") {
  const auto fig2 = parse_config("preset = paper-fig2\n");
  CHECK(fig2.scenario == Scenario::CdfConvergence);
  REQUIRE(fig2.classes.size() == 2);
  CHECK(fig2.classes[0].success_prob == 0.9);
  CHECK(fig2.classes[1].success_prob == 0.2);
  CHECK(fig2.n_sweep == std::vector<long long>{10, 100, 1000});
  CHECK(fig2.snapshot_slots == std::vector<long long>{100, 1000, 10000, 50000});
  CHECK(fig2.horizon == 1'000'000);
  CHECK(effective_initial_ages(fig2) == InitialAges::Kind::Gaussian);

  const auto fig3 = parse_config("preset = paper-fig3\n");
  CHECK(fig3.scenario == Scenario::AvgAoiVsN);
  CHECK(fig3.n_sweep == std::vector<long long>{50, 100, 200, 400, 800});
  CHECK(fig3.epsilon == 0.08);

  const auto fig4 = parse_config("preset = paper-fig4\n");
  CHECK(fig4.scenario == Scenario::NonlinearAge);
  CHECK(fig4.n_sweep == std::vector<long long>{200, 400, 800});
  CHECK(fig4.classes[1].success_prob == 0.1);
  CHECK(fig4.age_function.kind == AgeFunction::Kind::Power);
  CHECK(fig4.age_function.m == 4.0);
  CHECK(fig4.thresholds_source == ThresholdSource::Power);
  CHECK(fig4.horizon == 10'000'000);

  const auto tweaked = parse_config("preset = paper-fig3\nhorizon = 5000\nN_sweep = 10\n");
  CHECK(tweaked.horizon == 5000);
  CHECK(tweaked.n_sweep == std::vector<long long>{10});
  CHECK(tweaked.classes.size() == 2);  // classes inherited from the preset
}

TEST_CASE("threshold resolution per source") {
  auto cfg = parse_config(std::string("scenario = avg_aoi_vs_N\n") + kTwoClasses +
                          "N_sweep = 10\n");
  const auto lin = resolve_thresholds(cfg);
  const auto expect = thresholds_linear(cfg.classes, effective_epsilon(cfg));
  REQUIRE(lin.size() == 2);
  CHECK(lin[0] == expect[0]);
  CHECK(lin[1] == expect[1]);

  cfg.thresholds_source = ThresholdSource::Explicit;
  CHECK_THROWS_AS(resolve_thresholds(cfg), Error);
  cfg.classes[0].threshold = 1.0;
  cfg.classes[1].threshold = 2.0;
  CHECK(resolve_thresholds(cfg) == std::vector<double>{1.0, 2.0});

  cfg.thresholds_source = ThresholdSource::Power;
  CHECK_THROWS_AS(resolve_thresholds(cfg), Error);  // linear age function
  cfg.age_function = AgeFunction::power(2.0);
  CHECK(resolve_thresholds(cfg) == thresholds_power(cfg.classes, 2.0).thresholds);

  cfg.thresholds_source = ThresholdSource::Log;
  CHECK_THROWS_AS(resolve_thresholds(cfg), Error);
  cfg.age_function = AgeFunction::log(1.0);
  CHECK(resolve_thresholds(cfg) == thresholds_log(cfg.classes, 1.0).thresholds);

  CHECK(unscale_thresholds({1.7340668575331348, 3.6785113019775797}, 100) ==
        std::vector<long long>{173, 368});
}

TEST_CASE("format_double round trips") {
  for (double x : {0.0, 0.5, 1.0 / 3.0, 1e-9, 135.3144540, -2.25, 1e300}) {
    const std::string s = format_double(x);
    double back = 0.0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, back);
    REQUIRE(ec == std::errc{});
    REQUIRE(p == end);
    CHECK(back == x);
  }
  CHECK_THROWS_AS(format_double(std::nan("")), Error);
  CHECK_THROWS_AS(format_double(INFINITY), Error);
}

TEST_CASE("summary scenario writes stable csv and manifest") {
  const std::string base = std::string("scenario = avg_aoi_vs_N\n") + kTwoClasses +
                           "N_sweep = 10\nhorizon = 2000\nreplications = 2\n"
                           "emit = csv,json\n";
  auto cfg = parse_config(base);
  const auto dir1 = fresh_dir("summary1");
  cfg.output_dir = dir1.string();
  const auto out1 = run_scenario(cfg);
  CHECK(out1.cells_total == 4);  // 1 N x 2 policies x 2 seeds
  CHECK(out1.cells_failed == 0);
  REQUIRE(out1.files.size() == 3);  // summary csv, json, manifest

  const auto csv = read_file((dir1 / "avg_aoi_vs_N_summary.csv").string());
  const auto rows = lines_of(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] ==
        "scenario,N,policy,seed_count,avg_aoi_mean,avg_aoi_std,avg_agefn_mean,"
        "avg_agefn_std,fluid_prediction,lower_bound");
  const auto r1 = cells_of(rows[1]);
  REQUIRE(r1.size() == 10);
  CHECK(r1[0] == "avg_aoi_vs_N");
  CHECK(r1[1] == "10");
  CHECK(r1[2] == "threshold");
  CHECK(r1[3] == "2");
  CHECK(cells_of(rows[2])[2] == "index");

  const auto manifest = json::parse(read_file((dir1 / "avg_aoi_vs_N_manifest.json").string()));
  CHECK(manifest["scenario"] == "avg_aoi_vs_N");
  CHECK(manifest["complete"] == true);
  CHECK(manifest["cells"].size() == 4);

  // reruns are byte-identical
  const auto dir2 = fresh_dir("summary2");
  cfg.output_dir = dir2.string();
  const auto out2 = run_scenario(cfg);
  for (std::size_t i = 0; i < out1.files.size(); ++i) {
    CHECK(fs::path(out1.files[i]).filename() == fs::path(out2.files[i]).filename());
    CHECK(read_file(out1.files[i]) == read_file(out2.files[i]));
  }
}

TEST_CASE("cdf scenario emits grid rows and ks rows") {
  const std::string base = std::string("scenario = cdf_convergence\n") + kTwoClasses +
                           "N_sweep = 10\nhorizon = 100\nsnapshot_slots = 50,100\n";
  auto cfg = parse_config(base);
  const auto dir = fresh_dir("cdf");
  cfg.output_dir = dir.string();
  const auto out = run_scenario(cfg);
  CHECK(out.cells_failed == 0);

  const auto cdf = lines_of(read_file((dir / "cdf_convergence_cdf.csv").string()));
  CHECK(cdf[0] == "scenario,N,slot,class,h_rescaled,empirical_cdf,theory_cdf");
  // 2 snapshots x 201 grid points x (2 classes + "all")
  CHECK(cdf.size() == 1 + 2 * 201 * 3);
  const auto sample = cells_of(cdf[1]);
  REQUIRE(sample.size() == 7);
  CHECK(sample[0] == "cdf_convergence");
  CHECK(sample[1] == "10");
  CHECK(sample[2] == "50");
  CHECK(sample[3] == "0");

  bool saw_all = false;
  for (const auto& line : cdf)
    if (cells_of(line).size() == 7 && cells_of(line)[3] == "all") saw_all = true;
  CHECK(saw_all);

  const auto ks = lines_of(read_file((dir / "cdf_convergence_ks.csv").string()));
  CHECK(ks[0] == "scenario,N,slot,seed,statistic,n_samples");
  CHECK(ks.size() == 1 + 2);  // one row per snapshot per seed
  const auto krow = cells_of(ks[1]);
  REQUIRE(krow.size() == 6);
  CHECK(krow[5] == "10");

  // theory column is a valid cdf: within [0,1] and matching the equilibrium
  const auto eq = solve_equilibrium(
      [&] {
        auto cs = cfg.classes;
        const auto hs = resolve_thresholds(cfg);
        for (std::size_t c = 0; c < cs.size(); ++c) cs[c].threshold = hs[c];
        return cs;
      }());
  for (std::size_t i = 1; i < cdf.size(); ++i) {
    const auto row = cells_of(cdf[i]);
    const double theory = std::stod(row[6]);
    CHECK(theory >= 0.0);
    CHECK(theory <= 1.0 + 1e-12);
  }
  CHECK(eq.beta > 0.0);
}

TEST_CASE("nonlinear scenario reports the closed-form optimum") {
  const std::string base = std::string("scenario = nonlinear_age\n") + kTwoClasses +
                           "N_sweep = 10\nhorizon = 2000\nreplications = 1\n"
                           "thresholds = power\nage_function.kind = power\n"
                           "age_function.m = 2\n";
  auto cfg = parse_config(base);
  const auto dir = fresh_dir("nonlinear");
  cfg.output_dir = dir.string();
  (void)run_scenario(cfg);
  const auto rows = lines_of(read_file((dir / "nonlinear_age_summary.csv").string()));
  REQUIRE(rows.size() == 3);
  const auto expect = format_double(thresholds_power(cfg.classes, 2.0).optimum);
  CHECK(cells_of(rows[1])[8] == expect);
  CHECK(cells_of(rows[2])[8] == expect);
  // seed_count of 1 gives zero standard deviation
  CHECK(cells_of(rows[1])[5] == "0");
}

TEST_CASE("fluid report carries thresholds, equilibrium and bounds") {
  // linear source at the default epsilon
  auto cfg = parse_config(std::string("scenario = avg_aoi_vs_N\n") + kTwoClasses +
                          "N_sweep = 100\n");
  const auto rep = json::parse(fluid_report_json(cfg, 100));
  CHECK(rep["num_agents"] == 100);
  CHECK(rep["thresholds_source"] == "linear");
  CHECK(rep["on_existence_boundary"] == false);
  CHECK(rep["beta"].get<double>() > 0.0);
  REQUIRE(rep["thresholds_unscaled"].size() == 2);
  CHECK(std::abs(rep["thresholds_unscaled"][0].get<long long>() - 173) <= 1);
  CHECK(std::abs(rep["thresholds_unscaled"][1].get<long long>() - 368) <= 1);
  CHECK(rep["predicted_avg_aoi_slots"].get<double>() ==
        doctest::Approx(135.3144540).epsilon(1e-6));
  CHECK(rep["lower_bound_slots"].get<double>() ==
        doctest::Approx(135.3144540).epsilon(1e-6));
  CHECK(!rep.contains("kkt"));

  // power m = 1 sits on the boundary with the linear-limit thresholds
  auto pow1 = cfg;
  pow1.thresholds_source = ThresholdSource::Power;
  pow1.age_function = AgeFunction::power(1.0);
  const auto repp = json::parse(fluid_report_json(pow1, 100));
  CHECK(repp["on_existence_boundary"] == true);
  CHECK(repp["beta"].get<double>() == 0.0);
  CHECK(repp["thresholds_rescaled"][0].get<double>() ==
        doctest::Approx(1.7340668575331348).epsilon(1e-9));
  CHECK(repp["thresholds_rescaled"][1].get<double>() ==
        doctest::Approx(3.6785113019775797).epsilon(1e-9));
  // kappas are the limiting eta/H
  CHECK(repp["kappas"][0].get<double>() ==
        doctest::Approx(0.5 / 1.7340668575331348).epsilon(1e-9));
  // the rescaled optimum matches the per-slot prediction
  CHECK(repp["predicted_optimum"].get<double>() * 100 ==
        doctest::Approx(repp["predicted_avg_aoi_slots"].get<double>()).epsilon(1e-9));

  // log source on a single class
  auto lg = parse_config(
      "scenario = nonlinear_age\n"
      "classes[0].fraction = 1\n"
      "classes[0].success_prob = 1\n"
      "N_sweep = 100\n"
      "thresholds = log\n"
      "age_function.kind = log\n"
      "age_function.a = 1\n");
  const auto repl = json::parse(fluid_report_json(lg, 100));
  CHECK(repl["thresholds_rescaled"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(repl["thresholds_unscaled"][0].get<long long>() == 100);
  CHECK(repl["predicted_optimum"].get<double>() ==
        doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-9));
  REQUIRE(repl.contains("kkt"));
  CHECK(std::abs(repl["kkt"]["constraint_residual"].get<double>()) <= 1e-9);
  CHECK(repl["kkt"]["lambda"].get<double>() < 0.0);

  CHECK_THROWS_AS(fluid_report_json(cfg, 0), Error);
}
