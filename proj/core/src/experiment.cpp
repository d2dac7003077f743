#include "aoi/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoi/equilibrium.hpp"
#include "aoi/errors.hpp"
#include "aoi/ks.hpp"

namespace aoi {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json jnum(double x) {
  if (!std::isfinite(x)) fail(Errc::ValidationError, "non-finite numeric cell");
  return x;
}

void write_file(const fs::path& path, const std::string& content,
                ScenarioOutcome& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::ValidationError, "cannot write '" + path.string() + "'");
  f << content;
  out.files.push_back(path.string());
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for fewer than 2 points
};

Moments sample_moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::vector<ClassSpec> with_thresholds(const std::vector<ClassSpec>& classes,
                                       const std::vector<double>& rescaled) {
  auto out = classes;
  for (std::size_t c = 0; c < out.size(); ++c) out[c].threshold = rescaled[c];
  return out;
}

SimConfig base_sim_config(const ExperimentConfig& cfg, long long n, std::uint64_t seed) {
  SimConfig sc;
  sc.network = NetworkSpec{cfg.classes, n};
  sc.horizon = cfg.horizon;
  sc.seed = seed;
  sc.initial_ages.kind = effective_initial_ages(cfg);
  sc.age_function = cfg.age_function;
  sc.age_function_rescaled = true;
  return sc;
}

constexpr int kGridCells = 200;

ScenarioOutcome run_cdf_convergence(const ExperimentConfig& cfg, long long reps) {
  if (cfg.snapshot_slots.empty())
    fail(Errc::ValidationError, "cdf_convergence requires snapshot_slots");
  if (cfg.policy_kind != PolicySpec::Kind::ThresholdRandom)
    fail(Errc::ValidationError, "cdf_convergence supports the threshold policy only");

  const auto rescaled = resolve_thresholds(cfg);
  const Equilibrium eq = solve_equilibrium(with_thresholds(cfg.classes, rescaled));
  double hmax = 0.0;
  for (std::size_t c = 0; c < cfg.classes.size(); ++c)
    hmax = std::max(hmax, rescaled[c] + 8.0 * eq.beta / cfg.classes[c].success_prob);

  const std::string name = scenario_name(cfg.scenario);
  std::string cdf_csv = "scenario,N,slot,class,h_rescaled,empirical_cdf,theory_cdf\n";
  std::string ks_csv = "scenario,N,slot,seed,statistic,n_samples\n";
  json rows = json::array();
  json cells = json::array();
  ScenarioOutcome out;

  for (long long n : cfg.n_sweep) {
    const auto thr_slots = unscale_thresholds(rescaled, n);
    for (long long r = 0; r < reps; ++r) {
      ++out.cells_total;
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
      json cell{{"N", n}, {"seed", seed}, {"status", "ok"}};
      try {
        SimConfig sc = base_sim_config(cfg, n, seed);
        sc.policy.kind = PolicySpec::Kind::ThresholdRandom;
        sc.policy.thresholds = thr_slots;
        sc.snapshot_slots = cfg.snapshot_slots;
        const SimResult res = run(sc);
        for (const auto& snap : res.snapshots) {
          const KsResult ks = ks_distance(snap, eq);
          ks_csv += name;
          ks_csv += ',' + std::to_string(n) + ',' + std::to_string(snap.slot) + ',' +
                    std::to_string(seed) + ',' + format_double(ks.statistic) + ',' +
                    std::to_string(ks.n_samples) + '\n';
          if (cfg.emit_json)
            rows.push_back(json{{"kind", "ks"},
                                {"N", n},
                                {"slot", snap.slot},
                                {"seed", seed},
                                {"statistic", jnum(ks.statistic)},
                                {"n_samples", ks.n_samples}});
          if (r != 0) continue;
          for (int g = 0; g <= kGridCells; ++g) {
            const double h = hmax * g / kGridCells;
            double emp_all = 0.0;
            for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
              const double emp = empirical_cdf(snap, c, h);
              emp_all += emp;
              cdf_csv += name;
              cdf_csv += ',' + std::to_string(n) + ',' + std::to_string(snap.slot) + ',' +
                         std::to_string(c) + ',' + format_double(h) + ',' +
                         format_double(emp) + ',' + format_double(eq.cdf(c, h)) + '\n';
            }
            cdf_csv += name;
            cdf_csv += ',' + std::to_string(n) + ',' + std::to_string(snap.slot) + ",all," +
                       format_double(h) + ',' + format_double(emp_all) + ',' +
                       format_double(eq.cdf_total(h)) + '\n';
          }
        }
      } catch (const Error& e) {
        cell["status"] = "failed";
        cell["error"] = e.what();
        ++out.cells_failed;
      }
      cells.push_back(cell);
    }
  }

  const fs::path dir(cfg.output_dir);
  if (cfg.emit_csv) {
    write_file(dir / (name + "_cdf.csv"), cdf_csv, out);
    write_file(dir / (name + "_ks.csv"), ks_csv, out);
  }
  if (cfg.emit_json) write_file(dir / (name + ".json"), rows.dump(2) + "\n", out);
  json manifest{{"scenario", name},
                {"replications", reps},
                {"complete", out.cells_failed == 0},
                {"cells", cells}};
  write_file(dir / (name + "_manifest.json"), manifest.dump(2) + "\n", out);
  return out;
}

ScenarioOutcome run_summary_scenario(const ExperimentConfig& cfg, long long reps) {
  const auto rescaled = resolve_thresholds(cfg);
  const std::string name = scenario_name(cfg.scenario);

  // Fluid prediction: mean AoI in slots for the AoI sweep; the rescaled
  // optimum of the age function for the nonlinear sweep (closed form for
  // power/log, equilibrium quadrature otherwise).
  double nonlinear_optimum = 0.0;
  if (cfg.scenario == Scenario::NonlinearAge) {
    switch (cfg.thresholds_source) {
      case ThresholdSource::Power:
        nonlinear_optimum = thresholds_power(cfg.classes, cfg.age_function.m).optimum;
        break;
      case ThresholdSource::Log:
        nonlinear_optimum = thresholds_log(cfg.classes, cfg.age_function.a).optimum;
        break;
      default: {
        const Equilibrium eq = solve_equilibrium(with_thresholds(cfg.classes, rescaled));
        nonlinear_optimum = mean_age_value(eq, cfg.age_function);
        break;
      }
    }
  }

  std::string csv =
      "scenario,N,policy,seed_count,avg_aoi_mean,avg_aoi_std,avg_agefn_mean,avg_agefn_std,"
      "fluid_prediction,lower_bound\n";
  json rows = json::array();
  json cells = json::array();
  ScenarioOutcome out;

  static const char* kPolicyNames[2] = {"threshold", "index"};
  for (long long n : cfg.n_sweep) {
    const auto thr_slots = unscale_thresholds(rescaled, n);
    const double lower_bound = lower_bound_avg_aoi(cfg.classes, n);
    const double prediction = cfg.scenario == Scenario::NonlinearAge
                                  ? nonlinear_optimum
                                  : predicted_avg_aoi(cfg.classes, n);
    for (int pol = 0; pol < 2; ++pol) {
      std::vector<double> aoi, agefn;
      for (long long r = 0; r < reps; ++r) {
        ++out.cells_total;
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
        json cell{{"N", n}, {"policy", kPolicyNames[pol]}, {"seed", seed}, {"status", "ok"}};
        try {
          SimConfig sc = base_sim_config(cfg, n, seed);
          if (pol == 0) {
            sc.policy.kind = PolicySpec::Kind::ThresholdRandom;
            sc.policy.thresholds = thr_slots;
          } else {
            sc.policy.kind = PolicySpec::Kind::Index;
            sc.policy.index_exponent = cfg.index_exponent;
          }
          const SimResult res = run(sc);
          aoi.push_back(res.avg_aoi);
          agefn.push_back(res.avg_agefn);
        } catch (const Error& e) {
          cell["status"] = "failed";
          cell["error"] = e.what();
          ++out.cells_failed;
        }
        cells.push_back(cell);
      }
      if (aoi.empty()) continue;
      const Moments ma = sample_moments(aoi);
      const Moments mv = sample_moments(agefn);
      csv += name;
      csv += ',' + std::to_string(n) + ',' + kPolicyNames[pol] + ',' +
             std::to_string(aoi.size()) + ',' + format_double(ma.mean) + ',' +
             format_double(ma.stddev) + ',' + format_double(mv.mean) + ',' +
             format_double(mv.stddev) + ',' + format_double(prediction) + ',' +
             format_double(lower_bound) + '\n';
      if (cfg.emit_json) {
        const double observed = cfg.scenario == Scenario::NonlinearAge ? mv.mean : ma.mean;
        rows.push_back(json{{"scenario", name},
                            {"N", n},
                            {"policy", kPolicyNames[pol]},
                            {"seed_count", aoi.size()},
                            {"avg_aoi_mean", jnum(ma.mean)},
                            {"avg_aoi_std", jnum(ma.stddev)},
                            {"avg_agefn_mean", jnum(mv.mean)},
                            {"avg_agefn_std", jnum(mv.stddev)},
                            {"fluid_prediction", jnum(prediction)},
                            {"lower_bound", jnum(lower_bound)},
                            {"gap_vs_prediction_rel",
                             jnum((observed - prediction) / prediction)},
                            {"gap_vs_lower_bound_abs", jnum(ma.mean - lower_bound)}});
      }
    }
  }

  const fs::path dir(cfg.output_dir);
  if (cfg.emit_csv) write_file(dir / (name + "_summary.csv"), csv, out);
  if (cfg.emit_json) write_file(dir / (name + ".json"), rows.dump(2) + "\n", out);
  json manifest{{"scenario", name},
                {"replications", reps},
                {"complete", out.cells_failed == 0},
                {"cells", cells}};
  write_file(dir / (name + "_manifest.json"), manifest.dump(2) + "\n", out);
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) fail(Errc::ValidationError, "non-finite numeric cell");
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) fail(Errc::ValidationError, "number formatting failed");
  return std::string(buf, p);
}

ScenarioOutcome run_scenario(const ExperimentConfig& cfg) {
  if (cfg.n_sweep.empty()) fail(Errc::ValidationError, "N_sweep must be nonempty");
  fs::create_directories(cfg.output_dir);
  const long long reps = effective_replications(cfg);
  if (cfg.scenario == Scenario::CdfConvergence) return run_cdf_convergence(cfg, reps);
  return run_summary_scenario(cfg, reps);
}

std::string fluid_report_json(const ExperimentConfig& cfg, long long num_agents) {
  if (num_agents < 1) fail(Errc::OutOfRangeParameter, "num_agents must be >= 1");
  const auto rescaled = resolve_thresholds(cfg);
  const auto unscaled = unscale_thresholds(rescaled, num_agents);
  const auto attached = with_thresholds(cfg.classes, rescaled);

  double beta = 0.0;
  std::vector<double> kappas;
  bool boundary = false;
  try {
    const Equilibrium eq = solve_equilibrium(attached);
    beta = eq.beta;
    kappas = eq.kappas;
  } catch (const Error& e) {
    if (e.code() != Errc::NoEquilibrium) throw;
    // Power/log optima sit exactly on the existence boundary
    // (sum eta/(H p) = 1); report the limiting uniform-density equilibrium.
    double s = 0.0;
    for (std::size_t c = 0; c < attached.size(); ++c) {
      const double hp = *attached[c].threshold * attached[c].success_prob;
      if (hp <= 0) throw;
      s += attached[c].fraction / hp;
    }
    if (std::abs(s - 1.0) > 1e-6) throw;
    boundary = true;
    beta = 0.0;
    for (const auto& c : attached) kappas.push_back(c.fraction / *c.threshold);
  }

  double optimum = 0.0;
  json kkt;
  switch (cfg.thresholds_source) {
    case ThresholdSource::Power:
      optimum = thresholds_power(cfg.classes, cfg.age_function.m).optimum;
      break;
    case ThresholdSource::Log: {
      const LogOptimum lo = thresholds_log(cfg.classes, cfg.age_function.a);
      optimum = lo.optimum;
      json resid = json::array();
      for (double rr : lo.kkt.stationarity_residuals) resid.push_back(jnum(rr));
      kkt = json{{"lambda", jnum(lo.kkt.lambda)},
                 {"constraint_residual", jnum(lo.kkt.constraint_residual)},
                 {"stationarity_residuals", resid}};
      break;
    }
    default: {
      const Equilibrium eq = solve_equilibrium(attached);
      optimum = mean_age_value(eq, cfg.age_function);
      break;
    }
  }

  const char* source_names[4] = {"explicit", "linear", "power", "log"};
  const char* age_names[3] = {"linear", "power", "log"};
  json j{{"num_agents", num_agents},
         {"thresholds_source", source_names[static_cast<int>(cfg.thresholds_source)]},
         {"age_function",
          json{{"kind", age_names[static_cast<int>(cfg.age_function.kind)]},
               {"m", jnum(cfg.age_function.m)},
               {"a", jnum(cfg.age_function.a)}}},
         {"thresholds_rescaled", json::array()},
         {"thresholds_unscaled", json::array()},
         {"beta", jnum(beta)},
         {"on_existence_boundary", boundary},
         {"kappas", json::array()},
         {"predicted_optimum", jnum(optimum)},
         {"predicted_avg_aoi_slots", jnum(predicted_avg_aoi(cfg.classes, num_agents))},
         {"lower_bound_slots", jnum(lower_bound_avg_aoi(cfg.classes, num_agents))}};
  for (double h : rescaled) j["thresholds_rescaled"].push_back(jnum(h));
  for (long long h : unscaled) j["thresholds_unscaled"].push_back(h);
  for (double k : kappas) j["kappas"].push_back(jnum(k));
  if (!kkt.is_null()) j["kkt"] = kkt;
  return j.dump(2) + "\n";
}

}  // namespace aoi
