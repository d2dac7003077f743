#pragma once

#include <string>
#include <vector>

#include "aoi/config.hpp"

namespace aoi {

// Shortest round-trip decimal rendering; every numeric cell in CSV/JSON
// output goes through this so reruns produce byte-identical files. Rejects
// non-finite values.
std::string format_double(double x);

struct ScenarioOutcome {
  std::vector<std::string> files;  // paths written, in emission order
  long long cells_total = 0;
  long long cells_failed = 0;  // > 0 means partial results (see manifest)
};

// Runs one scenario into cfg.output_dir.
//
// cdf_convergence: per N in N_sweep, one simulation per seed with the
//   configured snapshot slots. Writes <scenario>_cdf.csv with header
//   scenario,N,slot,class,h_rescaled,empirical_cdf,theory_cdf (per-class rows
//   use the class index, aggregated rows use "all"; first seed only) and
//   <scenario>_ks.csv with header scenario,N,slot,seed,statistic,n_samples
//   (every seed).
//
// avg_aoi_vs_N and nonlinear_age: per N and per policy in {threshold, index},
//   `replications` runs aggregated into one row of <scenario>_summary.csv
//   with header scenario,N,policy,seed_count,avg_aoi_mean,avg_aoi_std,
//   avg_agefn_mean,avg_agefn_std,fluid_prediction,lower_bound. AoI columns
//   are in slots; age-function columns and fluid_prediction for nonlinear_age
//   are rescaled; standard deviations are sample standard deviations (0 for a
//   single seed).
//
// A <scenario>_manifest.json listing every cell and its status is always
// written; failed cells are skipped and counted, not fatal. With emit=json a
// <scenario>.json carrying the same rows is written as well.
ScenarioOutcome run_scenario(const ExperimentConfig& cfg);

// One-record report of the fluid quantities for the configured classes and
// threshold source: thresholds (rescaled and unscaled for num_agents), beta,
// kappas, the predicted optimum of the configured age function, the mean-AoI
// prediction and lower bound in slots, and KKT diagnostics for log
// thresholds. Power and log optima sit exactly on the equilibrium existence
// boundary; the report then carries the limiting values beta = 0 and
// kappa_c = eta_c / H_c.
std::string fluid_report_json(const ExperimentConfig& cfg, long long num_agents);

}  // namespace aoi
