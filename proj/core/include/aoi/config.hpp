#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aoi/model.hpp"
#include "aoi/simulator.hpp"

namespace aoi {

enum class Scenario { CdfConvergence, AvgAoiVsN, NonlinearAge };
enum class ThresholdSource { Explicit, Linear, Power, Log };

const char* scenario_name(Scenario s);

// Flat key=value configuration ('#' starts a comment, blank lines ignored).
// Keys:
//   preset                    paper-fig2 | paper-fig3 | paper-fig4 (applied
//                             first; every other key overrides the preset)
//   scenario                  cdf_convergence | avg_aoi_vs_N | nonlinear_age
//   classes[i].fraction       population share of class i (must sum to 1)
//   classes[i].success_prob   channel success probability of class i
//   classes[i].threshold      rescaled threshold (thresholds = explicit)
//   num_agents                agent count for single runs (sweeps use N_sweep)
//   horizon                   slots per run, default 1000000
//   seed                      base seed, default 0; replication r uses seed+r
//   policy.kind               threshold | index, default threshold
//   policy.index_exponent     e-1 in the p*h^e weight, default 1
//   thresholds                explicit | linear | power | log, default linear
//   age_function.kind         linear | power | log, default linear
//   age_function.m            exponent for power, default 2
//   age_function.a            slope for log, default 1
//   epsilon                   linear-threshold epsilon, default 1e-3 * min eta
//   initial_ages              zero | gaussian, default gaussian for
//                             cdf_convergence and zero otherwise
//   snapshot_slots            comma list, ascending
//   N_sweep                   comma list of agent counts for sweeps
//   replications              seeds per cell, default 1 for cdf_convergence
//                             and 5 otherwise
//   output_dir                directory for result files, default "."
//   emit                      comma subset of {csv, json}, default csv
struct ExperimentConfig {
  Scenario scenario = Scenario::AvgAoiVsN;
  std::vector<ClassSpec> classes;
  long long num_agents = 0;  // 0 until set
  long long horizon = 1'000'000;
  std::uint64_t seed = 0;
  PolicySpec::Kind policy_kind = PolicySpec::Kind::ThresholdRandom;
  double index_exponent = 1.0;
  ThresholdSource thresholds_source = ThresholdSource::Linear;
  AgeFunction age_function = AgeFunction::linear();
  double epsilon = 0.0;        // 0: default applies
  int initial_ages_kind = -1;  // -1: scenario default, else InitialAges::Kind
  std::vector<long long> snapshot_slots;
  std::vector<long long> n_sweep;
  long long replications = 0;  // 0: scenario default
  std::string output_dir = ".";
  bool emit_csv = true;
  bool emit_json = false;
};

std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

double effective_epsilon(const ExperimentConfig& cfg);
long long effective_replications(const ExperimentConfig& cfg);
InitialAges::Kind effective_initial_ages(const ExperimentConfig& cfg);

// Rescaled per-class thresholds according to thresholds_source. Explicit
// reads classes[i].threshold; linear uses effective_epsilon; power and log
// require a matching age_function and use its parameter.
std::vector<double> resolve_thresholds(const ExperimentConfig& cfg);

// Nearest-integer slot counts for a concrete network size.
std::vector<long long> unscale_thresholds(const std::vector<double>& rescaled, long long n);

}  // namespace aoi
