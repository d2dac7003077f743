#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aoi/config.hpp"
#include "aoi/equilibrium.hpp"
#include "aoi/errors.hpp"
#include "aoi/experiment.hpp"
#include "aoi/ks.hpp"
#include "aoi/simulator.hpp"
#include "aoi/transient.hpp"

namespace {

using nlohmann::json;

aoi::ExperimentConfig load_base(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty() && !preset.empty())
    aoi::fail(aoi::Errc::ValidationError, "--config and --preset are mutually exclusive");
  if (!config_path.empty()) return aoi::load_config(config_path);
  if (!preset.empty()) return aoi::preset_config(preset);
  aoi::fail(aoi::Errc::ValidationError, "one of --config or --preset is required");
}

void print_or_write(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) aoi::fail(aoi::Errc::ValidationError, "cannot write '" + out_path + "'");
  out << text;
}

std::string int128_to_string(aoi::AgeSum v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
  std::string digits;
  while (u > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) digits.push_back('-');
  return {digits.rbegin(), digits.rend()};
}

int cmd_fluid(const aoi::ExperimentConfig& cfg, long long num_agents, const std::string& out) {
  long long n = num_agents > 0 ? num_agents : cfg.num_agents;
  if (n < 1)
    aoi::fail(aoi::Errc::ValidationError,
              "num_agents required (config key num_agents or --num-agents)");
  print_or_write(aoi::fluid_report_json(cfg, n), out);
  return 0;
}

int cmd_simulate(const aoi::ExperimentConfig& cfg_in, long long num_agents, long long seed,
                 const std::string& out) {
  aoi::ExperimentConfig cfg = cfg_in;
  if (num_agents > 0) cfg.num_agents = num_agents;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (cfg.num_agents < 1)
    aoi::fail(aoi::Errc::ValidationError,
              "num_agents required (config key num_agents or --num-agents)");

  aoi::SimConfig sc;
  sc.network = aoi::NetworkSpec{cfg.classes, cfg.num_agents};
  sc.horizon = cfg.horizon;
  sc.seed = cfg.seed;
  sc.initial_ages.kind = aoi::effective_initial_ages(cfg);
  sc.age_function = cfg.age_function;
  sc.snapshot_slots = cfg.snapshot_slots;
  sc.policy.kind = cfg.policy_kind;
  std::vector<double> rescaled;
  if (cfg.policy_kind == aoi::PolicySpec::Kind::ThresholdRandom) {
    rescaled = aoi::resolve_thresholds(cfg);
    sc.policy.thresholds = aoi::unscale_thresholds(rescaled, cfg.num_agents);
  } else {
    sc.policy.index_exponent = cfg.index_exponent;
  }

  const aoi::SimResult res = aoi::run(sc);
  json j{{"num_agents", res.num_agents},
         {"horizon", res.horizon},
         {"seed", cfg.seed},
         {"avg_aoi", res.avg_aoi},
         {"avg_agefn", res.avg_agefn},
         {"age_sum", int128_to_string(res.age_sum)}};
  if (!res.snapshots.empty() && !rescaled.empty()) {
    // KS against the stationary law when it exists; omitted otherwise.
    try {
      const aoi::Equilibrium eq =
          aoi::solve_equilibrium([&] {
            auto cls = cfg.classes;
            for (std::size_t c = 0; c < cls.size(); ++c) cls[c].threshold = rescaled[c];
            return cls;
          }());
      json ks = json::array();
      for (const auto& snap : res.snapshots) {
        const aoi::KsResult k = aoi::ks_distance(snap, eq);
        ks.push_back(json{{"slot", snap.slot}, {"statistic", k.statistic}});
      }
      j["ks"] = ks;
    } catch (const aoi::Error& e) {
      if (e.code() != aoi::Errc::NoEquilibrium) throw;
    }
  }
  print_or_write(j.dump(2) + "\n", out);
  return 0;
}

int cmd_transient(const aoi::ExperimentConfig& cfg, double grid_step, double t_end,
                  double h_max, const std::string& init, double mean, double stddev,
                  std::vector<double> times, const std::string& out_dir) {
  const auto rescaled = aoi::resolve_thresholds(cfg);
  auto classes = cfg.classes;
  for (std::size_t c = 0; c < classes.size(); ++c) classes[c].threshold = rescaled[c];

  aoi::Equilibrium eq;
  bool have_eq = true;
  try {
    eq = aoi::solve_equilibrium(classes);
  } catch (const aoi::Error& e) {
    if (e.code() != aoi::Errc::NoEquilibrium) throw;
    have_eq = false;
  }

  aoi::TransientSolution::InitFn init_fn;
  if (init == "gaussian") {
    init_fn = aoi::gaussian_initializer(classes, mean, stddev);
  } else if (init == "equilibrium") {
    if (!have_eq)
      aoi::fail(aoi::Errc::NoEquilibrium, "no stationary solution for these thresholds");
    init_fn = aoi::equilibrium_initializer(eq);
  } else {
    aoi::fail(aoi::Errc::ValidationError, "--init must be gaussian or equilibrium");
  }

  if (h_max <= 0) h_max = aoi::TransientSolution::default_h_max(classes);
  auto sol = aoi::TransientSolution::init(classes, init_fn, grid_step, h_max);

  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (times.empty() || times.back() < t_end) times.push_back(t_end);

  std::string csv = "class,h,density,time\n";
  for (double t : times) {
    if (t > t_end) break;
    sol.run_to(t, grid_step);
    for (std::size_t c = 0; c < classes.size(); ++c)
      for (std::size_t k = 0; k < sol.num_cells(); ++k)
        csv += std::to_string(c) + ',' + aoi::format_double(sol.grid_h(k)) + ',' +
               aoi::format_double(sol.density(c, k)) + ',' + aoi::format_double(sol.time()) +
               '\n';
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir.empty() ? "." : out_dir);
  const fs::path path = fs::path(out_dir.empty() ? "." : out_dir) / "transient.csv";
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) aoi::fail(aoi::Errc::ValidationError, "cannot write '" + path.string() + "'");
    f << csv;
  }

  json j{{"time", sol.time()},
         {"grid_step", sol.grid_step()},
         {"h_max", sol.h_max()},
         {"total_mass", sol.total_mass()},
         {"max_mass_error", sol.max_mass_error()},
         {"beta_last", sol.beta_last()},
         {"csv", path.string()}};
  if (have_eq) j["sup_distance_to_equilibrium"] = sol.sup_distance(eq);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_experiment(const aoi::ExperimentConfig& cfg_in, const std::string& out_dir) {
  aoi::ExperimentConfig cfg = cfg_in;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const aoi::ScenarioOutcome outcome = aoi::run_scenario(cfg);
  json files = json::array();
  for (const auto& f : outcome.files) files.push_back(f);
  json j{{"scenario", aoi::scenario_name(cfg.scenario)},
         {"files", files},
         {"cells_total", outcome.cells_total},
         {"cells_failed", outcome.cells_failed}};
  std::cout << j.dump(2) << "\n";
  return outcome.cells_failed > 0 ? 4 : 0;
}

int cmd_presets() {
  for (const auto& name : aoi::preset_names()) {
    const auto cfg = aoi::preset_config(name);
    std::cout << "# " << name << "\n";
    std::cout << "preset = " << name << "\n";
    std::cout << "scenario = " << aoi::scenario_name(cfg.scenario) << "\n";
    for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
      std::cout << "classes[" << c << "].fraction = " << aoi::format_double(cfg.classes[c].fraction)
                << "\n";
      std::cout << "classes[" << c
                << "].success_prob = " << aoi::format_double(cfg.classes[c].success_prob) << "\n";
    }
    std::cout << "horizon = " << cfg.horizon << "\n";
    std::cout << "N_sweep = ";
    for (std::size_t i = 0; i < cfg.n_sweep.size(); ++i)
      std::cout << (i ? "," : "") << cfg.n_sweep[i];
    std::cout << "\n";
    if (!cfg.snapshot_slots.empty()) {
      std::cout << "snapshot_slots = ";
      for (std::size_t i = 0; i < cfg.snapshot_slots.size(); ++i)
        std::cout << (i ? "," : "") << cfg.snapshot_slots[i];
      std::cout << "\n";
    }
    if (cfg.age_function.kind == aoi::AgeFunction::Kind::Power)
      std::cout << "age_function.kind = power\nage_function.m = "
                << aoi::format_double(cfg.age_function.m) << "\nthresholds = power\n";
    std::cout << "replications = " << aoi::effective_replications(cfg) << "\n\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information scheduling: simulator and fluid-limit calculators"};
  app.require_subcommand(1);

  std::string config_path, preset, out_path, out_dir;
  long long num_agents = 0;
  long long seed = -1;

  auto add_source = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--preset", preset, "built-in preset name (see `presets`)");
  };

  auto* fluid = app.add_subcommand("fluid", "stationary distribution and optimal thresholds");
  add_source(fluid);
  fluid->add_option("--num-agents", num_agents, "network size for unscaled thresholds");
  fluid->add_option("-o,--output", out_path, "write JSON here instead of stdout");

  auto* simulate = app.add_subcommand("simulate", "single simulation run");
  add_source(simulate);
  simulate->add_option("--num-agents", num_agents, "override config num_agents");
  simulate->add_option("--seed", seed, "override config seed");
  simulate->add_option("-o,--output", out_path, "write JSON here instead of stdout");

  double grid_step = 1e-3, t_end = 20.0, h_max = 0.0, mean = 0.5, stddev = 0.1;
  std::string init = "gaussian";
  std::vector<double> times;
  auto* transient = app.add_subcommand("transient", "fluid PDE evolution");
  add_source(transient);
  transient->add_option("--grid-step", grid_step, "age grid resolution (rescaled units)");
  transient->add_option("--t-end", t_end, "final rescaled time");
  transient->add_option("--h-max", h_max, "age grid extent (0 = automatic)");
  transient->add_option("--init", init, "initial condition: gaussian | equilibrium");
  transient->add_option("--mean", mean, "gaussian init mean (rescaled age)");
  transient->add_option("--std", stddev, "gaussian init standard deviation");
  transient->add_option("--times", times, "rescaled times to dump densities at")
      ->delimiter(',');
  transient->add_option("--output-dir", out_dir, "directory for transient.csv");

  auto* experiment = app.add_subcommand("experiment", "run a scenario from config");
  add_source(experiment);
  experiment->add_option("--output-dir", out_dir, "override config output_dir");

  app.add_subcommand("presets", "list built-in presets as config text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // bad command line counts as a config error
  }

  try {
    if (app.got_subcommand("presets")) return cmd_presets();
    const aoi::ExperimentConfig cfg = load_base(config_path, preset);
    if (app.got_subcommand("fluid")) return cmd_fluid(cfg, num_agents, out_path);
    if (app.got_subcommand("simulate")) return cmd_simulate(cfg, num_agents, seed, out_path);
    if (app.got_subcommand("transient"))
      return cmd_transient(cfg, grid_step, t_end, h_max, init, mean, stddev, times, out_dir);
    if (app.got_subcommand("experiment")) return cmd_experiment(cfg, out_dir);
  } catch (const aoi::Error& e) {
    std::cerr << e.what() << "\n";
    return aoi::is_config_error(e.code()) ? 2 : 3;
  }
  return 0;
}
