#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgmc/experiments.hpp"
#include "sgmc/kernel.hpp"
#include "sgmc/swap_sched.hpp"

namespace {

sgmc::sweep_axis parse_axis(const std::string& text) {
  std::size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw sgmc::config_error("grid axis must look like section.key=v1,v2,... got '" + text + "'");
  sgmc::sweep_axis axis;
  axis.key = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    std::size_t comma = rest.find(',', start);
    std::string v = rest.substr(start, comma == std::string::npos ? std::string::npos
                                                                  : comma - start);
    if (v.empty())
      throw sgmc::config_error("grid axis " + axis.key + " has an empty value");
    axis.values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (axis.values.empty())
    throw sgmc::config_error("grid axis " + axis.key + " has no values");
  return axis;
}

struct overrides {
  std::string seed, out_dir, replications, threads;

  void apply(sgmc::kv_config& kv) const {
    if (!seed.empty()) kv.set("experiment.seed", seed);
    if (!out_dir.empty()) kv.set("experiment.out_dir", out_dir);
    if (!replications.empty()) kv.set("experiment.replications", replications);
    if (!threads.empty()) kv.set("experiment.threads", threads);
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "base seed; replication r runs at seed + r");
    cmd->add_option("--out-dir", out_dir, "output directory for CSVs and the run record");
    cmd->add_option("--replications", replications, "independent repetitions to aggregate");
    cmd->add_option("--threads", threads, "worker threads; affects speed only");
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalable stochastic gradient Monte Carlo samplers"};
  app.require_subcommand(1);

  std::string run_config, sweep_config, validate_config;
  overrides run_over, sweep_over;
  std::vector<std::string> grid_specs;
  std::vector<int> formula_chains{4, 8, 16, 32};
  std::vector<double> formula_rejects{0.3, 0.5, 0.7};
  std::vector<int> formula_windows{0};

  CLI::App* run_cmd = app.add_subcommand("run", "execute one experiment from a config file");
  run_cmd->add_option("--config", run_config, "experiment config path")->required();
  run_over.attach(run_cmd);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run the Cartesian product of --grid axes over a base config");
  sweep_cmd->add_option("--config", sweep_config, "experiment config path")->required();
  sweep_cmd->add_option("--grid", grid_specs, "axis as section.key=v1,v2,... (repeatable)");
  sweep_over.attach(sweep_cmd);

  CLI::App* formula_cmd =
      app.add_subcommand("formula", "print expected round-trip iterations per ladder shape");
  formula_cmd->add_option("--chains", formula_chains, "ladder sizes P")->delimiter(',');
  formula_cmd->add_option("--reject", formula_rejects, "per-pair rejection rates r")
      ->delimiter(',');
  formula_cmd->add_option("--window", formula_windows, "window lengths W, 0 = optimal")
      ->delimiter(',');

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "parse and validate a config without running it");
  validate_cmd->add_option("--config", validate_config, "experiment config path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      sgmc::kv_config kv = sgmc::kv_config::parse_file(run_config);
      run_over.apply(kv);
      sgmc::experiment_config cfg = sgmc::build_experiment_config(kv);
      sgmc::run_summary summary = sgmc::run_experiment(cfg);
      std::cout << cfg.kind_name << ": " << cfg.replications << " replication(s) in "
                << sgmc::format_double(summary.wall_seconds) << "s -> " << cfg.out_dir << "\n";
      for (const auto& [key, value] : summary.means)
        std::cout << "  " << key << " = " << sgmc::format_double(value) << "\n";
    } else if (sweep_cmd->parsed()) {
      sgmc::kv_config kv = sgmc::kv_config::parse_file(sweep_config);
      sweep_over.apply(kv);
      std::vector<sgmc::sweep_axis> axes;
      for (const auto& g : grid_specs) axes.push_back(parse_axis(g));
      sgmc::kv_config probe = kv;
      sgmc::experiment_config base_cfg = sgmc::build_experiment_config(probe);
      sgmc::run_sweep(kv, axes, base_cfg.out_dir, base_cfg.threads);
      std::cout << "sweep -> " << base_cfg.out_dir << "/sweep.csv\n";
    } else if (formula_cmd->parsed()) {
      std::cout << "P,W,r,expected_iterations\n";
      for (int p : formula_chains)
        for (double r : formula_rejects)
          for (int w : formula_windows) {
            int window = w > 0 ? w : sgmc::optimal_window(p, r);
            std::cout << p << ',' << window << ',' << sgmc::format_double(r) << ','
                      << sgmc::format_double(sgmc::expected_round_trip_time(p, window, r))
                      << "\n";
          }
    } else if (validate_cmd->parsed()) {
      sgmc::kv_config kv = sgmc::kv_config::parse_file(validate_config);
      sgmc::experiment_config cfg = sgmc::build_experiment_config(kv);
      std::cout << "ok: " << cfg.kind_name << ", " << cfg.replications << " replication(s), seed "
                << cfg.seed << "\n";
    }
  } catch (const sgmc::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const sgmc::divergence_error& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const sgmc::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
