#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgmc/config.hpp"

namespace sgmc {

// scalar results of one replication, keyed by metric name; map keeps the
// summary column order stable
using metric_map = std::map<std::string, double>;

struct run_summary {
  std::vector<metric_map> per_replication;
  metric_map means;
  metric_map std_errors;  // zero with a single replication
  double wall_seconds = 0.0;
};

// one replication under its own seed; CSV traces land in dir
metric_map run_replication(const experiment_config& cfg, std::uint64_t seed,
                           const std::string& dir);

// replication loop (replication r runs at seed + r, in rep_<r>/ when there is
// more than one), aggregation, summary.csv and run_record.json in cfg.out_dir.
// threads only changes wall time, never the outputs
run_summary run_experiment(const experiment_config& cfg);

struct sweep_axis {
  std::string key;  // section.key
  std::vector<std::string> values;
};

// Cartesian product of the axes over a base config; every cell keeps the base
// seed so cells are compared on paired randomness. Cell i runs in
// out_dir/cell_<i> and contributes one row of metric means to sweep.csv
void run_sweep(const kv_config& base, const std::vector<sweep_axis>& axes,
               const std::string& out_dir, int threads);

// locale-independent shortest round-trip formatting shared by every writer
std::string format_double(double v);

}  // namespace sgmc
