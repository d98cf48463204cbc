#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgmc/contour.hpp"
#include "sgmc/replica.hpp"
#include "sgmc/swap_sched.hpp"
#include "sgmc/target.hpp"

namespace sgmc {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// flat ini-style store: [section] headers, key = value lines, # or ;
// comments. Every read marks its key; reject_unknown() turns leftovers into
// config errors so typos never pass silently.
class kv_config {
 public:
  static kv_config parse_file(const std::string& path);   // io_error on open failure
  static kv_config parse_string(const std::string& text, const std::string& origin = "<string>");

  void set(const std::string& section_key, const std::string& value);
  bool has(const std::string& section_key) const;

  std::string get_string(const std::string& section_key) const;
  std::string get_string_or(const std::string& section_key, const std::string& fallback) const;
  double get_double(const std::string& section_key) const;
  double get_double_or(const std::string& section_key, double fallback) const;
  long long get_int_or(const std::string& section_key, long long fallback) const;
  bool get_bool_or(const std::string& section_key, bool fallback) const;
  std::uint64_t get_u64_or(const std::string& section_key, std::uint64_t fallback) const;
  std::vector<double> get_list_or(const std::string& section_key,
                                  const std::vector<double>& fallback) const;

  void reject_unknown() const;
  std::vector<std::pair<std::string, std::string>> entries() const;  // with section prefixes

 private:
  struct entry {
    std::string key, value;
    int line = 0;
    mutable bool used = false;
  };
  struct section {
    std::string name;
    std::vector<entry> entries;
  };
  std::vector<section> sections_;
  std::string origin_ = "<none>";

  const entry* find(const std::string& section_key) const;
};

enum class experiment_kind {
  resgld_mixture,
  vr_posterior,
  deo_lattice,
  roundtrip_oracle,
  csgld_mixture,
  icsgld_lattice,
  awsgld_cdf,
  awsgld_benchmark
};

struct oracle_options {
  int chains = 16;
  int window = 0;  // 0 picks the closed-form optimum
  double reject = 0.6;
  long long round_trips = 10000;
};

struct benchmark_options {
  std::string function = "griewank";
  int cells = 100;          // partition resolution, 10 or 100
  bool compare_sgld = true; // also run plain descent baselines
  double tau_low = 1.0;     // exploitation temperature for the low baseline
  long long budget = 100000;
};

struct experiment_config {
  experiment_kind kind = experiment_kind::resgld_mixture;
  std::string kind_name;
  std::uint64_t seed = 1;
  int replications = 1;
  int threads = 1;
  std::string out_dir = "out";
  long long iterations = 0;

  // target construction inputs
  std::string target_name;
  std::vector<double> mix_weights, mix_means, mix_stds;
  int dim = 1;
  bool regularized = false;
  long long data_size = 100000;
  std::uint64_t data_seed = 7;
  int batch_size = 100;
  double beta_true = -5.0, phi = 20.0, sigma = 5.0;
  std::string benchmark_name;

  noise_spec noise;
  resgld_options resgld;
  deo_options deo;
  contour_options contour;
  theta_flavor flavor = theta_flavor::csgld;
  oracle_options oracle;
  benchmark_options bench;

  // raw key/value view for the run record
  std::vector<std::pair<std::string, std::string>> echo;

  target_model build_target() const;
};

experiment_config load_experiment_config(const std::string& path);
experiment_config build_experiment_config(kv_config& kv);

}  // namespace sgmc
