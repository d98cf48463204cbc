#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgmc/config.hpp"
#include "sgmc/experiments.hpp"

using namespace sgmc;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  return line;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

experiment_config tiny_mixture(long long iterations, std::uint64_t seed) {
  auto kv = kv_config::parse_string("[experiment]\nkind = resgld_mixture\n");
  kv.set("experiment.iterations", std::to_string(iterations));
  kv.set("experiment.seed", std::to_string(seed));
  auto cfg = build_experiment_config(kv);
  return cfg;
}

struct scratch_dir {
  fs::path path;
  explicit scratch_dir(const std::string& name) : path(name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
};

}  // namespace

TEST_CASE("doubles format with the shortest exact round trip") {
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-3.25) == "-3.25");
  for (double v : {1e-7, 1.0 / 3.0, 6.02e23, -0.0625, 321.5990668221963}) {
    std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("one replication writes the trace files with pinned headers") {
  scratch_dir tmp("exp_test_single");
  auto cfg = tiny_mixture(200, 3);
  auto metrics = run_replication(cfg, 3, (tmp.path / "run").string());

  CHECK(first_line(tmp.path / "run" / "swaps.csv") ==
        "iteration,pair,energy_low,energy_high,variance,probability,accepted");
  CHECK(first_line(tmp.path / "run" / "samples.csv") ==
        "iteration,chain,x_1,energy,multiplier,J");
  CHECK(line_count(tmp.path / "run" / "samples.csv") == 201);

  CHECK(metrics.count("attempted_swaps") == 1);
  CHECK(metrics.count("accepted_swaps") == 1);
  CHECK(metrics.count("swap_rate") == 1);
  CHECK(metrics.count("mass_below") == 1);
  CHECK(metrics.count("mass_below_reference") == 1);
  CHECK(metrics.count("mode_mass_error") == 1);
  CHECK(metrics.count("control_coefficient") == 0);  // variance reduction is off
  CHECK(metrics.at("attempted_swaps") == 200.0);
  CHECK(metrics.at("mass_below_reference") > 0.3);
  CHECK(metrics.at("mass_below_reference") < 0.5);
}

TEST_CASE("identical seeds reproduce byte identical traces") {
  scratch_dir tmp("exp_test_repro");
  auto cfg = tiny_mixture(200, 11);
  auto a = run_replication(cfg, 11, (tmp.path / "a").string());
  auto b = run_replication(cfg, 11, (tmp.path / "b").string());
  CHECK(a == b);
  CHECK(read_file(tmp.path / "a" / "swaps.csv") == read_file(tmp.path / "b" / "swaps.csv"));
  CHECK(read_file(tmp.path / "a" / "samples.csv") == read_file(tmp.path / "b" / "samples.csv"));
  auto c = run_replication(cfg, 12, (tmp.path / "c").string());
  CHECK(read_file(tmp.path / "a" / "swaps.csv") != read_file(tmp.path / "c" / "swaps.csv"));
}

TEST_CASE("replicated experiments aggregate into a summary and a run record") {
  scratch_dir tmp("exp_test_summary");
  auto cfg = tiny_mixture(200, 5);
  cfg.replications = 2;
  cfg.out_dir = (tmp.path / "out").string();
  auto summary = run_experiment(cfg);

  REQUIRE(summary.per_replication.size() == 2);
  CHECK(fs::exists(tmp.path / "out" / "rep_0" / "swaps.csv"));
  CHECK(fs::exists(tmp.path / "out" / "rep_1" / "swaps.csv"));
  CHECK(summary.std_errors.at("sample_mean") >= 0.0);
  CHECK(summary.means.at("attempted_swaps") == 200.0);

  CHECK(first_line(tmp.path / "out" / "summary.csv") == "metric,value,std_error,replications");
  std::string sum = read_file(tmp.path / "out" / "summary.csv");
  CHECK(sum.find("swap_rate,") != std::string::npos);
  CHECK(sum.find(",2\n") != std::string::npos);

  auto record = nlohmann::json::parse(read_file(tmp.path / "out" / "run_record.json"));
  CHECK(record["version"] == "0.1.0");
  CHECK(record["experiment"] == "resgld_mixture");
  CHECK(record["seed"] == 5);
  CHECK(record["replications"] == 2);
  CHECK(record["config"]["experiment.kind"] == "resgld_mixture");
  CHECK(record["metrics"]["swap_rate"].contains("value"));
  CHECK(record["metrics"]["swap_rate"].contains("std_error"));
  CHECK(record["wall_seconds"].get<double>() > 0.0);
}

TEST_CASE("a single replication runs in the output root") {
  scratch_dir tmp("exp_test_flat");
  auto cfg = tiny_mixture(100, 2);
  cfg.out_dir = (tmp.path / "out").string();
  auto summary = run_experiment(cfg);
  CHECK(summary.per_replication.size() == 1);
  CHECK(fs::exists(tmp.path / "out" / "swaps.csv"));
  CHECK_FALSE(fs::exists(tmp.path / "out" / "rep_0"));
  CHECK(summary.std_errors.at("swap_rate") == 0.0);
}

TEST_CASE("worker threads change wall time but never the outputs") {
  scratch_dir tmp("exp_test_threads");
  auto cfg = tiny_mixture(200, 7);
  cfg.replications = 3;
  cfg.threads = 1;
  cfg.out_dir = (tmp.path / "serial").string();
  run_experiment(cfg);
  cfg.threads = 3;
  cfg.out_dir = (tmp.path / "parallel").string();
  run_experiment(cfg);

  CHECK(read_file(tmp.path / "serial" / "summary.csv") ==
        read_file(tmp.path / "parallel" / "summary.csv"));
  for (int r = 0; r < 3; ++r) {
    auto rep = "rep_" + std::to_string(r);
    CHECK(read_file(tmp.path / "serial" / rep / "swaps.csv") ==
          read_file(tmp.path / "parallel" / rep / "swaps.csv"));
    CHECK(read_file(tmp.path / "serial" / rep / "samples.csv") ==
          read_file(tmp.path / "parallel" / rep / "samples.csv"));
  }
}

TEST_CASE("contour runs trace the weight vector at the requested stride") {
  scratch_dir tmp("exp_test_theta");
  auto kv = kv_config::parse_string("[experiment]\nkind = csgld_mixture\n");
  kv.set("experiment.iterations", "300");
  auto cfg = build_experiment_config(kv);
  auto metrics = run_replication(cfg, 3, (tmp.path / "flat").string());
  std::string header = first_line(tmp.path / "flat" / "theta.csv");
  CHECK(header.rfind("iteration,flavor,theta_1,", 0) == 0);
  CHECK(header.find(",theta_25") != std::string::npos);
  // no stride configured: only the final vector is recorded
  CHECK(line_count(tmp.path / "flat" / "theta.csv") == 2);
  CHECK(metrics.count("theta_sup_error") == 1);
  CHECK(metrics.count("min_multiplier") == 1);

  auto kv2 = kv_config::parse_string("[experiment]\nkind = csgld_mixture\n");
  kv2.set("experiment.iterations", "300");
  kv2.set("contour.theta_stride", "100");
  auto cfg2 = build_experiment_config(kv2);
  run_replication(cfg2, 3, (tmp.path / "strided").string());
  CHECK(line_count(tmp.path / "strided" / "theta.csv") == 4);
  std::string second = read_file(tmp.path / "strided" / "theta.csv");
  CHECK(second.find("\n99,csgld,") != std::string::npos);
}

TEST_CASE("sweeps lay out one cell per grid point with a combined table") {
  scratch_dir tmp("exp_test_sweep");
  auto base = kv_config::parse_string(
      "[experiment]\nkind = roundtrip_oracle\n[oracle]\nround_trips = 500\n");
  sweep_axis axis{"oracle.chains", {"4", "8"}};
  run_sweep(base, {axis}, (tmp.path / "grid").string(), 1);

  CHECK(fs::exists(tmp.path / "grid" / "cell_0" / "summary.csv"));
  CHECK(fs::exists(tmp.path / "grid" / "cell_1" / "summary.csv"));
  CHECK(first_line(tmp.path / "grid" / "sweep.csv") ==
        "cell,oracle.chains,formula_round_trip,mean_round_trip,round_trip_std_error,"
        "round_trips,window,z_score");
  CHECK(line_count(tmp.path / "grid" / "sweep.csv") == 3);
  std::string table = read_file(tmp.path / "grid" / "sweep.csv");
  CHECK(table.find("\n0,4,") != std::string::npos);
  CHECK(table.find("\n1,8,") != std::string::npos);
}

TEST_CASE("two axes enumerate the full cartesian product") {
  scratch_dir tmp("exp_test_sweep2");
  auto base = kv_config::parse_string(
      "[experiment]\nkind = roundtrip_oracle\n[oracle]\nround_trips = 200\n");
  sweep_axis a{"oracle.chains", {"4", "8"}};
  sweep_axis b{"oracle.reject", {"0.3", "0.5"}};
  run_sweep(base, {a, b}, (tmp.path / "grid").string(), 2);
  CHECK(first_line(tmp.path / "grid" / "sweep.csv")
            .rfind("cell,oracle.chains,oracle.reject,", 0) == 0);
  CHECK(line_count(tmp.path / "grid" / "sweep.csv") == 5);
  for (int i = 0; i < 4; ++i)
    CHECK(fs::exists(tmp.path / "grid" / ("cell_" + std::to_string(i)) / "run_record.json"));
}

TEST_CASE("sweep axes are validated before anything runs") {
  scratch_dir tmp("exp_test_sweep_bad");
  auto base = kv_config::parse_string("[experiment]\nkind = roundtrip_oracle\n");
  CHECK_THROWS_AS(
      run_sweep(base, {{"oracle.bogus", {"1"}}}, (tmp.path / "x").string(), 1),
      config_error);
  CHECK_THROWS_AS(run_sweep(base, {{"oracle.chains", {}}}, (tmp.path / "y").string(), 1),
                  config_error);
  CHECK_FALSE(fs::exists(tmp.path / "x" / "sweep.csv"));
}

TEST_CASE("unwritable output locations raise io errors") {
  scratch_dir tmp("exp_test_io");
  std::ofstream(tmp.path / "blocker") << "x";
  auto cfg = tiny_mixture(10, 1);
  CHECK_THROWS_AS((void)run_replication(cfg, 1, (tmp.path / "blocker" / "sub").string()),
                  io_error);
}
