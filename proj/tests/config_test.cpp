#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sgmc/config.hpp"
#include "sgmc/replica.hpp"

using namespace sgmc;

namespace {

kv_config minimal(const std::string& kind) {
  return kv_config::parse_string("[experiment]\nkind = " + kind + "\n");
}

}  // namespace

TEST_CASE("ini parsing handles sections comments and whitespace") {
  auto kv = kv_config::parse_string(
      "# leading comment\n"
      "[sampler]\n"
      "  taus =  1, 10 \n"
      "swap_every = 4\n"
      "; another comment\n"
      "smoothing = running_mean\n"
      "\n"
      "[experiment]\n"
      "verbose = on\n"
      "seed = 42\n");
  CHECK(kv.has("sampler.taus"));
  CHECK_FALSE(kv.has("sampler.seed"));
  CHECK(kv.get_list_or("sampler.taus", {}) == std::vector<double>{1.0, 10.0});
  CHECK(kv.get_int_or("sampler.swap_every", 0) == 4);
  CHECK(kv.get_string("sampler.smoothing") == "running_mean");
  CHECK(kv.get_bool_or("experiment.verbose", false));
  CHECK(kv.get_u64_or("experiment.seed", 0) == 42);
  CHECK(kv.get_double_or("sampler.absent", 2.5) == 2.5);
  CHECK(kv.get_string_or("sampler.absent", "x") == "x");
  kv.reject_unknown();  // every key was read
}

TEST_CASE("malformed input is rejected with the offending line") {
  CHECK_THROWS_WITH_AS((void)kv_config::parse_string("[s]\na = 1\na = 2\n", "dup.ini"),
                       "dup.ini:3: duplicate key s.a", config_error);
  CHECK_THROWS_WITH_AS((void)kv_config::parse_string("a = 1\n", "loose.ini"),
                       "loose.ini:1: key outside any section", config_error);
  CHECK_THROWS_AS((void)kv_config::parse_string("[s]\nnot a pair\n"), config_error);
  CHECK_THROWS_AS((void)kv_config::parse_string("[unterminated\n"), config_error);
  CHECK_THROWS_AS((void)kv_config::parse_string("[]\n"), config_error);
  CHECK_THROWS_AS((void)kv_config::parse_string("[s]\n= 5\n"), config_error);
}

TEST_CASE("typed getters name the key and the bad value") {
  auto kv = kv_config::parse_string(
      "[s]\nnum = abc\nfrac = 1.5\nflag = maybe\nlist = 1,,2\nuns = abc\n");
  CHECK_THROWS_WITH_AS((void)kv.get_double("s.num"),
                       "s.num: cannot parse number from 'abc'", config_error);
  CHECK_THROWS_AS((void)kv.get_int_or("s.frac", 0), config_error);
  CHECK_THROWS_AS((void)kv.get_bool_or("s.flag", false), config_error);
  CHECK_THROWS_AS((void)kv.get_list_or("s.list", {}), config_error);
  CHECK_THROWS_AS((void)kv.get_u64_or("s.uns", 0), config_error);
  CHECK_THROWS_AS((void)kv.get_string("s.missing"), config_error);
  CHECK(kv.get_double("s.frac") == 1.5);
}

TEST_CASE("unread keys are reported as unknown") {
  auto kv = kv_config::parse_string("[s]\nused = 1\nstray = 2\n");
  CHECK(kv.get_double("s.used") == 1.0);
  CHECK_THROWS_WITH_AS(kv.reject_unknown(), "unknown keys: s.stray", config_error);
}

TEST_CASE("set overrides existing values and appends new ones") {
  auto kv = kv_config::parse_string("[s]\na = 1\n");
  kv.set("s.a", "7");
  CHECK(kv.get_double("s.a") == 7.0);
  kv.set("s.b", "8");
  kv.set("t.c", "9");
  CHECK(kv.get_double("s.b") == 8.0);
  CHECK(kv.get_double("t.c") == 9.0);
  auto all = kv.entries();
  REQUIRE(all.size() == 3);
  CHECK(all[0].first == "s.a");
  CHECK(all[0].second == "7");
  CHECK(all[2].first == "t.c");
  kv.reject_unknown();
}

TEST_CASE("replica exchange preset fills the mixture defaults") {
  auto kv = minimal("resgld_mixture");
  auto cfg = build_experiment_config(kv);
  CHECK(cfg.kind == experiment_kind::resgld_mixture);
  CHECK(cfg.kind_name == "resgld_mixture");
  CHECK(cfg.seed == 1);
  CHECK(cfg.target_name == "gauss_mix_1d");
  CHECK(cfg.dim == 1);
  CHECK(cfg.resgld.taus == std::vector<double>{1.0, 10.0});
  CHECK(cfg.resgld.etas == std::vector<double>{0.03});
  CHECK(cfg.resgld.factor_f == 1.0);
  CHECK(cfg.resgld.sigma2_init == 100.0);
  CHECK(cfg.resgld.sigma2_mode == smoothed_scalar::mode::running_mean);
  CHECK_FALSE(cfg.resgld.variance_reduction);
  CHECK(cfg.resgld.init == std::vector<double>{0.0});
  CHECK(cfg.resgld.iterations == 100000);
  CHECK(cfg.noise.energy == noise_spec::energy_kind::gaussian);
  CHECK(cfg.noise.energy_std == 2.0);
  CHECK(cfg.noise.grad == noise_spec::gradient_kind::gaussian);
  CHECK(cfg.noise.gradient_std == 2.0);
  CHECK(cfg.build_target().dim == 1);
}

TEST_CASE("the swap discount accepts inf and numeric overrides") {
  auto kv = minimal("resgld_mixture");
  kv.set("sampler.factor_f", "inf");
  CHECK(build_experiment_config(kv).resgld.factor_f == factor_f_infinite);
  auto kv2 = minimal("resgld_mixture");
  kv2.set("sampler.factor_f", "infinity");
  CHECK(build_experiment_config(kv2).resgld.factor_f == factor_f_infinite);
  auto kv3 = minimal("resgld_mixture");
  kv3.set("sampler.factor_f", "2.5");
  CHECK(build_experiment_config(kv3).resgld.factor_f == 2.5);
}

TEST_CASE("posterior preset turns on variance reduction with a cold data fit") {
  auto kv = minimal("vr_posterior");
  auto cfg = build_experiment_config(kv);
  CHECK(cfg.target_name == "gauss_mix_posterior");
  CHECK(cfg.resgld.taus == std::vector<double>{10.0, 1000.0});
  CHECK(cfg.resgld.etas == std::vector<double>{1e-7});
  CHECK(cfg.resgld.sigma2_init == 1e10);
  CHECK(cfg.resgld.sigma2_mode == smoothed_scalar::mode::fixed);
  CHECK(cfg.resgld.variance_reduction);
  CHECK(cfg.resgld.anchor_every == 40);
  CHECK(cfg.resgld.init == std::vector<double>{30.0});
  CHECK(cfg.resgld.iterations == 50000);
  CHECK(cfg.noise.energy == noise_spec::energy_kind::none);
  CHECK(cfg.data_size == 100000);
  CHECK(cfg.batch_size == 100);
}

TEST_CASE("ladder preset matches the published lattice run") {
  auto kv = minimal("deo_lattice");
  auto cfg = build_experiment_config(kv);
  CHECK(cfg.target_name == "lattice25");
  CHECK(cfg.dim == 2);
  CHECK(cfg.deo.chains == 16);
  CHECK(cfg.deo.eta_low == 0.003);
  CHECK(cfg.deo.eta_high == 0.6);
  CHECK(cfg.deo.target_rate == 0.4);
  CHECK(cfg.deo.window == 0);
  CHECK_FALSE(cfg.deo.literal_gates);
  CHECK(cfg.deo.exploit_tau == 1.0);
  CHECK(cfg.deo.gamma_a == 160.0);
  CHECK(cfg.deo.gamma_b == 2000.0);
  CHECK(cfg.deo.adapt_etas);
  CHECK(cfg.deo.adapt_correction);
  CHECK(cfg.deo.init == std::vector<double>{0.0, 0.0});
  CHECK(cfg.deo.iterations == 20000);
  CHECK(cfg.build_target().dim == 2);
}

TEST_CASE("oracle preset exposes the index process knobs") {
  auto kv = minimal("roundtrip_oracle");
  auto cfg = build_experiment_config(kv);
  CHECK(cfg.oracle.chains == 16);
  CHECK(cfg.oracle.window == 0);
  CHECK(cfg.oracle.reject == 0.6);
  CHECK(cfg.oracle.round_trips == 10000);
}

TEST_CASE("contour presets pin the partition geometry per kind") {
  auto kv = minimal("csgld_mixture");
  auto cfg = build_experiment_config(kv);
  CHECK(cfg.flavor == theta_flavor::csgld);
  CHECK(cfg.contour.part.m == 25);
  CHECK(cfg.contour.part.u1 == 0.6);
  CHECK(cfg.contour.part.delta_u == 0.4);
  CHECK(cfg.contour.part.zeta == 1.0);
  CHECK(cfg.contour.eps == 0.03);
  CHECK(cfg.contour.chains == 1);
  CHECK(cfg.contour.omega.a == 1.0);
  CHECK(cfg.contour.omega.b == 100.0);
  CHECK(cfg.contour.omega.power == 0.6);
  CHECK(cfg.contour.iterations == 1000000);
  CHECK(cfg.noise.energy == noise_spec::energy_kind::none);

  auto kv2 = minimal("icsgld_lattice");
  auto icfg = build_experiment_config(kv2);
  CHECK(icfg.flavor == theta_flavor::icsgld);
  CHECK(icfg.regularized);
  CHECK(icfg.contour.part.m == 100);
  CHECK(icfg.contour.part.u1 == -3.875);
  CHECK(icfg.contour.part.delta_u == 0.125);
  CHECK(icfg.contour.part.zeta == 0.75);
  CHECK(icfg.contour.chains == 5);
  CHECK(icfg.contour.eps == 3e-3);
  CHECK(icfg.contour.omega.cap == 3e-3);
  CHECK(icfg.contour.iterations == 80000);
  CHECK(icfg.noise.energy_std == 1.0);
  CHECK(icfg.noise.gradient_std == 1.0);

  auto kv3 = minimal("awsgld_cdf");
  auto acfg = build_experiment_config(kv3);
  CHECK(acfg.flavor == theta_flavor::awsgld);
  CHECK(acfg.target_name == "quadratic_well");
  CHECK(acfg.contour.part.m == 1000);
  CHECK(acfg.contour.part.u1 == 0.01);
  CHECK(acfg.contour.part.delta_u == 0.01);
  CHECK(acfg.contour.eps == 0.005);
  CHECK(acfg.contour.omega.a == 0.2);
  CHECK(acfg.contour.thinning == 10);
  CHECK(acfg.noise.energy == noise_spec::energy_kind::none);
  CHECK(acfg.noise.grad == noise_spec::gradient_kind::gaussian);
  CHECK(acfg.noise.gradient_std == 0.1);
}

TEST_CASE("benchmark preset validates the function and the cell count") {
  auto kv = minimal("awsgld_benchmark");
  auto cfg = build_experiment_config(kv);
  CHECK(cfg.bench.function == "griewank");
  CHECK(cfg.bench.cells == 100);
  CHECK(cfg.bench.compare_sgld);
  CHECK(cfg.bench.tau_low == 1.0);
  CHECK(cfg.bench.budget == 100000);

  auto bad_fn = minimal("awsgld_benchmark");
  bad_fn.set("benchmark.function", "styblinski");
  CHECK_THROWS_AS((void)build_experiment_config(bad_fn), config_error);
  auto bad_cells = minimal("awsgld_benchmark");
  bad_cells.set("benchmark.cells", "50");
  CHECK_THROWS_AS((void)build_experiment_config(bad_cells), config_error);
}

TEST_CASE("a global iteration override reaches every kind") {
  auto kv = minimal("resgld_mixture");
  kv.set("experiment.iterations", "123");
  CHECK(build_experiment_config(kv).resgld.iterations == 123);
  auto kv2 = minimal("csgld_mixture");
  kv2.set("experiment.iterations", "123");
  CHECK(build_experiment_config(kv2).contour.iterations == 123);
  auto kv3 = minimal("deo_lattice");
  kv3.set("experiment.iterations", "123");
  CHECK(build_experiment_config(kv3).deo.iterations == 123);
  auto kv4 = minimal("awsgld_benchmark");
  kv4.set("experiment.iterations", "123");
  CHECK(build_experiment_config(kv4).bench.budget == 123);
}

TEST_CASE("contract violations fail loudly at build time") {
  auto bad_kind = minimal("nope");
  CHECK_THROWS_AS((void)build_experiment_config(bad_kind), config_error);

  auto bad_batch = minimal("resgld_mixture");
  bad_batch.set("sampler.variance_batch", "1");
  CHECK_THROWS_AS((void)build_experiment_config(bad_batch), config_error);

  auto bad_dof = minimal("resgld_mixture");
  bad_dof.set("noise.energy", "student_t");
  bad_dof.set("noise.energy_dof", "2.0");
  CHECK_THROWS_AS((void)build_experiment_config(bad_dof), config_error);

  auto bad_noise = minimal("resgld_mixture");
  bad_noise.set("noise.energy", "cauchy");
  CHECK_THROWS_AS((void)build_experiment_config(bad_noise), config_error);

  auto bad_cells = minimal("csgld_mixture");
  bad_cells.set("partition.cells", "1");
  CHECK_THROWS_AS((void)build_experiment_config(bad_cells), config_error);

  auto bad_du = minimal("csgld_mixture");
  bad_du.set("partition.delta_u", "0");
  CHECK_THROWS_AS((void)build_experiment_config(bad_du), config_error);

  auto bad_eps = minimal("csgld_mixture");
  bad_eps.set("contour.eps", "0");
  CHECK_THROWS_AS((void)build_experiment_config(bad_eps), config_error);

  auto bad_flavor = minimal("csgld_mixture");
  bad_flavor.set("contour.flavor", "wsgld");
  CHECK_THROWS_AS((void)build_experiment_config(bad_flavor), config_error);

  auto bad_chains = minimal("deo_lattice");
  bad_chains.set("ladder.chains", "1");
  CHECK_THROWS_AS((void)build_experiment_config(bad_chains), config_error);

  auto bad_rate = minimal("deo_lattice");
  bad_rate.set("ladder.target_rate", "1.0");
  CHECK_THROWS_AS((void)build_experiment_config(bad_rate), config_error);

  auto bad_reject = minimal("roundtrip_oracle");
  bad_reject.set("oracle.reject", "1.0");
  CHECK_THROWS_AS((void)build_experiment_config(bad_reject), config_error);

  auto bad_reps = minimal("resgld_mixture");
  bad_reps.set("experiment.replications", "0");
  CHECK_THROWS_AS((void)build_experiment_config(bad_reps), config_error);

  auto bad_threads = minimal("resgld_mixture");
  bad_threads.set("experiment.threads", "0");
  CHECK_THROWS_AS((void)build_experiment_config(bad_threads), config_error);

  auto bad_iters = minimal("resgld_mixture");
  bad_iters.set("experiment.iterations", "-1");
  CHECK_THROWS_AS((void)build_experiment_config(bad_iters), config_error);

  auto stray = minimal("resgld_mixture");
  stray.set("sampler.bogus", "1");
  CHECK_THROWS_WITH_AS((void)build_experiment_config(stray),
                       "unknown keys: sampler.bogus", config_error);
}

TEST_CASE("unknown targets are rejected when built") {
  auto kv = minimal("resgld_mixture");
  auto cfg = build_experiment_config(kv);
  cfg.target_name = "nope";
  CHECK_THROWS_AS((void)cfg.build_target(), config_error);
}

TEST_CASE("configs load from disk and missing files raise io errors") {
  const std::string path = "config_roundtrip_tmp.ini";
  {
    std::ofstream out(path);
    out << "[experiment]\nkind = deo_lattice\nseed = 9\n[ladder]\nchains = 4\n";
  }
  auto cfg = load_experiment_config(path);
  CHECK(cfg.kind == experiment_kind::deo_lattice);
  CHECK(cfg.seed == 9);
  CHECK(cfg.deo.chains == 4);
  REQUIRE(std::remove(path.c_str()) == 0);
  CHECK_THROWS_AS((void)load_experiment_config(path), io_error);
  CHECK_THROWS_AS((void)load_experiment_config("no_such_dir/x.ini"), io_error);
}

TEST_CASE("the echo preserves every key for the run record") {
  auto kv = minimal("resgld_mixture");
  kv.set("sampler.taus", "1, 5");
  auto cfg = build_experiment_config(kv);
  bool saw_kind = false, saw_taus = false;
  for (const auto& [k, v] : cfg.echo) {
    if (k == "experiment.kind" && v == "resgld_mixture") saw_kind = true;
    if (k == "sampler.taus" && v == "1, 5") saw_taus = true;
  }
  CHECK(saw_kind);
  CHECK(saw_taus);
  CHECK(cfg.resgld.taus == std::vector<double>{1.0, 5.0});
}
