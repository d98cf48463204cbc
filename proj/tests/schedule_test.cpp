#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "sgmc/swap_sched.hpp"
#include "sgmc/target.hpp"

using namespace sgmc;

namespace {

swap_schedule make_sched(swap_scheme scheme, int chains, int window = 1,
                         bool literal = false) {
  swap_schedule s;
  s.scheme = scheme;
  s.chains = chains;
  s.window = window;
  s.literal_gates = literal;
  s.reset();
  return s;
}

std::vector<chain_state> dummy_states(int P) {
  std::vector<chain_state> states(P);
  for (int p = 0; p < P; ++p) {
    states[p].x = {static_cast<double>(p)};
    states[p].cached_noisy_energy = static_cast<double>(p);
    states[p].chain_index = p;
  }
  return states;
}

}  // namespace

TEST_CASE("windowed scheme alternates parity per window") {
  auto s = make_sched(swap_scheme::deo_w, 4, 2);
  CHECK(eligible_pairs(s, 0) == std::vector<int>{0, 2});
  CHECK(eligible_pairs(s, 1) == std::vector<int>{0, 2});
  CHECK(eligible_pairs(s, 2) == std::vector<int>{1});
  CHECK(eligible_pairs(s, 3) == std::vector<int>{1});
  CHECK(eligible_pairs(s, 4) == std::vector<int>{0, 2});
}

TEST_CASE("a swap closes its gate for the rest of the window") {
  auto s = make_sched(swap_scheme::deo_w, 4, 2);
  auto states = dummy_states(4);
  auto events =
      attempt_window_swaps(s, states, [](int j) { return j == 0; }, 0, nullptr);
  REQUIRE(events.size() == 2);
  CHECK(events[0].accepted);
  CHECK_FALSE(events[1].accepted);
  // pair 0 swapped at k = 0, so only pair 2 stays eligible at k = 1
  CHECK(eligible_pairs(s, 1) == std::vector<int>{2});
  // the next window reopens everything on odd parity
  CHECK(eligible_pairs(s, 2) == std::vector<int>{1});
}

TEST_CASE("literal gates forfeit the window after its first iteration") {
  auto s = make_sched(swap_scheme::deo_w, 4, 2, true);
  CHECK(eligible_pairs(s, 0) == std::vector<int>{0, 2});
  CHECK(eligible_pairs(s, 1).empty());
  CHECK(eligible_pairs(s, 2) == std::vector<int>{1});
}

TEST_CASE("plain even odd scheme is the window one special case") {
  auto s = make_sched(swap_scheme::deo, 5);
  CHECK(eligible_pairs(s, 0) == std::vector<int>{0, 2});
  CHECK(eligible_pairs(s, 1) == std::vector<int>{1, 3});
  CHECK(eligible_pairs(s, 2) == std::vector<int>{0, 2});
}

TEST_CASE("random parity scheme draws one of the two parity classes") {
  auto s = make_sched(swap_scheme::seo, 5);
  s.rng = rng_stream(12);
  std::set<std::vector<int>> seen;
  for (int k = 0; k < 64; ++k) seen.insert(eligible_pairs(s, k));
  CHECK(seen.size() == 2);
  CHECK(seen.count({0, 2}) == 1);
  CHECK(seen.count({1, 3}) == 1);
}

TEST_CASE("adjacent scheme lists every pair") {
  auto s = make_sched(swap_scheme::adj, 4);
  CHECK(eligible_pairs(s, 7) == std::vector<int>{0, 1, 2});
}

TEST_CASE("accepted swaps exchange positions and cached energies") {
  auto s = make_sched(swap_scheme::deo, 3);
  auto states = dummy_states(3);
  attempt_window_swaps(s, states, [](int) { return true; }, 0, nullptr);
  CHECK(states[0].x[0] == doctest::Approx(1.0));
  CHECK(states[1].x[0] == doctest::Approx(0.0));
  CHECK(states[0].cached_noisy_energy == doctest::Approx(1.0));
  CHECK(states[2].x[0] == doctest::Approx(2.0));
}

TEST_CASE("round trips need a full bottom top bottom excursion") {
  round_trip_log log;
  log.init(3);
  CHECK(log.particle_at_chain == std::vector<int>{0, 1, 2});

  log.on_swap(0);  // particle 0 to chain 1
  log.on_swap(1);  // particle 0 to the top
  log.on_swap(1);  // back down
  CHECK(log.total_trips == 0);
  log.on_swap(0);  // particle 0 home
  CHECK(log.trips[0] == 1);
  CHECK(log.total_trips == 1);

  log.on_swap(0);
  log.on_swap(1);
  log.on_swap(1);
  log.on_swap(0);
  CHECK(log.trips[0] == 2);
  CHECK(log.total_trips == 2);
}

TEST_CASE("a particle starting mid ladder arms only at its first bottom visit") {
  round_trip_log log;
  log.init(3);
  log.on_swap(1);  // particle 1 to the top, direction flips down
  log.on_swap(1);  // particle 1 back to chain 1
  log.on_swap(0);  // particle 1 reaches the bottom: no trip, now armed
  CHECK(log.trips[1] == 0);
  log.on_swap(0);  // up again
  log.on_swap(1);  // top
  log.on_swap(1);
  log.on_swap(0);  // bottom: counted
  CHECK(log.trips[1] == 1);
}

TEST_CASE("swap streams preserve the particle permutation") {
  round_trip_log log;
  log.init(8);
  rng_stream rng(77);
  for (int step = 0; step < 5000; ++step) {
    log.on_swap(rng.uniform_int(7));
    std::set<int> ids(log.particle_at_chain.begin(), log.particle_at_chain.end());
    REQUIRE(ids.size() == 8);
    for (int c = 0; c < 8; ++c) REQUIRE(log.chain_of_particle[log.particle_at_chain[c]] == c);
  }
}

TEST_CASE("expected round trip time matches hand evaluations") {
  CHECK(expected_round_trip_time(2, 1, 0.0) == doctest::Approx(4.0));
  CHECK(expected_round_trip_time(4, 1, 0.5) == doctest::Approx(32.0));
  CHECK(expected_round_trip_time(16, 8, 0.6) ==
        doctest::Approx(321.5990668221963).epsilon(1e-12));
  std::vector<double> mixed{0.2, 0.4, 0.6};
  double s = 0.0;
  for (double r : mixed) s += r / (1.0 - r);
  CHECK(expected_round_trip_time(4, 1, mixed) == doctest::Approx(8.0 * (1.0 + s)));
}

TEST_CASE("round trip formula rejects degenerate inputs") {
  CHECK_THROWS_AS((void)expected_round_trip_time(1, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)expected_round_trip_time(4, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)expected_round_trip_time(4, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)expected_round_trip_time(4, 1, std::vector<double>{0.5}),
                  std::invalid_argument);
}

TEST_CASE("optimal window follows the ceiling rule with small ladders pinned to one") {
  CHECK(optimal_window(2, 0.5) == 1);
  CHECK(optimal_window(3, 0.9) == 1);
  CHECK(optimal_window(4, 0.5) == 3);
  CHECK(optimal_window(16, 0.6) == 8);
  CHECK(optimal_window(16, 0.3) == 4);
  CHECK(optimal_window(16, 0.7) == 11);
  CHECK_THROWS_AS((void)optimal_window(16, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)optimal_window(16, 1.0), std::invalid_argument);
}

TEST_CASE("index process with no rejection loops in exactly two P iterations") {
  rng_stream rng(1);
  auto stats = simulate_index_process(2, 1, {0.0}, 200, rng);
  CHECK(stats.mean_iterations == doctest::Approx(4.0));
  CHECK(stats.std_error == doctest::Approx(0.0));
  CHECK(stats.round_trips == 200);
}

TEST_CASE("index process agrees with the closed form") {
  rng_stream rng(2);
  auto stats = simulate_index_process(4, 1, {0.5, 0.5, 0.5}, 10000, rng);
  CHECK(std::abs(stats.mean_iterations - 32.0) < 3.0 * stats.std_error);
}

TEST_CASE("empirical window optimum sits beside the formula optimum") {
  rng_stream rng(1);
  int best_w = 0;
  double best = 1e300;
  for (int w = 1; w <= 16; ++w) {
    auto stats = simulate_index_process(16, w, std::vector<double>(15, 0.6), 20000, rng);
    if (stats.mean_iterations < best) {
      best = stats.mean_iterations;
      best_w = w;
    }
  }
  CHECK(best_w >= 7);
  CHECK(best_w <= 8);
}

TEST_CASE("ladder update keeps a geometric fixed point still") {
  ladder_adaptation ladder;
  ladder.eta = {1.0, 2.0, 4.0};
  equi_acceptance_update(ladder, {0.25, -0.4}, 0.0);
  CHECK(ladder.eta[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ladder.eta[0] == doctest::Approx(1.0));
  CHECK(ladder.eta[2] == doctest::Approx(4.0));
}

TEST_CASE("ladder update moves interior rates by exponentially tilted gaps") {
  ladder_adaptation ladder;
  ladder.eta = {1.0, 2.0, 4.0};
  equi_acceptance_update(ladder, {0.6, -0.4}, 0.5);
  double expect = 2.5 + 0.5 * (1.0 * std::exp(0.3) - 2.0 * std::exp(-0.2));
  CHECK(ladder.eta[1] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("ladder update never breaks monotonicity") {
  rng_stream rng(8);
  ladder_adaptation ladder;
  ladder.eta = {0.003, 0.01, 0.05, 0.2, 0.6};
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> h(4);
    for (auto& v : h) v = rng.uniform() < 0.4 ? 0.6 : -0.4;
    equi_acceptance_update(ladder, h, 0.3);
    for (int i = 0; i + 1 < 5; ++i) REQUIRE(ladder.eta[i] <= ladder.eta[i + 1] + 1e-15);
    REQUIRE(ladder.eta[0] == doctest::Approx(0.003));
    REQUIRE(ladder.eta[4] == doctest::Approx(0.6));
  }
}

TEST_CASE("correction buffer drifts by the acceptance surplus") {
  ladder_adaptation ladder;
  ladder.target_rate = 0.4;
  ladder.correction = 0.0;
  update_correction_buffer(ladder, std::vector<char>(5, 1), 0.01);
  CHECK(ladder.correction == doctest::Approx(0.006).epsilon(1e-12));
  update_correction_buffer(ladder, std::vector<char>(5, 0), 0.01);
  CHECK(ladder.correction == doctest::Approx(0.006 - 0.004).epsilon(1e-10));
}

TEST_CASE("deterministic swap condition is a strict thresholded comparison") {
  CHECK(deterministic_swap(5.0, 3.0, 1.0));
  CHECK_FALSE(deterministic_swap(5.0, 3.0, 3.0));
  CHECK_FALSE(deterministic_swap(4.0, 4.0, 0.0));
}

TEST_CASE("ladder race replays exactly and reports a full diagnostics set") {
  auto model = make_lattice25(false);
  noise_spec noise;
  noise.energy = noise_spec::energy_kind::gaussian;
  noise.energy_std = 2.0;
  noise.grad = noise_spec::gradient_kind::gaussian;
  noise.gradient_std = 2.0;

  deo_options opt;
  opt.chains = 4;
  opt.iterations = 2000;
  opt.init = {0.0, 0.0};
  auto a = deo_sgd_run(opt, model, noise, 5);
  auto b = deo_sgd_run(opt, model, noise, 5);
  CHECK(a.samples == b.samples);
  CHECK(a.total_round_trips == b.total_round_trips);
  CHECK(a.final_correction == doctest::Approx(b.final_correction));

  // ceil((log 4 + log log 4) / -log 0.6) = 4
  CHECK(a.window == 4);
  CHECK(a.final_quarter_acceptance.size() == 3);
  CHECK(a.overall_acceptance.size() == 3);
  for (double r : a.overall_acceptance) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  REQUIRE(a.final_eta.size() == 4);
  CHECK(a.final_eta.front() == doctest::Approx(0.003));
  CHECK(a.final_eta.back() == doctest::Approx(0.6));
  for (int i = 0; i + 1 < 4; ++i) CHECK(a.final_eta[i] <= a.final_eta[i + 1] + 1e-15);
}

TEST_CASE("explicit window and frozen adaptation are honored") {
  auto model = make_lattice25(false);
  noise_spec noise;
  noise.energy = noise_spec::energy_kind::gaussian;
  noise.energy_std = 2.0;
  noise.grad = noise_spec::gradient_kind::gaussian;
  noise.gradient_std = 2.0;

  deo_options opt;
  opt.chains = 4;
  opt.iterations = 500;
  opt.init = {0.0, 0.0};
  opt.window = 1;
  opt.adapt_etas = false;
  opt.adapt_correction = false;
  auto r = deo_sgd_run(opt, model, noise, 5);
  CHECK(r.window == 1);
  CHECK(r.final_correction == doctest::Approx(0.0));
  CHECK(r.final_eta.front() == doctest::Approx(0.003));
  // geometric ladder untouched: interior entries keep the initial spacing
  double ratio = std::pow(0.6 / 0.003, 1.0 / 3.0);
  CHECK(r.final_eta[1] == doctest::Approx(0.003 * ratio).epsilon(1e-12));
}
