#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sgmc/kernel.hpp"
#include "sgmc/target.hpp"

namespace sgmc {

enum class swap_scheme { adj, seo, deo, deo_w };

// pair j (0-based) couples chains j and j+1; logs report pairs 1-based
struct swap_schedule {
  swap_scheme scheme = swap_scheme::deo;
  int chains = 2;
  int window = 1;
  // literal mode reopens gates only on the window's first iteration, which
  // forfeits the remaining iterations; kept for comparison runs
  bool literal_gates = false;
  std::vector<char> gate_open;
  rng_stream rng{0};  // parity draws for the random even/odd scheme

  void reset() { gate_open.assign(chains - 1, 1); }
};

// reopens gates at window starts, then filters pairs by parity and gate;
// parity alternates per window, random for SEO, ignored for ADJ
std::vector<int> eligible_pairs(swap_schedule& sched, long long k);

// particle bookkeeping across swaps; a round trip is a bottom-to-top-to-
// bottom excursion, armed at the particle's first bottom visit so partial
// initial trips never count
struct round_trip_log {
  int chains = 0;
  std::vector<int> particle_at_chain;  // chain slot -> particle id
  std::vector<int> chain_of_particle;  // inverse permutation
  std::vector<int> direction;          // per particle, +1 up / -1 down
  std::vector<char> armed;
  std::vector<long long> trips;        // per particle
  long long total_trips = 0;

  void init(int P);
  void on_swap(int pair);
};

struct swap_event {
  int pair;
  bool accepted;
};

// one attempt per eligible pair, ascending; an accepted pair exchanges
// positions and cached energies, closes its gate, and advances the log
std::vector<swap_event> attempt_window_swaps(swap_schedule& sched,
                                             std::vector<chain_state>& states,
                                             const std::function<bool(int)>& acceptor,
                                             long long k, round_trip_log* log = nullptr);

// E[T] = 2WP (1 + sum_p r_p^W / (1 - r_p^W)), in iterations
double expected_round_trip_time(int P, int W, const std::vector<double>& rejection);
double expected_round_trip_time(int P, int W, double rejection);

// ceil((log P + log log P) / (-log r)) for P >= 4, else 1
int optimal_window(int P, double rejection);

struct round_trip_stats {
  double mean_iterations = 0.0;
  double std_error = 0.0;
  long long round_trips = 0;
};

// single-particle index process at iteration granularity: per iteration one
// Bernoulli(1 - r_p) attempt while the window's gate is open, direction flips
// at failed windows and at the boundaries
round_trip_stats simulate_index_process(int P, int W, const std::vector<double>& rejection,
                                        long long n_round_trips, rng_stream& rng);

struct ladder_adaptation {
  std::vector<double> eta;   // ascending, boundaries pinned
  double target_rate = 0.4;  // desired swap frequency per pair
  double correction = 0.0;   // additive threshold learned online
};

// interior eta_i moves to the neighbor midpoint plus gap terms scaled by
// exp(gamma * H) of the adjoining pairs; H[j] = indicator(pair j) - target
void equi_acceptance_update(ladder_adaptation& ladder, const std::vector<double>& h,
                            double gamma);

void update_correction_buffer(ladder_adaptation& ladder, const std::vector<char>& indicators,
                              double gamma);

// swap wanted iff the upper chain undercuts the lower by more than the buffer
inline bool deterministic_swap(double energy_low, double energy_high, double correction) {
  return energy_high + correction < energy_low;
}

struct roundtrip_row {
  long long window;
  int particle;
  int chain_index;
  int direction;
  long long cumulative;
};

struct deo_options {
  int chains = 16;
  long long iterations = 20000;
  double eta_low = 0.003;
  double eta_high = 0.6;
  double target_rate = 0.4;
  int window = 0;  // 0 picks optimal_window(chains, 1 - target_rate)
  bool literal_gates = false;
  double exploit_tau = 1.0;  // temperature of the Langevin chain, 0 = plain descent
  double gamma_a = 160.0, gamma_b = 2000.0;  // gamma_k = a / (b + k)
  bool adapt_etas = true;
  bool adapt_correction = true;  // false pins the threshold at zero (vanilla scheme)
  int thinning = 1;
  std::vector<double> init;
};

struct deo_result {
  std::vector<std::vector<double>> samples;  // exploitation chain, thinned
  std::vector<roundtrip_row> roundtrip_rows;
  round_trip_log log;
  // per-pair indicator means over the last quarter of the run and overall
  std::vector<double> final_quarter_acceptance;
  std::vector<double> overall_acceptance;
  long long total_round_trips = 0;
  std::vector<double> final_eta;
  double final_correction = 0.0;
  int window = 1;
};

// descent chains racing across a learning-rate ladder with windowed
// non-reversible swaps, deterministic threshold acceptance, learned threshold
// buffer, and equi-acceptance ladder adaptation
deo_result deo_sgd_run(const deo_options& opt, const target_model& model,
                       const noise_spec& noise, std::uint64_t seed);

}  // namespace sgmc
