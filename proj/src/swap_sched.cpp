#include "sgmc/swap_sched.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgmc {

std::vector<int> eligible_pairs(swap_schedule& sched, long long k) {
  const int pairs = sched.chains - 1;
  if (static_cast<int>(sched.gate_open.size()) != pairs) sched.reset();
  std::vector<int> out;
  switch (sched.scheme) {
    case swap_scheme::adj:
      for (int j = 0; j < pairs; ++j) out.push_back(j);
      return out;
    case swap_scheme::seo: {
      int parity = sched.rng.uniform() < 0.5 ? 0 : 1;
      for (int j = parity; j < pairs; j += 2) out.push_back(j);
      return out;
    }
    case swap_scheme::deo:
      for (int j = static_cast<int>(k % 2); j < pairs; j += 2) out.push_back(j);
      return out;
    case swap_scheme::deo_w: {
      const int w = sched.window;
      if (k % w == 0) sched.reset();  // window start reopens every gate
      int parity = static_cast<int>((k / w) % 2);
      bool first = k % w == 0;
      for (int j = parity; j < pairs; j += 2) {
        if (sched.literal_gates ? first : static_cast<bool>(sched.gate_open[j]))
          out.push_back(j);
      }
      return out;
    }
  }
  return out;
}

void round_trip_log::init(int P) {
  chains = P;
  particle_at_chain.resize(P);
  chain_of_particle.resize(P);
  direction.assign(P, +1);
  armed.assign(P, 0);
  trips.assign(P, 0);
  total_trips = 0;
  for (int i = 0; i < P; ++i) particle_at_chain[i] = chain_of_particle[i] = i;
  armed[particle_at_chain[0]] = 1;  // its trip can start immediately
}

void round_trip_log::on_swap(int pair) {
  int a = particle_at_chain[pair], b = particle_at_chain[pair + 1];
  particle_at_chain[pair] = b;
  particle_at_chain[pair + 1] = a;
  chain_of_particle[a] = pair + 1;
  chain_of_particle[b] = pair;
  if (pair + 1 == chains - 1 && direction[a] == +1) direction[a] = -1;
  if (pair == 0) {
    if (direction[b] == -1) {
      direction[b] = +1;
      if (armed[b]) {
        ++trips[b];
        ++total_trips;
      }
    }
    armed[b] = 1;
  }
}

std::vector<swap_event> attempt_window_swaps(swap_schedule& sched,
                                             std::vector<chain_state>& states,
                                             const std::function<bool(int)>& acceptor,
                                             long long k, round_trip_log* log) {
  std::vector<swap_event> events;
  for (int j : eligible_pairs(sched, k)) {
    bool ok = acceptor(j);
    events.push_back({j, ok});
    if (!ok) continue;
    std::swap(states[j].x, states[j + 1].x);
    std::swap(states[j].cached_noisy_energy, states[j + 1].cached_noisy_energy);
    if (sched.scheme == swap_scheme::deo_w) sched.gate_open[j] = 0;
    if (log) log->on_swap(j);
  }
  return events;
}

double expected_round_trip_time(int P, int W, const std::vector<double>& rejection) {
  if (P < 2 || W < 1) throw std::invalid_argument("need P >= 2 and W >= 1");
  if (static_cast<int>(rejection.size()) != P - 1)
    throw std::invalid_argument("need one rejection rate per pair");
  double s = 0.0;
  for (double r : rejection) {
    if (r < 0.0 || r >= 1.0) throw std::invalid_argument("rejection rates must lie in [0, 1)");
    double rw = std::pow(r, W);
    s += rw / (1.0 - rw);
  }
  return 2.0 * W * P * (1.0 + s);
}

double expected_round_trip_time(int P, int W, double rejection) {
  return expected_round_trip_time(P, W, std::vector<double>(P - 1, rejection));
}

int optimal_window(int P, double rejection) {
  if (P < 2) throw std::invalid_argument("need P >= 2");
  if (rejection <= 0.0 || rejection >= 1.0)
    throw std::invalid_argument("rejection rate must lie in (0, 1)");
  if (P <= 3) return 1;
  double w = (std::log(static_cast<double>(P)) + std::log(std::log(static_cast<double>(P)))) /
             -std::log(rejection);
  int out = static_cast<int>(std::ceil(w));
  return out < 1 ? 1 : out;
}

round_trip_stats simulate_index_process(int P, int W, const std::vector<double>& rejection,
                                        long long n_round_trips, rng_stream& rng) {
  if (static_cast<int>(rejection.size()) != P - 1)
    throw std::invalid_argument("need one rejection rate per pair");
  for (double r : rejection)
    if (r < 0.0 || r >= 1.0) throw std::invalid_argument("rejection rates must lie in [0, 1)");
  // one particle suffices: chains decouple under the stationarity idealization
  int p = 0, dir = +1;
  bool top_visited = false;
  long long iters = 0;
  double sum = 0.0, sumsq = 0.0;
  long long done = 0;
  while (done < n_round_trips) {
    bool moved = false;
    if ((dir == +1 && p == P - 1) || (dir == -1 && p == 0)) {
      // no partner beyond the boundary; the window passes and direction flips
    } else {
      int pair = dir == +1 ? p : p - 1;
      for (int i = 0; i < W && !moved; ++i)
        if (rng.uniform() >= rejection[pair]) moved = true;
    }
    iters += W;
    if (moved)
      p += dir;
    else
      dir = -dir;
    if (p == P - 1 && dir == -1) top_visited = true;
    if (p == 0 && dir == +1 && top_visited) {
      sum += static_cast<double>(iters);
      sumsq += static_cast<double>(iters) * static_cast<double>(iters);
      ++done;
      iters = 0;
      top_visited = false;
    }
  }
  round_trip_stats out;
  out.round_trips = done;
  out.mean_iterations = sum / static_cast<double>(done);
  double var = (sumsq - sum * sum / static_cast<double>(done)) / static_cast<double>(done - 1);
  out.std_error = std::sqrt(var / static_cast<double>(done));
  return out;
}

void equi_acceptance_update(ladder_adaptation& ladder, const std::vector<double>& h,
                            double gamma) {
  const int P = static_cast<int>(ladder.eta.size());
  if (static_cast<int>(h.size()) != P - 1)
    throw std::invalid_argument("need one field value per pair");
  if (P < 3) return;  // boundaries are pinned
  std::vector<double> next = ladder.eta;
  for (int i = 1; i + 1 < P; ++i) {
    // gap below chain i is pair i-1, gap above is pair i
    double lo = std::max(0.0, ladder.eta[i] - ladder.eta[i - 1]);
    double hi = std::max(0.0, ladder.eta[i + 1] - ladder.eta[i]);
    next[i] = 0.5 * (ladder.eta[i - 1] + ladder.eta[i + 1]) +
              0.5 * (lo * std::exp(gamma * h[i - 1]) - hi * std::exp(gamma * h[i]));
  }
  for (int i = 1; i + 1 < P; ++i)
    next[i] = std::min(std::max(next[i], next[i - 1]), next[P - 1]);
  ladder.eta = std::move(next);
}

void update_correction_buffer(ladder_adaptation& ladder, const std::vector<char>& indicators,
                              double gamma) {
  double mean = 0.0;
  for (char c : indicators) mean += c ? 1.0 : 0.0;
  mean /= static_cast<double>(indicators.size());
  ladder.correction += gamma * (mean - ladder.target_rate);
}

deo_result deo_sgd_run(const deo_options& opt, const target_model& model,
                       const noise_spec& noise, std::uint64_t seed) {
  const int P = opt.chains;
  if (P < 2) throw std::invalid_argument("need at least two chains");
  if (static_cast<int>(opt.init.size()) != model.dim)
    throw std::invalid_argument("init dimension mismatch");

  deo_result out;
  out.window = opt.window > 0 ? opt.window : optimal_window(P, 1.0 - opt.target_rate);

  swap_schedule sched;
  sched.scheme = swap_scheme::deo_w;
  sched.chains = P;
  sched.window = out.window;
  sched.literal_gates = opt.literal_gates;
  sched.reset();

  ladder_adaptation ladder;
  ladder.target_rate = opt.target_rate;
  ladder.eta.resize(P);
  double ratio = opt.eta_high / opt.eta_low;
  for (int p = 0; p < P; ++p)
    ladder.eta[p] = opt.eta_low * std::pow(ratio, static_cast<double>(p) / (P - 1));

  std::vector<chain_state> states;
  states.reserve(P);
  for (int p = 0; p < P; ++p) {
    chain_state s;
    s.x = opt.init;
    s.tau = opt.exploit_tau;
    s.eta = ladder.eta[p];
    s.chain_index = p;
    s.rng = rng_stream::for_chain(seed, static_cast<std::uint64_t>(p));
    s.cached_noisy_energy = noisy_energy(model, noise, s.x, s.rng);
    states.push_back(std::move(s));
  }

  round_trip_log log;
  log.init(P);

  std::vector<char> indicators(P - 1);
  std::vector<double> h(P - 1);
  std::vector<double> acc_sum(P - 1, 0.0), acc_sum_tail(P - 1, 0.0);
  const long long tail_start = opt.iterations - opt.iterations / 4;

  for (long long k = 0; k < opt.iterations; ++k) {
    try {
      for (int p = 0; p < P; ++p) {
        if (p == 0 && opt.exploit_tau > 0.0)
          sgld_step(states[p], model, noise);
        else
          sgd_step(states[p], model, noise);
      }
    } catch (const divergence_error& e) {
      throw divergence_error(std::string(e.what()) + " at iteration " + std::to_string(k), k,
                             e.chain);
    }

    // threshold indicators for every pair feed the buffer and the ladder,
    // whether or not the pair is on parity this window
    for (int j = 0; j + 1 < P; ++j)
      indicators[j] = deterministic_swap(states[j].cached_noisy_energy,
                                         states[j + 1].cached_noisy_energy, ladder.correction);

    attempt_window_swaps(
        sched, states, [&](int j) { return static_cast<bool>(indicators[j]); }, k, &log);

    double gamma = opt.gamma_a / (opt.gamma_b + static_cast<double>(k));
    if (opt.adapt_etas && P >= 3) {
      for (int j = 0; j + 1 < P; ++j)
        h[j] = (indicators[j] ? 1.0 : 0.0) - opt.target_rate;
      equi_acceptance_update(ladder, h, gamma);
      for (int p = 0; p < P; ++p) states[p].eta = ladder.eta[p];
    }
    if (opt.adapt_correction) update_correction_buffer(ladder, indicators, gamma);

    for (int j = 0; j + 1 < P; ++j) {
      acc_sum[j] += indicators[j] ? 1.0 : 0.0;
      if (k >= tail_start) acc_sum_tail[j] += indicators[j] ? 1.0 : 0.0;
    }
    if (k % opt.thinning == 0) out.samples.push_back(states[0].x);
    if ((k + 1) % out.window == 0) {
      long long window_index = (k + 1) / out.window - 1;
      for (int c = 0; c < P; ++c) {
        int particle = log.particle_at_chain[c];
        out.roundtrip_rows.push_back(
            {window_index, particle, c + 1, log.direction[particle], log.trips[particle]});
      }
    }
  }

  out.log = log;
  out.total_round_trips = log.total_trips;
  out.final_quarter_acceptance.resize(P - 1);
  out.overall_acceptance.resize(P - 1);
  for (int j = 0; j + 1 < P; ++j) {
    out.final_quarter_acceptance[j] =
        acc_sum_tail[j] / static_cast<double>(opt.iterations - tail_start);
    out.overall_acceptance[j] = acc_sum[j] / static_cast<double>(opt.iterations);
  }
  out.final_eta = ladder.eta;
  out.final_correction = ladder.correction;
  return out;
}

}  // namespace sgmc
