#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgmc/target.hpp"

namespace sgmc {

// any coordinate leaving [-1e12, 1e12] or turning non-finite aborts the run
constexpr double divergence_bound = 1e12;

struct divergence_error : std::runtime_error {
  explicit divergence_error(const std::string& what, long long iteration = -1, int chain = -1)
      : std::runtime_error(what), iteration(iteration), chain(chain) {}
  long long iteration;
  int chain;
};

struct chain_state {
  std::vector<double> x;
  double tau = 1.0;
  double eta = 0.01;
  // noisy energy at the current x, refreshed by the step that produced x
  double cached_noisy_energy = 0.0;
  int chain_index = 0;
  rng_stream rng{0};
};

void check_finite(const std::vector<double>& x, long long iteration, int chain);

// x' = x - eta * multiplier * g~(x) + sqrt(2 eta tau) * z, then the cached
// noisy energy is refreshed at x'. Stream order per step: gradient draws
// (batch indices or dim noise variates), dim Langevin variates, energy draws
// at x'. Dataset targets reuse one batch for the gradient and the refresh;
// batch_out exposes it so callers can re-estimate the energy differently.
void sgld_step(chain_state& s, const target_model& model, const noise_spec& noise,
               double multiplier = 1.0, std::vector<int>* batch_out = nullptr);

// plain descent x' = x - eta * g~(x); inject_tau > 0 adds sqrt(2 eta tau) * z
void sgd_step(chain_state& s, const target_model& model, const noise_spec& noise,
              double inject_tau = 0.0);

struct step_schedule {
  enum class kind { constant, decay, anneal_temperature, cyclic };
  kind k = kind::constant;
  double eta0 = 0.01;
  double tau0 = 1.0;
  double factor = 1.0;    // decay: eta0 * factor^max(0, iter - start)
  long long start = 0;
  double rate = 1.0;      // anneal: tau0 / rate^iter
  int cycles = 1;         // cyclic: eta0/2 * (cos(pi * phase) + 1)
  long long horizon = 0;
};

void apply_schedule(const step_schedule& sched, long long iteration, chain_state& s);

}  // namespace sgmc
