#include "sgmc/kernel.hpp"

#include <cmath>

namespace sgmc {

void check_finite(const std::vector<double>& x, long long iteration, int chain) {
  for (double v : x)
    if (!std::isfinite(v) || std::abs(v) > divergence_bound) {
      std::string what = "chain " + std::to_string(chain) + " position diverged";
      if (iteration >= 0) what += " at iteration " + std::to_string(iteration);
      throw divergence_error(what, iteration, chain);
    }
}

namespace {

void refresh_energy(chain_state& s, const target_model& model, const noise_spec& noise,
                    const std::vector<int>* batch) {
  s.cached_noisy_energy =
      batch ? model.batch_energy(s.x, *batch) : noisy_energy(model, noise, s.x, s.rng);
}

}  // namespace

void sgld_step(chain_state& s, const target_model& model, const noise_spec& noise,
               double multiplier, std::vector<int>* batch_out) {
  static thread_local std::vector<double> g;
  std::vector<int> batch;
  if (model.has_dataset()) {
    batch = draw_batch(model.data_size(), model.batch_size, s.rng);
    model.batch_gradient(s.x, batch, g);
  } else {
    noisy_gradient(model, noise, s.x, s.rng, g);
  }
  double drift = s.eta * multiplier;
  double amp = std::sqrt(2.0 * s.eta * s.tau);
  for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] += -drift * g[i] + amp * s.rng.normal();
  check_finite(s.x, -1, s.chain_index);
  refresh_energy(s, model, noise, model.has_dataset() ? &batch : nullptr);
  if (batch_out) *batch_out = std::move(batch);
}

void sgd_step(chain_state& s, const target_model& model, const noise_spec& noise,
              double inject_tau) {
  static thread_local std::vector<double> g;
  std::vector<int> batch;
  if (model.has_dataset()) {
    batch = draw_batch(model.data_size(), model.batch_size, s.rng);
    model.batch_gradient(s.x, batch, g);
  } else {
    noisy_gradient(model, noise, s.x, s.rng, g);
  }
  double amp = inject_tau > 0.0 ? std::sqrt(2.0 * s.eta * inject_tau) : 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    s.x[i] -= s.eta * g[i];
    if (amp > 0.0) s.x[i] += amp * s.rng.normal();
  }
  check_finite(s.x, -1, s.chain_index);
  refresh_energy(s, model, noise, model.has_dataset() ? &batch : nullptr);
}

void apply_schedule(const step_schedule& sched, long long iteration, chain_state& s) {
  switch (sched.k) {
    case step_schedule::kind::constant:
      return;
    case step_schedule::kind::decay: {
      long long n = iteration > sched.start ? iteration - sched.start : 0;
      s.eta = sched.eta0 * std::pow(sched.factor, static_cast<double>(n));
      return;
    }
    case step_schedule::kind::anneal_temperature:
      s.tau = sched.tau0 / std::pow(sched.rate, static_cast<double>(iteration));
      return;
    case step_schedule::kind::cyclic: {
      long long period = sched.horizon / sched.cycles;
      if (period < 1) period = 1;
      double phase = static_cast<double>(iteration % period) / static_cast<double>(period);
      s.eta = 0.5 * sched.eta0 * (std::cos(3.14159265358979323846 * phase) + 1.0);
      return;
    }
  }
}

}  // namespace sgmc
