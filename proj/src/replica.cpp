#include "sgmc/replica.hpp"

#include <cmath>
#include <stdexcept>

namespace sgmc {

double corrected_swap_prob(double energy_low, double energy_high, double tau_low,
                           double tau_high, double sigma2, double factor_f) {
  if (tau_low <= 0.0 || tau_high <= 0.0) throw std::invalid_argument("temperatures must be positive");
  if (sigma2 < 0.0) throw std::invalid_argument("variance estimate must be nonnegative");
  if (!(factor_f > 0.0)) throw std::invalid_argument("correction factor must be positive");
  double tau_delta = 1.0 / tau_low - 1.0 / tau_high;
  double correction = std::isinf(factor_f) ? 0.0 : tau_delta * sigma2 / factor_f;
  double ex = tau_delta * (energy_low - energy_high - correction);
  return ex >= 0.0 ? 1.0 : std::exp(ex);
}

double vr_energy(const target_model& model, const control_variate& cv,
                 const std::vector<double>& x, const std::vector<int>& batch) {
  double at_x = model.batch_energy(x, batch);
  double at_anchor = model.batch_energy(cv.anchor_x, batch);
  return at_x + cv.c * (at_anchor - cv.anchor_energy);
}

void update_adaptive_coefficient(smoothed_scalar& c_tilde, double cov_sample,
                                 double var_sample) {
  if (var_sample <= 0.0) return;
  c_tilde.update(-cov_sample / var_sample);
}

namespace {

double sample_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double d : v) mean += d;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double d : v) s += (d - mean) * (d - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

resgld_result resgld_run(const resgld_options& opt, const target_model& model,
                         const noise_spec& noise, std::uint64_t seed) {
  const int chains = static_cast<int>(opt.taus.size());
  if (chains < 2) throw std::invalid_argument("need at least two temperatures");
  for (int p = 0; p + 1 < chains; ++p)
    if (!(opt.taus[p] < opt.taus[p + 1]))
      throw std::invalid_argument("temperatures must be strictly ascending");
  if (opt.etas.size() != 1 && opt.etas.size() != static_cast<std::size_t>(chains))
    throw std::invalid_argument("step sizes must be shared or one per chain");
  if (static_cast<int>(opt.init.size()) != model.dim)
    throw std::invalid_argument("init dimension mismatch");
  if (opt.variance_reduction && !model.has_dataset())
    throw std::invalid_argument("variance reduction needs a dataset target");

  std::vector<chain_state> states;
  states.reserve(chains);
  for (int p = 0; p < chains; ++p) {
    chain_state s;
    s.x = opt.init;
    s.tau = opt.taus[p];
    s.eta = opt.etas.size() == 1 ? opt.etas[0] : opt.etas[p];
    s.chain_index = p;
    s.rng = rng_stream::for_chain(seed, static_cast<std::uint64_t>(p));
    states.push_back(std::move(s));
  }
  // coordinator stream: shared batches, variance probes, swap uniforms
  rng_stream coord = rng_stream::for_chain(seed, static_cast<std::uint64_t>(chains));

  std::vector<smoothed_scalar> sigma2(chains - 1);
  for (auto& s : sigma2) {
    s.value = opt.sigma2_init;
    s.m = opt.sigma2_mode;
    s.gamma = opt.sigma2_gamma;
  }

  std::vector<control_variate> cv(chains);
  std::vector<smoothed_scalar> c_tilde(chains);
  if (opt.variance_reduction) {
    for (int p = 0; p < chains; ++p) {
      cv[p].refresh(model, opt.init);
      c_tilde[p].value = -1.0;
      c_tilde[p].m = smoothed_scalar::mode::fixed;
      c_tilde[p].gamma = opt.coefficient_gamma;
    }
  }

  auto estimate = [&](int p, const std::vector<int>& batch) {
    return opt.variance_reduction ? vr_energy(model, cv[p], states[p].x, batch)
                                  : model.batch_energy(states[p].x, batch);
  };

  // initial cached energies so a swap before the first step stays defined
  if (model.has_dataset()) {
    auto batch = draw_batch(model.data_size(), model.batch_size, coord);
    for (int p = 0; p < chains; ++p) states[p].cached_noisy_energy = estimate(p, batch);
  } else {
    for (int p = 0; p < chains; ++p)
      states[p].cached_noisy_energy = noisy_energy(model, noise, states[p].x, states[p].rng);
  }

  resgld_result out;
  out.final_sigma2.resize(chains - 1);
  std::vector<double> g;
  std::vector<double> probe(opt.variance_batch);

  for (long long k = 0; k < opt.iterations; ++k) {
    try {
      if (model.has_dataset()) {
        // anchor window closes: re-estimate the difference variance with the
        // outgoing anchors and coefficients, then adapt c, then re-anchor
        bool window_edge = opt.variance_reduction && k > 0 && k % opt.anchor_every == 0;
        bool plain_probe = !opt.variance_reduction && k > 0 && k % opt.variance_every == 0;
        if (window_edge || plain_probe) {
          std::vector<std::vector<int>> probes(opt.variance_batch);
          for (auto& b : probes) b = draw_batch(model.data_size(), model.batch_size, coord);
          for (int p = 0; p + 1 < chains; ++p) {
            for (int b = 0; b < opt.variance_batch; ++b)
              probe[b] = estimate(p, probes[b]) - estimate(p + 1, probes[b]);
            sigma2[p].update(sample_variance(probe));
          }
          if (window_edge && opt.adaptive_coefficient) {
            std::vector<double> at_x(opt.variance_batch), at_anchor(opt.variance_batch);
            for (int p = 0; p < chains; ++p) {
              for (int b = 0; b < opt.variance_batch; ++b) {
                at_x[b] = model.batch_energy(states[p].x, probes[b]);
                at_anchor[b] = model.batch_energy(cv[p].anchor_x, probes[b]);
              }
              double mx = 0.0, ma = 0.0;
              for (int b = 0; b < opt.variance_batch; ++b) {
                mx += at_x[b];
                ma += at_anchor[b];
              }
              mx /= opt.variance_batch;
              ma /= opt.variance_batch;
              double cov = 0.0, var = 0.0;
              for (int b = 0; b < opt.variance_batch; ++b) {
                cov += (at_x[b] - mx) * (at_anchor[b] - ma);
                var += (at_anchor[b] - ma) * (at_anchor[b] - ma);
              }
              cov /= opt.variance_batch - 1;
              var /= opt.variance_batch - 1;
              update_adaptive_coefficient(c_tilde[p], cov, var);
              cv[p].c = c_tilde[p].value;
            }
          }
          if (window_edge)
            for (int p = 0; p < chains; ++p) cv[p].refresh(model, states[p].x);
        }

        // one shared batch drives every chain's gradient and energy refresh
        auto batch = draw_batch(model.data_size(), model.batch_size, coord);
        for (int p = 0; p < chains; ++p) {
          auto& s = states[p];
          model.batch_gradient(s.x, batch, g);
          double amp = std::sqrt(2.0 * s.eta * s.tau);
          for (std::size_t i = 0; i < s.x.size(); ++i)
            s.x[i] += -s.eta * g[i] + amp * s.rng.normal();
          check_finite(s.x, k, p);
          s.cached_noisy_energy = estimate(p, batch);
        }
      } else {
        for (auto& s : states) sgld_step(s, model, noise);
        if (k > 0 && k % opt.variance_every == 0) {
          // replicated draws at the pair's low position estimate the
          // per-evaluation variance; the energy difference carries twice it,
          // and the swap exponent's tau_delta * sigma2 discount is exactly
          // unbiased for that split
          for (int p = 0; p + 1 < chains; ++p) {
            for (int b = 0; b < opt.variance_batch; ++b)
              probe[b] = noisy_energy(model, noise, states[p].x, coord);
            sigma2[p].update(sample_variance(probe));
          }
        }
      }
    } catch (const divergence_error& e) {
      throw divergence_error(std::string(e.what()) +
                                 (e.iteration < 0 ? " at iteration " + std::to_string(k) : ""),
                             k, e.chain);
    }

    if (k % opt.swap_every == 0) {
      for (int p = 0; p + 1 < chains; ++p) {
        double prob =
            corrected_swap_prob(states[p].cached_noisy_energy, states[p + 1].cached_noisy_energy,
                                opt.taus[p], opt.taus[p + 1], sigma2[p].value, opt.factor_f);
        bool accepted = coord.uniform() < prob;
        out.swap_log.push_back({k, p + 1, states[p].cached_noisy_energy,
                                states[p + 1].cached_noisy_energy, sigma2[p].value, prob,
                                accepted});
        ++out.attempted_swaps;
        if (accepted) {
          std::swap(states[p].x, states[p + 1].x);
          std::swap(states[p].cached_noisy_energy, states[p + 1].cached_noisy_energy);
          ++out.accepted_swaps;
        }
      }
    }

    if (k >= opt.burn_in && (k - opt.burn_in) % opt.thinning == 0)
      out.samples.push_back(states[0].x);
  }

  for (int p = 0; p + 1 < chains; ++p) out.final_sigma2[p] = sigma2[p].value;
  if (opt.variance_reduction) {
    out.final_c.resize(chains);
    for (int p = 0; p < chains; ++p) out.final_c[p] = cv[p].c;
  }
  for (const auto& s : states) out.final_x.push_back(s.x);
  return out;
}

}  // namespace sgmc
