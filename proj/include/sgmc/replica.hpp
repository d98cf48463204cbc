#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sgmc/kernel.hpp"
#include "sgmc/target.hpp"

namespace sgmc {

// one-pole smoother; running_mean weights the k-th sample by 1/k, fixed uses
// a constant gamma
struct smoothed_scalar {
  enum class mode { running_mean, fixed };
  double value = 0.0;
  mode m = mode::running_mean;
  double gamma = 0.1;
  long long count = 0;

  void update(double sample) {
    ++count;
    double g = m == mode::running_mean ? 1.0 / static_cast<double>(count) : gamma;
    value = (1.0 - g) * value + g * sample;
  }
};

// acceptance for moving the lower-temperature chain to the noisy energy
// surplus of the hotter one, discounted by the estimator variance. factor_f
// = +inf drops the discount and recovers the uncorrected rate.
double corrected_swap_prob(double energy_low, double energy_high, double tau_low,
                           double tau_high, double sigma2, double factor_f);

// anchor for control-variate energy estimates: a frozen position with its
// full-data energy
struct control_variate {
  std::vector<double> anchor_x;
  double anchor_energy = 0.0;  // full-data energy at anchor_x
  double c = -1.0;

  void refresh(const target_model& model, const std::vector<double>& x) {
    anchor_x = x;
    anchor_energy = model.energy(x);
  }
};

// (N/n) sum of batch terms at x plus c times the anchor residual on the same
// batch; unbiased for the full-data energy for any fixed c
double vr_energy(const target_model& model, const control_variate& cv,
                 const std::vector<double>& x, const std::vector<int>& batch);

// c* = -cov(batch energy at x, batch energy at anchor) / var(batch energy at
// anchor), folded into the smoother
void update_adaptive_coefficient(smoothed_scalar& c_tilde, double cov_sample,
                                 double var_sample);

struct swap_record {
  long long iteration;
  int pair;  // 1-based, pair p couples chains p and p+1
  double energy_low, energy_high;
  double sigma2;
  double probability;
  bool accepted;
};

struct resgld_options {
  std::vector<double> taus;   // ascending
  std::vector<double> etas;   // one per chain, or a single shared value
  double factor_f = 1.0;      // +inf disables the variance discount
  long long iterations = 100000;
  long long swap_every = 1;
  int variance_every = 100;   // cadence of sigma2 re-estimation (injected noise)
  int variance_batch = 10;    // replicated difference draws per estimate
  double sigma2_init = 100.0;
  smoothed_scalar::mode sigma2_mode = smoothed_scalar::mode::running_mean;
  double sigma2_gamma = 0.2;

  bool variance_reduction = false;
  int anchor_every = 40;      // anchor and coefficient refresh cadence
  bool adaptive_coefficient = false;
  double coefficient_gamma = 0.2;

  std::vector<double> init;
  int thinning = 1;
  long long burn_in = 0;
};

struct resgld_result {
  // thinned positions of the coldest chain, recorded after swaps settle
  std::vector<std::vector<double>> samples;
  std::vector<swap_record> swap_log;
  long long accepted_swaps = 0;
  long long attempted_swaps = 0;
  std::vector<double> final_sigma2;  // per pair
  std::vector<double> final_c;       // per chain, variance-reduction mode
  std::vector<std::vector<double>> final_x;
};

// low-temperature replica exchange with noisy energies. Dataset targets share
// one batch per iteration across chains and may run control-variate
// estimators; injected-noise targets draw independent corruptions per chain.
resgld_result resgld_run(const resgld_options& opt, const target_model& model,
                         const noise_spec& noise, std::uint64_t seed);

constexpr double factor_f_infinite = std::numeric_limits<double>::infinity();

}  // namespace sgmc
