#pragma once

#include <cstdint>
#include <vector>

#include "sgmc/kernel.hpp"
#include "sgmc/target.hpp"

namespace sgmc {

enum class theta_flavor { csgld, icsgld, awsgld };

// energy axis split into m cells: cell 1 = (-inf, u_1], cell i = (u_{i-1},
// u_i], cell m = (u_{m-1}, inf), with u_i = u1 + (i-1) delta_u. zeta and tau
// scale the flattening multiplier; scale maps raw energy estimates onto the
// grid (full-data scale for subsampled estimates)
struct partition_spec {
  int m = 100;
  double u1 = 0.0;
  double delta_u = 1.0;
  double zeta = 1.0;
  double tau = 1.0;
  double scale = 1.0;
};

// cell index of a raw (unscaled) energy value
int partition_index_raw(const partition_spec& spec, double u);
// cell index of a noisy estimate, spec.scale applied first; non-finite -> error
int partition_index(const partition_spec& spec, double energy_estimate);

struct theta_vector {
  theta_flavor flavor = theta_flavor::csgld;
  std::vector<double> values;   // size m; simplex or monotone-with-last-1
  int m() const { return static_cast<int>(values.size()); }
};

// csgld/icsgld start uniform on the simplex; awsgld starts at the uniform
// cumulative profile i/m
theta_vector make_theta(theta_flavor flavor, int m);

// 1 + zeta tau / delta_u * (log theta(J) - log theta(max(J-1, 1))); entries
// clamped to 1e-12 before the logs, nonpositive entries are an error
double gradient_multiplier(const theta_vector& theta, int j, const partition_spec& spec);

// stochastic drift of the weight vector given the occupied cell j:
//   csgld   theta(j)^zeta * (1_{i=j} - theta(i))
//   icsgld  theta(j)      * (1_{i=j} - theta(i))
//   awsgld  theta(j)      * (1_{i>=j} - theta(i))
void random_field(const theta_vector& theta, int j, const partition_spec& spec,
                  std::vector<double>& out);

// mean of the per-chain fields, one occupied cell per chain
void interacting_field(const theta_vector& theta, const std::vector<int>& js,
                       const partition_spec& spec, std::vector<double>& out);

// theta += omega * field, then flavor invariants are re-verified: simplex sum
// and positivity, or monotonicity with theta(m) = 1
void sa_update(theta_vector& theta, const std::vector<double>& field, double omega);

// self-normalized average of f under importance weights theta^zeta at the
// recorded cells; zero weight mass -> error
double weighted_expectation(const std::vector<double>& theta_at_samples,
                            const std::vector<double>& f_values, double zeta);

// fixed point of each flavor from deterministic quadrature of exp(-U/tau):
// cell masses, masses^(1/zeta) renormalized, or the cumulative profile
std::vector<double> quadrature_theta_star(const target_model& model, const partition_spec& spec,
                                          theta_flavor flavor, double lo = -15.0,
                                          double hi = 15.0, int nodes = 100001);

// omega_k = min(cap, a / (k^power + b))
struct omega_schedule {
  double a = 0.02;
  double b = 100.0;
  double power = 0.6;
  double cap = 1e308;
  double at(long long k) const;
};

struct contour_sample {
  long long iteration;
  int chain;
  std::vector<double> x;
  double energy;       // estimate the index used (exact when noise is off)
  double multiplier;
  int cell;
  double theta_weight;  // theta(cell) at record time
};

struct contour_options {
  theta_flavor flavor = theta_flavor::csgld;
  int chains = 1;
  long long iterations = 100000;
  double eps = 0.01;           // step size
  partition_spec part;
  omega_schedule omega;
  int broadcast_every = 1;     // interaction cadence for multi-chain runs
  int thinning = 1;
  long long theta_stride = 0;  // 0 disables the trace
  double stop_below = -1e308;  // end the run once any chain's energy dips under
  std::vector<double> init;
};

struct contour_result {
  theta_vector theta;
  std::vector<contour_sample> samples;
  std::vector<std::pair<long long, std::vector<double>>> theta_trace;
  bool negative_multiplier_seen = false;
  double min_multiplier = 1e308;
  std::vector<std::vector<double>> final_x;
  long long hit_iteration = -1;  // first iteration at or under stop_below
};

// stochastic gradient Langevin with the cell-dependent multiplier and online
// weight estimation; chains > 1 couple only through the shared theta
contour_result contour_run(const contour_options& opt, const target_model& model,
                           const noise_spec& noise, std::uint64_t seed);

}  // namespace sgmc
