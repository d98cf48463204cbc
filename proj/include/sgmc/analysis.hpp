#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sgmc/target.hpp"

namespace sgmc {

// composite Simpson rule; intervals is rounded up to the next even count
double simpson(const std::function<double(double)>& f, double lo, double hi, int intervals);

// normalized Boltzmann cell masses of exp(-U/tau) on a uniform grid, one or
// two dimensional to match the model
struct reference_density {
  int dims = 1;
  double lo = -8.0, hi = 8.0;
  int cells = 200;  // per axis
  std::vector<double> mass;

  int cell_of(const std::vector<double>& x) const;  // throws on out-of-range
};

reference_density reference_from_energy(const target_model& model, double tau, double lo,
                                        double hi, int cells);

// KL(histogram || reference) with 1e-8 added to each empirical cell before
// normalization; samples outside the grid violate coverage and throw
double kl_estimate(const std::vector<std::vector<double>>& samples,
                   const reference_density& ref);

// fraction of samples in each region cut by ascending boundaries
std::vector<double> mode_masses(const std::vector<double>& samples_1d,
                                const std::vector<double>& boundaries);

// first index with trace[i] <= u_min + rho
std::optional<long long> hitting_time(const std::vector<double>& energy_trace, double u_min,
                                      double rho);

double mean_of(const std::vector<double>& v);
// unbiased sample variance across replications
double replicate_variance(const std::vector<double>& v);
double std_error(const std::vector<double>& v);

// central differences with per-coordinate relative bump; the reference for
// hand-written gradients
std::vector<double> fd_gradient(const target_model& model, const std::vector<double>& x,
                                double h = 1e-5);

// largest amount by which the empirical cdf of a falls below the cdf of b,
// evaluated at every pooled sample point; <= slack means a stochastically
// dominates b in the low-value sense up to slack
double ecdf_max_shortfall(std::vector<double> a, std::vector<double> b);

}  // namespace sgmc
