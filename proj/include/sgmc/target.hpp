#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgmc/rng.hpp"

namespace sgmc {

enum class target_kind {
  gauss_mix_1d,      // weighted 1d Gaussian mixture, energy -log density
  gauss_mix_posterior,  // symmetric two-mode posterior over a synthetic dataset
  quadratic_well,    // U = ||x||^2 / 2, the standard Gaussian energy
  lattice25,         // 2d cosine lattice inside a quadratic envelope
  rugged2d,          // oscillatory 2d surface with steep ridges
  shallow_traps,     // d-dim cosine traps inside a shallow quadratic bowl
  benchmark          // named global-optimization test function
};

enum class benchmark_id {
  rastrigin, griewank, sum_squares, rosenbrock, zakharov,
  powell, dixon_price, levy, sphere, ackley
};

// per-function experiment settings: step size, temperature, partition widths
// and exponents for the coarse/fine grids, hitting slack, weight step schedule
// omega_k = a / (k^pow + b), and the init box
struct benchmark_meta {
  benchmark_id id;
  std::string name;
  int dim;
  double eta;
  double tau;
  double delta_u_m10, delta_u_m100;
  double zeta_m10, zeta_m100;
  double rho;
  double omega_a, omega_b, omega_pow;
  double lo, hi;
};

struct target_model {
  target_kind kind = target_kind::gauss_mix_1d;
  int dim = 1;

  // gauss_mix_1d
  std::vector<double> weights, means, stds;

  // gauss_mix_posterior: x_i ~ 0.5 N(beta, sigma^2) + 0.5 N(phi - beta, sigma^2)
  double phi = 20.0;
  double sigma = 5.0;
  std::vector<double> data;
  int batch_size = 100;

  // lattice25: adds (r^2 - 20) outside r^2 <= 20 when set
  bool regularized = false;

  benchmark_meta meta{};

  double energy(const std::vector<double>& x) const;
  void gradient(const std::vector<double>& x, std::vector<double>& g) const;
  std::vector<double> gradient(const std::vector<double>& x) const {
    std::vector<double> g(x.size());
    gradient(x, g);
    return g;
  }

  bool has_dataset() const { return kind == target_kind::gauss_mix_posterior; }
  std::size_t data_size() const { return data.size(); }

  // negative log likelihood of one observation and its derivative in beta
  double datum_energy(double beta, double xi) const;
  double datum_grad(double beta, double xi) const;

  // (N/n)-scaled subsample sums; batch holds indices into data
  double batch_energy(const std::vector<double>& x, const std::vector<int>& batch) const;
  void batch_gradient(const std::vector<double>& x, const std::vector<int>& batch,
                      std::vector<double>& g) const;
};

target_model make_gauss_mix_1d(std::vector<double> weights, std::vector<double> means,
                               std::vector<double> stds);
target_model make_gauss_mix_posterior(std::size_t n_data, int batch_size,
                                      std::uint64_t data_seed, double beta_true = -5.0,
                                      double phi = 20.0, double sigma = 5.0);
target_model make_quadratic_well(int dim);
target_model make_lattice25(bool regularized);
target_model make_rugged2d();
target_model make_shallow_traps(int dim);
// throws std::invalid_argument on unknown name or a dimension the settings
// table does not list
target_model make_benchmark(const std::string& name, int dim);
const std::vector<benchmark_meta>& benchmark_table();

// synthetic corruption of exact values; dataset targets subsample instead
struct noise_spec {
  enum class energy_kind { none, gaussian, student_t };
  enum class gradient_kind { none, gaussian };
  energy_kind energy = energy_kind::none;
  double energy_std = 0.0;    // gaussian: U + std * z
  double energy_scale = 0.0;  // student_t: U + scale * t(dof)
  double energy_dof = 0.0;    // requires dof > 2 so the variance exists
  gradient_kind grad = gradient_kind::none;
  double gradient_std = 0.0;  // per-coordinate iid N(0, std^2)
};

// draw order: gradient noise consumes dim variates, energy noise one
double noisy_energy(const target_model& model, const noise_spec& noise,
                    const std::vector<double>& x, rng_stream& rng);
void noisy_gradient(const target_model& model, const noise_spec& noise,
                    const std::vector<double>& x, rng_stream& rng, std::vector<double>& g);

// n distinct indices from {0, ..., n_data - 1}, Floyd's subset sampling
std::vector<int> draw_batch(std::size_t n_data, int batch_size, rng_stream& rng);

}  // namespace sgmc
