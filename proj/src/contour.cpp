#include "sgmc/contour.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgmc {

namespace {
constexpr double theta_floor = 1e-12;
}

int partition_index_raw(const partition_spec& spec, double u) {
  if (!std::isfinite(u)) throw std::invalid_argument("energy estimate is not finite");
  if (u <= spec.u1) return 1;
  int j = 1 + static_cast<int>(std::ceil((u - spec.u1) / spec.delta_u));
  return j > spec.m ? spec.m : j;
}

int partition_index(const partition_spec& spec, double energy_estimate) {
  return partition_index_raw(spec, spec.scale * energy_estimate);
}

theta_vector make_theta(theta_flavor flavor, int m) {
  if (m < 2) throw std::invalid_argument("need at least two cells");
  theta_vector t;
  t.flavor = flavor;
  t.values.resize(m);
  for (int i = 0; i < m; ++i)
    t.values[i] = flavor == theta_flavor::awsgld ? static_cast<double>(i + 1) / m : 1.0 / m;
  return t;
}

double gradient_multiplier(const theta_vector& theta, int j, const partition_spec& spec) {
  if (j < 1 || j > theta.m()) throw std::invalid_argument("cell index out of range");
  double a = theta.values[j - 1];
  double b = theta.values[std::max(j - 1, 1) - 1];
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("weight vector left the positive cone");
  a = std::max(a, theta_floor);
  b = std::max(b, theta_floor);
  return 1.0 + spec.zeta * spec.tau / spec.delta_u * (std::log(a) - std::log(b));
}

void random_field(const theta_vector& theta, int j, const partition_spec& spec,
                  std::vector<double>& out) {
  const int m = theta.m();
  if (j < 1 || j > m) throw std::invalid_argument("cell index out of range");
  double w = theta.values[j - 1];
  if (w <= 0.0) throw std::invalid_argument("weight vector left the positive cone");
  double lead = theta.flavor == theta_flavor::csgld ? std::pow(w, spec.zeta) : w;
  out.resize(m);
  for (int i = 0; i < m; ++i) {
    double target = theta.flavor == theta_flavor::awsgld ? (i + 1 >= j ? 1.0 : 0.0)
                                                         : (i + 1 == j ? 1.0 : 0.0);
    out[i] = lead * (target - theta.values[i]);
  }
}

void interacting_field(const theta_vector& theta, const std::vector<int>& js,
                       const partition_spec& spec, std::vector<double>& out) {
  if (js.empty()) throw std::invalid_argument("need at least one occupied cell");
  const int m = theta.m();
  out.assign(m, 0.0);
  std::vector<double> one;
  for (int j : js) {
    random_field(theta, j, spec, one);
    for (int i = 0; i < m; ++i) out[i] += one[i];
  }
  for (int i = 0; i < m; ++i) out[i] /= static_cast<double>(js.size());
}

void sa_update(theta_vector& theta, const std::vector<double>& field, double omega) {
  const int m = theta.m();
  if (static_cast<int>(field.size()) != m) throw std::invalid_argument("field size mismatch");
  for (int i = 0; i < m; ++i) theta.values[i] += omega * field[i];
  if (theta.flavor == theta_flavor::awsgld) {
    if (std::abs(theta.values[m - 1] - 1.0) > 1e-9)
      throw std::logic_error("cumulative profile lost its unit tail");
    for (int i = 0; i + 1 < m; ++i)
      if (theta.values[i + 1] - theta.values[i] < -1e-12)
        throw std::logic_error("cumulative profile lost monotonicity");
    if (theta.values[0] <= 0.0)
      throw std::logic_error("weight update stepped out of the admissible set; shrink omega");
  } else {
    for (int i = 0; i < m; ++i)
      if (theta.values[i] <= 0.0)
        throw std::logic_error("weight update stepped out of the simplex; shrink omega");
  }
}

double weighted_expectation(const std::vector<double>& theta_at_samples,
                            const std::vector<double>& f_values, double zeta) {
  if (theta_at_samples.size() != f_values.size() || theta_at_samples.empty())
    throw std::invalid_argument("weights and values must align");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    double w = std::pow(std::max(theta_at_samples[i], theta_floor), zeta);
    num += w * f_values[i];
    den += w;
  }
  if (den <= 0.0) throw std::invalid_argument("importance weights sum to zero");
  return num / den;
}

std::vector<double> quadrature_theta_star(const target_model& model, const partition_spec& spec,
                                          theta_flavor flavor, double lo, double hi,
                                          int nodes) {
  std::vector<double> mass(spec.m, 0.0);
  if (model.dim == 1) {
    if (nodes % 2 == 0) ++nodes;  // composite Simpson needs an odd node count
    double h = (hi - lo) / (nodes - 1);
    // stabilize exp against tiny tau by shifting to the minimum energy seen
    std::vector<double> u(nodes);
    double umin = 1e308;
    std::vector<double> x(1);
    for (int i = 0; i < nodes; ++i) {
      x[0] = lo + h * i;
      u[i] = model.energy(x);
      umin = std::min(umin, u[i]);
    }
    for (int i = 0; i < nodes; ++i) {
      double w = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      mass[partition_index_raw(spec, u[i]) - 1] += w * std::exp(-(u[i] - umin) / spec.tau);
    }
  } else if (model.dim == 2) {
    const int g = 2000;  // midpoint grid
    double hx = (hi - lo) / g;
    std::vector<double> x(2);
    std::vector<double> u(static_cast<std::size_t>(g) * g);
    double umin = 1e308;
    for (int i = 0; i < g; ++i) {
      x[0] = lo + hx * (i + 0.5);
      for (int j = 0; j < g; ++j) {
        x[1] = lo + hx * (j + 0.5);
        double v = model.energy(x);
        u[static_cast<std::size_t>(i) * g + j] = v;
        umin = std::min(umin, v);
      }
    }
    for (double v : u) mass[partition_index_raw(spec, v) - 1] += std::exp(-(v - umin) / spec.tau);
  } else {
    throw std::invalid_argument("deterministic quadrature covers one and two dimensions");
  }
  double total = 0.0;
  for (double v : mass) total += v;
  for (double& v : mass) v /= total;

  switch (flavor) {
    case theta_flavor::csgld:
      return mass;
    case theta_flavor::icsgld: {
      double z = 0.0;
      for (double& v : mass) {
        v = std::pow(v, 1.0 / spec.zeta);
        z += v;
      }
      for (double& v : mass) v /= z;
      return mass;
    }
    case theta_flavor::awsgld: {
      double c = 0.0;
      for (double& v : mass) {
        c += v;
        v = c;
      }
      mass[spec.m - 1] = 1.0;
      return mass;
    }
  }
  return mass;
}

double omega_schedule::at(long long k) const {
  double v = a / (std::pow(static_cast<double>(k), power) + b);
  return v < cap ? v : cap;
}

contour_result contour_run(const contour_options& opt, const target_model& model,
                           const noise_spec& noise, std::uint64_t seed) {
  const int P = opt.chains;
  if (P < 1) throw std::invalid_argument("need at least one chain");
  if (static_cast<int>(opt.init.size()) != model.dim)
    throw std::invalid_argument("init dimension mismatch");
  if (P > 1 && opt.flavor != theta_flavor::icsgld)
    throw std::invalid_argument("only the interacting flavor shares chains");

  contour_result out;
  out.theta = make_theta(opt.flavor, opt.part.m);

  std::vector<chain_state> states;
  states.reserve(P);
  for (int p = 0; p < P; ++p) {
    chain_state s;
    s.x = opt.init;
    s.tau = opt.part.tau;
    s.eta = opt.eps;
    s.chain_index = p;
    s.rng = rng_stream::for_chain(seed, static_cast<std::uint64_t>(p));
    s.cached_noisy_energy = noisy_energy(model, noise, s.x, s.rng);
    states.push_back(std::move(s));
  }

  std::vector<int> cells(P);
  std::vector<double> field;
  for (long long k = 0; k < opt.iterations; ++k) {
    double omega = opt.omega.at(k + 1);
    for (int p = 0; p < P; ++p) {
      auto& s = states[p];
      int j = partition_index(opt.part, s.cached_noisy_energy);
      double mult = gradient_multiplier(out.theta, j, opt.part);
      if (mult < 0.0) out.negative_multiplier_seen = true;
      out.min_multiplier = std::min(out.min_multiplier, mult);
      try {
        sgld_step(s, model, noise, mult);
      } catch (const divergence_error& e) {
        throw divergence_error(std::string(e.what()) + " at iteration " + std::to_string(k), k,
                               e.chain);
      }
      cells[p] = partition_index(opt.part, s.cached_noisy_energy);
      if (out.hit_iteration < 0 && s.cached_noisy_energy <= opt.stop_below)
        out.hit_iteration = k;
    }
    if (out.hit_iteration >= 0) break;

    if ((k + 1) % opt.broadcast_every == 0) {
      if (P == 1)
        random_field(out.theta, cells[0], opt.part, field);
      else
        interacting_field(out.theta, cells, opt.part, field);
      sa_update(out.theta, field, omega);
    }

    if (k % opt.thinning == 0) {
      for (int p = 0; p < P; ++p) {
        contour_sample row;
        row.iteration = k;
        row.chain = p;
        row.x = states[p].x;
        row.energy = states[p].cached_noisy_energy;
        row.cell = cells[p];
        row.theta_weight = out.theta.values[cells[p] - 1];
        row.multiplier = gradient_multiplier(out.theta, cells[p], opt.part);
        out.samples.push_back(std::move(row));
      }
    }
    if (opt.theta_stride > 0 && (k + 1) % opt.theta_stride == 0)
      out.theta_trace.emplace_back(k, out.theta.values);
  }

  for (const auto& s : states) out.final_x.push_back(s.x);
  return out;
}

}  // namespace sgmc
