#include "sgmc/target.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgmc {
namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double two_pi = 2.0 * pi;
constexpr double log_sqrt_two_pi = 0.91893853320467274178;

double sq(double v) { return v * v; }

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

double target_model::datum_energy(double beta, double xi) const {
  double z1 = (xi - beta) / sigma;
  double z2 = (xi - phi + beta) / sigma;
  double a1 = -0.5 * z1 * z1;
  double a2 = -0.5 * z2 * z2;
  double m = std::max(a1, a2);
  // -log(0.5 N(xi; beta, s^2) + 0.5 N(xi; phi - beta, s^2))
  return std::log(2.0) + std::log(sigma) + log_sqrt_two_pi - m -
         std::log(std::exp(a1 - m) + std::exp(a2 - m));
}

double target_model::datum_grad(double beta, double xi) const {
  double z1 = (xi - beta) / sigma;
  double z2 = (xi - phi + beta) / sigma;
  double a1 = -0.5 * z1 * z1;
  double a2 = -0.5 * z2 * z2;
  double m = std::max(a1, a2);
  double e1 = std::exp(a1 - m);
  double e2 = std::exp(a2 - m);
  // mode weights; the second mode moves with -beta, hence the sign flip
  return -(e1 * z1 / sigma - e2 * z2 / sigma) / (e1 + e2);
}

double target_model::energy(const std::vector<double>& x) const {
  switch (kind) {
    case target_kind::gauss_mix_1d: {
      double m = -1e308;
      std::vector<double> a(weights.size());
      for (std::size_t j = 0; j < weights.size(); ++j) {
        double z = (x[0] - means[j]) / stds[j];
        a[j] = std::log(weights[j]) - 0.5 * z * z - std::log(stds[j]) - log_sqrt_two_pi;
        m = std::max(m, a[j]);
      }
      double s = 0.0;
      for (double v : a) s += std::exp(v - m);
      return -(m + std::log(s));
    }
    case target_kind::gauss_mix_posterior: {
      double s = 0.0;
      for (double xi : data) s += datum_energy(x[0], xi);
      return s;
    }
    case target_kind::quadratic_well:
      return 0.5 * norm2(x);
    case target_kind::lattice25: {
      double r2 = sq(x[0]) + sq(x[1]);
      double u = 0.2 * r2 - 2.0 * (std::cos(two_pi * x[0]) + std::cos(two_pi * x[1]));
      if (regularized && r2 > 20.0) u += r2 - 20.0;
      return u;
    }
    case target_kind::rugged2d: {
      double a = x[0] * std::sin(20.0 * x[1]) + x[1] * std::sin(20.0 * x[0]);
      double b = std::cosh(std::sin(10.0 * x[0]) * x[0]);
      double c = x[0] * std::cos(10.0 * x[1]) - x[1] * std::sin(10.0 * x[0]);
      double d = std::cosh(std::cos(20.0 * x[1]) * x[1]);
      return -a * a * b - c * c * d;
    }
    case target_kind::shallow_traps: {
      double r2 = norm2(x);
      double cs = 0.0;
      for (double v : x) cs += std::cos(2.0 * v);
      return 0.05 * r2 - 0.01 * r2 * cs;
    }
    case target_kind::benchmark:
      break;
  }
  const int d = dim;
  switch (meta.id) {
    case benchmark_id::rastrigin: {
      double u = 10.0 * d;
      for (double v : x) u += v * v - 10.0 * std::cos(two_pi * v);
      return u;
    }
    case benchmark_id::griewank: {
      double s = 0.0, p = 1.0;
      for (int i = 0; i < d; ++i) {
        s += sq(x[i]) / 4000.0;
        p *= std::cos(x[i] / std::sqrt(i + 1.0));
      }
      return 1.0 + s - p;
    }
    case benchmark_id::sum_squares: {
      double u = 0.0;
      for (int i = 0; i < d; ++i) u += (i + 1.0) * sq(x[i]);
      return u;
    }
    case benchmark_id::rosenbrock: {
      double u = 0.0;
      for (int i = 0; i + 1 < d; ++i) u += 100.0 * sq(x[i + 1] - sq(x[i])) + sq(x[i] - 1.0);
      return u;
    }
    case benchmark_id::zakharov: {
      double s2 = 0.0, s = 0.0;
      for (int i = 0; i < d; ++i) {
        s2 += sq(x[i]);
        s += 0.5 * (i + 1.0) * x[i];
      }
      return s2 + sq(s) + sq(sq(s));
    }
    case benchmark_id::powell: {
      double u = 0.0;
      for (int j = 0; j < d / 4; ++j) {
        double xa = x[4 * j], xb = x[4 * j + 1], xc = x[4 * j + 2], xe = x[4 * j + 3];
        u += sq(xa + 10.0 * xb) + 5.0 * sq(xc - xe) + sq(sq(xb - 2.0 * xc)) +
             10.0 * sq(sq(xa - xe));
      }
      return u;
    }
    case benchmark_id::dixon_price: {
      double u = sq(x[0] - 1.0);
      for (int i = 1; i < d; ++i) u += (i + 1.0) * sq(2.0 * sq(x[i]) - x[i - 1]);
      return u;
    }
    case benchmark_id::levy: {
      auto w = [&](int i) { return 1.0 + (x[i] - 1.0) / 4.0; };
      double u = sq(std::sin(pi * w(0)));
      for (int i = 0; i + 1 < d; ++i)
        u += sq(w(i) - 1.0) * (1.0 + 10.0 * sq(std::sin(pi * w(i) + 1.0)));
      double wd = w(d - 1);
      u += sq(wd - 1.0) * (1.0 + sq(std::sin(two_pi * wd)));
      return u;
    }
    case benchmark_id::sphere:
      return norm2(x);
    case benchmark_id::ackley: {
      double r = std::sqrt(norm2(x) / d);
      double cbar = 0.0;
      for (double v : x) cbar += std::cos(two_pi * v);
      cbar /= d;
      return -20.0 * std::exp(-0.2 * r) - std::exp(cbar) + 20.0 + std::exp(1.0);
    }
  }
  throw std::logic_error("unreachable target kind");
}

void target_model::gradient(const std::vector<double>& x, std::vector<double>& g) const {
  g.assign(x.size(), 0.0);
  switch (kind) {
    case target_kind::gauss_mix_1d: {
      double m = -1e308;
      std::vector<double> a(weights.size());
      for (std::size_t j = 0; j < weights.size(); ++j) {
        double z = (x[0] - means[j]) / stds[j];
        a[j] = std::log(weights[j]) - 0.5 * z * z - std::log(stds[j]) - log_sqrt_two_pi;
        m = std::max(m, a[j]);
      }
      double den = 0.0, num = 0.0;
      for (std::size_t j = 0; j < weights.size(); ++j) {
        double r = std::exp(a[j] - m);
        den += r;
        num += r * (x[0] - means[j]) / sq(stds[j]);
      }
      g[0] = num / den;
      return;
    }
    case target_kind::gauss_mix_posterior: {
      double s = 0.0;
      for (double xi : data) s += datum_grad(x[0], xi);
      g[0] = s;
      return;
    }
    case target_kind::quadratic_well:
      g = x;
      return;
    case target_kind::lattice25: {
      double r2 = sq(x[0]) + sq(x[1]);
      double extra = (regularized && r2 > 20.0) ? 2.0 : 0.0;
      for (int i = 0; i < 2; ++i)
        g[i] = 0.4 * x[i] + 2.0 * two_pi * std::sin(two_pi * x[i]) + extra * x[i];
      return;
    }
    case target_kind::rugged2d: {
      double x1 = x[0], x2 = x[1];
      double a = x1 * std::sin(20.0 * x2) + x2 * std::sin(20.0 * x1);
      double b = std::cosh(std::sin(10.0 * x1) * x1);
      double c = x1 * std::cos(10.0 * x2) - x2 * std::sin(10.0 * x1);
      double d = std::cosh(std::cos(20.0 * x2) * x2);
      double a1 = std::sin(20.0 * x2) + 20.0 * x2 * std::cos(20.0 * x1);
      double a2 = 20.0 * x1 * std::cos(20.0 * x2) + std::sin(20.0 * x1);
      double b1 = std::sinh(std::sin(10.0 * x1) * x1) *
                  (10.0 * std::cos(10.0 * x1) * x1 + std::sin(10.0 * x1));
      double c1 = std::cos(10.0 * x2) - 10.0 * x2 * std::cos(10.0 * x1);
      double c2 = -10.0 * x1 * std::sin(10.0 * x2) - std::sin(10.0 * x1);
      double d2 = std::sinh(std::cos(20.0 * x2) * x2) *
                  (-20.0 * std::sin(20.0 * x2) * x2 + std::cos(20.0 * x2));
      g[0] = -(2.0 * a * a1 * b + a * a * b1) - 2.0 * c * c1 * d;
      g[1] = -2.0 * a * a2 * b - (2.0 * c * c2 * d + c * c * d2);
      return;
    }
    case target_kind::shallow_traps: {
      double r2 = norm2(x);
      double cs = 0.0;
      for (double v : x) cs += std::cos(2.0 * v);
      for (std::size_t j = 0; j < x.size(); ++j)
        g[j] = 0.1 * x[j] - 0.02 * x[j] * cs + 0.02 * r2 * std::sin(2.0 * x[j]);
      return;
    }
    case target_kind::benchmark:
      break;
  }
  const int d = dim;
  switch (meta.id) {
    case benchmark_id::rastrigin:
      for (int i = 0; i < d; ++i) g[i] = 2.0 * x[i] + 20.0 * pi * std::sin(two_pi * x[i]);
      return;
    case benchmark_id::griewank: {
      // prefix/suffix products sidestep division by a vanishing cosine
      std::vector<double> cosv(d), pre(d + 1, 1.0), suf(d + 1, 1.0);
      for (int i = 0; i < d; ++i) cosv[i] = std::cos(x[i] / std::sqrt(i + 1.0));
      for (int i = 0; i < d; ++i) pre[i + 1] = pre[i] * cosv[i];
      for (int i = d - 1; i >= 0; --i) suf[i] = suf[i + 1] * cosv[i];
      for (int i = 0; i < d; ++i) {
        double si = std::sqrt(i + 1.0);
        g[i] = x[i] / 2000.0 + std::sin(x[i] / si) / si * pre[i] * suf[i + 1];
      }
      return;
    }
    case benchmark_id::sum_squares:
      for (int i = 0; i < d; ++i) g[i] = 2.0 * (i + 1.0) * x[i];
      return;
    case benchmark_id::rosenbrock:
      for (int i = 0; i < d; ++i) {
        if (i + 1 < d) g[i] += -400.0 * x[i] * (x[i + 1] - sq(x[i])) + 2.0 * (x[i] - 1.0);
        if (i > 0) g[i] += 200.0 * (x[i] - sq(x[i - 1]));
      }
      return;
    case benchmark_id::zakharov: {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += 0.5 * (i + 1.0) * x[i];
      double f = 2.0 * s + 4.0 * s * s * s;
      for (int i = 0; i < d; ++i) g[i] = 2.0 * x[i] + f * 0.5 * (i + 1.0);
      return;
    }
    case benchmark_id::powell:
      for (int j = 0; j < d / 4; ++j) {
        double xa = x[4 * j], xb = x[4 * j + 1], xc = x[4 * j + 2], xe = x[4 * j + 3];
        double t1 = xa + 10.0 * xb;
        double t2 = xc - xe;
        double t3 = xb - 2.0 * xc;
        double t4 = xa - xe;
        g[4 * j] = 2.0 * t1 + 40.0 * t4 * t4 * t4;
        g[4 * j + 1] = 20.0 * t1 + 4.0 * t3 * t3 * t3;
        g[4 * j + 2] = 10.0 * t2 - 8.0 * t3 * t3 * t3;
        g[4 * j + 3] = -10.0 * t2 - 40.0 * t4 * t4 * t4;
      }
      return;
    case benchmark_id::dixon_price:
      g[0] = 2.0 * (x[0] - 1.0);
      for (int i = 1; i < d; ++i) {
        double t = 2.0 * sq(x[i]) - x[i - 1];
        g[i] += (i + 1.0) * 2.0 * t * 4.0 * x[i];
        g[i - 1] += -(i + 1.0) * 2.0 * t;
      }
      return;
    case benchmark_id::levy: {
      auto w = [&](int i) { return 1.0 + (x[i] - 1.0) / 4.0; };
      g[0] += pi * std::sin(two_pi * w(0)) * 0.25;
      for (int i = 0; i + 1 < d; ++i) {
        double wi = w(i);
        double s = std::sin(pi * wi + 1.0), c = std::cos(pi * wi + 1.0);
        g[i] += (2.0 * (wi - 1.0) * (1.0 + 10.0 * s * s) +
                 sq(wi - 1.0) * 20.0 * s * c * pi) * 0.25;
      }
      double wd = w(d - 1);
      double s = std::sin(two_pi * wd), c = std::cos(two_pi * wd);
      g[d - 1] += (2.0 * (wd - 1.0) * (1.0 + s * s) +
                   sq(wd - 1.0) * 2.0 * s * c * two_pi) * 0.25;
      return;
    }
    case benchmark_id::sphere:
      for (int i = 0; i < d; ++i) g[i] = 2.0 * x[i];
      return;
    case benchmark_id::ackley: {
      double r = std::sqrt(norm2(x) / d);
      double cbar = 0.0;
      for (double v : x) cbar += std::cos(two_pi * v);
      cbar /= d;
      double er = std::exp(-0.2 * r), ec = std::exp(cbar);
      for (int i = 0; i < d; ++i) {
        double radial = r > 0.0 ? 4.0 * er * x[i] / (d * r) : 0.0;
        g[i] = radial + two_pi / d * std::sin(two_pi * x[i]) * ec;
      }
      return;
    }
  }
  throw std::logic_error("unreachable target kind");
}

double target_model::batch_energy(const std::vector<double>& x,
                                  const std::vector<int>& batch) const {
  double s = 0.0;
  for (int i : batch) s += datum_energy(x[0], data[i]);
  return s * static_cast<double>(data.size()) / static_cast<double>(batch.size());
}

void target_model::batch_gradient(const std::vector<double>& x, const std::vector<int>& batch,
                                  std::vector<double>& g) const {
  double s = 0.0;
  for (int i : batch) s += datum_grad(x[0], data[i]);
  g.assign(1, s * static_cast<double>(data.size()) / static_cast<double>(batch.size()));
}

target_model make_gauss_mix_1d(std::vector<double> weights, std::vector<double> means,
                               std::vector<double> stds) {
  if (weights.size() != means.size() || means.size() != stds.size() || weights.empty())
    throw std::invalid_argument("mixture components must align");
  target_model m;
  m.kind = target_kind::gauss_mix_1d;
  m.dim = 1;
  m.weights = std::move(weights);
  m.means = std::move(means);
  m.stds = std::move(stds);
  return m;
}

target_model make_gauss_mix_posterior(std::size_t n_data, int batch_size,
                                      std::uint64_t data_seed, double beta_true, double phi,
                                      double sigma) {
  if (batch_size <= 0 || static_cast<std::size_t>(batch_size) > n_data)
    throw std::invalid_argument("batch size must lie in [1, n_data]");
  target_model m;
  m.kind = target_kind::gauss_mix_posterior;
  m.dim = 1;
  m.phi = phi;
  m.sigma = sigma;
  m.batch_size = batch_size;
  m.data.resize(n_data);
  rng_stream rng(data_seed);
  for (auto& v : m.data) {
    double mu = rng.uniform() < 0.5 ? beta_true : phi - beta_true;
    v = mu + sigma * rng.normal();
  }
  return m;
}

target_model make_quadratic_well(int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  target_model m;
  m.kind = target_kind::quadratic_well;
  m.dim = dim;
  return m;
}

target_model make_lattice25(bool regularized) {
  target_model m;
  m.kind = target_kind::lattice25;
  m.dim = 2;
  m.regularized = regularized;
  return m;
}

target_model make_rugged2d() {
  target_model m;
  m.kind = target_kind::rugged2d;
  m.dim = 2;
  return m;
}

target_model make_shallow_traps(int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  target_model m;
  m.kind = target_kind::shallow_traps;
  m.dim = dim;
  return m;
}

const std::vector<benchmark_meta>& benchmark_table() {
  static const std::vector<benchmark_meta> table = {
      {benchmark_id::rastrigin, "rastrigin", 20, 5e-4, 5.0, 30.0, 3.0, 0.02, 0.02, 75.0,
       200.0, 1000.0, 0.75, -5.12, 5.12},
      {benchmark_id::griewank, "griewank", 20, 0.1, 10.0, 50.0, 5.0, 10.0, 10.0, 25.0,
       100.0, 1000.0, 0.75, -600.0, 600.0},
      {benchmark_id::sum_squares, "sum_squares", 20, 0.01, 0.01, 10.0, 1.0, 1.0, 1.0, 1.5,
       100.0, 1000.0, 0.75, -10.0, 10.0},
      {benchmark_id::rosenbrock, "rosenbrock", 20, 1e-5, 10.0, 30.0, 3.0, 100.0, 10.0, 20.0,
       100.0, 1000.0, 0.75, -2.048, 2.048},
      {benchmark_id::zakharov, "zakharov", 20, 1e-9, 1e4, 500.0, 50.0, 1.0, 0.5, 500.0,
       100.0, 1000.0, 0.75, -5.0, 10.0},
      {benchmark_id::powell, "powell", 24, 1e-4, 1.0, 20.0, 2.0, 500.0, 200.0, 1.0,
       100.0, 1000.0, 0.75, -4.0, 5.0},
      {benchmark_id::dixon_price, "dixon_price", 25, 1e-5, 10.0, 20.0, 2.0, 100.0, 20.0, 10.0,
       100.0, 1000.0, 0.75, -10.0, 10.0},
      {benchmark_id::levy, "levy", 30, 1e-4, 100.0, 600.0, 60.0, 100.0, 10.0, 400.0,
       100.0, 1000.0, 0.75, -10.0, 10.0},
      {benchmark_id::sphere, "sphere", 30, 0.01, 1e-4, 20.0, 2.0, 1.0, 1.0, 1e-3,
       100.0, 1000.0, 0.75, -5.12, 5.12},
      {benchmark_id::ackley, "ackley", 30, 0.01, 0.05, 0.4, 0.04, 0.2, 0.2, 0.4,
       100.0, 1000.0, 0.75, -32.768, 32.768},
  };
  return table;
}

target_model make_benchmark(const std::string& name, int dim) {
  for (const auto& meta : benchmark_table()) {
    if (meta.name == name) {
      if (dim != meta.dim)
        throw std::invalid_argument("unsupported dimension for " + name + ": " +
                                    std::to_string(dim));
      target_model m;
      m.kind = target_kind::benchmark;
      m.dim = dim;
      m.meta = meta;
      return m;
    }
  }
  throw std::invalid_argument("unknown benchmark function: " + name);
}

double noisy_energy(const target_model& model, const noise_spec& noise,
                    const std::vector<double>& x, rng_stream& rng) {
  if (model.has_dataset()) {
    auto batch = draw_batch(model.data_size(), model.batch_size, rng);
    return model.batch_energy(x, batch);
  }
  double u = model.energy(x);
  switch (noise.energy) {
    case noise_spec::energy_kind::none:
      return u;
    case noise_spec::energy_kind::gaussian:
      return u + noise.energy_std * rng.normal();
    case noise_spec::energy_kind::student_t:
      return u + noise.energy_scale * rng.student_t(noise.energy_dof);
  }
  return u;
}

void noisy_gradient(const target_model& model, const noise_spec& noise,
                    const std::vector<double>& x, rng_stream& rng, std::vector<double>& g) {
  if (model.has_dataset()) {
    auto batch = draw_batch(model.data_size(), model.batch_size, rng);
    model.batch_gradient(x, batch, g);
    return;
  }
  model.gradient(x, g);
  if (noise.grad == noise_spec::gradient_kind::gaussian)
    for (auto& v : g) v += noise.gradient_std * rng.normal();
}

std::vector<int> draw_batch(std::size_t n_data, int batch_size, rng_stream& rng) {
  std::vector<int> out;
  out.reserve(batch_size);
  std::vector<bool> seen(n_data, false);
  for (std::size_t j = n_data - batch_size; j < n_data; ++j) {
    int t = rng.uniform_int(static_cast<int>(j) + 1);
    if (!seen[t]) {
      seen[t] = true;
      out.push_back(t);
    } else {
      seen[j] = true;
      out.push_back(static_cast<int>(j));
    }
  }
  return out;
}

}  // namespace sgmc
