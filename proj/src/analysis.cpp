#include "sgmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgmc {

double simpson(const std::function<double(double)>& f, double lo, double hi, int intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2 == 1) ++intervals;
  double h = (hi - lo) / intervals;
  double s = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) s += f(lo + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

int reference_density::cell_of(const std::vector<double>& x) const {
  double w = (hi - lo) / cells;
  int idx = 0;
  for (int d = 0; d < dims; ++d) {
    if (x[d] < lo || x[d] > hi)
      throw std::domain_error("sample outside the reference grid; widen the grid");
    int c = static_cast<int>((x[d] - lo) / w);
    if (c == cells) --c;  // right edge belongs to the last cell
    idx = idx * cells + c;
  }
  return idx;
}

reference_density reference_from_energy(const target_model& model, double tau, double lo,
                                        double hi, int cells) {
  reference_density ref;
  ref.dims = model.dim;
  ref.lo = lo;
  ref.hi = hi;
  ref.cells = cells;
  if (model.dim != 1 && model.dim != 2)
    throw std::invalid_argument("reference grids cover one and two dimensions");
  const int sub = model.dim == 1 ? 8 : 3;  // midpoint refinement per cell
  double w = (hi - lo) / cells;
  std::vector<double> u;
  if (model.dim == 1) {
    ref.mass.assign(cells, 0.0);
    u.resize(static_cast<std::size_t>(cells) * sub);
    std::vector<double> x(1);
    std::size_t n = 0;
    for (int c = 0; c < cells; ++c)
      for (int s = 0; s < sub; ++s) {
        x[0] = lo + w * c + w * (s + 0.5) / sub;
        u[n++] = model.energy(x);
      }
    double umin = *std::min_element(u.begin(), u.end());
    n = 0;
    for (int c = 0; c < cells; ++c)
      for (int s = 0; s < sub; ++s) ref.mass[c] += std::exp(-(u[n++] - umin) / tau);
  } else {
    ref.mass.assign(static_cast<std::size_t>(cells) * cells, 0.0);
    u.resize(static_cast<std::size_t>(cells) * cells * sub * sub);
    std::vector<double> x(2);
    std::size_t n = 0;
    for (int c0 = 0; c0 < cells; ++c0)
      for (int s0 = 0; s0 < sub; ++s0)
        for (int c1 = 0; c1 < cells; ++c1)
          for (int s1 = 0; s1 < sub; ++s1) {
            x[0] = lo + w * c0 + w * (s0 + 0.5) / sub;
            x[1] = lo + w * c1 + w * (s1 + 0.5) / sub;
            u[n++] = model.energy(x);
          }
    double umin = *std::min_element(u.begin(), u.end());
    n = 0;
    for (int c0 = 0; c0 < cells; ++c0)
      for (int s0 = 0; s0 < sub; ++s0)
        for (int c1 = 0; c1 < cells; ++c1)
          for (int s1 = 0; s1 < sub; ++s1)
            ref.mass[static_cast<std::size_t>(c0) * cells + c1] +=
                std::exp(-(u[n++] - umin) / tau);
  }
  double total = 0.0;
  for (double v : ref.mass) total += v;
  for (double& v : ref.mass) v /= total;
  return ref;
}

double kl_estimate(const std::vector<std::vector<double>>& samples,
                   const reference_density& ref) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  std::vector<double> counts(ref.mass.size(), 0.0);
  for (const auto& x : samples) counts[ref.cell_of(x)] += 1.0;
  double total = 0.0;
  for (double& c : counts) {
    c += 1e-8;
    total += c;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double p = counts[i] / total;
    kl += p * std::log(p / ref.mass[i]);
  }
  return kl;
}

std::vector<double> mode_masses(const std::vector<double>& samples_1d,
                                const std::vector<double>& boundaries) {
  if (samples_1d.empty()) throw std::invalid_argument("no samples");
  std::vector<double> mass(boundaries.size() + 1, 0.0);
  for (double v : samples_1d) {
    std::size_t region = 0;
    while (region < boundaries.size() && v > boundaries[region]) ++region;
    mass[region] += 1.0;
  }
  for (double& m : mass) m /= static_cast<double>(samples_1d.size());
  return mass;
}

std::optional<long long> hitting_time(const std::vector<double>& energy_trace, double u_min,
                                      double rho) {
  for (std::size_t i = 0; i < energy_trace.size(); ++i)
    if (energy_trace[i] <= u_min + rho) return static_cast<long long>(i);
  return std::nullopt;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double d : v) s += d;
  return s / static_cast<double>(v.size());
}

double replicate_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("need at least two replications");
  double mean = mean_of(v);
  double s = 0.0;
  for (double d : v) s += (d - mean) * (d - mean);
  return s / static_cast<double>(v.size() - 1);
}

double std_error(const std::vector<double>& v) {
  return std::sqrt(replicate_variance(v) / static_cast<double>(v.size()));
}

std::vector<double> fd_gradient(const target_model& model, const std::vector<double>& x,
                                double h) {
  std::vector<double> g(x.size());
  std::vector<double> y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double hi = h * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + hi;
    double up = model.energy(y);
    y[i] = x[i] - hi;
    double dn = model.energy(y);
    y[i] = x[i];
    g[i] = (up - dn) / (2.0 * hi);
  }
  return g;
}

double ecdf_max_shortfall(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double worst = 0.0;
  std::size_t ia = 0, ib = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (ia < a.size() || ib < b.size()) {
    double v = ia < a.size() && (ib >= b.size() || a[ia] <= b[ib]) ? a[ia] : b[ib];
    while (ia < a.size() && a[ia] <= v) ++ia;
    while (ib < b.size() && b[ib] <= v) ++ib;
    worst = std::max(worst, static_cast<double>(ib) / nb - static_cast<double>(ia) / na);
  }
  return worst;
}

}  // namespace sgmc
