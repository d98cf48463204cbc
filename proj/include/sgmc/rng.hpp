#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sgmc {

// 64-bit finalizer used to derive decorrelated stream ids from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// One stream per chain plus one coordinator stream per run. All samplers draw
// in a fixed documented order, so a (config, seed) pair replays exactly.
class rng_stream {
 public:
  explicit rng_stream(std::uint64_t seed) {
    std::uint64_t s = seed;
    std::uint32_t words[8];
    for (auto& w : words) w = static_cast<std::uint32_t>(splitmix64(s) >> 16);
    std::seed_seq seq(words, words + 8);
    engine_.seed(seq);
  }

  // stream id for chain c of a run seeded with s: s xor splitmix64(c + 1)
  static rng_stream for_chain(std::uint64_t seed, std::uint64_t chain_index) {
    std::uint64_t s = chain_index + 1;
    return rng_stream(seed ^ splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform on {0, ..., n - 1}; modulo bias is < n / 2^64, irrelevant here
  int uniform_int(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

  // standard normal, Box-Muller with a cached spare
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // gamma(shape, 1) via Marsaglia-Tsang squeeze; requires shape >= 1
  double gamma(double shape) {
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Student t with dof > 2: z / sqrt(chi2 / dof)
  double student_t(double dof) {
    double z = normal();
    double chi2 = 2.0 * gamma(0.5 * dof);
    return z / std::sqrt(chi2 / dof);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sgmc
