#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fracspde {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator for (seed, stream); streams never share state.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed), b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// Uniform on the open interval (0, 1).
template <class Rng>
double open_uniform(Rng& rng) {
  for (;;) {
    double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0) return u;
  }
}

// Positive a-stable variable with E e^{-lambda S} = e^{-lambda^a}, 0 < a <= 1
// (Kanter's representation).
template <class Rng>
double positive_stable(double a, Rng& rng) {
  if (a >= 1.0) return 1.0;
  const double th = std::numbers::pi * open_uniform(rng);
  const double w = -std::log(open_uniform(rng));
  return std::sin(a * th) / std::pow(std::sin(th), 1.0 / a) * std::pow(std::sin((1.0 - a) * th) / w, (1.0 - a) / a);
}

// Variance multiplier of a rotation-invariant stable increment with
// characteristic function e^{-kappa |xi|^beta}: X = sqrt(V) Z, Z ~ N(0, I).
template <class Rng>
double subordinated_variance(double beta, double kappa, Rng& rng) {
  return 2.0 * std::pow(kappa, 2.0 / beta) * positive_stable(0.5 * beta, rng);
}

}  // namespace fracspde
