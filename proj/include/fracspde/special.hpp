#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fracspde {

inline double beta_fn(double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

// Normalizer of the kernel H(2H-1)|r-s|^{2H-2}.
inline double hurst_alpha(double H) { return H * (2.0 * H - 1.0); }

// Spectral weight of the same kernel: alpha_H |r-s|^{2H-2} has Fourier
// transform 2 pi c_H |tau|^{1-2H}.
inline double hurst_spectral_constant(double H) {
  return std::tgamma(2.0 * H + 1.0) * std::sin(std::numbers::pi * H) / (2.0 * std::numbers::pi);
}

// c such that c|x|^{-(d-alpha)} and |xi|^{-alpha} are a Fourier pair.
inline double riesz_partner_constant(double alpha, int d) {
  const double g = d - alpha;
  return std::pow(std::numbers::pi, 0.5 * d) * std::pow(2.0, g) * std::tgamma(0.5 * g) / std::tgamma(0.5 * alpha);
}

// Confluent hypergeometric M(a, b, -x) for x >= 0 and b > a > 0.
inline double kummer_m_neg(double a, double b, double x) {
  if (!(b > a && a > 0.0)) throw std::domain_error("kummer_m_neg: requires b > a > 0");
  if (x < 0.0) throw std::domain_error("kummer_m_neg: requires x >= 0");
  if (x < 36.0) {
    // Kummer transform; all terms positive.
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < 2000; ++n) {
      term *= (b - a + n) / (b + n) * x / (n + 1.0);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::exp(-x) * sum;
  }
  double term = 1.0, sum = 1.0;
  for (int s = 0; s < 200; ++s) {
    double next = term * (a + s) * (a - b + 1.0 + s) / ((s + 1.0) * x);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::exp(std::lgamma(b) - std::lgamma(b - a)) * std::pow(x, -a) * sum;
}

// E|m + sqrt(v) Z|^{-gamma}, Z standard normal in R^d, 0 < gamma < d.
inline double gaussian_inverse_moment(double gamma, int d, double m2, double v) {
  if (gamma == 0.0) return 1.0;
  const double pref = std::pow(2.0 * v, -0.5 * gamma) * std::exp(std::lgamma(0.5 * (d - gamma)) - std::lgamma(0.5 * d));
  return pref * kummer_m_neg(0.5 * gamma, 0.5 * d, 0.5 * m2 / v);
}

}  // namespace fracspde
