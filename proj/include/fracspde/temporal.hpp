#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/levy.hpp"
#include "fracspde/quadrature.hpp"
#include "fracspde/special.hpp"

namespace fracspde {

double estimate_bH_value(double H, int family_size);

// Constants attached to a Hurst index H in (1/2, 1).
struct HurstParams {
  double H = 0.75;
  double alpha_H = 0.375;
  double c_H = 0.0;
  double beta_2_2Hm1 = 0.0;
  double b_H = 1.0;

  HurstParams() : HurstParams(0.75) {}
  // bh_family = 0 skips the estimate of b_H and leaves it at 1.
  explicit HurstParams(double h, int bh_family = 50) : H(h) {
    if (!(H > 0.5 && H < 1.0)) throw config_error("Hurst index must lie in (1/2, 1)");
    alpha_H = hurst_alpha(H);
    c_H = hurst_spectral_constant(H);
    beta_2_2Hm1 = beta_fn(2.0, 2.0 * H - 1.0);
    if (bh_family > 0) b_H = estimate_bH_value(H, bh_family);
  }
};

enum class TemporalMethod { time_domain, spectral_domain, reduced_1d };

struct TemporalKernelResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  TemporalMethod method = TemporalMethod::reduced_1d;
};

namespace detail {

// Runs a rule at two orders; the difference is the error estimate.
template <class F>
TemporalKernelResult two_orders(F&& f, TemporalMethod m, int n = 24) {
  const double hi = f(n), lo = f(std::max(8, n * 2 / 3));
  return {hi, std::abs(hi - lo), m};
}

}  // namespace detail

struct TimeQuadrature {
  int nodes = 24;
  int outer_panels = 8;
  int inner_panels = 4;
};

// Weights of the kernel alpha_H|r-s|^{2H-2} over the cells of a uniform grid
// of [0, t] with n cells, indexed by |j - k|. They sum (as a Toeplitz matrix)
// to t^{2H}.
inline std::vector<double> cell_weights(int n, double t, double H) {
  if (n < 1) throw config_error("cell_weights: need at least one cell");
  const double h2H = std::pow(t / n, 2.0 * H);
  std::vector<double> w(n);
  auto p = [&](double m) { return std::pow(m, 2.0 * H); };
  w[0] = h2H;
  for (int m = 1; m < n; ++m) w[m] = 0.5 * h2H * (p(m + 1.0) - 2.0 * p(m) + p(m - 1.0));
  return w;
}

namespace detail {

// Integral over [0, t] of u^{mu - 1} e^{-z u}, mu > 0, any complex z.
inline cplx power_exp_integral(double mu, cplx z, double t, int n = 24) {
  const double az = std::abs(z);
  if (az * t <= 30.0) {
    const double w = az > 0.0 ? std::min(t, 2.0 / az) : t;
    auto f = [&](double u) { return std::pow(u, mu - 1.0) * std::exp(-z * u); };
    cplx s = quad::integrate_singular(f, 0.0, w, mu - 1.0, n);
    int np = static_cast<int>(std::ceil((t - w) / w - 1e-9));
    for (int k = 0; k < np; ++k) {
      double a = w + (t - w) * k / np, b = w + (t - w) * (k + 1) / np;
      s += quad::integrate(f, a, b, n);
    }
    return s;
  }
  // Rotate onto the steepest-descent ray from 0 and from t.
  const cplx ray = std::conj(z) / az;
  const cplx head = std::exp(std::lgamma(mu)) * std::pow(z, -mu);
  const double Y = 45.0 / az;
  auto g = [&](double y) { return std::pow(t + y * ray, mu - 1.0) * std::exp(-az * y); };
  const int np = static_cast<int>(std::ceil(Y / std::min(4.0 / az, 0.5 * t)));
  cplx tail = 0.0;
  for (int k = 0; k < np; ++k) tail += quad::integrate(g, Y * k / np, Y * (k + 1) / np, n);
  return head - std::exp(-z * t) * tail * ray;
}

}  // namespace detail

// Norm of the parabolic kernel r -> e^{-(t-r) psi} on [0, t]:
// alpha_H int int e^{-(t-r)psi} conj(e^{-(t-s)psi}) |r-s|^{2H-2} dr ds.
inline double parabolic_kernel_norm(cplx psi, double t, const HurstParams& hp, int n = 24) {
  if (t <= 0.0) return 0.0;
  const double R = psi.real(), I = psi.imag(), nu = 2.0 * hp.H - 1.0;
  if (R < 0.0) throw config_error("exponent with negative real part");
  const double apsi = std::abs(psi);
  if (apsi == 0.0) return std::pow(t, 2.0 * hp.H);
  if (apsi * t <= 30.0) {
    auto A = [&](double u) {
      double decay = R * (t - u) > 1e-8 ? -std::expm1(-2.0 * (t - u) * R) / (2.0 * R) : (t - u) * (1.0 - R * (t - u));
      return 2.0 * std::cos(u * I) * std::exp(-u * R) * decay;
    };
    auto f = [&](double u) { return std::pow(u, nu - 1.0) * A(u); };
    const double w = std::min(t, 1.0 / apsi);
    double s = quad::integrate_singular(f, 0.0, w, nu - 1.0, n);
    int np = static_cast<int>(std::ceil((t - w) / w - 1e-9));
    for (int k = 0; k < np; ++k) s += quad::integrate(f, w + (t - w) * k / np, w + (t - w) * (k + 1) / np, n);
    return hp.alpha_H * s;
  }
  const double Rt = R * t;
  if (Rt < 1e-5) {
    const cplx iI(0.0, I);
    cplx v = t * detail::power_exp_integral(nu, iI, t, n) - detail::power_exp_integral(nu + 1.0, iI, t, n);
    return 2.0 * hp.alpha_H * (1.0 - Rt) * v.real();
  }
  cplx v = detail::power_exp_integral(nu, psi, t, n);
  if (Rt < 40.0) v -= std::exp(-2.0 * Rt) * detail::power_exp_integral(nu, -std::conj(psi), t, n);
  return hp.alpha_H / R * v.real();
}

// Norm of the hyperbolic kernel r -> sin((t-r) w)/w, w = sqrt(psi), psi >= 0.
inline double hyperbolic_kernel_norm(double psi, double t, const HurstParams& hp, int n = 24) {
  if (psi < 0.0) throw config_error("hyperbolic kernel needs a nonnegative exponent");
  if (t <= 0.0) return 0.0;
  const double nu = 2.0 * hp.H - 1.0;
  if (psi == 0.0) return std::pow(t, 2.0 * hp.H + 2.0) / (2.0 * (hp.H + 1.0));
  const double w = std::sqrt(psi);
  if (w * t <= 1.0) {
    auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; };
    auto A = [&](double u) {
      auto g = [&](double s) { return (s + u) * s * sinc((s + u) * w) * sinc(s * w); };
      return 2.0 * quad::integrate(g, 0.0, t - u, std::max(8, n / 2));
    };
    auto f = [&](double u) { return std::pow(u, nu - 1.0) * A(u); };
    return hp.alpha_H * quad::integrate_singular(f, 0.0, t, nu - 1.0, n);
  }
  if (w * t <= 30.0) {
    auto A = [&](double u) {
      return ((t - u) * std::cos(u * w) - (std::sin((2.0 * t - u) * w) - std::sin(u * w)) / (2.0 * w)) / psi;
    };
    auto f = [&](double u) { return std::pow(u, nu - 1.0) * A(u); };
    const double h = std::min(t, 1.0 / w);
    double s = quad::integrate_singular(f, 0.0, h, nu - 1.0, n);
    int np = static_cast<int>(std::ceil((t - h) / h - 1e-9));
    for (int k = 0; k < np; ++k) s += quad::integrate(f, h + (t - h) * k / np, h + (t - h) * (k + 1) / np, n);
    return hp.alpha_H * s;
  }
  const cplx iw(0.0, w);
  const cplx p0 = detail::power_exp_integral(nu, iw, t, n);
  const cplx p1 = detail::power_exp_integral(nu + 1.0, iw, t, n);
  const double cos_part = (t * p0 - p1).real();
  const double sin_part = (std::exp(cplx(0.0, 2.0 * t * w)) * p0).imag() + p0.imag();
  return hp.alpha_H / psi * (cos_part - sin_part / (2.0 * w));
}

// alpha_H int_0^t int_0^t phi(r) conj(phi(s)) |r-s|^{2H-2} dr ds for a smooth
// phi, via the reduction to alpha_H int_0^t u^{2H-2} A(u) du with
// A(u) = 2 Re int_0^{t-u} phi(s+u) conj(phi(s)) ds.
inline TemporalKernelResult weighted_double_integral(const std::function<cplx(double)>& phi, double t, const HurstParams& hp,
                                               const TimeQuadrature& q = {}) {
  if (!(t > 0.0)) throw config_error("weighted_double_integral: t must be positive");
  const double nu = 2.0 * hp.H - 1.0;
  auto run = [&](int n) {
    auto A = [&](double u) {
      auto g = [&](double s) { return (phi(s + u) * std::conj(phi(s))).real(); };
      const double len = t - u;
      double acc = 0.0;
      for (int k = 0; k < q.inner_panels; ++k)
        acc += quad::integrate(g, len * k / q.inner_panels, len * (k + 1) / q.inner_panels, n);
      return 2.0 * acc;
    };
    auto f = [&](double u) { return std::pow(u, nu - 1.0) * A(u); };
    const double h = t / q.outer_panels;
    double s = quad::integrate_singular(f, 0.0, h, nu - 1.0, n);
    for (int k = 1; k < q.outer_panels; ++k) s += quad::integrate(f, h * k, h * (k + 1), n);
    return hp.alpha_H * s;
  };
  const double hi = run(q.nodes), lo = run(std::max(4, q.nodes * 2 / 3));
  if (!std::isfinite(hi) || !std::isfinite(lo)) throw numeric_error("weighted_double_integral: integrand is not finite");
  return {hi, std::abs(hi - lo), TemporalMethod::time_domain};
}

namespace detail {

// int_L^inf h(x) e^{i w x} dx for w > 0 and h analytic and decaying in the
// quadrant right of L; rotated onto x = L + i y.
template <class F>
cplx oscillatory_tail(F&& h, double L, double w, int n) {
  const double Y = 45.0 / w;
  const int np = std::max(1, static_cast<int>(std::ceil(Y / std::min(4.0 / w, 0.25 * L))));
  auto g = [&](double y) { return h(cplx(L, y)) * std::exp(-w * y); };
  cplx s = 0.0;
  for (int k = 0; k < np; ++k) s += quad::integrate(g, Y * k / np, Y * (k + 1) / np, n);
  return cplx(0.0, 1.0) * std::exp(cplx(0.0, w * L)) * s;
}

// int_L^inf g(x) dx for g decaying like x^{-1-q}; x = L v^{-1/q}.
template <class F>
double power_tail(F&& g, double L, double q, int n) {
  auto k = [&](double v) {
    if (v <= 0.0) return 0.0;
    double x = L * std::pow(v, -1.0 / q);
    return g(x) * L / q * std::pow(v, -1.0 - 1.0 / q);
  };
  return quad::integrate(k, 0.0, 0.5, n) + quad::integrate(k, 0.5, 1.0, n);
}

// int_a^b of f with a smooth integrand except |x - sing|^e at listed points;
// breaks must include every singular point as an endpoint.
template <class F>
double panel_sum(F&& f, std::vector<double> breaks, double hmax, double sing, double e, int n) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double a = breaks[i], b = breaks[i + 1];
    int np = std::max(1, static_cast<int>(std::ceil((b - a) / hmax - 1e-9)));
    for (int k = 0; k < np; ++k) {
      double pa = a + (b - a) * k / np, pb = a + (b - a) * (k + 1) / np;
      if (pa == sing && e < 0.0)
        s += quad::integrate_singular(f, pa, pb, e, n);
      else if (pb == sing && e < 0.0)
        s += quad::integrate_singular(f, pa, pb, e, n, true);
      else
        s += quad::integrate(f, pa, pb, n);
    }
  }
  return s;
}

// Geometric break points around x0 from scale lo out to scale hi.
inline void add_graded(std::vector<double>& br, double x0, double lo, double hi, double lim_lo, double lim_hi) {
  br.push_back(x0);
  for (double s = lo; s < hi; s *= 2.0) {
    if (x0 - s > lim_lo) br.push_back(x0 - s);
    if (x0 + s < lim_hi) br.push_back(x0 + s);
  }
}

// (1 - e^{-w}) / w, stable near w = 0.
inline cplx one_minus_exp_over(cplx w) {
  if (std::abs(w) < 0.5) {
    cplx term = 1.0, s = 1.0;
    for (int k = 1; k < 30; ++k) {
      term *= -w / double(k + 1);
      s += term;
    }
    return s;
  }
  return (1.0 - std::exp(-w)) / w;
}

}  // namespace detail

// scale * int |F(tau)|^2 |tau|^{-s} dtau for F the Fourier transform of
// x -> e^{-x(a + i b)} on [0, T]; s in [0, 1).
inline double line_integral_exponential(double a, double b, double T, double s, double scale, int n = 24) {
  if (!(T > 0.0)) throw config_error("interval length must be positive");
  if (a < 0.0) throw config_error("exponential decay rate must be nonnegative");
  auto F2 = [&](double tau) {
    cplx z(a, b + tau);
    return std::norm(T * detail::one_minus_exp_over(z * T));
  };
  auto f = [&](double tau) { return F2(tau) * (tau == 0.0 ? 0.0 : std::pow(std::abs(tau), -s)); };
  const double L = std::max({200.0, 50.0 / T, 20.0 * std::abs(b), 20.0 * a});
  const double hmax = std::numbers::pi / T;
  std::vector<double> br{-L, L};
  detail::add_graded(br, 0.0, std::min(hmax, 1.0) * 1e-3, std::min(hmax, 1.0), -L, L);
  if (b != 0.0) detail::add_graded(br, -b, std::max(a, 1e-3) * 0.25, hmax, -L, L);
  double mid = detail::panel_sum(f, br, hmax, 0.0, -s, n);
  // Tails: (1 + e^{-2aT} - 2 e^{-aT} cos((b + tau) T)) / (a^2 + (b + tau)^2).
  const double ea = std::exp(-a * T);
  double tails = 0.0;
  for (double sgn : {1.0, -1.0}) {
    const double bb = sgn * b;  // tau -> sgn * x with x > 0
    auto smooth = [&](double x) { return (1.0 + ea * ea) * std::pow(x, -s) / (a * a + (bb + x) * (bb + x)); };
    tails += detail::power_tail(smooth, L, 1.0 + s, n);
    auto h = [&](cplx x) { return std::pow(x, -s) / (a * a + (bb + x) * (bb + x)); };
    cplx osc = detail::oscillatory_tail(h, L, T, n);
    tails -= 2.0 * ea * (std::exp(cplx(0.0, bb * T)) * osc).real();
  }
  return scale * (mid + tails);
}

// Same for x -> sin(x) on [0, T].
inline double line_integral_sin(double T, double s, double scale, int n = 24) {
  if (!(T > 0.0)) throw config_error("interval length must be positive");
  const double sT = std::sin(T), cT = std::cos(T);
  auto F2 = [&](double tau) {
    if (std::abs(std::abs(tau) - 1.0) < 0.5) {
      auto E = [&](double k) {
        double x = 0.5 * k * T;
        double sc = x == 0.0 ? 1.0 : std::sin(x) / x;
        return T * std::exp(cplx(0.0, x)) * sc;
      };
      cplx F = (E(1.0 - tau) - E(-1.0 - tau)) / cplx(0.0, 2.0);
      return std::norm(F);
    }
    double st = std::sin(tau * T), ct = std::cos(tau * T), d = tau * tau - 1.0;
    return ((st - tau * sT) * (st - tau * sT) + (ct - cT) * (ct - cT)) / (d * d);
  };
  // Even integrand: twice the half line.
  auto f = [&](double tau) { return F2(tau) * (tau == 0.0 ? 0.0 : std::pow(tau, -s)); };
  const double L = std::max(200.0, 50.0 / T);
  const double hmax = std::min(std::numbers::pi / T, 0.5);
  std::vector<double> br{0.0, L, 1.0};
  for (double x = 1e-3; x < 1.0; x *= 2.0) br.push_back(x);
  double mid = detail::panel_sum(f, br, hmax, 0.0, -s, n);
  auto smooth = [&](double x) {
    double d = x * x - 1.0;
    return (1.0 + cT * cT + x * x * sT * sT) * std::pow(x, -s) / (d * d);
  };
  double tail = detail::power_tail(smooth, L, 1.0 + s, n);
  // -2 (tau sinT sin(tau T) + cosT cos(tau T)) / (tau^2 - 1)^2
  auto h1 = [&](cplx x) { return x * std::pow(x, -s) / ((x * x - 1.0) * (x * x - 1.0)); };
  auto h2 = [&](cplx x) { return std::pow(x, -s) / ((x * x - 1.0) * (x * x - 1.0)); };
  tail -= 2.0 * (sT * detail::oscillatory_tail(h1, L, T, n).imag() + cT * detail::oscillatory_tail(h2, L, T, n).real());
  return 2.0 * scale * (mid + tail);
}

inline TemporalKernelResult h_norm_exponential_spectral(double a, double b, double T, const HurstParams& hp) {
  return detail::two_orders([&](int n) { return line_integral_exponential(a, b, T, 2.0 * hp.H - 1.0, hp.c_H, n); },
                            TemporalMethod::spectral_domain);
}

inline TemporalKernelResult h_norm_exponential_time(double a, double b, double T, const HurstParams& hp) {
  if (a < 0.0) throw config_error("exponential decay rate must be nonnegative");
  return detail::two_orders([&](int n) { return parabolic_kernel_norm(cplx(a, b), T, hp, n); },
                            TemporalMethod::reduced_1d);
}

inline TemporalKernelResult h_norm_sin_spectral(double T, const HurstParams& hp) {
  return detail::two_orders([&](int n) { return line_integral_sin(T, 2.0 * hp.H - 1.0, hp.c_H, n); },
                            TemporalMethod::spectral_domain);
}

// sin on [0, T] reversed in time is the hyperbolic kernel with psi = 1.
inline TemporalKernelResult h_norm_sin_time(double T, const HurstParams& hp) {
  return detail::two_orders([&](int n) { return hyperbolic_kernel_norm(1.0, T, hp, n); }, TemporalMethod::reduced_1d);
}

enum class PlancherelFamily { heat, wave };

struct PlancherelValues {
  double closed_form = 0.0;
  double quadrature = 0.0;
};

// int |F(f 1_[0,T])|^2 dtau for f = e^{-x} (heat) or sin (wave).
inline PlancherelValues plancherel_identity_values(double T, PlancherelFamily family) {
  if (!(T > 0.0)) throw config_error("interval length must be positive");
  if (family == PlancherelFamily::heat)
    return {std::numbers::pi * (-std::expm1(-2.0 * T)), line_integral_exponential(1.0, 0.0, T, 0.0, 1.0)};
  return {std::numbers::pi * T * (1.0 - std::sin(2.0 * T) / (2.0 * T)), line_integral_sin(T, 0.0, 1.0)};
}

struct BhEstimate {
  double value = 1.0;
  std::vector<double> ratios;
  std::vector<std::string> members;
};

// Lower estimate of the best constant in ||phi||_H <= b ||phi||_{L^{1/H}} by
// maximizing the ratio over a finite family of nonnegative test functions.
inline BhEstimate estimate_bH(double H, int family_size) {
  if (!(H > 0.5 && H < 1.0)) throw config_error("Hurst index must lie in (1/2, 1)");
  if (family_size < 1) throw config_error("family size must be positive");
  const HurstParams hp(H, 0);
  const double p = 1.0 / H;
  BhEstimate out;
  out.value = 0.0;
  const double ts[] = {0.5, 1.0, 2.0};
  for (int i = 0; i < family_size; ++i) {
    const int kind = i % 3;
    const double t = ts[(i / 3) % 3];
    double ratio = 0.0;
    std::string name;
    if (kind == 0) {
      // Indicator of [0, t]: both sides equal t^{2H}.
      ratio = std::sqrt(parabolic_kernel_norm(0.0, t, hp) / std::pow(t, 2.0 * H));
      name = "indicator(t=" + std::to_string(t) + ")";
    } else if (kind == 1) {
      const int ne = std::max(1, family_size / 3);
      const double lam = 0.01 * std::pow(1e4, ne == 1 ? 0.5 : double(i / 3) / (ne - 1));
      // e^{-lam x} on [0, T] with T large enough to hold mass to 1e-12.
      const double T = 40.0 / lam;
      double num = parabolic_kernel_norm(lam, T, hp);
      double lp = -std::expm1(-p * lam * T) / (p * lam);
      ratio = std::sqrt(num / std::pow(lp, 2.0 * H));
      name = "exponential(lambda=" + std::to_string(lam) + ")";
    } else {
      auto phi = [&](double x) { return cplx(std::sin(std::numbers::pi * x / t), 0.0); };
      double num = weighted_double_integral(phi, t, hp).value;
      auto g = [&](double x) { return std::pow(std::sin(std::numbers::pi * x / t), p); };
      double lp = quad::integrate_singular(g, 0.0, 0.5 * t, 0.0, 32) * 2.0;
      ratio = std::sqrt(num / std::pow(lp, 2.0 * H));
      name = "half-sine(t=" + std::to_string(t) + ")";
    }
    out.ratios.push_back(ratio);
    out.members.push_back(name);
    out.value = std::max(out.value, ratio);
  }
  return out;
}

inline double estimate_bH_value(double H, int family_size) {
  static std::mutex mtx;
  static std::map<std::pair<double, int>, double> memo;
  {
    std::lock_guard lock(mtx);
    auto it = memo.find({H, family_size});
    if (it != memo.end()) return it->second;
  }
  double v = estimate_bH(H, family_size).value;
  std::lock_guard lock(mtx);
  memo[{H, family_size}] = v;
  return v;
}

}  // namespace fracspde
