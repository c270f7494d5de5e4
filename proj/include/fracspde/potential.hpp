#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/levy.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/rng.hpp"
#include "fracspde/spectral.hpp"
#include "fracspde/temporal.hpp"

namespace fracspde {

namespace detail {

inline SpectralIntegrand real_part_integrand(const CharacteristicExponent& exp, std::function<double(double)> g) {
  SpectralIntegrand f;
  f.eval = [&exp, g](std::span<const double> xi) { return g(exp(xi).real()); };
  if (exp.is_radial()) f.radial = [&exp, g](double r) { return g(exp.radial(r).real()); };
  return f;
}

}  // namespace detail

// int (alpha + 2 Re psi)^{-2H} dmu
inline SpectralResult upsilon_star(double alpha, const HurstParams& hp, const CharacteristicExponent& exp,
                                   const SpectralMeasure& mu, const TruncationPlan& plan = {}) {
  if (!(alpha > 0.0)) throw config_error("alpha must be positive");
  if (exp.dim() != mu.dim()) throw dimension_error("upsilon_star: dimension mismatch");
  auto f = detail::real_part_integrand(exp, [=](double re) { return std::pow(alpha + 2.0 * re, -2.0 * hp.H); });
  if (auto p = exp.growth_power()) f.tail_exponent = -2.0 * hp.H * *p;
  return integrate_spectral(mu, f, plan);
}

struct InfiniteTimeFactor {
  double value = 0.0;
  double tail_bound = 0.0;
};

// alpha_H int int_{[0, inf)^2} e^{-lambda (r + s)} |r - s|^{2H-2} dr ds in the
// reduced form H int_0^{u_max} u^{2H-1} e^{-lambda u} du, u_max = 40 / lambda.
inline InfiniteTimeFactor infinite_time_factor(double lambda, const HurstParams& hp) {
  if (!(lambda > 0.0)) throw config_error("decay rate must be positive");
  const double umax = 40.0 / lambda, a = 2.0 * hp.H - 1.0;
  InfiniteTimeFactor out;
  out.value = hp.H * detail::power_exp_integral(2.0 * hp.H, lambda, umax).real();
  out.tail_bound = hp.H * std::pow(umax, a) * std::exp(-lambda * umax) / lambda / (1.0 - a / (lambda * umax));
  return out;
}

// int alpha_H int int e^{-(alpha + 2 Re psi)(r + s)} |r - s|^{2H-2} dr ds dmu
inline SpectralResult upsilon(double alpha, const HurstParams& hp, const CharacteristicExponent& exp,
                              const SpectralMeasure& mu, const TruncationPlan& plan = {}) {
  if (!(alpha > 0.0)) throw config_error("alpha must be positive");
  if (exp.dim() != mu.dim()) throw dimension_error("upsilon: dimension mismatch");
  auto f = detail::real_part_integrand(exp, [&hp, alpha](double re) {
    return infinite_time_factor(alpha + 2.0 * re, hp).value;
  });
  if (auto p = exp.growth_power()) f.tail_exponent = -2.0 * hp.H * *p;
  return integrate_spectral(mu, f, plan);
}

// 2^{-(2H+2)} [(alpha ^ 1) / (alpha + 3/2)]^{2H}
inline double upsilon_lower_constant(double alpha, const HurstParams& hp) {
  return std::pow(2.0, -(2.0 * hp.H + 2.0)) * std::pow(std::min(alpha, 1.0) / (alpha + 1.5), 2.0 * hp.H);
}

enum class SemigroupMethod { gaussian_closed_form, monte_carlo, spectral_at_zero };

inline const char* to_string(SemigroupMethod m) {
  switch (m) {
    case SemigroupMethod::gaussian_closed_form:
      return "gaussian_closed_form";
    case SemigroupMethod::monte_carlo:
      return "monte_carlo";
    default:
      return "spectral_at_zero";
  }
}

struct MonteCarloOptions {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 1;
  int workers = 1;
  // Average E[f(x + sqrt(V) Z) | V] in closed form instead of sampling Z.
  bool rao_blackwell = true;
  std::size_t chunk = 4096;
};

struct McValue {
  double value = 0.0;
  double std_error = 0.0;
};

namespace detail {

// Mean and standard error of fn(rng) over independent chunks, reduced in
// chunk order.
template <class F>
McValue chunked_mean(const MonteCarloOptions& mc, std::uint64_t stream_base, F&& sample) {
  if (mc.n_samples < 2) throw config_error("need at least two Monte Carlo samples");
  const std::size_t nch = (mc.n_samples + mc.chunk - 1) / mc.chunk;
  std::vector<double> s1(nch, 0.0), s2(nch, 0.0);
  parallel_for(nch, mc.workers, [&](std::size_t c) {
    auto rng = make_stream(mc.seed, stream_base + c);
    const std::size_t lo = c * mc.chunk, hi = std::min(mc.n_samples, lo + mc.chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      double v = sample(rng);
      s1[c] += v;
      s2[c] += v * v;
    }
  });
  double a = 0.0, b = 0.0;
  for (std::size_t c = 0; c < nch; ++c) {
    a += s1[c];
    b += s2[c];
  }
  const double n = static_cast<double>(mc.n_samples), mean = a / n;
  const double var = std::max(0.0, (b - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

inline std::pair<double, double> stable_of(const CharacteristicExponent& exp_sym) {
  auto sp = exp_sym.stable_parameters();
  if (!sp || sp->first > 2.0) throw config_error("Monte Carlo needs a symmetric stable exponent with beta <= 2");
  return *sp;
}

}  // namespace detail

// (P_u f)(x) = E f(x + X_u) for the process with exponent exp_sym.
inline McValue semigroup_apply(const Kernel& f, const CharacteristicExponent& exp_sym, double u, std::span<const double> x,
                               SemigroupMethod method, const MonteCarloOptions& mc = {},
                               const TruncationPlan& plan = {}) {
  const int d = f.dim();
  if (exp_sym.dim() != d || static_cast<int>(x.size()) != d) throw dimension_error("semigroup_apply: dimension mismatch");
  if (!(u > 0.0)) throw config_error("semigroup time must be positive");
  if (!exp_sym.is_real()) throw config_error("semigroup needs a symmetrized (real) exponent");
  switch (method) {
    case SemigroupMethod::gaussian_closed_form: {
      auto [beta, c] = detail::stable_of(exp_sym);
      if (beta != 2.0) throw config_error("gaussian_closed_form requires beta = 2");
      return {f.gaussian_smoothed(x, 2.0 * c * u), 0.0};
    }
    case SemigroupMethod::spectral_at_zero: {
      if (std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; }))
        throw config_error("spectral_at_zero requires x = 0");
      auto g = detail::real_part_integrand(exp_sym, [u](double re) { return std::exp(-u * re); });
      // Start the shells near the decay scale u^{-1/p} of the integrand.
      TruncationPlan p = plan;
      if (auto gp = exp_sym.growth_power(); gp && *gp > 0.0) p.r_first = plan.r_first * std::pow(u, -1.0 / *gp);
      auto r = integrate_spectral(f.partner_measure(), g, p);
      return {r.value, r.abs_error};
    }
    default: {
      auto [beta, c] = detail::stable_of(exp_sym);
      std::vector<double> xv(x.begin(), x.end());
      return detail::chunked_mean(mc, 0, [&, beta = beta, c = c](std::mt19937_64& rng) {
        const double v = subordinated_variance(beta, c * u, rng);
        if (mc.rao_blackwell) return f.gaussian_smoothed(xv, v);
        std::normal_distribution<double> nd;
        std::vector<double> y(d);
        for (int i = 0; i < d; ++i) y[i] = xv[i] + std::sqrt(v) * nd(rng);
        return f(y);
      });
    }
  }
}

enum class ResolventMethod { quadrature, monte_carlo };

struct ResolventQuery {
  double alpha = 1.0;
  std::vector<double> x;
  HurstParams hp;
  Kernel kernel = Kernel::constant(1, 1.0);
  CharacteristicExponent exp_sym = CharacteristicExponent::stable(1, 2.0, 2.0);
  SpectralMeasure measure = SpectralMeasure::discrete(1, {Atom{{0.0}, 1.0}});
};

struct ResolventValue {
  double value = 0.0;
  double std_error = 0.0;
  double tail_bound = 0.0;
};

// (R f)(x) = alpha_H int int |r-s|^{2H-2} e^{-alpha (r+s)} (P_{r+s} f)(x) dr ds
//          = H int_0^inf u^{2H-1} e^{-alpha u} (P_u f)(x) du.
inline ResolventValue fractional_resolvent(const ResolventQuery& q, ResolventMethod method,
                                           const MonteCarloOptions& mc = {}, const TruncationPlan& plan = {}) {
  const int d = q.kernel.dim();
  if (q.exp_sym.dim() != d || q.measure.dim() != d || static_cast<int>(q.x.size()) != d)
    throw dimension_error("fractional_resolvent: dimension mismatch");
  if (!(q.alpha > 0.0)) throw config_error("alpha must be positive");
  if (!q.kernel.is_partner(q.measure)) throw config_error("kernel and measure are not a Fourier pair");
  const double H = q.hp.H;
  if (method == ResolventMethod::monte_carlo) {
    // u ~ Gamma(2H, rate alpha) absorbs the time weight.
    auto [beta, c] = detail::stable_of(q.exp_sym);
    const double pref = H * std::tgamma(2.0 * H) * std::pow(q.alpha, -2.0 * H);
    auto r = detail::chunked_mean(mc, 0, [&, beta = beta, c = c](std::mt19937_64& rng) {
      std::gamma_distribution<double> gd(2.0 * H, 1.0 / q.alpha);
      const double u = gd(rng);
      const double v = subordinated_variance(beta, c * u, rng);
      if (mc.rao_blackwell) return q.kernel.gaussian_smoothed(q.x, v);
      std::normal_distribution<double> nd;
      std::vector<double> y(d);
      for (int i = 0; i < d; ++i) y[i] = q.x[i] + std::sqrt(v) * nd(rng);
      return q.kernel(y);
    });
    return {pref * r.value, pref * r.std_error, 0.0};
  }
  const bool at_zero = std::all_of(q.x.begin(), q.x.end(), [](double v) { return v == 0.0; });
  auto sp = q.exp_sym.stable_parameters();
  const bool gaussian = sp && sp->first == 2.0;
  if (!at_zero && !gaussian) throw config_error("quadrature route needs x = 0 or beta = 2; use monte_carlo");
  auto P = [&](double u) {
    if (gaussian) return q.kernel.gaussian_smoothed(q.x, 2.0 * sp->second * u);
    return semigroup_apply(q.kernel, q.exp_sym, u, q.x, SemigroupMethod::spectral_at_zero, mc, plan).value;
  };
  // P_u f(0) ~ u^{-gamma/beta} near 0 for homogeneous f.
  const double gamma = std::holds_alternative<WhiteKernel>(q.kernel.form()) ? double(d) : q.kernel.weight().degree;
  const double beta = sp ? sp->first : std::max(1e-3, q.exp_sym.growth_power().value_or(2.0));
  const double e0 = 2.0 * H - 1.0 - (at_zero ? gamma / beta : 0.0);
  if (e0 <= -1.0) {
    ResolventValue inf;
    inf.value = std::numeric_limits<double>::infinity();
    return inf;
  }
  auto g = [&](double u) { return std::pow(u, 2.0 * H - 1.0) * std::exp(-q.alpha * u) * P(u); };
  const double umax = 40.0 / q.alpha;
  // Geometric panels toward 0; singular Jacobi rule on the innermost one.
  double s = 0.0;
  double hi = umax;
  const double lo_end = umax * std::ldexp(1.0, -40);
  std::vector<std::pair<double, double>> panels;
  while (hi > lo_end) {
    double lo = hi / 2.0;
    panels.emplace_back(lo, hi);
    hi = lo;
  }
  for (auto [a, b] : panels) s += quad::integrate(g, a, b, 20);
  s += quad::integrate_singular(g, 0.0, hi, std::min(e0, 0.0), 20);
  ResolventValue out;
  out.value = H * s;
  out.tail_bound = H * std::pow(umax, 2.0 * H - 1.0) * std::exp(-q.alpha * umax) / q.alpha * P(umax) * 2.0;
  return out;
}

struct MaxPrincipleRow {
  std::vector<double> x;
  double value = 0.0;
  double std_error = 0.0;
  bool below_zero_value = true;
};

struct MaxPrincipleReport {
  double alpha = 0.0;
  double H = 0.0;
  double value_at_zero = 0.0;
  double se_at_zero = 0.0;
  double upsilon = 0.0;
  double rel_diff = 0.0;
  double rel_tolerance = 1e-2;
  std::vector<double> sup_location;
  std::vector<MaxPrincipleRow> rows;
  bool equality_ok = false;
  bool max_ok = false;
};

// (R f)(0) = Upsilon_H(alpha) and (R f)(x) <= (R f)(0) on a grid of x.
inline MaxPrincipleReport verify_max_principle(const ResolventQuery& base, const std::vector<std::vector<double>>& xs,
                                               ResolventMethod method, const MonteCarloOptions& mc = {},
                                               double rel_tolerance = 1e-2) {
  MaxPrincipleReport rep;
  rep.alpha = base.alpha;
  rep.H = base.hp.H;
  rep.rel_tolerance = rel_tolerance;
  ResolventQuery q = base;
  q.x.assign(base.kernel.dim(), 0.0);
  auto r0 = fractional_resolvent(q, method, mc);
  rep.value_at_zero = r0.value;
  rep.se_at_zero = r0.std_error;
  // Upsilon uses the unsymmetrized exponent; exp_sym = 2 Re psi, so pass psi = exp_sym / 2.
  auto [beta, c] = detail::stable_of(base.exp_sym);
  const auto psi = CharacteristicExponent::stable(base.kernel.dim(), beta, 0.5 * c);
  rep.upsilon = upsilon(base.alpha, base.hp, psi, base.measure).value;
  rep.rel_diff = std::abs(rep.value_at_zero - rep.upsilon) / rep.upsilon;
  rep.equality_ok = rep.rel_diff <= rel_tolerance;
  rep.max_ok = true;
  double best = rep.value_at_zero;
  rep.sup_location = q.x;
  for (const auto& x : xs) {
    q.x = x;
    auto r = fractional_resolvent(q, method, mc);
    MaxPrincipleRow row{x, r.value, r.std_error, false};
    // Common random numbers make the errors of the two values comparable; the
    // margin is their sum.
    row.below_zero_value = r.value + 3.0 * (r.std_error + rep.se_at_zero) < rep.value_at_zero ||
                           std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
    rep.max_ok = rep.max_ok && row.below_zero_value;
    if (r.value > best) {
      best = r.value;
      rep.sup_location = x;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

struct UpsilonComparison {
  double a = 0.0;
  double b = 0.0;
  double value_a = 0.0;
  double value_b = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

// c1^{2H} U*(b) <= U*(a) <= c2^{2H} U*(b), c1 = (b ^ 1)/(a + 1), c2 = (b + 1)((1/a) v 1).
inline UpsilonComparison upsilon_star_comparison(double a, double b, const HurstParams& hp,
                                                 const CharacteristicExponent& exp, const SpectralMeasure& mu,
                                                 const TruncationPlan& plan = {}) {
  UpsilonComparison out{a, b};
  out.value_a = upsilon_star(a, hp, exp, mu, plan).value;
  out.value_b = upsilon_star(b, hp, exp, mu, plan).value;
  const double c1 = std::min(b, 1.0) / (a + 1.0), c2 = (b + 1.0) * std::max(1.0 / a, 1.0);
  out.lower = std::pow(c1, 2.0 * hp.H) * out.value_b;
  out.upper = std::pow(c2, 2.0 * hp.H) * out.value_b;
  out.pass = out.lower <= out.value_a * (1.0 + 1e-12) && out.value_a <= out.upper * (1.0 + 1e-12);
  return out;
}

}  // namespace fracspde
