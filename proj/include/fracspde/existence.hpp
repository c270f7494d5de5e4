#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/levy.hpp"
#include "fracspde/spectral.hpp"
#include "fracspde/temporal.hpp"

namespace fracspde {

enum class Problem { parabolic, hyperbolic };

inline const char* to_string(Problem p) { return p == Problem::parabolic ? "parabolic" : "hyperbolic"; }

struct VarianceKernelQuery {
  double t = 1.0;
  std::vector<double> xi;
  Problem problem = Problem::parabolic;
  HurstParams hp;
  CharacteristicExponent exp = CharacteristicExponent::stable(1, 2.0);
};

// Variance kernel N_t for a known exponent value.
inline double nt_value(Problem p, cplx psi, double t, const HurstParams& hp, int n = 24) {
  if (p == Problem::parabolic) return parabolic_kernel_norm(psi, t, hp, n);
  if (psi.imag() != 0.0) throw config_error("hyperbolic problem needs a real exponent");
  return hyperbolic_kernel_norm(psi.real(), t, hp, n);
}

inline TemporalKernelResult nt_parabolic(const VarianceKernelQuery& q) {
  if (!(q.t > 0.0)) throw config_error("t must be positive");
  const cplx psi = q.exp(q.xi);
  return detail::two_orders([&](int n) { return parabolic_kernel_norm(psi, q.t, q.hp, n); }, TemporalMethod::reduced_1d);
}

inline TemporalKernelResult nt_hyperbolic(const VarianceKernelQuery& q) {
  if (!(q.t > 0.0)) throw config_error("t must be positive");
  const cplx psi = q.exp(q.xi);
  if (psi.imag() != 0.0) throw config_error("hyperbolic problem needs Im psi = 0");
  return detail::two_orders([&](int n) { return hyperbolic_kernel_norm(psi.real(), q.t, q.hp, n); },
                            TemporalMethod::reduced_1d);
}

inline TemporalKernelResult nt(const VarianceKernelQuery& q) {
  return q.problem == Problem::parabolic ? nt_parabolic(q) : nt_hyperbolic(q);
}

struct BoundConstants {
  double C_H = 0.0;
  double C_HK = 0.0;
  double D1_H = 0.0;
  double D2_H = 0.0;
  double a_K = 0.0;
  double rho = 0.0;
  double C_K = 0.0;
};

inline BoundConstants bound_constants(const HurstParams& hp, double K) {
  if (!(K >= 0.0)) throw config_error("K must be nonnegative");
  const double H = hp.H, e = std::numbers::e, pi = std::numbers::pi;
  BoundConstants b;
  b.C_H = std::pow(H, 2.0 * H) * hp.b_H * hp.b_H * e * e;
  b.a_K = std::min(0.5, pi / (4.0 * std::max(K, 1.0)));
  b.rho = 2.0 * K + 1.0;
  for (int i = 0; i < 200; ++i) {
    b.C_K = pi * (1.0 - std::exp(-2.0 * b.a_K)) - 10.0 * b.rho / (b.rho * b.rho - K * K);
    if (b.C_K > 0.01) break;
    b.rho *= 2.0;
  }
  b.C_HK = std::min((1.0 - b.a_K) * (1.0 - b.a_K) * std::cos(K * b.a_K),
                    b.C_K * hp.c_H * std::pow(b.rho, -(2.0 * H - 1.0)));
  b.D1_H = std::max(hp.b_H * hp.b_H * std::pow(2.0, H + 0.5) / 3.0,
                    11.11 * hp.c_H / (1.0 - H) * std::pow(2.0, 3.0 * H - 0.5));
  b.D2_H = std::min(hp.alpha_H * std::pow(std::sin(1.0), 2) * hp.beta_2_2Hm1 / (H + 1.0),
                    hp.c_H * std::pow(4.0, -(2.0 * H - 1.0)) * (pi / 2.0 - 4.0 / 3.0));
  return b;
}

struct GridPoint {
  double t = 1.0;
  std::vector<double> xi;
};

struct BoundRow {
  double t = 0.0;
  std::vector<double> xi;
  cplx psi;
  double nt = 0.0;
  double ratio = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool lower_ok = false;
  bool upper_ok = false;
};

struct BoundsReport {
  Problem problem = Problem::parabolic;
  BoundConstants constants;
  std::vector<BoundRow> rows;
  bool all_pass = true;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  // The upper constant uses a lower estimate of b_H.
  std::string caveat = "upper constant built from estimated b_H";
};

// Tensor grid t x {|xi| e_1}.
inline std::vector<GridPoint> axis_grid(int dim, const std::vector<double>& ts, const std::vector<double>& radii) {
  std::vector<GridPoint> g;
  for (double t : ts)
    for (double r : radii) {
      std::vector<double> xi(dim, 0.0);
      xi[0] = r;
      g.push_back({t, xi});
    }
  return g;
}

// Checks C_HK (1/t + Re psi)^{-2H} <= N_t <= C_H (1/t + Re psi)^{-2H}.
inline BoundsReport verify_parabolic_bounds(const CharacteristicExponent& exp, const HurstParams& hp, double K,
                                            const std::vector<GridPoint>& grid) {
  BoundsReport rep;
  rep.problem = Problem::parabolic;
  rep.constants = bound_constants(hp, K);
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& g : grid) {
    BoundRow row{g.t, g.xi, exp(g.xi)};
    const double R = row.psi.real();
    if (std::abs(row.psi.imag()) > K * R * (1.0 + 1e-12) + 1e-300)
      throw config_error("grid point violates |Im psi| <= K Re psi");
    row.nt = parabolic_kernel_norm(row.psi, g.t, hp);
    row.ratio = row.nt * std::pow(1.0 / g.t + R, 2.0 * hp.H);
    row.lower = rep.constants.C_HK;
    row.upper = rep.constants.C_H;
    row.lower_ok = row.ratio >= row.lower;
    row.upper_ok = row.ratio <= row.upper;
    rep.all_pass = rep.all_pass && row.lower_ok && row.upper_ok;
    rep.min_ratio = std::min(rep.min_ratio, row.ratio);
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// Checks D2 t (1/t^2 + psi)^{-(H+1/2)} <= N_t <= D1 t (1/t^2 + psi)^{-(H+1/2)}.
inline BoundsReport verify_hyperbolic_bounds(const CharacteristicExponent& exp, const HurstParams& hp,
                                             const std::vector<GridPoint>& grid) {
  BoundsReport rep;
  rep.problem = Problem::hyperbolic;
  rep.constants = bound_constants(hp, 0.0);
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& g : grid) {
    BoundRow row{g.t, g.xi, exp(g.xi)};
    if (row.psi.imag() != 0.0) throw config_error("hyperbolic bounds need Im psi = 0");
    const double P = row.psi.real();
    row.nt = hyperbolic_kernel_norm(P, g.t, hp);
    row.ratio = row.nt / (g.t * std::pow(1.0 / (g.t * g.t) + P, -(hp.H + 0.5)));
    row.lower = rep.constants.D2_H;
    row.upper = rep.constants.D1_H;
    row.lower_ok = row.ratio >= row.lower;
    row.upper_ok = row.ratio <= row.upper;
    rep.all_pass = rep.all_pass && row.lower_ok && row.upper_ok;
    rep.min_ratio = std::min(rep.min_ratio, row.ratio);
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// Integrand wrapper over an exponent: radial forms go through the radial path.
template <class F>
SpectralIntegrand exponent_integrand(const CharacteristicExponent& exp, F&& g) {
  SpectralIntegrand f;
  f.eval = [&exp, g](std::span<const double> xi) { return g(exp(xi), xi); };
  if (exp.is_radial()) {
    const int d = exp.dim();
    f.radial = [&exp, g, d](double r) {
      std::vector<double> xi(d, 0.0);
      xi[0] = r;
      return g(exp.radial(r), std::span<const double>(xi));
    };
  }
  return f;
}

// I_{t, phi} = int N_t |F phi|^2 dmu.
inline SpectralResult solution_variance(double t, const GaussianTestFunction& phi, const CharacteristicExponent& exp,
                                        const SpectralMeasure& mu, const HurstParams& hp, Problem problem,
                                        const TruncationPlan& plan = {}) {
  if (exp.dim() != mu.dim() || phi.dim != mu.dim()) throw dimension_error("solution_variance: dimension mismatch");
  if (problem == Problem::hyperbolic && !exp.is_real()) throw config_error("hyperbolic problem needs a real exponent");
  auto f = exponent_integrand(exp, [&](cplx psi, std::span<const double> xi) {
    return nt_value(problem, psi, t, hp) * std::norm(phi.fourier(xi));
  });
  TruncationPlan p = plan;
  p.r_first = std::min(plan.r_first, 1.0 / phi.sigma);
  return integrate_spectral(mu, f, p);
}

enum class ExistenceVerdict { solution_exists, no_solution, inconclusive };

inline const char* to_string(ExistenceVerdict v) {
  switch (v) {
    case ExistenceVerdict::solution_exists:
      return "solution_exists";
    case ExistenceVerdict::no_solution:
      return "no_solution";
    default:
      return "inconclusive";
  }
}

struct ClosedForm {
  double lhs = 0.0;
  double rhs = 0.0;
  std::string inequality_text;
};

struct ExistenceReport {
  ExistenceVerdict verdict = ExistenceVerdict::inconclusive;
  // Verdict of the quadrature alone, without the closed form.
  ExistenceVerdict numeric_verdict = ExistenceVerdict::inconclusive;
  SpectralResult integral;
  std::optional<ClosedForm> closed_form;
  Problem problem = Problem::parabolic;
};

inline ExistenceVerdict from_verdict(Verdict v) {
  if (v == Verdict::converged) return ExistenceVerdict::solution_exists;
  if (v == Verdict::diverged) return ExistenceVerdict::no_solution;
  return ExistenceVerdict::inconclusive;
}

// Exponent applied to 1/(1 + Re psi) in the existence integral.
inline double existence_power(Problem p, const HurstParams& hp) { return p == Problem::parabolic ? 2.0 * hp.H : hp.H + 0.5; }

// Closed-form criterion for stable exponents with homogeneous measures.
inline std::optional<ClosedForm> existence_closed_form(const CharacteristicExponent& exp, const SpectralMeasure& mu,
                                                       const HurstParams& hp, Problem problem) {
  auto sp = exp.stable_parameters();
  std::optional<double> beta;
  if (const auto* s = std::get_if<Stable>(&exp.form()))
    beta = s->beta;
  else if (sp)
    beta = sp->first;
  if (!beta || !mu.has_density()) return std::nullopt;
  const double p = existence_power(problem, hp);
  const HomogeneousWeight w = mu.weight();
  ClosedForm cf{p * *beta, mu.dim() - w.degree, ""};
  const char* lhs = problem == Problem::parabolic ? "2H*beta" : "(H+1/2)*beta";
  cf.inequality_text = std::string(lhs) + " > d - (degree of the spectral density)";
  return cf;
}

inline ExistenceReport existence_verdict(const CharacteristicExponent& exp, const SpectralMeasure& mu, const HurstParams& hp,
                                         Problem problem, const TruncationPlan& plan = {}) {
  if (exp.dim() != mu.dim()) throw dimension_error("existence_verdict: dimension mismatch");
  if (problem == Problem::hyperbolic && !exp.is_real()) throw config_error("hyperbolic problem needs a real exponent");
  ExistenceReport rep;
  rep.problem = problem;
  const double p = existence_power(problem, hp);
  auto f = exponent_integrand(exp, [p](cplx psi, std::span<const double>) { return std::pow(1.0 + psi.real(), -p); });
  rep.integral = integrate_spectral(mu, f, plan);
  rep.numeric_verdict = from_verdict(rep.integral.verdict);
  rep.closed_form = existence_closed_form(exp, mu, hp, problem);
  if (rep.closed_form)
    rep.verdict = rep.closed_form->lhs > rep.closed_form->rhs ? ExistenceVerdict::solution_exists : ExistenceVerdict::no_solution;
  else
    rep.verdict = rep.numeric_verdict;
  return rep;
}

struct EquivalenceRow {
  Problem problem = Problem::parabolic;
  double E_s = 0.0;
  double E_t = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

struct NormEquivalenceReport {
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<EquivalenceRow> rows;
  bool all_pass = true;
};

// E(t) = int (1/t + Re psi)^{-p} |F phi|^2 dmu with p = 2H or H + 1/2.
inline double cE(double t, const GaussianTestFunction& phi, const CharacteristicExponent& exp, const SpectralMeasure& mu,
                 double p, const TruncationPlan& plan = {}) {
  auto f = exponent_integrand(exp, [&, t, p](cplx psi, std::span<const double> xi) {
    return std::pow(1.0 / t + psi.real(), -p) * std::norm(phi.fourier(xi));
  });
  return integrate_spectral(mu, f, plan).value;
}

inline NormEquivalenceReport norm_equivalence_check(const HurstParams& hp, const CharacteristicExponent& exp,
                                                    const SpectralMeasure& mu, double s, double t,
                                                    const GaussianTestFunction& phi, const TruncationPlan& plan = {}) {
  if (!(s > 0.0 && t > 0.0)) throw config_error("s and t must be positive");
  NormEquivalenceReport rep;
  rep.c1 = std::min(1.0 / s, 1.0) / (1.0 / t + 1.0);
  rep.c2 = (1.0 / s + 1.0) * std::max(t, 1.0);
  for (Problem pr : {Problem::parabolic, Problem::hyperbolic}) {
    const double p = existence_power(pr, hp);
    EquivalenceRow row{pr, cE(s, phi, exp, mu, p, plan), cE(t, phi, exp, mu, p, plan)};
    row.lower = std::pow(rep.c1, p) * row.E_s;
    row.upper = std::pow(rep.c2, p) * row.E_s;
    row.pass = row.lower <= row.E_t * (1.0 + 1e-12) && row.E_t <= row.upper * (1.0 + 1e-12);
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace fracspde
