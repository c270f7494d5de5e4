#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracspde/errors.hpp"
#include "fracspde/existence.hpp"
#include "fracspde/levy.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/potential.hpp"
#include "fracspde/rng.hpp"
#include "fracspde/spectral.hpp"
#include "fracspde/temporal.hpp"

namespace fracspde {

// Two independent symmetrized stable paths on a uniform grid, with the
// subordinator draws kept so the half-step midpoints can be integrated out.
struct PathBundle {
  double beta = 2.0;
  double c = 1.0;
  int dim = 1;
  int n_steps = 0;
  double t = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  struct Path {
    std::vector<double> grid;       // (n_steps + 1) x dim positions at k dt
    std::vector<double> midpoint;   // n_steps x dim sampled positions at (k + 1/2) dt
    std::vector<double> cond_mean;  // n_steps x dim, E[midpoint | endpoints, variances]
    std::vector<double> cond_var;   // n_steps, per-coordinate conditional variance
    std::vector<double> half_var;   // 2 n_steps subordinator variances, two per step
  };
  Path path1, path2;

  std::span<const double> position(const Path& p, int k) const { return {p.grid.data() + std::size_t(k) * dim, std::size_t(dim)}; }
};

namespace detail {

inline void simulate_path(PathBundle::Path& p, const PathBundle& b, std::span<const double> start, std::mt19937_64& rng) {
  const int d = b.dim, n = b.n_steps;
  p.grid.assign(std::size_t(n + 1) * d, 0.0);
  p.midpoint.assign(std::size_t(n) * d, 0.0);
  p.cond_mean.assign(std::size_t(n) * d, 0.0);
  p.cond_var.assign(n, 0.0);
  p.half_var.assign(std::size_t(2 * n), 0.0);
  std::copy(start.begin(), start.end(), p.grid.begin());
  std::normal_distribution<double> nd;
  // The symmetrized process has exponent 2 c |xi|^beta.
  const double kappa = 2.0 * b.c * 0.5 * b.dt;
  for (int k = 0; k < n; ++k) {
    const double va = subordinated_variance(b.beta, kappa, rng);
    const double vb = subordinated_variance(b.beta, kappa, rng);
    const double sa = std::sqrt(va), sb = std::sqrt(vb), f = va / (va + vb);
    p.cond_var[k] = va * vb / (va + vb);
    p.half_var[2 * k] = va;
    p.half_var[2 * k + 1] = vb;
    for (int i = 0; i < d; ++i) {
      const double x0 = p.grid[std::size_t(k) * d + i];
      const double za = sa * nd(rng), zb = sb * nd(rng);
      p.midpoint[std::size_t(k) * d + i] = x0 + za;
      p.grid[std::size_t(k + 1) * d + i] = x0 + za + zb;
      p.cond_mean[std::size_t(k) * d + i] = x0 + f * (za + zb);
    }
  }
}

}  // namespace detail

// Bundle `index` of a run: path 1 uses stream 2 index, path 2 stream 2 index + 1.
inline PathBundle simulate_symmetrized_stable(double beta, int dim, double t, int n_steps, std::uint64_t seed,
                                              double c = 1.0, std::span<const double> x1 = {},
                                              std::span<const double> x2 = {}, std::uint64_t index = 0) {
  if (!(beta > 0.0 && beta <= 2.0)) throw config_error("stable index must lie in (0, 2]");
  if (dim < 1) throw config_error("dimension must be >= 1");
  if (n_steps < 2) throw config_error("need at least two time steps");
  if (!(t > 0.0) || !(c > 0.0)) throw config_error("time horizon and scale must be positive");
  std::vector<double> zero(dim, 0.0);
  if (x1.empty()) x1 = zero;
  if (x2.empty()) x2 = zero;
  if (int(x1.size()) != dim || int(x2.size()) != dim) throw dimension_error("start point dimension mismatch");
  PathBundle b;
  b.beta = beta;
  b.c = c;
  b.dim = dim;
  b.n_steps = n_steps;
  b.t = t;
  b.dt = t / n_steps;
  b.seed = seed;
  b.index = index;
  auto r1 = make_stream(seed, 2 * index);
  auto r2 = make_stream(seed, 2 * index + 1);
  detail::simulate_path(b.path1, b, x1, r1);
  detail::simulate_path(b.path2, b, x2, r2);
  return b;
}

namespace detail {

inline PathBundle::Path coarsen_path(const PathBundle::Path& p, int d, int n) {
  PathBundle::Path c;
  const int m = n / 2;
  c.grid.resize(std::size_t(m + 1) * d);
  c.midpoint.resize(std::size_t(m) * d);
  c.cond_mean.resize(std::size_t(m) * d);
  c.cond_var.resize(m);
  c.half_var.resize(std::size_t(2 * m));
  for (int k = 0; k <= m; ++k)
    for (int i = 0; i < d; ++i) c.grid[std::size_t(k) * d + i] = p.grid[std::size_t(2 * k) * d + i];
  for (int k = 0; k < m; ++k) {
    const double va = p.half_var[4 * k] + p.half_var[4 * k + 1], vb = p.half_var[4 * k + 2] + p.half_var[4 * k + 3];
    c.half_var[2 * k] = va;
    c.half_var[2 * k + 1] = vb;
    c.cond_var[k] = va * vb / (va + vb);
    const double f = va / (va + vb);
    for (int i = 0; i < d; ++i) {
      const double x0 = c.grid[std::size_t(k) * d + i], x1 = c.grid[std::size_t(k + 1) * d + i];
      c.midpoint[std::size_t(k) * d + i] = p.grid[std::size_t(2 * k + 1) * d + i];
      c.cond_mean[std::size_t(k) * d + i] = x0 + f * (x1 - x0);
    }
  }
  return c;
}

}  // namespace detail

// The same two paths seen on a grid with half as many steps. The result has
// the law of a bundle simulated directly at n_steps / 2.
inline PathBundle coarsen(const PathBundle& b) {
  if (b.n_steps % 2 != 0 || b.n_steps < 4) throw config_error("coarsen needs an even step count >= 4");
  PathBundle c = b;
  c.n_steps = b.n_steps / 2;
  c.dt = 2.0 * b.dt;
  c.path1 = detail::coarsen_path(b.path1, b.dim, b.n_steps);
  c.path2 = detail::coarsen_path(b.path2, b.dim, b.n_steps);
  return c;
}

enum class IltRule {
  // f averaged over the conditional law of both midpoints given the grid.
  smoothed_midpoint,
  // f at the sampled midpoints.
  sampled_midpoint
};

inline const char* to_string(IltRule r) { return r == IltRule::smoothed_midpoint ? "smoothed_midpoint" : "sampled_midpoint"; }

struct IltEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  int n_steps = 0;
  IltRule rule = IltRule::smoothed_midpoint;
};

// sum_{j,k} w_{|j-k|} f(X1(r_j) - X2(s_k)) with cell-exact weights.
inline IltEstimate ilt_estimate(const PathBundle& b, const Kernel& f, const HurstParams& hp,
                                IltRule rule = IltRule::smoothed_midpoint) {
  if (f.dim() != b.dim) throw dimension_error("ilt_estimate: dimension mismatch");
  const int n = b.n_steps, d = b.dim;
  const auto w = cell_weights(n, b.t, hp.H);
  IltEstimate out{0.0, 0.0, 1, n, rule};
  std::vector<double> diff(d);
  const bool constant = std::holds_alternative<ConstantKernel>(f.form());
  std::optional<std::mt19937_64> redraw;
  for (int j = 0; j < n; ++j) {
    double row = 0.0;
    for (int k = 0; k < n; ++k) {
      double v;
      if (constant) {
        v = std::get<ConstantKernel>(f.form()).c;
      } else if (rule == IltRule::smoothed_midpoint) {
        for (int i = 0; i < d; ++i) diff[i] = b.path1.cond_mean[std::size_t(j) * d + i] - b.path2.cond_mean[std::size_t(k) * d + i];
        v = f.gaussian_smoothed(diff, b.path1.cond_var[j] + b.path2.cond_var[k]);
      } else {
        for (int i = 0; i < d; ++i) diff[i] = b.path1.midpoint[std::size_t(j) * d + i] - b.path2.midpoint[std::size_t(k) * d + i];
        v = f(diff);
        while (!std::isfinite(v)) {
          // Coincident midpoints: draw the pair again from its conditional law.
          if (!redraw) redraw = make_stream(b.seed, ~(2 * b.index));
          std::normal_distribution<double> nd;
          const double s = std::sqrt(b.path1.cond_var[j] + b.path2.cond_var[k]);
          for (int i = 0; i < d; ++i)
            diff[i] = b.path1.cond_mean[std::size_t(j) * d + i] - b.path2.cond_mean[std::size_t(k) * d + i] + s * nd(*redraw);
          v = f(diff);
        }
      }
      row += w[std::abs(j - k)] * v;
    }
    out.value += row;
  }
  return out;
}

struct IltRun {
  double beta = 2.0;
  double c = 1.0;
  int dim = 1;
  double t = 1.0;
  int n_steps = 64;
  std::size_t n_bundles = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::size_t chunk = 64;
  IltRule rule = IltRule::smoothed_midpoint;
  std::vector<double> x1, x2;
};

// Mean of ilt_estimate over independent bundles; bundle i always uses the
// same streams, and chunk sums are reduced in index order.
inline IltEstimate ilt_monte_carlo(const IltRun& run, const Kernel& f, const HurstParams& hp) {
  if (run.n_bundles < 2) throw config_error("need at least two bundles");
  const std::size_t chunk = std::max<std::size_t>(1, run.chunk);
  const std::size_t nch = (run.n_bundles + chunk - 1) / chunk;
  std::vector<double> s1(nch, 0.0), s2(nch, 0.0);
  parallel_for(nch, run.workers, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(run.n_bundles, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      auto b = simulate_symmetrized_stable(run.beta, run.dim, run.t, run.n_steps, run.seed, run.c, run.x1, run.x2, i);
      const double v = ilt_estimate(b, f, hp, run.rule).value;
      s1[c] += v;
      s2[c] += v * v;
    }
  });
  double a = 0.0, q = 0.0;
  for (std::size_t c = 0; c < nch; ++c) {
    a += s1[c];
    q += s2[c];
  }
  const double n = double(run.n_bundles), mean = a / n;
  IltEstimate out;
  out.value = mean;
  out.std_error = std::sqrt(std::max(0.0, (q - n * mean * mean) / (n - 1.0)) / n);
  out.n_paths = run.n_bundles;
  out.n_steps = run.n_steps;
  out.rule = run.rule;
  return out;
}

struct IltMean {
  double value = 0.0;
  bool finite = true;
  std::string criterion;
  // const * t^{2H - gamma/beta} for a stable exponent with a homogeneous kernel.
  std::optional<double> scaling_value;
  std::optional<double> scaling_exponent;
};

// alpha_H int_0^t int_0^t |r-s|^{2H-2} (P_{r+s} f)(0) dr ds
//   = H int_0^{2t} m(u) min(u, 2t - u)^{2H-1} du, m(u) = (P_u f)(0).
inline IltMean ilt_mean(double t, const HurstParams& hp, const Kernel& f, const CharacteristicExponent& exp_sym,
                        const SpectralMeasure& mu, const TruncationPlan& plan = {}) {
  const int d = f.dim();
  if (exp_sym.dim() != d || mu.dim() != d) throw dimension_error("ilt_mean: dimension mismatch");
  if (!(t > 0.0)) throw config_error("time horizon must be positive");
  if (!f.is_partner(mu)) throw config_error("kernel and measure are not a Fourier pair");
  if (!exp_sym.is_real()) throw config_error("ilt_mean needs a symmetrized (real) exponent");
  const double H = hp.H;
  IltMean out;
  if (const auto* k = std::get_if<ConstantKernel>(&f.form())) {
    out.value = k->c * std::pow(t, 2.0 * H);
    out.scaling_value = out.value;
    out.scaling_exponent = 2.0 * H;
    return out;
  }
  const double gamma = std::holds_alternative<WhiteKernel>(f.form()) ? double(d) : f.weight().degree;
  const auto p = exp_sym.growth_power();
  if (!p) throw config_error("ilt_mean needs an exponent with known growth power");
  const double e = 2.0 * H - gamma / *p;
  out.criterion = "2H beta = " + std::to_string(2.0 * H * *p) + " vs degree " + std::to_string(gamma);
  if (e <= 0.0) {
    out.finite = false;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  const std::vector<double> origin(d, 0.0);
  auto m = [&](double u) {
    return semigroup_apply(f, exp_sym, u, origin, SemigroupMethod::spectral_at_zero, {}, plan).value;
  };
  // [0, t]: u^{2H-1} m(u) ~ u^{e-1}; geometric panels then a Jacobi rule.
  auto left = [&](double u) { return std::pow(u, 2.0 * H - 1.0) * m(u); };
  double s = 0.0, hi = t;
  for (int l = 0; l < 40; ++l) {
    s += quad::integrate(left, 0.5 * hi, hi, 16);
    hi *= 0.5;
  }
  s += quad::integrate_singular(left, 0.0, hi, e - 1.0, 16);
  auto right = [&](double u) { return std::pow(2.0 * t - u, 2.0 * H - 1.0) * m(u); };
  s += quad::integrate_singular(right, t, 2.0 * t, 2.0 * H - 1.0, 24, true);
  out.value = H * s;
  if (auto sp = exp_sym.stable_parameters(); sp && !std::holds_alternative<WhiteKernel>(f.form())) {
    // m(u) = m(1) u^{-gamma/beta}.
    const double r = gamma / sp->first;
    auto j = [&](double w) { return std::pow(w, -r) * std::pow(2.0 - w, 2.0 * H - 1.0); };
    const double J = quad::integrate_singular(j, 1.0, 2.0, 2.0 * H - 1.0, 32, true);
    out.scaling_value = H * m(1.0) * std::pow(t, e) * (1.0 / e + J);
    out.scaling_exponent = e;
  }
  return out;
}

struct FieldVarianceResult {
  double empirical_variance = 0.0;
  double std_error = 0.0;
  double target_variance = 0.0;
  // Variance implied by the discretized Gram matrices.
  double discrete_variance = 0.0;
  double min_gram_eigen_ratio = 0.0;
  std::size_t n_samples = 0;
};

struct GramFactor {
  Eigen::VectorXcd coeff;  // (1^T v_i) sqrt(lambda_i)
  double variance = 0.0;
  double min_eigen_ratio = 0.0;
};

// Time cells for the Gram matrix: graded toward r = t where e^{-(t-r) psi}
// varies fastest.
inline std::vector<double> gram_breaks(double t, cplx psi, int n) {
  const double q = std::abs(psi) * t > 1.0 ? 3.0 : 1.0;
  std::vector<double> b(n + 1);
  for (int i = 0; i <= n; ++i) b[i] = t - t * std::pow(1.0 - double(i) / n, q);
  b[n] = t;
  return b;
}

// M_kl = phi_k C_kl conj(phi_l) with C the exact covariance of fractional
// Brownian increments over the cells.
inline GramFactor gram_factor(Problem problem, cplx psi, double t, const HurstParams& hp, int n = 128) {
  const auto br = gram_breaks(t, psi, n);
  const double h2 = 2.0 * hp.H;
  Eigen::VectorXcd phi(n);
  for (int k = 0; k < n; ++k) {
    const double r = 0.5 * (br[k] + br[k + 1]), tau = t - r;
    if (problem == Problem::parabolic) {
      phi[k] = std::exp(-tau * psi);
    } else {
      const double w = std::sqrt(psi.real());
      phi[k] = w == 0.0 ? tau : std::sin(tau * w) / w;
    }
  }
  auto p = [h2](double x) { return std::pow(std::abs(x), h2); };
  Eigen::MatrixXcd M(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const double c = 0.5 * (p(br[k + 1] - br[l]) + p(br[k] - br[l + 1]) - p(br[k + 1] - br[l + 1]) - p(br[k] - br[l]));
      M(k, l) = phi[k] * c * std::conj(phi[l]);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  const auto& lam = es.eigenvalues();
  const double trace = M.trace().real();
  GramFactor g;
  g.min_eigen_ratio = trace > 0.0 ? lam.minCoeff() / trace : 0.0;
  g.coeff.resize(n);
  const Eigen::RowVectorXcd ones = Eigen::RowVectorXcd::Ones(n);
  for (int i = 0; i < n; ++i) g.coeff[i] = (ones * es.eigenvectors().col(i))(0) * std::sqrt(std::max(0.0, lam[i]));
  g.variance = g.coeff.squaredNorm();
  return g;
}

// Draws u(t, phi) = sum_j F phi(xi_j) sqrt(w_j) G_j for a discrete spectral
// measure and compares E|u|^2 with the exact variance.
inline FieldVarianceResult sample_solution_spectral(double t, const GaussianTestFunction& phi,
                                                    const CharacteristicExponent& exp, const SpectralMeasure& mu,
                                                    const HurstParams& hp, Problem problem, std::size_t n_samples,
                                                    std::uint64_t seed, int workers = 1, int n_cells = 128) {
  const auto* dm = std::get_if<DiscreteMeasure>(&mu.form());
  if (!dm) throw config_error("sample_solution_spectral needs a discrete spectral measure");
  if (exp.dim() != mu.dim() || phi.dim != mu.dim()) throw dimension_error("sample_solution_spectral: dimension mismatch");
  if (n_samples < 2) throw config_error("need at least two samples");
  FieldVarianceResult out;
  out.n_samples = n_samples;
  out.min_gram_eigen_ratio = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXcd> coeff;
  for (const auto& a : dm->atoms) {
    const cplx psi = exp(a.xi);
    if (problem == Problem::hyperbolic && psi.imag() != 0.0) throw config_error("hyperbolic problem needs Im psi = 0");
    const cplx amp = phi.fourier(a.xi) * std::sqrt(a.weight);
    auto g = gram_factor(problem, psi, t, hp, n_cells);
    out.min_gram_eigen_ratio = std::min(out.min_gram_eigen_ratio, g.min_eigen_ratio);
    out.discrete_variance += std::norm(amp) * g.variance;
    out.target_variance += std::norm(amp) * nt_value(problem, psi, t, hp);
    coeff.push_back(amp * g.coeff);
  }
  const std::size_t chunk = 1024, nch = (n_samples + chunk - 1) / chunk;
  std::vector<double> s1(nch, 0.0), s2(nch, 0.0);
  parallel_for(nch, workers, [&](std::size_t c) {
    auto rng = make_stream(seed, c);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    const std::size_t lo = c * chunk, hi = std::min(n_samples, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      cplx u = 0.0;
      for (const auto& v : coeff)
        for (Eigen::Index k = 0; k < v.size(); ++k) {
          const double re = nd(rng), im = nd(rng);
          u += v[k] * cplx(re, im);
        }
      const double a2 = std::norm(u);
      s1[c] += a2;
      s2[c] += a2 * a2;
    }
  });
  double a = 0.0, q = 0.0;
  for (std::size_t c = 0; c < nch; ++c) {
    a += s1[c];
    q += s2[c];
  }
  const double n = double(n_samples);
  out.empirical_variance = a / n;
  out.std_error = std::sqrt(std::max(0.0, (q - n * out.empirical_variance * out.empirical_variance) / (n - 1.0)) / n);
  return out;
}

}  // namespace fracspde
