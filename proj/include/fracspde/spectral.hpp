#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fracspde/errors.hpp"
#include "fracspde/levy.hpp"
#include "fracspde/quadrature.hpp"
#include "fracspde/special.hpp"

namespace fracspde {

// w(r omega) = r^{-degree} * scale * prod_i |omega_i|^{-axis_exponent_i}
struct HomogeneousWeight {
  int dim = 1;
  double degree = 0.0;
  double scale = 1.0;
  std::vector<double> axis_exponents;

  double at(std::span<const double> x) const {
    double r = norm2(x);
    if (r == 0.0) return degree > 0.0 ? std::numeric_limits<double>::infinity() : scale;
    double v = scale * std::pow(r, -degree);
    for (std::size_t i = 0; i < axis_exponents.size(); ++i)
      if (axis_exponents[i] != 0.0) v *= std::pow(std::abs(x[i]) / r, -axis_exponents[i]);
    return v;
  }

  // int over the unit sphere of the angular factor.
  double sphere_mass() const {
    double lg = 0.0, sum = 0.0;
    for (int i = 0; i < dim; ++i) {
      double a = axis_exponents.empty() ? 0.0 : axis_exponents[i];
      lg += std::lgamma(0.5 * (1.0 - a));
      sum += 0.5 * (1.0 - a);
    }
    return scale * 2.0 * std::exp(lg - std::lgamma(sum));
  }

  bool isotropic() const {
    return std::all_of(axis_exponents.begin(), axis_exponents.end(), [](double a) { return a == 0.0; });
  }
};

struct RieszDensity {
  double alpha = 0.5;
};
struct ProductFbmDensity {
  std::vector<double> hurst;
};
struct LebesgueDensity {
  double density = 1.0;
};
struct Atom {
  std::vector<double> xi;
  double weight = 0.0;
};
struct DiscreteMeasure {
  std::vector<Atom> atoms;
};

class SpectralMeasure {
 public:
  using Form = std::variant<RieszDensity, ProductFbmDensity, LebesgueDensity, DiscreteMeasure>;

  SpectralMeasure(int dim, Form form) : dim_(dim), form_(std::move(form)) { validate(); }

  static SpectralMeasure riesz(int dim, double alpha) { return {dim, RieszDensity{alpha}}; }
  static SpectralMeasure product_fbm(std::vector<double> hurst) {
    int d = static_cast<int>(hurst.size());
    return {d, ProductFbmDensity{std::move(hurst)}};
  }
  static SpectralMeasure lebesgue(int dim, double density = 1.0) { return {dim, LebesgueDensity{density}}; }
  static SpectralMeasure discrete(int dim, std::vector<Atom> atoms) { return {dim, DiscreteMeasure{std::move(atoms)}}; }
  // Adds the mirror image -xi of every atom with the same weight.
  static SpectralMeasure symmetric_discrete(int dim, std::vector<Atom> half) {
    std::vector<Atom> all;
    for (auto& a : half) {
      bool zero = std::all_of(a.xi.begin(), a.xi.end(), [](double v) { return v == 0.0; });
      Atom m = a;
      for (double& v : m.xi) v = -v;
      all.push_back(std::move(a));
      if (!zero) all.push_back(std::move(m));
    }
    return discrete(dim, std::move(all));
  }

  int dim() const noexcept { return dim_; }
  const Form& form() const noexcept { return form_; }
  bool has_density() const noexcept { return !std::holds_alternative<DiscreteMeasure>(form_); }

  HomogeneousWeight weight() const {
    if (const auto* r = std::get_if<RieszDensity>(&form_)) return {dim_, r->alpha, 1.0, std::vector<double>(dim_, 0.0)};
    if (const auto* p = std::get_if<ProductFbmDensity>(&form_)) {
      HomogeneousWeight w{dim_, 0.0, 1.0, {}};
      for (double h : p->hurst) {
        w.axis_exponents.push_back(2.0 * h - 1.0);
        w.degree += 2.0 * h - 1.0;
        w.scale *= hurst_spectral_constant(h);
      }
      return w;
    }
    if (const auto* l = std::get_if<LebesgueDensity>(&form_)) return {dim_, 0.0, l->density, std::vector<double>(dim_, 0.0)};
    throw config_error("a discrete spectral measure has no density");
  }

  double density(std::span<const double> xi) const {
    if (static_cast<int>(xi.size()) != dim_) throw dimension_error("density evaluated at a point of wrong dimension");
    return weight().at(xi);
  }

  std::string describe() const {
    if (const auto* r = std::get_if<RieszDensity>(&form_)) return "riesz(alpha=" + std::to_string(r->alpha) + ")";
    if (std::holds_alternative<ProductFbmDensity>(form_)) return "product-fbm";
    if (const auto* l = std::get_if<LebesgueDensity>(&form_)) return "lebesgue(" + std::to_string(l->density) + ")";
    return "discrete(" + std::to_string(std::get<DiscreteMeasure>(form_).atoms.size()) + " atoms)";
  }

 private:
  void validate() const {
    if (dim_ < 1) throw config_error("measure dimension must be >= 1");
    if (const auto* r = std::get_if<RieszDensity>(&form_)) {
      if (!(r->alpha > 0.0 && r->alpha < dim_)) throw config_error("riesz measure needs 0 < alpha < d");
    } else if (const auto* p = std::get_if<ProductFbmDensity>(&form_)) {
      if (p->hurst.empty()) throw config_error("product-fbm measure needs at least one Hurst index");
      for (double h : p->hurst)
        if (!(h > 0.5 && h < 1.0)) throw config_error("product-fbm Hurst indices must lie in (1/2, 1)");
    } else if (const auto* l = std::get_if<LebesgueDensity>(&form_)) {
      if (!(l->density > 0.0)) throw config_error("lebesgue density must be positive");
    } else {
      const auto& atoms = std::get<DiscreteMeasure>(form_).atoms;
      if (atoms.empty()) throw config_error("discrete measure needs at least one atom");
      for (const auto& a : atoms) {
        if (static_cast<int>(a.xi.size()) != dim_) throw dimension_error("atom location has wrong dimension");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw config_error("atom weights must be finite and > 0");
        bool mirrored = std::any_of(atoms.begin(), atoms.end(), [&](const Atom& b) {
          if (std::abs(b.weight - a.weight) > 1e-12 * std::max(1.0, a.weight)) return false;
          for (int k = 0; k < dim_; ++k)
            if (std::abs(a.xi[k] + b.xi[k]) > 1e-12 * std::max(1.0, std::abs(a.xi[k]))) return false;
          return true;
        });
        if (!mirrored) throw config_error("discrete measure must be symmetric under xi -> -xi");
      }
    }
  }

  int dim_;
  Form form_;
};

struct RieszKernel {
  double alpha = 0.5;
  double c = 1.0;
};
struct ProductFbmKernel {
  std::vector<double> hurst;
};
struct ConstantKernel {
  double c = 1.0;
};
// c times the Dirac mass at 0.
struct WhiteKernel {
  double c = 1.0;
};

class Kernel {
 public:
  using Form = std::variant<RieszKernel, ProductFbmKernel, ConstantKernel, WhiteKernel>;

  Kernel(int dim, Form form) : dim_(dim), form_(std::move(form)) { validate(); }

  // c |x|^{-(d - alpha)}; the default c makes it the Fourier partner of |xi|^{-alpha}.
  static Kernel riesz(int dim, double alpha, std::optional<double> c = std::nullopt) {
    return {dim, RieszKernel{alpha, c.value_or(riesz_partner_constant(alpha, dim))}};
  }
  static Kernel product_fbm(std::vector<double> hurst) {
    int d = static_cast<int>(hurst.size());
    return {d, ProductFbmKernel{std::move(hurst)}};
  }
  static Kernel constant(int dim, double c) { return {dim, ConstantKernel{c}}; }
  static Kernel white(int dim, double c) { return {dim, WhiteKernel{c}}; }

  int dim() const noexcept { return dim_; }
  const Form& form() const noexcept { return form_; }

  double operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw dimension_error("kernel evaluated at a point of wrong dimension");
    if (std::holds_alternative<WhiteKernel>(form_)) throw config_error("white kernel has no pointwise values");
    return weight().at(x);
  }

  HomogeneousWeight weight() const {
    if (const auto* r = std::get_if<RieszKernel>(&form_)) return {dim_, dim_ - r->alpha, r->c, std::vector<double>(dim_, 0.0)};
    if (const auto* p = std::get_if<ProductFbmKernel>(&form_)) {
      HomogeneousWeight w{dim_, 0.0, 1.0, {}};
      for (double h : p->hurst) {
        w.axis_exponents.push_back(2.0 - 2.0 * h);
        w.degree += 2.0 - 2.0 * h;
        w.scale *= hurst_alpha(h);
      }
      return w;
    }
    if (const auto* k = std::get_if<ConstantKernel>(&form_)) return {dim_, 0.0, k->c, std::vector<double>(dim_, 0.0)};
    throw config_error("white kernel has no pointwise values");
  }

  SpectralMeasure partner_measure() const {
    if (const auto* r = std::get_if<RieszKernel>(&form_)) {
      if (std::abs(r->c - riesz_partner_constant(r->alpha, dim_)) > 1e-12 * r->c)
        throw config_error("riesz kernel constant differs from the Fourier partner constant");
      return SpectralMeasure::riesz(dim_, r->alpha);
    }
    if (const auto* p = std::get_if<ProductFbmKernel>(&form_)) return SpectralMeasure::product_fbm(p->hurst);
    if (const auto* k = std::get_if<ConstantKernel>(&form_))
      return SpectralMeasure::discrete(dim_, {Atom{std::vector<double>(dim_, 0.0), k->c}});
    return SpectralMeasure::lebesgue(dim_, std::get<WhiteKernel>(form_).c / std::pow(2.0 * std::numbers::pi, dim_));
  }

  bool is_partner(const SpectralMeasure& mu) const {
    if (mu.dim() != dim_) return false;
    const auto& m = mu.form();
    if (const auto* r = std::get_if<RieszKernel>(&form_)) {
      const auto* d = std::get_if<RieszDensity>(&m);
      return d && d->alpha == r->alpha && std::abs(r->c - riesz_partner_constant(r->alpha, dim_)) <= 1e-12 * r->c;
    }
    if (const auto* p = std::get_if<ProductFbmKernel>(&form_)) {
      const auto* d = std::get_if<ProductFbmDensity>(&m);
      return d && d->hurst == p->hurst;
    }
    if (const auto* k = std::get_if<ConstantKernel>(&form_)) {
      const auto* d = std::get_if<DiscreteMeasure>(&m);
      if (!d || d->atoms.size() != 1) return false;
      const auto& a = d->atoms.front();
      return std::abs(a.weight - k->c) <= 1e-12 * std::abs(k->c) &&
             std::all_of(a.xi.begin(), a.xi.end(), [](double v) { return v == 0.0; });
    }
    const auto* d = std::get_if<LebesgueDensity>(&m);
    const double want = std::get<WhiteKernel>(form_).c / std::pow(2.0 * std::numbers::pi, dim_);
    return d && std::abs(d->density - want) <= 1e-12 * want;
  }

  // E f(m + sqrt(v) Z) for Z standard normal in R^d, with m2 = |m|^2 for
  // isotropic kernels. Used for conditional smoothing in Monte Carlo.
  double gaussian_smoothed(std::span<const double> m, double v) const {
    if (const auto* r = std::get_if<RieszKernel>(&form_)) {
      double m2 = 0.0;
      for (double x : m) m2 += x * x;
      return r->c * gaussian_inverse_moment(dim_ - r->alpha, dim_, m2, v);
    }
    if (const auto* p = std::get_if<ProductFbmKernel>(&form_)) {
      double out = 1.0;
      for (int i = 0; i < dim_; ++i) {
        double h = p->hurst[i];
        out *= hurst_alpha(h) * gaussian_inverse_moment(2.0 - 2.0 * h, 1, m[i] * m[i], v);
      }
      return out;
    }
    if (const auto* k = std::get_if<ConstantKernel>(&form_)) return k->c;
    throw config_error("white kernel has no pointwise values");
  }

  std::string describe() const {
    if (const auto* r = std::get_if<RieszKernel>(&form_))
      return "riesz(alpha=" + std::to_string(r->alpha) + ", c=" + std::to_string(r->c) + ")";
    if (std::holds_alternative<ProductFbmKernel>(form_)) return "product-fbm";
    if (const auto* k = std::get_if<ConstantKernel>(&form_)) return "constant(" + std::to_string(k->c) + ")";
    return "white(" + std::to_string(std::get<WhiteKernel>(form_).c) + ")";
  }

 private:
  void validate() const {
    if (dim_ < 1) throw config_error("kernel dimension must be >= 1");
    const int d = dim_;
    std::visit(
        [d](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, RieszKernel>) {
            if (!(k.alpha > 0.0 && k.alpha < d)) throw config_error("riesz kernel needs 0 < alpha < d");
            if (!(k.c > 0.0)) throw config_error("riesz kernel constant must be positive");
          } else if constexpr (std::is_same_v<T, ProductFbmKernel>) {
            if (k.hurst.empty()) throw config_error("product-fbm kernel needs at least one Hurst index");
            for (double h : k.hurst)
              if (!(h > 0.5 && h < 1.0)) throw config_error("product-fbm Hurst indices must lie in (1/2, 1)");
          } else {
            if (!(k.c > 0.0)) throw config_error("kernel constant must be positive");
          }
        },
        form_);
  }

  int dim_;
  Form form_;
};

// amplitude * N(center, sigma^2 I) density; Fourier transform
// amplitude * e^{-i xi.center} e^{-sigma^2 |xi|^2 / 2}.
struct GaussianTestFunction {
  int dim = 1;
  double sigma = 1.0;
  std::vector<double> center;
  double amplitude = 1.0;

  GaussianTestFunction() = default;
  GaussianTestFunction(int d, double s, std::vector<double> m = {}, double a = 1.0)
      : dim(d), sigma(s), center(m.empty() ? std::vector<double>(d, 0.0) : std::move(m)), amplitude(a) {
    if (dim < 1 || static_cast<int>(center.size()) != dim) throw dimension_error("test function center has wrong size");
    if (!(sigma > 0.0)) throw config_error("test function width must be positive");
  }

  double operator()(std::span<const double> x) const {
    double q = 0.0;
    for (int i = 0; i < dim; ++i) q += (x[i] - center[i]) * (x[i] - center[i]);
    return amplitude * std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * dim) * std::exp(-0.5 * q / (sigma * sigma));
  }

  cplx fourier(std::span<const double> xi) const {
    double dot = 0.0, r2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      dot += xi[i] * center[i];
      r2 += xi[i] * xi[i];
    }
    return amplitude * std::exp(-0.5 * sigma * sigma * r2) * std::exp(cplx(0.0, -dot));
  }

  double fourier_abs2_radial(double r) const { return amplitude * amplitude * std::exp(-sigma * sigma * r * r); }
};

struct TruncationPlan {
  double r_first = 1.0;
  int outer_shells = 48;
  int inner_shells = 30;
  int radial_nodes = 24;
  int angular_nodes = 8;
  // Relative growth per radius doubling that counts as divergence.
  double growth_delta = 0.05;
  double stop_rel = 1e-15;
};

enum class Verdict { converged, diverged, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::converged:
      return "converged";
    case Verdict::diverged:
      return "diverged";
    default:
      return "inconclusive";
  }
}

struct SpectralIntegrand {
  std::function<double(std::span<const double>)> eval;
  // When set, the integrand depends on |xi| only and this is used instead.
  std::function<double(double)> radial;
  // Integrand behaves like |xi|^p at infinity.
  std::optional<double> tail_exponent;
};

struct SpectralResult {
  double value = 0.0;
  double abs_error = 0.0;
  Verdict verdict = Verdict::converged;
  Verdict numeric_verdict = Verdict::converged;
  std::optional<Verdict> analytic_verdict;
  std::vector<double> radii;
  std::vector<double> partial_sums;
  bool early_stop = false;

  bool finite() const { return verdict == Verdict::converged; }
};

struct AngularRule {
  std::vector<std::vector<double>> directions;
  std::vector<double> weights;
};

namespace detail {

// Nodes on the unit sphere of R^k for the axes first..first+k-1, with
// weights of the surface measure times prod |omega_i|^{-a_i}.
inline void sphere_nodes(const std::vector<double>& a, int first, int k, int n, std::vector<std::vector<double>>& dirs,
                         std::vector<double>& wts) {
  if (k == 1) {
    dirs = {{1.0}, {-1.0}};
    wts = {1.0, 1.0};
    return;
  }
  std::vector<std::vector<double>> sub_dirs;
  std::vector<double> sub_w;
  sphere_nodes(a, first + 1, k - 1, n, sub_dirs, sub_w);
  double rest = 0.0;
  for (int i = first + 1; i < first + k; ++i) rest += a[i];
  const double e_pole = (k - 2) - rest, e_eq = -a[first];
  const double pi = std::numbers::pi;
  std::vector<std::pair<double, double>> th;
  for (auto [lo, hi, e, right] : {std::tuple{0.0, pi / 4, e_pole, false}, std::tuple{pi / 4, pi / 2, e_eq, true},
                                  std::tuple{pi / 2, 3 * pi / 4, e_eq, false}, std::tuple{3 * pi / 4, pi, e_pole, true}}) {
    for (auto [x, w] : quad::panel_rule(lo, hi, std::min(e, 0.0), n, right)) th.emplace_back(x, w);
  }
  dirs.clear();
  wts.clear();
  for (auto [t, w] : th) {
    const double c = std::cos(t), s = std::sin(t);
    const double f = std::pow(s, k - 2.0 - rest) * std::pow(std::abs(c), -a[first]);
    for (std::size_t j = 0; j < sub_dirs.size(); ++j) {
      std::vector<double> v(k);
      v[0] = c;
      for (int i = 1; i < k; ++i) v[i] = s * sub_dirs[j][i - 1];
      dirs.push_back(std::move(v));
      wts.push_back(w * f * sub_w[j]);
    }
  }
}

}  // namespace detail

inline AngularRule angular_rule(const HomogeneousWeight& w, int n) {
  AngularRule r;
  std::vector<double> a = w.axis_exponents;
  a.resize(w.dim, 0.0);
  detail::sphere_nodes(a, 0, w.dim, n, r.directions, r.weights);
  for (double& x : r.weights) x *= w.scale;
  return r;
}

// int F(x) w(x) dx over R^d in polar coordinates; the radial integral is cut
// into an origin ball and dyadic shells, and the partial sums over the shells
// decide convergence.
inline SpectralResult integrate_homogeneous(const HomogeneousWeight& w, const SpectralIntegrand& f,
                                            const TruncationPlan& plan = {}, bool require_nonneg = false) {
  const int d = w.dim;
  const double e = d - 1.0 - w.degree;
  if (e <= -1.0) throw config_error("weight is not locally integrable at the origin");
  AngularRule ang;
  double mass = 0.0;
  const bool radial = static_cast<bool>(f.radial);
  if (radial)
    mass = w.sphere_mass();
  else
    ang = angular_rule(w, plan.angular_nodes);
  std::vector<double> point(d);
  auto check = [&](double v) {
    if (!std::isfinite(v)) throw numeric_error("integrand is not finite at a quadrature node");
    if (require_nonneg && v < 0.0) throw config_error("integrand must be nonnegative");
    return v;
  };
  auto shell_value = [&](double r) {
    if (radial) return mass * check(f.radial(r));
    double s = 0.0;
    for (std::size_t j = 0; j < ang.directions.size(); ++j) {
      for (int i = 0; i < d; ++i) point[i] = r * ang.directions[j][i];
      s += ang.weights[j] * check(f.eval(point));
    }
    return s;
  };
  auto piece = [&](double a, double b, double ex) {
    double s = 0.0;
    for (auto [r, wt] : quad::panel_rule(a, b, std::min(ex, 0.0), plan.radial_nodes))
      s += wt * std::pow(r, e) * shell_value(r);
    return s;
  };
  const double r0 = plan.r_first;
  double core = piece(0.0, std::ldexp(r0, -plan.inner_shells), e);
  for (int k = plan.inner_shells; k >= 1; --k) core += piece(std::ldexp(r0, -k), std::ldexp(r0, -k + 1), 0.0);

  SpectralResult out;
  double G = core;
  out.radii.push_back(r0);
  out.partial_sums.push_back(G);
  std::vector<double> inc;
  int quiet = 0;
  for (int k = 0; k < plan.outer_shells; ++k) {
    double dlt = piece(std::ldexp(r0, k), std::ldexp(r0, k + 1), 0.0);
    G += dlt;
    inc.push_back(dlt);
    out.radii.push_back(std::ldexp(r0, k + 1));
    out.partial_sums.push_back(G);
    quiet = std::abs(dlt) <= plan.stop_rel * std::abs(G) ? quiet + 1 : 0;
    if (quiet >= 2 && k >= 4) {
      out.early_stop = true;
      break;
    }
  }

  const auto& ps = out.partial_sums;
  const std::size_t m = ps.size();
  if (out.early_stop || m < 3) {
    out.numeric_verdict = Verdict::converged;
  } else {
    auto grow = [&](std::size_t i) { return ps[i - 1] > 0.0 && ps[i] / ps[i - 1] >= 1.0 + plan.growth_delta; };
    out.numeric_verdict = grow(m - 1) && grow(m - 2) ? Verdict::diverged : Verdict::converged;
  }
  std::optional<double> q_tail;
  if (f.tail_exponent) {
    q_tail = *f.tail_exponent - w.degree + d;
    out.analytic_verdict = *q_tail >= 0.0 ? Verdict::diverged : Verdict::converged;
    out.verdict = *out.analytic_verdict == out.numeric_verdict ? out.numeric_verdict : Verdict::inconclusive;
  } else {
    out.verdict = out.numeric_verdict;
  }

  if (out.verdict == Verdict::diverged) {
    out.value = std::numeric_limits<double>::infinity();
    out.abs_error = std::numeric_limits<double>::infinity();
    return out;
  }
  double tail = 0.0;
  if (!out.early_stop && inc.size() >= 2) {
    double q = 0.0;
    if (q_tail && *q_tail < 0.0)
      q = std::exp2(*q_tail);
    else if (inc[inc.size() - 2] != 0.0)
      q = inc.back() / inc[inc.size() - 2];
    if (q > 0.0 && q < 1.0) tail = inc.back() * q / (1.0 - q);
  }
  out.value = G + tail;
  out.abs_error = std::abs(tail) + (inc.empty() ? 0.0 : std::abs(inc.back())) * 1e-3 + 1e-14 * std::abs(G);
  return out;
}

// int F dmu for a nonnegative F.
inline SpectralResult integrate_spectral(const SpectralMeasure& mu, const SpectralIntegrand& f,
                                         const TruncationPlan& plan = {}) {
  if (const auto* dm = std::get_if<DiscreteMeasure>(&mu.form())) {
    SpectralResult out;
    double s = 0.0;
    for (const auto& a : dm->atoms) {
      double v = f.eval(a.xi);
      if (!std::isfinite(v)) throw numeric_error("integrand is not finite at an atom");
      if (v < 0.0) throw config_error("integrand must be nonnegative");
      s += a.weight * v;
    }
    out.value = s;
    out.partial_sums = {s};
    out.early_stop = true;
    return out;
  }
  return integrate_homogeneous(mu.weight(), f, plan, true);
}

struct PairingResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_diff = 0.0;
};

// Checks int int phi(x) psi(y) f(x - y) dx dy = int F phi conj(F psi) dmu for
// Gaussian test functions; the left side is computed in real space.
inline PairingResult pairing_check(const Kernel& f, const SpectralMeasure& mu, const GaussianTestFunction& phi,
                                   const GaussianTestFunction& psi, const TruncationPlan& plan = {}) {
  const int d = f.dim();
  if (mu.dim() != d || phi.dim != d || psi.dim != d) throw dimension_error("pairing_check: dimension mismatch");
  if (!f.is_partner(mu)) throw config_error("kernel and measure are not a registered Fourier pair");
  const double s2 = phi.sigma * phi.sigma + psi.sigma * psi.sigma;
  std::vector<double> shift(d);
  double shift2 = 0.0;
  for (int i = 0; i < d; ++i) {
    shift[i] = phi.center[i] - psi.center[i];
    shift2 += shift[i] * shift[i];
  }
  const double amp = phi.amplitude * psi.amplitude;
  const double norm = amp * std::pow(2.0 * std::numbers::pi * s2, -0.5 * d);
  // C(z) = int phi(y + z) psi(y) dy
  auto corr = [&](std::span<const double> z) {
    double q = 0.0;
    for (int i = 0; i < d; ++i) q += (z[i] - shift[i]) * (z[i] - shift[i]);
    return norm * std::exp(-0.5 * q / s2);
  };
  PairingResult out;
  TruncationPlan p = plan;
  p.r_first = std::sqrt(s2);
  if (std::holds_alternative<WhiteKernel>(f.form())) {
    out.lhs = std::get<WhiteKernel>(f.form()).c * norm * std::exp(-0.5 * shift2 / s2);
  } else if (std::holds_alternative<ConstantKernel>(f.form())) {
    out.lhs = std::get<ConstantKernel>(f.form()).c * amp;
  } else {
    SpectralIntegrand g;
    g.eval = corr;
    if (shift2 == 0.0) g.radial = [&](double r) { return norm * std::exp(-0.5 * r * r / s2); };
    out.lhs = integrate_homogeneous(f.weight(), g, p).value;
  }
  SpectralIntegrand h;
  h.eval = [&](std::span<const double> xi) {
    double r2 = 0.0, dot = 0.0;
    for (int i = 0; i < d; ++i) {
      r2 += xi[i] * xi[i];
      dot += xi[i] * shift[i];
    }
    return amp * std::exp(-0.5 * s2 * r2) * std::cos(dot);
  };
  if (shift2 == 0.0) h.radial = [&](double r) { return amp * std::exp(-0.5 * s2 * r * r); };
  if (const auto* dm = std::get_if<DiscreteMeasure>(&mu.form())) {
    for (const auto& a : dm->atoms) out.rhs += a.weight * h.eval(a.xi);
  } else {
    p.r_first = 1.0 / std::sqrt(s2);
    out.rhs = integrate_homogeneous(mu.weight(), h, p).value;
  }
  out.rel_diff = std::abs(out.lhs - out.rhs) / std::max(std::abs(out.lhs), std::abs(out.rhs));
  return out;
}

// A real function on the line with its Fourier transform and a location and
// width hint for quadrature.
struct LineFunction {
  std::function<double(double)> value;
  std::function<cplx(double)> fourier;
  double center = 0.0;
  double width = 1.0;
};

inline LineFunction gaussian_line(double sigma, double center = 0.0, double amplitude = 1.0) {
  return {[=](double x) {
            return amplitude / std::sqrt(2.0 * std::numbers::pi * sigma * sigma) *
                   std::exp(-0.5 * (x - center) * (x - center) / (sigma * sigma));
          },
          [=](double xi) { return amplitude * std::exp(-0.5 * sigma * sigma * xi * xi) * std::exp(cplx(0.0, -xi * center)); },
          center, sigma};
}

struct TripleResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_diff = 0.0;
};

// int int psi1(x) psi2(y) phi(x - y) dx dy against
// (2 pi)^{-1} int F psi1 conj(F psi2) conj(F phi) dxi.
inline TripleResult plancherel_triple(const LineFunction& phi, const LineFunction& psi1, const LineFunction& psi2) {
  // Integrate over the arguments of the two narrowest functions; the widest
  // one is evaluated at their combination.
  auto span_rule = [](double c, double wdt) {
    std::vector<std::pair<double, double>> nodes;
    const int np = 48;
    const double lo = c - 14.0 * wdt, hi = c + 14.0 * wdt;
    for (int k = 0; k < np; ++k)
      for (auto nw : quad::panel_rule(lo + (hi - lo) * k / np, lo + (hi - lo) * (k + 1) / np, 0.0, 16)) nodes.push_back(nw);
    return nodes;
  };
  double lhs = 0.0;
  const double w0 = phi.width, w1 = psi1.width, w2 = psi2.width;
  if (w0 >= w1 && w0 >= w2) {
    auto X = span_rule(psi1.center, w1), Y = span_rule(psi2.center, w2);
    for (auto [x, wx] : X)
      for (auto [y, wy] : Y) lhs += wx * wy * psi1.value(x) * psi2.value(y) * phi.value(x - y);
  } else if (w1 >= w2) {
    // x = y + z
    auto Z = span_rule(phi.center, w0), Y = span_rule(psi2.center, w2);
    for (auto [z, wz] : Z)
      for (auto [y, wy] : Y) lhs += wz * wy * phi.value(z) * psi2.value(y) * psi1.value(y + z);
  } else {
    // y = x - z
    auto X = span_rule(psi1.center, w1), Z = span_rule(phi.center, w0);
    for (auto [x, wx] : X)
      for (auto [z, wz] : Z) lhs += wx * wz * psi1.value(x) * phi.value(z) * psi2.value(x - z);
  }
  const double wmax = std::max({w0, w1, w2});
  const double Xi = 14.0 / wmax;
  const double osc = std::abs(phi.center) + std::abs(psi1.center) + std::abs(psi2.center);
  const double h = std::min(1.0 / wmax, osc > 0.0 ? std::numbers::pi / osc : 1.0 / wmax);
  const int np = std::max(16, static_cast<int>(std::ceil(2.0 * Xi / h)));
  auto g = [&](double xi) {
    return (psi1.fourier(xi) * std::conj(psi2.fourier(xi)) * std::conj(phi.fourier(xi))).real();
  };
  double rhs = 0.0;
  for (int k = 0; k < np; ++k) rhs += quad::integrate(g, -Xi + 2.0 * Xi * k / np, -Xi + 2.0 * Xi * (k + 1) / np, 16);
  rhs /= 2.0 * std::numbers::pi;
  return {lhs, rhs, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs))};
}

// Isotropic Gaussians factor over the axes.
inline TripleResult plancherel_triple(const GaussianTestFunction& phi, const GaussianTestFunction& psi1,
                                      const GaussianTestFunction& psi2) {
  const int d = phi.dim;
  if (psi1.dim != d || psi2.dim != d) throw dimension_error("plancherel_triple: dimension mismatch");
  TripleResult out{phi.amplitude * psi1.amplitude * psi2.amplitude, phi.amplitude * psi1.amplitude * psi2.amplitude, 0.0};
  for (int i = 0; i < d; ++i) {
    auto r = plancherel_triple(gaussian_line(phi.sigma, phi.center[i]), gaussian_line(psi1.sigma, psi1.center[i]),
                               gaussian_line(psi2.sigma, psi2.center[i]));
    out.lhs *= r.lhs;
    out.rhs *= r.rhs;
  }
  out.rel_diff = std::abs(out.lhs - out.rhs) / std::max(std::abs(out.lhs), std::abs(out.rhs));
  return out;
}

}  // namespace fracspde
