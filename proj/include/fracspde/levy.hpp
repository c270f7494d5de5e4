#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "fracspde/errors.hpp"

namespace fracspde {

using cplx = std::complex<double>;

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// c |xi|^beta; beta in (0, 2] is a symmetric stable process, beta > 2 is
// accepted for spectral computations only.
struct Stable {
  double beta = 2.0;
  double c = 1.0;
};

// s |xi|^2, i.e. the generator s * Laplacian.
struct Brownian {
  double scale = 1.0;
};

// c |xi|^beta + i skew xi_1 |xi|^{skew_power - 1}.
struct Asymmetric {
  double beta = 1.0;
  double c = 1.0;
  double skew = 0.0;
  double skew_power = 1.0;
};

struct Custom {
  std::function<cplx(std::span<const double>)> fn;
  bool radial = false;
  bool real = false;
  // Re psi grows like |xi|^p at infinity, if known.
  std::optional<double> growth_power;
  std::string label = "custom";
};

class CharacteristicExponent {
 public:
  using Form = std::variant<Stable, Brownian, Asymmetric, Custom>;

  CharacteristicExponent(int dim, Form form) : dim_(dim), form_(std::move(form)) { validate(); }

  static CharacteristicExponent stable(int dim, double beta, double c = 1.0) { return {dim, Stable{beta, c}}; }
  static CharacteristicExponent brownian(int dim, double scale = 1.0) { return {dim, Brownian{scale}}; }

  int dim() const noexcept { return dim_; }
  const Form& form() const noexcept { return form_; }

  cplx operator()(std::span<const double> xi) const {
    if (static_cast<int>(xi.size()) != dim_) throw dimension_error("exponent evaluated at a point of wrong dimension");
    return eval(xi);
  }

  // Value at |xi| = r for radial forms.
  cplx radial(double r) const {
    if (const auto* s = std::get_if<Stable>(&form_)) return s->c * std::pow(r, s->beta);
    if (const auto* b = std::get_if<Brownian>(&form_)) return b->scale * r * r;
    std::vector<double> xi(dim_, 0.0);
    xi[0] = r;
    return eval(xi);
  }

  bool is_radial() const {
    if (const auto* c = std::get_if<Custom>(&form_)) return c->radial;
    if (const auto* a = std::get_if<Asymmetric>(&form_)) return a->skew == 0.0;
    return true;
  }

  bool is_real() const {
    if (const auto* c = std::get_if<Custom>(&form_)) return c->real;
    if (const auto* a = std::get_if<Asymmetric>(&form_)) return a->skew == 0.0;
    return true;
  }

  // Homogeneity degree of Re psi, when known.
  std::optional<double> growth_power() const {
    if (const auto* s = std::get_if<Stable>(&form_)) return s->beta;
    if (std::holds_alternative<Brownian>(form_)) return 2.0;
    if (const auto* a = std::get_if<Asymmetric>(&form_)) return a->beta;
    return std::get<Custom>(form_).growth_power;
  }

  // Symmetric stable with beta <= 2 (a genuine Levy process that can be simulated).
  std::optional<std::pair<double, double>> stable_parameters() const {
    if (const auto* s = std::get_if<Stable>(&form_)) return std::pair{s->beta, s->c};
    if (const auto* b = std::get_if<Brownian>(&form_)) return std::pair{2.0, b->scale};
    if (const auto* a = std::get_if<Asymmetric>(&form_); a && a->skew == 0.0) return std::pair{a->beta, a->c};
    return std::nullopt;
  }

  std::string describe() const {
    std::ostringstream os;
    if (const auto* s = std::get_if<Stable>(&form_))
      os << "stable(beta=" << s->beta << ", c=" << s->c << ")";
    else if (const auto* b = std::get_if<Brownian>(&form_))
      os << "brownian(scale=" << b->scale << ")";
    else if (const auto* a = std::get_if<Asymmetric>(&form_))
      os << "asymmetric(beta=" << a->beta << ", c=" << a->c << ", skew=" << a->skew << ", power=" << a->skew_power
         << ")";
    else
      os << std::get<Custom>(form_).label;
    os << " in d=" << dim_;
    return os.str();
  }

 private:
  cplx eval(std::span<const double> xi) const {
    return std::visit(
        [&](const auto& f) -> cplx {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Stable>) {
            return f.c * std::pow(norm2(xi), f.beta);
          } else if constexpr (std::is_same_v<T, Brownian>) {
            const double r = norm2(xi);
            return f.scale * r * r;
          } else if constexpr (std::is_same_v<T, Asymmetric>) {
            const double r = norm2(xi);
            if (r == 0.0) return 0.0;
            return {f.c * std::pow(r, f.beta), f.skew * xi[0] * std::pow(r, f.skew_power - 1.0)};
          } else {
            return f.fn(xi);
          }
        },
        form_);
  }

  void validate() const {
    if (dim_ < 1) throw config_error("exponent dimension must be >= 1");
    std::visit(
        [](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Stable>) {
            if (!(f.beta > 0.0) || !(f.c > 0.0)) throw config_error("stable exponent needs beta > 0 and c > 0");
          } else if constexpr (std::is_same_v<T, Brownian>) {
            if (!(f.scale > 0.0)) throw config_error("brownian exponent needs scale > 0");
          } else if constexpr (std::is_same_v<T, Asymmetric>) {
            if (!(f.beta > 0.0) || !(f.c > 0.0) || !(f.skew_power > 0.0))
              throw config_error("asymmetric exponent needs beta, c, skew_power > 0");
          } else {
            if (!f.fn) throw config_error("custom exponent needs a callable");
          }
        },
        form_);
  }

  int dim_;
  Form form_;
};

inline cplx eval_psi(const CharacteristicExponent& psi, std::span<const double> xi) { return psi(xi); }

// Exponent of X - X' for an independent copy X': psi + conj(psi).
inline CharacteristicExponent symmetrized_exponent(const CharacteristicExponent& psi) {
  const auto& f = psi.form();
  if (const auto* s = std::get_if<Stable>(&f)) return {psi.dim(), Stable{s->beta, 2.0 * s->c}};
  if (const auto* b = std::get_if<Brownian>(&f)) return {psi.dim(), Brownian{2.0 * b->scale}};
  if (const auto* a = std::get_if<Asymmetric>(&f)) return {psi.dim(), Stable{a->beta, 2.0 * a->c}};
  const auto& c = std::get<Custom>(f);
  Custom sym{[fn = c.fn](std::span<const double> xi) { return cplx(2.0 * fn(xi).real(), 0.0); }, c.radial, true,
             c.growth_power, "sym(" + c.label + ")"};
  return {psi.dim(), std::move(sym)};
}

struct ImReRatio {
  // Empty when the ratio is unbounded on the grid.
  std::optional<double> bound;
  double max_ratio = 0.0;
  std::size_t evaluated = 0;
  // Points with Re psi = 0 = Im psi; they carry no information.
  std::size_t skipped = 0;
};

inline ImReRatio estimate_im_re_ratio(const CharacteristicExponent& psi, std::span<const std::vector<double>> grid) {
  if (grid.empty()) throw config_error("ratio grid is empty");
  ImReRatio out;
  bool unbounded = false;
  for (const auto& xi : grid) {
    cplx v = psi(xi);
    if (v.real() < 0.0) throw config_error("exponent has negative real part at a grid point");
    if (v.real() == 0.0) {
      if (v.imag() == 0.0) {
        ++out.skipped;
        continue;
      }
      unbounded = true;
      ++out.evaluated;
      continue;
    }
    ++out.evaluated;
    out.max_ratio = std::max(out.max_ratio, std::abs(v.imag()) / v.real());
  }
  if (out.evaluated == 0) throw degenerate_grid_error("psi vanishes at every grid point");
  if (unbounded) {
    out.max_ratio = std::numeric_limits<double>::infinity();
  } else {
    out.bound = out.max_ratio;
  }
  return out;
}

// Log-spaced radial grid times the 2d signed axis and diagonal directions.
inline std::vector<std::vector<double>> probe_grid(int dim, double rmin, double rmax, int n_radii) {
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < dim; ++k)
    for (double s : {-1.0, 1.0}) {
      std::vector<double> e(dim, 0.0);
      e[k] = s;
      dirs.push_back(e);
    }
  for (double s : {-1.0, 1.0}) dirs.push_back(std::vector<double>(dim, s / std::sqrt(double(dim))));
  std::vector<std::vector<double>> out;
  for (int i = 0; i < n_radii; ++i) {
    double r = rmin * std::pow(rmax / rmin, n_radii == 1 ? 0.0 : double(i) / (n_radii - 1));
    for (const auto& d : dirs) {
      std::vector<double> p(dim);
      for (int k = 0; k < dim; ++k) p[k] = r * d[k];
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace fracspde
