#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace fracspde::quad {

// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline Rule make_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      // final derivative at the converged root
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace detail

// Cached rule; references stay valid for the program lifetime.
inline const Rule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  static std::mutex mtx;
  static std::map<int, Rule> cache;
  std::lock_guard lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::make_gauss_legendre(n)).first;
  return it->second;
}

template <class F>
auto integrate(F&& f, double a, double b, int n) {
  const Rule& r = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  using R = decltype(f(mid));
  R s{};
  for (int i = 0; i < n; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

template <class F>
auto integrate_panels(F&& f, const std::vector<double>& breaks, int n) {
  using R = decltype(f(breaks.front()));
  R s{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) s += integrate(f, breaks[i], breaks[i + 1], n);
  return s;
}

namespace detail {

// Golub-Welsch for the weight x^e on [0, 1].
inline Rule make_gauss_jacobi01(int n, double e) {
  const double a = 0.0, b = e;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    J(k, k) = k == 0 ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0, sm = 2.0 * m + a + b;
      const double off =
          std::sqrt(4.0 * m * (m + a) * (m + b) * (m + a + b) / (sm * sm * (sm + 1.0) * (sm - 1.0)));
      J(k, k + 1) = off;
      J(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  // Moment of (1+x)^e on [-1, 1] is 2^{e+1}/(e+1); map to [0, 1].
  const double mu0 = 1.0 / (e + 1.0);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double v = es.eigenvectors()(0, k);
    r.nodes[k] = 0.5 * (es.eigenvalues()(k) + 1.0);
    r.weights[k] = mu0 * v * v;
  }
  return r;
}

}  // namespace detail

// Gauss-Jacobi rule for int_0^1 x^e g(x) dx, e > -1.
inline const Rule& gauss_jacobi01(int n, double e) {
  static std::mutex mtx;
  static std::map<std::pair<int, double>, Rule> cache;
  std::lock_guard lock(mtx);
  auto it = cache.find({n, e});
  if (it == cache.end()) it = cache.emplace(std::pair{n, e}, detail::make_gauss_jacobi01(n, e)).first;
  return it->second;
}

// Integral over [a, b] of f = |x - a|^e g(x) (or |b - x|^e g(x) when
// at_right) with g smooth; f is evaluated and divided by the singular factor.
template <class F>
auto integrate_singular(F&& f, double a, double b, double e, int n, bool at_right = false) {
  if (e <= -1.0) throw std::invalid_argument("integrate_singular: exponent must exceed -1");
  if (e == 0.0) return integrate(f, a, b, n);
  const Rule& r = gauss_jacobi01(n, e);
  const double len = b - a;
  using R = decltype(f(a));
  R s{};
  for (int i = 0; i < n; ++i) {
    const double v = r.nodes[i];
    const double x = at_right ? b - len * v : a + len * v;
    s += r.weights[i] * std::pow(len * v, -e) * f(x);
  }
  return s * len * std::pow(len, e);
}

// Nodes and weights approximating int_a^b f for f as in integrate_singular.
inline std::vector<std::pair<double, double>> panel_rule(double a, double b, double e, int n, bool at_right = false) {
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  const double len = b - a;
  if (e == 0.0) {
    const Rule& r = gauss_legendre(n);
    for (int i = 0; i < n; ++i) out.emplace_back(a + 0.5 * len * (r.nodes[i] + 1.0), 0.5 * len * r.weights[i]);
    return out;
  }
  const Rule& r = gauss_jacobi01(n, e);
  for (int i = 0; i < n; ++i) {
    const double v = r.nodes[i];
    out.emplace_back(at_right ? b - len * v : a + len * v, r.weights[i] * len * std::pow(v, -e));
  }
  return out;
}

// Break points on [a, b] refined geometrically toward a singular endpoint.
// The first panel [a, breaks[1]] is meant for integrate_singular.
inline std::vector<double> graded_breaks(double a, double b, int levels, double hmax, bool left = true,
                                         bool right = false) {
  std::vector<double> out;
  const double len = b - a;
  double sl = left ? std::min(0.5 * len, hmax) : 0.0;
  double sr = right ? std::min(0.5 * len, hmax) : 0.0;
  if (left && right) {
    sl = std::min(sl, 0.25 * len);
    sr = sl;
  }
  out.push_back(a);
  if (left)
    for (int k = levels; k >= 1; --k) out.push_back(a + sl * std::ldexp(1.0, -k));
  double lo = a + sl, hi = b - sr;
  int npan = std::max(1, static_cast<int>(std::ceil((hi - lo) / hmax - 1e-12)));
  for (int k = 0; k <= npan; ++k) {
    double x = lo + (hi - lo) * k / npan;
    if (x > out.back()) out.push_back(x);
  }
  if (right)
    for (int k = 1; k <= levels; ++k) {
      double x = b - sr * std::ldexp(1.0, -k);
      if (x > out.back()) out.push_back(x);
    }
  if (out.back() < b) out.push_back(b);
  return out;
}

}  // namespace fracspde::quad
