#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fracspde/potential.hpp"

using namespace fracspde;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// int_R (alpha + 2 xi^2)^{-3/2} |xi|^{-1/2} d xi.
double upsilon_star_closed(double alpha) { return std::pow(alpha, -1.25) * std::pow(2.0, -0.25) * beta_fn(0.25, 1.25); }

ResolventQuery riesz_query(double alpha, std::vector<double> x) {
  ResolventQuery q;
  q.alpha = alpha;
  q.x = std::move(x);
  q.hp = HurstParams(0.75);
  q.kernel = Kernel::riesz(1, 0.5);
  q.exp_sym = CharacteristicExponent::stable(1, 2.0, 2.0);
  q.measure = SpectralMeasure::riesz(1, 0.5);
  return q;
}

}  // namespace

TEST(UpsilonStar, AtomAtZeroExponent) {
  auto mu = SpectralMeasure::discrete(1, {Atom{{0.0}, 1.0}});
  for (double a : {0.5, 1.0, 3.0})
    EXPECT_NEAR(upsilon_star(a, HurstParams(0.75, 0), CharacteristicExponent::stable(1, 2.0), mu).value, std::pow(a, -1.5),
                1e-14);
}

TEST(UpsilonStar, RieszGaussianClosedForm) {
  auto e = CharacteristicExponent::stable(1, 2.0);
  auto mu = SpectralMeasure::riesz(1, 0.5);
  EXPECT_NEAR(upsilon_star_closed(1.0), 3.11816949951082231, 1e-13);
  for (double a : {0.5, 1.0, 2.0, 4.0}) {
    auto r = upsilon_star(a, HurstParams(0.75, 0), e, mu);
    EXPECT_TRUE(r.finite());
    EXPECT_LT(rel(r.value, upsilon_star_closed(a)), 1e-9) << a;
  }
}

TEST(UpsilonStar, DivergentRegime) {
  auto r = upsilon_star(1.0, HurstParams(0.6, 0), CharacteristicExponent::stable(3, 1.0), SpectralMeasure::riesz(3, 0.5));
  EXPECT_EQ(r.verdict, Verdict::diverged);
  EXPECT_THROW(upsilon_star(0.0, HurstParams(0.6, 0), CharacteristicExponent::stable(1, 1.0), SpectralMeasure::riesz(1, 0.5)),
               config_error);
}

TEST(Upsilon, InfiniteTimeFactor) {
  // alpha_H int int e^{-lam(r+s)} |r-s|^{2H-2} over the quadrant = H Gamma(2H) lam^{-2H}.
  for (double H : {0.6, 0.75, 0.9})
    for (double lam : {0.1, 1.0, 7.0}) {
      auto f = infinite_time_factor(lam, HurstParams(H, 0));
      EXPECT_LT(rel(f.value, H * std::tgamma(2 * H) * std::pow(lam, -2 * H)), 1e-12);
      EXPECT_GE(f.tail_bound, 0.0);
      EXPECT_LT(f.tail_bound, 1e-12 * f.value);
    }
  auto atom = upsilon(1.0, HurstParams(0.75, 0), CharacteristicExponent::stable(1, 2.0),
                      SpectralMeasure::discrete(1, {Atom{{0.0}, 1.0}}));
  EXPECT_NEAR(atom.value, 0.664670194089568510, 1e-13);
}

TEST(Upsilon, SandwichAndMonotonicity) {
  auto e = CharacteristicExponent::stable(1, 2.0);
  auto mu = SpectralMeasure::riesz(1, 0.5);
  HurstParams hp(0.75);
  double prev_u = INFINITY, prev_s = INFINITY;
  for (double a : {0.5, 1.0, 2.0, 4.0}) {
    const double u = upsilon(a, hp, e, mu).value, s = upsilon_star(a, hp, e, mu).value;
    EXPECT_GE(u, upsilon_lower_constant(a, hp) * s);
    // Upper side uses the estimated b_H.
    EXPECT_LE(u, hp.b_H * hp.b_H * std::pow(hp.H, 2 * hp.H) * s);
    EXPECT_LT(u, prev_u);
    EXPECT_LT(s, prev_s);
    prev_u = u;
    prev_s = s;
  }
}

TEST(Upsilon, ProductMeasureSandwich) {
  auto e = CharacteristicExponent::stable(2, 1.6);
  auto mu = SpectralMeasure::product_fbm({0.7, 0.9});
  HurstParams hp(0.8);
  for (double a : {0.5, 2.0}) {
    const double u = upsilon(a, hp, e, mu).value, s = upsilon_star(a, hp, e, mu).value;
    ASSERT_TRUE(std::isfinite(s));
    EXPECT_GE(u, upsilon_lower_constant(a, hp) * s);
    EXPECT_LE(u, hp.b_H * hp.b_H * std::pow(hp.H, 2 * hp.H) * s);
  }
}

TEST(UpsilonStar, ComparisonPairs) {
  auto e = CharacteristicExponent::stable(1, 2.0);
  auto mu = SpectralMeasure::riesz(1, 0.5);
  for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}, std::pair{0.5, 3.0}})
    EXPECT_TRUE(upsilon_star_comparison(a, b, HurstParams(0.75, 0), e, mu).pass) << a << " " << b;
  auto atoms = SpectralMeasure::discrete(1, {Atom{{0.5}, 1.0}, Atom{{-0.5}, 1.0}, Atom{{0.0}, 2.0}});
  auto c = upsilon_star_comparison(1.0, 2.0, HurstParams(0.75, 0), e, atoms);
  EXPECT_TRUE(c.pass);
  const double va = 2.0 * std::pow(1.5, -1.5) + 2.0;
  EXPECT_NEAR(c.value_a, va, 1e-14);
}

TEST(Semigroup, SpectralAtZeroIsGammaFunction) {
  // int e^{-u c xi^2} |xi|^{-1/2} d xi = Gamma(1/4) (u c)^{-1/4}.
  auto k = Kernel::riesz(1, 0.5);
  auto e = CharacteristicExponent::stable(1, 2.0, 2.0);
  const double x0[] = {0.0};
  for (double u : {0.5, 1.0, 2.0, 4.0}) {
    auto v = semigroup_apply(k, e, u, x0, SemigroupMethod::spectral_at_zero);
    EXPECT_LT(rel(v.value, std::tgamma(0.25) * std::pow(2.0 * u, -0.25)), 1e-9);
    auto g = semigroup_apply(k, e, u, x0, SemigroupMethod::gaussian_closed_form);
    EXPECT_LT(rel(g.value, v.value), 1e-9);
  }
}

TEST(Semigroup, MonteCarloMatchesSpectral) {
  auto k = Kernel::riesz(1, 0.5);
  auto e = CharacteristicExponent::stable(1, 2.0, 2.0);
  const double x0[] = {0.0};
  const double ref = semigroup_apply(k, e, 1.0, x0, SemigroupMethod::spectral_at_zero).value;
  MonteCarloOptions mc;
  mc.n_samples = 40000;
  mc.seed = 11;
  mc.rao_blackwell = false;
  auto v = semigroup_apply(k, e, 1.0, x0, SemigroupMethod::monte_carlo, mc);
  EXPECT_GT(v.std_error, 0.0);
  EXPECT_LT(std::abs(v.value - ref), 3.0 * v.std_error) << v.value << " +- " << v.std_error << " vs " << ref;
}

TEST(Semigroup, StableSelfSimilaritySlope) {
  for (double beta : {1.0, 1.5}) {
    auto k = Kernel::riesz(1, 0.5);
    auto e = CharacteristicExponent::stable(1, beta, 2.0);
    const double x0[] = {0.0};
    std::vector<double> lu, lv;
    for (double u : {0.5, 1.0, 2.0, 4.0}) {
      lu.push_back(std::log(u));
      lv.push_back(std::log(semigroup_apply(k, e, u, x0, SemigroupMethod::spectral_at_zero).value));
    }
    const double slope = (lv.back() - lv.front()) / (lu.back() - lu.front());
    EXPECT_NEAR(slope, -0.5 / beta, 0.05 * 0.5 / beta);
    MonteCarloOptions mc;
    mc.n_samples = 20000;
    mc.seed = 5;
    auto m1 = semigroup_apply(k, e, 1.0, x0, SemigroupMethod::monte_carlo, mc);
    auto m4 = semigroup_apply(k, e, 4.0, x0, SemigroupMethod::monte_carlo, mc);
    const double mc_slope = std::log(m4.value / m1.value) / std::log(4.0);
    EXPECT_NEAR(mc_slope, -0.5 / beta, 0.05 * 0.5 / beta) << beta;
  }
}

TEST(Semigroup, ConstantKernelIsPreserved) {
  auto k = Kernel::constant(2, 3.5);
  auto e = CharacteristicExponent::stable(2, 1.3);
  MonteCarloOptions mc;
  mc.n_samples = 500;
  for (double u : {0.1, 2.0}) {
    const double x[] = {0.4, -1.0};
    auto v = semigroup_apply(k, e, u, x, SemigroupMethod::monte_carlo, mc);
    EXPECT_DOUBLE_EQ(v.value, 3.5);
    const double x0[] = {0.0, 0.0};
    EXPECT_LT(rel(semigroup_apply(k, e, u, x0, SemigroupMethod::spectral_at_zero).value, 3.5), 1e-12);
  }
}

TEST(Semigroup, MethodMismatchRejected) {
  auto k = Kernel::riesz(1, 0.5);
  const double x1[] = {1.0};
  EXPECT_THROW(semigroup_apply(k, CharacteristicExponent::stable(1, 2.0), 1.0, x1, SemigroupMethod::spectral_at_zero),
               config_error);
  EXPECT_THROW(semigroup_apply(k, CharacteristicExponent::stable(1, 1.5), 1.0, x1, SemigroupMethod::gaussian_closed_form),
               config_error);
  CharacteristicExponent skew(1, Asymmetric{1.5, 1.0, 0.5, 1.0});
  EXPECT_THROW(semigroup_apply(k, skew, 1.0, x1, SemigroupMethod::monte_carlo), config_error);
}

TEST(Resolvent, AtZeroEqualsUpsilon) {
  auto q = riesz_query(1.0, {0.0});
  auto r = fractional_resolvent(q, ResolventMethod::quadrature);
  // H Gamma(1/4) 2^{-1/4} Gamma(2H - 1/4) alpha^{-(2H - 1/4)}.
  const double closed = 0.75 * std::tgamma(0.25) * std::pow(2.0, -0.25) * std::tgamma(1.25);
  EXPECT_LT(rel(r.value, closed), 1e-8);
  const double ups = upsilon(1.0, q.hp, CharacteristicExponent::stable(1, 2.0), q.measure).value;
  EXPECT_LT(rel(r.value, ups), 1e-8);
  EXPECT_LT(r.tail_bound, 1e-10);
}

TEST(Resolvent, ConstantKernel) {
  ResolventQuery q;
  q.alpha = 2.0;
  q.x = {0.7};
  q.kernel = Kernel::constant(1, 1.7);
  q.measure = q.kernel.partner_measure();
  const double expect = 1.7 * 0.75 * std::tgamma(1.5) * std::pow(2.0, -1.5);
  EXPECT_LT(rel(fractional_resolvent(q, ResolventMethod::quadrature).value, expect), 1e-10);
  MonteCarloOptions mc;
  mc.n_samples = 200;
  EXPECT_LT(rel(fractional_resolvent(q, ResolventMethod::monte_carlo, mc).value, expect), 1e-12);
}

TEST(Resolvent, DecreasesAwayFromZero) {
  const double at0 = fractional_resolvent(riesz_query(1.0, {0.0}), ResolventMethod::quadrature).value;
  double prev = at0;
  for (double x : {0.5, 1.0, 2.0}) {
    const double v = fractional_resolvent(riesz_query(1.0, {x}), ResolventMethod::quadrature).value;
    EXPECT_LT(v, prev) << x;
    prev = v;
  }
}

TEST(Resolvent, MonteCarloMatchesQuadrature) {
  MonteCarloOptions mc;
  mc.n_samples = 50000;
  mc.seed = 3;
  for (double x : {0.0, 1.0}) {
    const double qv = fractional_resolvent(riesz_query(1.0, {x}), ResolventMethod::quadrature).value;
    auto m = fractional_resolvent(riesz_query(1.0, {x}), ResolventMethod::monte_carlo, mc);
    EXPECT_LT(std::abs(m.value - qv), 4.0 * m.std_error) << x;
    EXPECT_LT(m.std_error / m.value, 5e-3);
  }
}

TEST(Resolvent, QuadratureNeedsGaussianOffZero) {
  auto q = riesz_query(1.0, {1.0});
  q.exp_sym = CharacteristicExponent::stable(1, 1.5, 2.0);
  EXPECT_THROW(fractional_resolvent(q, ResolventMethod::quadrature), config_error);
  q.measure = SpectralMeasure::riesz(1, 0.3);
  EXPECT_THROW(fractional_resolvent(q, ResolventMethod::monte_carlo), config_error);
}

TEST(MaxPrinciple, SupAtZeroAndSymmetry) {
  MonteCarloOptions mc;
  mc.n_samples = 20000;
  mc.seed = 9;
  auto rep = verify_max_principle(riesz_query(1.0, {0.0}), {{-2.0}, {-1.0}, {-0.5}, {0.5}, {1.0}, {2.0}},
                                  ResolventMethod::monte_carlo, mc);
  EXPECT_TRUE(rep.equality_ok) << rep.rel_diff;
  EXPECT_TRUE(rep.max_ok);
  ASSERT_EQ(rep.sup_location.size(), 1u);
  EXPECT_EQ(rep.sup_location[0], 0.0);
  ASSERT_EQ(rep.rows.size(), 6u);
  for (int i = 0; i < 3; ++i) {
    const auto& a = rep.rows[i];
    const auto& b = rep.rows[5 - i];
    EXPECT_LT(std::abs(a.value - b.value), 3.0 * (a.std_error + b.std_error) + 1e-12);
  }
  auto quad_rep = verify_max_principle(riesz_query(1.0, {0.0}), {{-1.0}, {1.0}}, ResolventMethod::quadrature);
  EXPECT_TRUE(quad_rep.equality_ok);
  EXPECT_LT(quad_rep.rel_diff, 1e-8);
  EXPECT_TRUE(quad_rep.max_ok);
  EXPECT_DOUBLE_EQ(quad_rep.rows[0].value, quad_rep.rows[1].value);
}

TEST(MaxPrinciple, StableBelowTwoMonteCarlo) {
  auto q = riesz_query(1.0, {0.0});
  q.exp_sym = CharacteristicExponent::stable(1, 1.5, 2.0);
  MonteCarloOptions mc;
  mc.n_samples = 20000;
  mc.seed = 13;
  auto rep = verify_max_principle(q, {{0.5}, {1.0}, {2.0}}, ResolventMethod::monte_carlo, mc);
  EXPECT_TRUE(rep.max_ok);
  EXPECT_TRUE(rep.equality_ok) << rep.rel_diff;
}
