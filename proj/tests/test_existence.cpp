#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fracspde/existence.hpp"

using namespace fracspde;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

VarianceKernelQuery query(Problem p, double t, double H, CharacteristicExponent e, std::vector<double> xi) {
  VarianceKernelQuery q;
  q.t = t;
  q.problem = p;
  q.hp = HurstParams(H, 0);
  q.exp = std::move(e);
  q.xi = std::move(xi);
  return q;
}

}  // namespace

TEST(VarianceKernel, ParabolicExamples) {
  auto e0 = CharacteristicExponent::stable(1, 2.0, 0.0 + 1.0);
  EXPECT_NEAR(nt_parabolic(query(Problem::parabolic, 1.0, 0.75, e0, {0.0})).value, 1.0, 1e-14);
  EXPECT_NEAR(nt_parabolic(query(Problem::parabolic, 2.0, 0.75, e0, {0.0})).value, std::pow(2.0, 1.5), 1e-13);
  // Psi = 1 at xi = 1.
  auto v = nt_parabolic(query(Problem::parabolic, 1.0, 0.6, e0, {1.0})).value;
  EXPECT_LT(rel(v, h_norm_exponential_spectral(1.0, 0.0, 1.0, HurstParams(0.6, 0)).value), 1e-4);
  EXPECT_LT(rel(v, 0.422582015062032604), 1e-10);
}

TEST(VarianceKernel, HyperbolicExamples) {
  auto e = CharacteristicExponent::stable(1, 2.0);
  for (double H : {0.6, 0.75, 0.9}) {
    HurstParams hp(H, 0);
    const double limit = hp.alpha_H * hp.beta_2_2Hm1 / (H + 1.0);
    EXPECT_LT(rel(nt_hyperbolic(query(Problem::hyperbolic, 1.0, H, e, {0.0})).value, limit), 1e-12);
  }
  EXPECT_NEAR(HurstParams(0.6, 0).alpha_H * HurstParams(0.6, 0).beta_2_2Hm1 / 1.6, 0.3125, 1e-14);
  auto v = nt_hyperbolic(query(Problem::hyperbolic, 1.0, 0.75, e, {1.0})).value;
  EXPECT_LT(rel(v, h_norm_sin_spectral(1.0, HurstParams(0.75, 0)).value), 1e-4);
  EXPECT_LT(rel(v, 0.238693260064572138), 1e-10);
}

TEST(VarianceKernel, HyperbolicRejectsComplexExponent) {
  CharacteristicExponent skew(1, Asymmetric{1.5, 1.0, 0.5, 1.0});
  EXPECT_THROW(nt_hyperbolic(query(Problem::hyperbolic, 1.0, 0.75, skew, {1.0})), config_error);
  EXPECT_NO_THROW(nt_parabolic(query(Problem::parabolic, 1.0, 0.75, skew, {1.0})));
}

TEST(VarianceKernel, TrivialBoundsAndMonotonicity) {
  for (double H : {0.55, 0.75, 0.95})
    for (double psi : {0.0, 0.01, 0.5, 3.0, 40.0}) {
      HurstParams hp(H, 0);
      double prev_p = 0.0;
      for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        const double p = nt_value(Problem::parabolic, psi, t, hp);
        const double h = nt_value(Problem::hyperbolic, psi, t, hp);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, std::pow(t, 2 * H) * (1 + 1e-12));
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, std::pow(t, 2 * H + 2) * (1 + 1e-12));
        EXPECT_GE(p, prev_p * (1 - 1e-12)) << "H=" << H << " psi=" << psi << " t=" << t;
        prev_p = p;
      }
    }
  // Complex exponents obey the same trivial parabolic bound.
  HurstParams hp(0.7, 0);
  for (double I : {-5.0, 1.0, 20.0}) EXPECT_LE(nt_value(Problem::parabolic, cplx(0.3, I), 2.0, hp), std::pow(2.0, 1.4));
}

TEST(VarianceKernel, CrossMethodOverGrid) {
  for (double H : {0.6, 0.8})
    for (double psi : {0.05, 0.7, 4.0})
      for (double t : {0.3, 1.0, 2.5}) {
        HurstParams hp(H, 0);
        EXPECT_LT(rel(nt_value(Problem::parabolic, psi, t, hp), h_norm_exponential_spectral(psi, 0.0, t, hp).value), 1e-3);
        const double w = std::sqrt(psi);
        const double spectral = h_norm_sin_spectral(t * w, hp).value * std::pow(psi, -(H + 1.0));
        EXPECT_LT(rel(nt_value(Problem::hyperbolic, psi, t, hp), spectral), 1e-3);
      }
}

TEST(BoundConstants, Construction) {
  HurstParams hp(0.75);
  auto b = bound_constants(hp, 1.0);
  EXPECT_GT(b.C_HK, 0.0);
  EXPECT_LT(b.a_K * 1.0, std::numbers::pi / 2);
  EXPECT_GT(b.C_K, 0.01);
  EXPECT_GE(b.C_H, 1.0);
  const double D2a = hp.alpha_H * std::pow(std::sin(1.0), 2) * hp.beta_2_2Hm1 / 1.75;
  const double D2b = hp.c_H * std::pow(4.0, -0.5) * (std::numbers::pi / 2 - 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(b.D2_H, std::min(D2a, D2b));
  EXPECT_GT(b.D1_H, 0.0);
  EXPECT_THROW(bound_constants(hp, -1.0), config_error);
}

TEST(Bounds, ParabolicStableGrid) {
  for (double beta : {1.0, 2.0})
    for (double H : {0.6, 0.75}) {
      auto grid = axis_grid(1, {0.1, 0.5, 1.0, 2.0, 8.0}, {0.0, 0.1, 1.0, 5.0, 30.0});
      ASSERT_EQ(grid.size(), 25u);
      auto rep = verify_parabolic_bounds(CharacteristicExponent::stable(1, beta), HurstParams(H), 0.0, grid);
      EXPECT_TRUE(rep.all_pass) << "beta=" << beta << " H=" << H << " [" << rep.min_ratio << ", " << rep.max_ratio << "]";
      EXPECT_GT(rep.min_ratio, 0.0);
    }
}

TEST(Bounds, ParabolicZeroExponentPoint) {
  auto rep = verify_parabolic_bounds(CharacteristicExponent::stable(1, 2.0), HurstParams(0.75), 0.0, {GridPoint{2.0, {0.0}}});
  ASSERT_EQ(rep.rows.size(), 1u);
  // N_t = t^{2H} and the ratio is exactly one.
  EXPECT_NEAR(rep.rows[0].ratio, 1.0, 1e-12);
  EXPECT_TRUE(rep.rows[0].upper_ok);
}

TEST(Bounds, ParabolicAsymmetricWithinCone) {
  CharacteristicExponent skew(1, Asymmetric{1.5, 1.0, 0.8, 1.5});
  auto rep = verify_parabolic_bounds(skew, HurstParams(0.75), 1.0, axis_grid(1, {0.25, 1.0, 4.0}, {0.1, 1.0, 10.0}));
  EXPECT_TRUE(rep.all_pass);
  EXPECT_THROW(verify_parabolic_bounds(skew, HurstParams(0.75), 0.1, axis_grid(1, {1.0}, {1.0})), config_error);
}

TEST(Bounds, HyperbolicStableGrid) {
  auto rep = verify_hyperbolic_bounds(CharacteristicExponent::stable(1, 2.0), HurstParams(0.75),
                                      axis_grid(1, {0.25, 1.0, 4.0}, {0.1, 1.0, 10.0}));
  EXPECT_EQ(rep.rows.size(), 9u);
  EXPECT_TRUE(rep.all_pass) << rep.min_ratio << " " << rep.max_ratio;
  auto zero = verify_hyperbolic_bounds(CharacteristicExponent::stable(1, 2.0), HurstParams(0.75), {GridPoint{1.0, {0.0}}});
  EXPECT_TRUE(zero.rows[0].lower_ok);
  CharacteristicExponent skew(1, Asymmetric{1.5, 1.0, 0.5, 1.0});
  EXPECT_THROW(verify_hyperbolic_bounds(skew, HurstParams(0.75), axis_grid(1, {1.0}, {1.0})), config_error);
}

TEST(SolutionVariance, GoldenParabolic) {
  GaussianTestFunction phi(1, 1.0);
  auto r = solution_variance(1.0, phi, CharacteristicExponent::stable(1, 2.0), SpectralMeasure::riesz(1, 0.5),
                             HurstParams(0.75, 0), Problem::parabolic);
  EXPECT_LT(rel(r.value, 3.07826262053867), 1e-9);
  EXPECT_TRUE(r.finite());
}

TEST(SolutionVariance, GoldenHyperbolic) {
  GaussianTestFunction phi(1, 1.0);
  auto r = solution_variance(1.0, phi, CharacteristicExponent::stable(1, 2.0), SpectralMeasure::riesz(1, 0.5),
                             HurstParams(0.75, 0), Problem::hyperbolic);
  EXPECT_LT(rel(r.value, 0.993933550409610077), 1e-9);
}

TEST(SolutionVariance, AtomsAreAFiniteSum) {
  GaussianTestFunction phi(1, 0.8);
  HurstParams hp(0.75, 0);
  auto e = CharacteristicExponent::stable(1, 1.5);
  auto mu = SpectralMeasure::discrete(1, {Atom{{1.3}, 0.7}, Atom{{-1.3}, 0.7}});
  for (Problem p : {Problem::parabolic, Problem::hyperbolic}) {
    const double psi = std::pow(1.3, 1.5);
    const double expect = 2.0 * 0.7 * nt_value(p, psi, 1.0, hp) * std::exp(-0.64 * 1.69);
    EXPECT_LT(rel(solution_variance(1.0, phi, e, mu, hp, p).value, expect), 1e-13);
  }
}

TEST(SolutionVariance, ParabolicTrivialBound) {
  GaussianTestFunction phi(2, 0.6);
  auto mu = SpectralMeasure::product_fbm({0.7, 0.8});
  HurstParams hp(0.65, 0);
  SpectralIntegrand mass;
  mass.eval = [&](std::span<const double> xi) { return std::norm(phi.fourier(xi)); };
  const double total = integrate_spectral(mu, mass).value;
  for (double t : {0.5, 2.0}) {
    auto v = solution_variance(t, phi, CharacteristicExponent::stable(2, 1.2), mu, hp, Problem::parabolic);
    EXPECT_LE(v.value, std::pow(t, 2 * hp.H) * total);
    EXPECT_GT(v.value, 0.0);
  }
}

TEST(SolutionVariance, Errors) {
  GaussianTestFunction phi(2, 1.0);
  EXPECT_THROW(solution_variance(1.0, phi, CharacteristicExponent::stable(1, 2.0), SpectralMeasure::riesz(1, 0.5),
                                 HurstParams(0.75, 0), Problem::parabolic),
               dimension_error);
  CharacteristicExponent skew(1, Asymmetric{1.5, 1.0, 0.5, 1.0});
  EXPECT_THROW(solution_variance(1.0, GaussianTestFunction(1, 1.0), skew, SpectralMeasure::riesz(1, 0.5), HurstParams(0.75, 0),
                                 Problem::hyperbolic),
               config_error);
}

TEST(Existence, Examples) {
  auto a = existence_verdict(CharacteristicExponent::stable(1, 2.0), SpectralMeasure::riesz(1, 0.5), HurstParams(0.75, 0),
                             Problem::parabolic);
  EXPECT_EQ(a.verdict, ExistenceVerdict::solution_exists);
  ASSERT_TRUE(a.closed_form);
  EXPECT_DOUBLE_EQ(a.closed_form->lhs, 3.0);
  EXPECT_DOUBLE_EQ(a.closed_form->rhs, 0.5);
  auto b = existence_verdict(CharacteristicExponent::stable(3, 1.0), SpectralMeasure::riesz(3, 0.5), HurstParams(0.6, 0),
                             Problem::parabolic);
  EXPECT_EQ(b.verdict, ExistenceVerdict::no_solution);
  EXPECT_DOUBLE_EQ(b.closed_form->lhs, 1.2);
  EXPECT_DOUBLE_EQ(b.closed_form->rhs, 2.5);
  EXPECT_EQ(b.numeric_verdict, ExistenceVerdict::no_solution);
  auto c = existence_verdict(CharacteristicExponent::stable(2, 2.0), SpectralMeasure::riesz(2, 0.5), HurstParams(0.75, 0),
                             Problem::hyperbolic);
  EXPECT_EQ(c.verdict, ExistenceVerdict::solution_exists);
  EXPECT_DOUBLE_EQ(c.closed_form->lhs, 2.5);
  EXPECT_DOUBLE_EQ(c.closed_form->rhs, 1.5);
}

TEST(Existence, ProductMeasureClosedForm) {
  // d - sum(2H_i - 1) = 2 - 0.4 - 0.6 = 1.
  auto r = existence_verdict(CharacteristicExponent::stable(2, 0.8), SpectralMeasure::product_fbm({0.7, 0.8}),
                             HurstParams(0.6, 0), Problem::parabolic);
  ASSERT_TRUE(r.closed_form);
  EXPECT_NEAR(r.closed_form->rhs, 1.0, 1e-14);
  EXPECT_EQ(r.verdict, r.closed_form->lhs > 1.0 ? ExistenceVerdict::solution_exists : ExistenceVerdict::no_solution);
}

TEST(Existence, NumericAgreesWithClosedFormOutsideMargin) {
  int compared = 0;
  for (int d : {1, 2, 3})
    for (double beta : {0.5, 1.0, 2.0})
      for (double af : {0.2, 0.5, 0.8})
        for (double H : {0.6, 0.75, 0.9})
          for (Problem p : {Problem::parabolic, Problem::hyperbolic}) {
            const double alpha = af * d;
            auto r = existence_verdict(CharacteristicExponent::stable(d, beta), SpectralMeasure::riesz(d, alpha),
                                       HurstParams(H, 0), p);
            ASSERT_TRUE(r.closed_form);
            if (std::abs(r.closed_form->lhs - r.closed_form->rhs) < 0.1) continue;
            ++compared;
            EXPECT_EQ(r.numeric_verdict, r.verdict) << "d=" << d << " beta=" << beta << " alpha=" << alpha << " H=" << H
                                                    << " " << to_string(p);
          }
  EXPECT_GT(compared, 120);
}

TEST(Existence, LebesgueUsesZeroDegree) {
  auto r = existence_verdict(CharacteristicExponent::stable(1, 2.0), SpectralMeasure::lebesgue(1), HurstParams(0.75, 0),
                             Problem::parabolic);
  ASSERT_TRUE(r.closed_form);
  EXPECT_DOUBLE_EQ(r.closed_form->rhs, 1.0);
  EXPECT_EQ(r.verdict, ExistenceVerdict::solution_exists);
  EXPECT_EQ(r.numeric_verdict, ExistenceVerdict::solution_exists);
  auto slow = existence_verdict(CharacteristicExponent::stable(1, 0.5), SpectralMeasure::lebesgue(1), HurstParams(0.75, 0),
                                Problem::parabolic);
  EXPECT_EQ(slow.verdict, ExistenceVerdict::no_solution);
  EXPECT_EQ(slow.numeric_verdict, ExistenceVerdict::no_solution);
}

TEST(Existence, NoClosedFormFallsBackToNumeric) {
  auto psi = CharacteristicExponent(1, Custom{[](std::span<const double> x) { return cplx(std::log1p(x[0] * x[0]), 0.0); },
                                              false, true, std::nullopt, "log"});
  auto r = existence_verdict(psi, SpectralMeasure::riesz(1, 0.5), HurstParams(0.75, 0), Problem::parabolic);
  EXPECT_FALSE(r.closed_form);
  EXPECT_EQ(r.verdict, r.numeric_verdict);
  EXPECT_EQ(r.verdict, ExistenceVerdict::no_solution);
}

TEST(NormEquivalence, Examples) {
  GaussianTestFunction phi(1, 1.0);
  auto e = CharacteristicExponent::stable(1, 2.0);
  auto mu = SpectralMeasure::riesz(1, 0.5);
  HurstParams hp(0.75, 0);
  auto r = norm_equivalence_check(hp, e, mu, 1.0, 2.0, phi);
  EXPECT_TRUE(r.all_pass);
  EXPECT_EQ(r.rows.size(), 2u);
  auto same = norm_equivalence_check(hp, e, mu, 1.5, 1.5, phi);
  EXPECT_LE(same.c1, 1.0);
  EXPECT_GE(same.c2, 1.0);
  for (const auto& row : same.rows) EXPECT_DOUBLE_EQ(row.E_s, row.E_t);
  EXPECT_TRUE(same.all_pass);
  EXPECT_THROW(norm_equivalence_check(hp, e, mu, 0.0, 1.0, phi), config_error);
}

TEST(NormEquivalence, RandomPairs) {
  GaussianTestFunction phi(2, 0.7);
  auto e = CharacteristicExponent::stable(2, 1.3);
  auto mu = SpectralMeasure::riesz(2, 0.9);
  for (double s : {0.1, 0.8, 3.0})
    for (double t : {0.2, 1.0, 6.0}) EXPECT_TRUE(norm_equivalence_check(HurstParams(0.8, 0), e, mu, s, t, phi).all_pass);
}
