#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fracspde/spectral.hpp"

using namespace fracspde;

namespace {

SpectralIntegrand radial_fn(std::function<double(double)> g, std::optional<double> tail = std::nullopt) {
  SpectralIntegrand f;
  f.eval = [g](std::span<const double> x) { return g(norm2(x)); };
  f.radial = g;
  f.tail_exponent = tail;
  return f;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(IntegrateSpectral, DiscreteIsFiniteSum) {
  auto mu = SpectralMeasure::discrete(2, {Atom{{0.5, -1.0}, 1.0}, Atom{{-0.5, 1.0}, 1.0}});
  auto r = integrate_spectral(mu, radial_fn([](double) { return 3.0; }));
  EXPECT_DOUBLE_EQ(r.value, 6.0);
  EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(IntegrateSpectral, LebesgueCauchyDensityIsPi) {
  auto r = integrate_spectral(SpectralMeasure::lebesgue(1, 1.0), radial_fn([](double x) { return 1.0 / (1.0 + x * x); }));
  EXPECT_LT(rel(r.value, std::numbers::pi), 1e-4);
  EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(IntegrateSpectral, RieszSlowTailDiverges) {
  auto mu = SpectralMeasure::riesz(1, 0.5);
  auto f = radial_fn([](double x) { return std::pow(1.0 + x, -0.4); });
  auto untagged = integrate_spectral(mu, f);
  EXPECT_EQ(untagged.verdict, Verdict::diverged);
  f.tail_exponent = -0.4;
  auto tagged = integrate_spectral(mu, f);
  EXPECT_EQ(tagged.verdict, Verdict::diverged);
  EXPECT_FALSE(tagged.finite());
}

TEST(IntegrateSpectral, NegativeOrNanIntegrandRejected) {
  auto mu = SpectralMeasure::riesz(1, 0.5);
  EXPECT_THROW(integrate_spectral(mu, radial_fn([](double) { return -1.0; })), config_error);
  EXPECT_THROW(integrate_spectral(mu, radial_fn([](double) { return std::nan(""); })), numeric_error);
}

TEST(IntegrateSpectral, PowerLawVerdictsMatchTailExponent) {
  // int (1 + |xi|^2)^{-q/2} |xi|^{-alpha} d xi converges iff q + alpha > d.
  for (int d : {1, 2, 3})
    for (double alpha : {0.3 * d, 0.7 * d})
      for (double q : {0.2, 0.8, 1.6, 2.4, 3.5}) {
        const double tail = -q - alpha + d;  // exponent of the radial density at infinity, plus one
        if (std::abs(tail) < 0.15) continue;
        auto mu = SpectralMeasure::riesz(d, alpha);
        auto f = radial_fn([q](double r) { return std::pow(1.0 + r * r, -0.5 * q); }, -q);
        auto res = integrate_spectral(mu, f);
        const Verdict expect = tail < 0.0 ? Verdict::converged : Verdict::diverged;
        EXPECT_EQ(res.verdict, expect) << "d=" << d << " alpha=" << alpha << " q=" << q;
        EXPECT_EQ(res.numeric_verdict, expect) << "d=" << d << " alpha=" << alpha << " q=" << q;
      }
}

TEST(IntegrateSpectral, ConvergentRieszValueMatchesBetaFunction) {
  // int_R |x|^{-a} (1 + x^2)^{-1} dx = pi / cos(pi a / 2).
  for (double a : {0.2, 0.5, 0.9}) {
    auto r = integrate_spectral(SpectralMeasure::riesz(1, a), radial_fn([](double x) { return 1.0 / (1.0 + x * x); }));
    EXPECT_LT(rel(r.value, std::numbers::pi / std::cos(0.5 * std::numbers::pi * a)), 1e-8) << a;
  }
}

TEST(IntegrateSpectral, PartialSumsNondecreasing) {
  auto mu = SpectralMeasure::riesz(2, 0.5);
  auto r = integrate_spectral(mu, radial_fn([](double x) { return std::exp(-0.1 * x); }));
  ASSERT_GE(r.partial_sums.size(), 3u);
  for (std::size_t i = 1; i < r.partial_sums.size(); ++i) EXPECT_GE(r.partial_sums[i], r.partial_sums[i - 1]);
}

TEST(IntegrateSpectral, AnisotropicAngularRuleMatchesSphereMass) {
  // For a radial integrand the angular rule must reproduce the closed-form sphere mass.
  auto mu = SpectralMeasure::product_fbm({0.6, 0.8});
  SpectralIntegrand f;
  f.eval = [](std::span<const double> x) { return std::exp(-norm2(x) * norm2(x)); };
  auto pointwise = integrate_spectral(mu, f);
  f.radial = [](double r) { return std::exp(-r * r); };
  auto radial = integrate_spectral(mu, f);
  EXPECT_LT(rel(pointwise.value, radial.value), 1e-10);
}

TEST(SpectralMeasure, Validation) {
  EXPECT_THROW(SpectralMeasure::riesz(1, 1.0), config_error);
  EXPECT_THROW(SpectralMeasure::riesz(2, 0.0), config_error);
  EXPECT_THROW(SpectralMeasure::product_fbm({0.4}), config_error);
  EXPECT_THROW(SpectralMeasure::lebesgue(1, 0.0), config_error);
  EXPECT_THROW(SpectralMeasure::discrete(1, {Atom{{1.0}, 0.0}}), config_error);
  EXPECT_THROW(SpectralMeasure::discrete(1, {Atom{{1.0, 2.0}, 1.0}}), dimension_error);
}

TEST(Pairing, RieszHalfInOneDimension) {
  GaussianTestFunction g(1, 1.0);
  auto r = pairing_check(Kernel::riesz(1, 0.5), SpectralMeasure::riesz(1, 0.5), g, g);
  // rhs = int e^{-xi^2} |xi|^{-1/2} = Gamma(1/4).
  EXPECT_LT(rel(r.rhs, std::tgamma(0.25)), 1e-8);
  EXPECT_LT(r.rel_diff, 1e-3);
}

TEST(Pairing, WhiteNoiseIsPlancherel) {
  GaussianTestFunction g(2, 0.7);
  auto k = Kernel::white(2, 1.0);
  auto r = pairing_check(k, k.partner_measure(), g, g);
  // (2 pi)^{-d} ||F phi||^2 = int phi^2 = (4 pi sigma^2)^{-d/2}.
  EXPECT_LT(rel(r.rhs, 1.0 / (4.0 * std::numbers::pi * 0.49)), 1e-8);
  EXPECT_LT(r.rel_diff, 1e-8);
}

TEST(Pairing, ProductFbmOneDimension) {
  GaussianTestFunction g(1, 1.0);
  auto r = pairing_check(Kernel::product_fbm({0.7}), SpectralMeasure::product_fbm({0.7}), g, g);
  EXPECT_LT(r.rel_diff, 1e-3);
}

TEST(Pairing, PartnerPairsOverThreeWidths) {
  for (double s : {0.5, 1.0, 2.0}) {
    for (int d : {1, 2, 3}) {
      GaussianTestFunction phi(d, s), psi(d, 0.8 * s, std::vector<double>(d, 0.3));
      auto r = pairing_check(Kernel::riesz(d, 0.4 * d), SpectralMeasure::riesz(d, 0.4 * d), phi, psi);
      EXPECT_LT(r.rel_diff, 1e-3) << "riesz d=" << d << " s=" << s;
    }
    GaussianTestFunction p2(2, s);
    auto r = pairing_check(Kernel::product_fbm({0.6, 0.85}), SpectralMeasure::product_fbm({0.6, 0.85}), p2, p2);
    EXPECT_LT(r.rel_diff, 1e-3) << "product s=" << s;
    GaussianTestFunction p1(1, s);
    auto c = pairing_check(Kernel::constant(1, 2.5), Kernel::constant(1, 2.5).partner_measure(), p1, p1);
    EXPECT_LT(c.rel_diff, 1e-12);
  }
}

TEST(Pairing, UnregisteredPairRejected) {
  GaussianTestFunction g(1, 1.0);
  EXPECT_THROW(pairing_check(Kernel::riesz(1, 0.5), SpectralMeasure::riesz(1, 0.3), g, g), config_error);
  EXPECT_THROW(pairing_check(Kernel::riesz(1, 0.5, 1.0), SpectralMeasure::riesz(1, 0.5), g, g), config_error);
}

TEST(PlancherelTriple, StandardGaussians) {
  GaussianTestFunction g(1, 1.0);
  auto r = plancherel_triple(g, g, g);
  // The convolution of three unit Gaussians at 0: (2 pi * 3)^{-1/2}.
  EXPECT_LT(rel(r.lhs, 1.0 / std::sqrt(6.0 * std::numbers::pi)), 1e-10);
  EXPECT_LT(r.rel_diff, 1e-6);
}

TEST(PlancherelTriple, NarrowSecondFunctionActsLikeDelta) {
  auto phi = gaussian_line(1.0), psi1 = gaussian_line(0.7, 0.2), psi2 = gaussian_line(1e-3);
  auto r = plancherel_triple(phi, psi1, psi2);
  auto direct = quad::integrate([&](double x) { return psi1.value(x) * phi.value(x); }, -12.0, 12.0, 200);
  EXPECT_LT(rel(r.lhs, direct), 1e-5);
  EXPECT_LT(r.rel_diff, 1e-6);
}

TEST(PlancherelTriple, ZeroFunctionGivesZeros) {
  GaussianTestFunction zero(1, 1.0, {}, 0.0), g(1, 1.0);
  auto r = plancherel_triple(zero, g, g);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
}

TEST(PlancherelTriple, ShiftedGaussiansInThreeDimensions) {
  GaussianTestFunction phi(3, 0.9, {0.1, 0.0, -0.2}), p1(3, 0.5, {0.3, 0.3, 0.3}), p2(3, 1.3);
  auto r = plancherel_triple(phi, p1, p2);
  EXPECT_LT(r.rel_diff, 1e-6);
}
