// Fractional resolvent of a Riesz kernel under Brownian motion, on a line
// through the origin. The profile peaks at x = 0, where it equals Upsilon.

#include <cstdio>

#include "fracspde/fracspde.hpp"

int main() {
  using namespace fracspde;
  const HurstParams hp(0.75, 0);
  auto psi = CharacteristicExponent::stable(1, 2.0);
  auto mu = SpectralMeasure::riesz(1, 0.5);
  ResolventQuery q{1.0, {0.0}, hp, Kernel::riesz(1, 0.5), symmetrized_exponent(psi), mu};
  std::printf("upsilon(1) = %.10f\n", upsilon(1.0, hp, psi, mu).value);
  for (double x = -3.0; x <= 3.0 + 1e-12; x += 0.5) {
    q.x = {x};
    std::printf("x = %5.2f  R f(x) = %.10f\n", x, fractional_resolvent(q, ResolventMethod::quadrature).value);
  }
}
