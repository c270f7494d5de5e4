// Prints the existence verdict over (beta, alpha) for a Riesz noise in d = 3,
// next to the quadrature-only verdict.

#include <cstdio>

#include "fracspde/fracspde.hpp"

int main() {
  using namespace fracspde;
  const HurstParams hp(0.7, 0);
  const int d = 3;
  std::printf("%6s %6s  %-16s %-16s %-16s\n", "beta", "alpha", "parabolic", "hyperbolic", "numeric(par)");
  for (double beta : {0.5, 1.0, 1.5, 2.0})
    for (double alpha : {0.5, 1.5, 2.5}) {
      auto exp = CharacteristicExponent::stable(d, beta);
      auto mu = SpectralMeasure::riesz(d, alpha);
      auto par = existence_verdict(exp, mu, hp, Problem::parabolic);
      auto hyp = existence_verdict(exp, mu, hp, Problem::hyperbolic);
      std::printf("%6.2f %6.2f  %-16s %-16s %-16s\n", beta, alpha, to_string(par.verdict), to_string(hyp.verdict),
                  to_string(par.numeric_verdict));
    }
}
