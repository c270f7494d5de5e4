#pragma once

#include "fracspde/errors.hpp"
#include "fracspde/quadrature.hpp"
#include "fracspde/special.hpp"
#include "fracspde/levy.hpp"
#include "fracspde/spectral.hpp"
#include "fracspde/temporal.hpp"
#include "fracspde/existence.hpp"
#include "fracspde/rng.hpp"
#include "fracspde/parallel.hpp"
#include "fracspde/potential.hpp"
#include "fracspde/montecarlo.hpp"
#include "fracspde/version.hpp"
