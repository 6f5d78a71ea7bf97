#pragma once

#include "arx/matpoly.hpp"

#include <random>

namespace arx {

/// d = 2, p = q = 1, A = diag(2, 0), B = diag(3/4, -1/2), Gamma = Delta = I.
/// Not strongly controllable (det A = 0) but B is causal.
ArxModel benchmark_model();

/// Random model with i.i.d. Gaussian A entries (scaled by a_scale), B rescaled
/// so that the companion spectral radius equals `radius`, and random SPD
/// Gamma, Delta with eigenvalues bounded away from zero.
ArxModel random_causal_model(std::mt19937_64& rng, int d, int p, int q,
                             double radius = 0.8, double a_scale = 0.5);

}  // namespace arx
