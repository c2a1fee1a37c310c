#pragma once

#include "invset/linalg.hpp"

#include <cstddef>
#include <vector>

namespace invset {

/// Deterministic quasi-uniform points on the unit sphere S^{d-1} in R^d.
///
/// d = 1 gives {+1, -1}; d = 2 equally spaced angles starting at angle 0;
/// d = 3 a spherical Fibonacci lattice; d >= 4 Halton points pushed through
/// Box-Muller and normalized. The same (d, count) always yields the same
/// points, bit for bit.
[[nodiscard]] std::vector<Vector> sphere_points(int d, std::size_t count);

/// Quasi-uniform directions on the half sphere {sigma : last nonzero coordinate > 0}.
/// Used for even functions of sigma such as quadratic symbols.
[[nodiscard]] std::vector<Vector> half_sphere_points(int d, std::size_t count);

/// i-th element of the van der Corput sequence in the given prime base.
[[nodiscard]] double radical_inverse(std::size_t i, unsigned base);

}  // namespace invset
