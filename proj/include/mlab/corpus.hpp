#pragma once

// Deterministic test families of smooth convex potentials.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mlab/potential.hpp"

namespace mlab {

/// g = 0.5 max(x - 1/2, 0)^2: curvature bounded, g'' jumps at x = 1/2.
SymplecticPotential glued_profile(std::size_t cells = kDefaultGridN);

/// Element 0 is Fubini-Study, the last one (count >= 2) the glued profile,
/// the rest random quartic-plus-bump g with max |g''| <= 2, so L'' >= 2.
std::vector<SymplecticPotential> generate_corpus(std::uint64_t seed, std::size_t count,
                                                 std::size_t cells = kDefaultGridN);

}  // namespace mlab
