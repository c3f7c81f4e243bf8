#pragma once

#include "mln/field.hpp"

namespace mln {

/* Full symmetry group of the cube acting on the grid: 6 axis permutations
 * x 8 sign flips = 48 elements.  Negation of axis index i is (n - i) mod n,
 * exact on the periodic grid, so group-averaging is an exact projector. */
inline constexpr int kCubicGroupOrder = 48;

/* Apply element g (0..47) */
Field cubic_transform(const Field& f, int g);

/* Average over the whole group: idempotent radial(-ish) projector. */
Field symmetrize_radial(const Field& f);

/* max |f - g.f| over the group, for symmetry diagnostics */
double cubic_asymmetry(const Field& f);

}  // namespace mln
