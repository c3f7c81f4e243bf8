#pragma once

#include "mln/field.hpp"

namespace mln {

/* Forward transform with the volume-preserving normalization
 *   c_m = (L^{3/2} / n^3) * sum_j f_j e^{-i k_m . x_j'}
 * (phases use the 0-based sample index; only |c| and multiplier calculus
 * matter downstream).  Inverse is f_j = L^{-3/2} sum_m c_m e^{+i k_m . x_j'}.
 * Round trip is exact to machine precision and Plancherel
 *   sum_m |c_m|^2 = h^3 sum_j f_j^2
 * holds with no trapezoid error on the torus.  Rejects non-finite input. */
SpectralField to_spectral(const Field& f);
Field from_spectral(const SpectralField& F);

/* Applies m(k): c(k) -> mult(|k|^2) * c(k).  mult must be real. */
template <class M>
void apply_isotropic_multiplier(SpectralField& F, M&& mult) {
  const Grid3& g = F.grid;
  const std::vector<double>& k2 = g.axis_k2();
  std::size_t idx = 0;
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy) {
      const double kyz = k2[iy] + k2[iz];
      for (int ix = 0; ix < g.n; ++ix, ++idx) F.c[idx] *= mult(k2[ix] + kyz);
    }
}

/* sum over modes of weight(|k|^2) * |c(k)|^2 (serial, deterministic) */
template <class W>
double spectral_sum(const SpectralField& F, W&& weight) {
  const Grid3& g = F.grid;
  const std::vector<double>& k2 = g.axis_k2();
  double acc = 0.0;
  std::size_t idx = 0;
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy) {
      const double kyz = k2[iy] + k2[iz];
      for (int ix = 0; ix < g.n; ++ix, ++idx) acc += weight(k2[ix] + kyz) * std::norm(F.c[idx]);
    }
  return acc;
}

}  // namespace mln
