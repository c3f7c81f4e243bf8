#pragma once

#include <cstdint>

#include "mln/fft.hpp"

namespace mln {

/* Quadrature/Lebesgue norms on the grid.  p is restricted to [2,6]
 * (the Sobolev-subcritical window everything downstream relies on). */
double lp_norm(const Field& f, double p);
double l2_norm_sq(const Field& f);
double inner(const Field& a, const Field& b);  // h^3 sum a b

/* Spectral quadratic forms. */
double grad_norm_sq(const Field& f);                 // ||grad f||_2^2
double grad_norm_sq(const SpectralField& F);
double hs_seminorm_sq(const Field& f, double s);     // |||k|^s f||_2^2, s in (0,1)
double hs_seminorm_sq(const SpectralField& F, double s);
double h1_norm_sq(const Field& f);                   // ||f||_2^2 + ||grad f||_2^2
double h1_norm_sq(const Field& a, const Field& b);   // H1 inner product
double plancherel_gap(const Field& f);               // |sum|c|^2 - h^3 sum f^2|

/* (-Delta)^s f via the |k|^{2s} multiplier (zero mode annihilated). */
Field frac_laplacian(const Field& f, double s);
/* (-Delta) f */
Field laplacian_neg(const Field& f);

/* Interpolation bound  |f|_s^2 <= eps |f|_1^2 + C(eps,s) |f|_0^2  with the
 * sharp Young constant C = (1-s) s^{s/(1-s)} eps^{-s/(1-s)}.  Returns both
 * sides; holds with equality iff f is a single shell. */
struct YoungSplit {
  double lhs = 0.0;   // |f|_s^2
  double rhs = 0.0;   // eps |f|_1^2 + C ||f||_2^2
  double constant = 0.0;  // C(eps,s)
  bool holds = false;
};
YoungSplit young_bound_check(const Field& f, double s, double eps);
double young_constant(double s, double eps);

/* Band-limited random field: modes with max|mt| <= band get iid complex
 * gaussian weight, the rest vanish; realized as the real part, so the result
 * is smooth, real, mean zero unless include_mean.  Deterministic in seed. */
Field random_band_limited(const Grid3& g, std::uint64_t seed, int band, bool include_mean = false);

}  // namespace mln
