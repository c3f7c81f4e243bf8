#pragma once

#include <cstdint>

#include "mln/operators.hpp"
#include "mln/potential_spec.hpp"

namespace mln {

/* Weighted-space squared norm  ||u||_W^2 = ||u||_2^2 + ||grad u||_2^2
 * + int (V - V0) u^2.  Collapses to the H1 norm for constant V. */
double w_norm_sq(const Field& u, const PotentialSpec& V);

/* B_{alpha,V}(u,v) = kin * B_alpha(u,v) + int V u v */
double bilinear_alpha_V(const Field& u, const Field& v, const ModelParams& mp,
                        const PotentialSpec& V);

/* Constructive shift making the form coercive over W:
 *   B_{alpha,V}(u,u) + mu ||u||_2^2 >= c_w ||u||_W^2 .
 * The fractional term is split off with the product-form bound
 *   |u|_s^2 <= s*eps |grad u|^2 + (1-s) eps^{-s/(1-s)} ||u||^2 ;
 * eps_star = 1/(2 alpha^- s) halves the gradient coefficient (so
 * g = kin/2 when alpha^- > 0, g = kin otherwise), then
 *   c_w = min(g, 1/2),
 *   mu  = max(0, c_w - V0 + kin alpha^- (1-s) eps_star^{-s/(1-s)}) .
 * c_w = 1/2 whenever kin allows it; smaller kin lowers c_w (flagged by
 * callers that care). */
struct MuConstants {
  double mu = 0.0;
  double c_w = 0.5;
  double eps_star = 0.0;  // 0 when no fractional splitting is needed
};
MuConstants mu_constants(const ModelParams& mp, double v0);

/* The OP form: constants plus a randomized verification sweep. */
struct MuBound {
  double mu = 0.0;
  double c_w = 0.5;
  bool verified = false;
  double worst_margin = 0.0;  // min over draws of (lhs - rhs) / ||u||_W^2
};
MuBound mu_and_lower_bound(const ModelParams& mp, const PotentialSpec& V, const Grid3& g,
                           std::uint64_t seed = 2024, int draws = 1000);

/* One-field check of the shifted lower bound (mu, c_w as constructed). */
struct QuadraticBoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
QuadraticBoundReport below2_check(const Field& u, const ModelParams& mp, const PotentialSpec& V,
                                  double mu, double c_w);

/* Positive-floor coercivity without any shift: for V0 > 0 and alpha above
 * the threshold at t = V0/kin,
 *   B_{alpha,V}(u,u) >= 1/2 min{c1, c2/V0} min{1, V0} ||u||_W^2
 * with (c1, c2) the coercivity constants of the omega = V0 problem
 * (c2/V0 is the dimensionless form of c2).  Throws the threshold refusal
 * when alpha is inadmissible at t = V0/kin, and a config refusal when
 * V0 <= 0. */
struct Below3Constants {
  double c1 = 0.0;
  double c2_hat = 0.0;  // c2 / V0, in (0, 1]
  double factor = 0.0;  // 1/2 min{c1, c2_hat} min{1, V0}
};
Below3Constants below3_constants(const ModelParams& mp, double v0);
QuadraticBoundReport below3_check(const Field& u, const ModelParams& mp, const PotentialSpec& V);

}  // namespace mln
