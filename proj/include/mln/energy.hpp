#pragma once

#include "mln/operators.hpp"
#include "mln/potential_spec.hpp"

namespace mln {

/* Action functional
 *   J(u) = (kin/2) B_alpha(u,u) + (omega/2)||u||_2^2
 *          + (1/4) int Phi_u u^2 - (1/p)||u||_p^p
 * (coercive-potential variant replaces the omega term by (1/2) int V u^2).
 * The coupling uses the gauged Phi_u; the constant the gauge removed would
 * contribute gauge_shift/(4 pi) * ||u||_2^2 / 2, reported as a diagnostic,
 * never folded into total. */
struct EnergyBreakdown {
  double kinetic_local = 0.0;     // (kin/2) ||grad u||^2
  double kinetic_nonlocal = 0.0;  // (kin/2) alpha |u|_s^2
  double mass_term = 0.0;         // (omega/2)||u||^2  or  (1/2) int V u^2
  double coupling = 0.0;          // (1/4) int Phi_u u^2
  double nonlinear = 0.0;         // -(1/p) ||u||_p^p
  double total = 0.0;
  double gauge_diagnostic = 0.0;
};

EnergyBreakdown eval_J(const Field& u, const ModelParams& mp);
EnergyBreakdown eval_JV(const Field& u, const ModelParams& mp, const PotentialSpec& V);

/* Strong-form residual of the Euler-Lagrange equation and its Riesz lift
 * under the spectral preconditioner A = kin(-Lap) + shift (shift = omega,
 * or max(V0, 1) in the potential variant):
 *   raw   = kin(-Lap + alpha(-Lap)^s)u + (omega or V)u + Phi_u u - |u|^{p-2}u
 *   riesz = A^{-1} raw,   dual_norm = sqrt(<raw, riesz>) .
 * dual_norm vanishes iff raw does (A is positive definite). */
struct DualResidual {
  Field raw;
  Field riesz;
  double dual_norm = 0.0;
};

DualResidual grad_J(const Field& u, const ModelParams& mp);
DualResidual grad_JV(const Field& u, const ModelParams& mp, const PotentialSpec& V);

/* J'(u)[v] = <raw, v>: exposed for weak-form tests */
double directional_derivative(const Field& u, const Field& v, const ModelParams& mp);

}  // namespace mln
