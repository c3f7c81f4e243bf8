#pragma once

#include <limits>

#include "mln/field.hpp"

namespace mln {

/* Model data for
 *   kin*(-Lap + alpha (-Lap)^s) u + omega u + Phi_u u = |u|^{p-2} u
 * kin is the kinetic coefficient (hbar^2/2m in physical terms). */
struct ModelParams {
  double kin = 1.0;
  double omega = 1.0;
  double alpha = 0.0;
  double s = 0.5;
  double p = 4.0;

  void validate() const;  // throws std::invalid_argument
  double alpha_minus() const { return alpha < 0.0 ? -alpha : 0.0; }
};

/* Threshold alpha0(s,t) = s^{-s} (1-s)^{s-1} t^{1-s}; the operator family
 * stays coercive for alpha > -alpha0(s, omega/kin). */
double alpha_threshold(double s, double t);

/* eps window on which alpha^- can be absorbed:
 *   lo = ((1-s) kin alpha^- / omega)^{(1-s)/s},  hi = 1/(alpha^- s).
 * Empty is a value, not an error.  alpha >= 0 gives (0, +inf). */
struct EpsInterval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool empty = false;
};
EpsInterval admissible_eps_interval(const ModelParams& mp);

/* eps0 = geometric mean of the window (1 when alpha^- = 0), and the
 * quadratic-form lower-bound coefficients
 *   c1 = kin (1 - alpha^- s eps0),
 *   c2 = omega - kin alpha^- (1-s) eps0^{-s/(1-s)}. */
struct CoercivityConstants {
  EpsInterval interval;
  double eps0 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
};
CoercivityConstants coercivity_constants(const ModelParams& mp);

/* B_alpha(u,v) = int <grad u, grad v> + alpha int (-Lap)^{s/2}u (-Lap)^{s/2}v,
 * evaluated spectrally. */
double bilinear_alpha(const Field& u, const Field& v, const ModelParams& mp);

/* kin B_alpha(u,u) + omega ||u||^2 >= c1 ||grad u||^2 + c2 ||u||^2 */
struct CoercivityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  bool holds = false;
};
CoercivityReport coercivity_check(const Field& u, const ModelParams& mp);

}  // namespace mln
