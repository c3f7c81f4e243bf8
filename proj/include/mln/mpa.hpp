#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mln/energy.hpp"
#include "mln/potential_spec.hpp"

namespace mln {

/* Numerical mountain pass: verify the sphere geometry, stretch a discrete
 * path from 0 to a negative-action endpoint e, and relax the path's maximal
 * node by preconditioned (Sobolev) gradient descent until the dual residual
 * drops below tolerance.  Deflation restarts hunt for further solutions. */

struct SolverConfig {
  double tol = 1e-6;          // dual residual, relative to ||u||_H1
  int max_iter = 5000;        // descent iterations (path phase + polish)
  int path_nodes = 21;        // nodes including both endpoints
  int max_solutions = 3;      // deflation budget
  double sep = 1e-2;          // H1 distance defining "distinct" solutions
  bool radial = true;         // project every step onto cubic-group averages
  bool sign_quotient = true;  // treat u and -u as the same solution
  double defl_shift = 1.0;    // strength multiplier of the deflation bump
                              // 1 + s * chi(d^2) / d^power around each found
                              // solution; widths scale with the anchor's H1
                              // size and the cutoff chi ends the bump at half
                              // that size, so far-away critical points see
                              // the plain action exactly
  double defl_power = 2.0;    // distance exponent of the bump
  std::uint64_t seed = 20240917;
};

struct GeometryProbe {
  double rho = 0.0;          // sphere radius in H1
  double delta = 0.0;        // measured infimum of the action over the sphere
  int samples = 0;
  double certificate = 0.0;  // q rho^2 - (C_p^p/p) rho^p, empirical C_p
  double cp_emp = 0.0;       // max ||u||_p / ||u||_H1 over the samples
  double rho_bound = 0.0;    // radius where the certificate crosses zero
  bool within_bound = true;  // rho < rho_bound (certificate positive)
};

struct TraceRow {
  int iter = 0;
  double J_max = 0.0;          // driven value at the maximal node
  double dual_residual = 0.0;  // relative to the max node's H1 norm
  double h1_norm_max_node = 0.0;
  double step_len = 0.0;       // H1 length of an accepted descent step; 0 for
                               // crest-relocation, re-parametrization, polish
                               // and other bookkeeping rows
  double case1_margin = 0.0;   // pJ - J'[u] minus its quadratic lower bound
                               // (NaN when the constants are unavailable)
};

struct SolverReport {
  Field u_star;
  Field phi_star;             // companion potential of u_star, bit-for-bit
  double J_value = 0.0;
  double dual_residual = 0.0; // relative, at u_star
  std::vector<TraceRow> ps_trace;
  int deflation_count = 0;    // deflation factors active during this search
  bool symmetric = false;     // radial projector was on
  bool converged = false;
  int iterations = 0;
};

struct PSDiagnostics {
  bool energies_bounded = false;
  bool residual_converged = false;
  bool norms_bounded = false;
  bool case1_available = false;  // quadratic-bound constants existed
  bool case1_ok = false;         // per-iterate lower bound held throughout
  double min_case1_margin = 0.0;
};

/* Sample the action on the H1 sphere of radius rho (n_samples random
 * band-limited fields, normalized) and report the measured infimum next to
 * the analytic certificate built from the empirical p-norm constant.  With a
 * potential V the quadratic coefficient comes from the V-floor bound instead
 * of the coercivity pair.  rho above the certificate radius only flags
 * within_bound = false; the probe still runs. */
GeometryProbe probe_sphere_infimum(const ModelParams& mp, const Grid3& g, double rho,
                                   int n_samples, std::uint64_t seed = 20240917,
                                   const PotentialSpec* V = nullptr);

/* Relax the path 0 -> e.  Requires J(e) <= 0 (after radial projection when
 * cfg.radial).  Returns converged = false with the full trace when the
 * iteration budget runs out. */
SolverReport mountain_pass_search(const ModelParams& mp, const Field& e,
                                  const SolverConfig& cfg,
                                  const PotentialSpec* V = nullptr);

/* Warm restart: refine a near-critical state u0 (e.g. a perturbed or
 * coarse-grid solution) by running the search along u0's own scaling ray
 * (amplitude-extended until the action goes negative), whose crest sits at
 * u0.  Refuses (geometry) when the ray has no crest above zero action. */
SolverReport refine_critical_point(const ModelParams& mp, const Field& u0,
                                   const SolverConfig& cfg,
                                   const PotentialSpec* V = nullptr);

/* Re-run the search on the deflated action
 * J(u) * prod_j (1 + s_j chi_j(d_j^2) / d_j^power), d_j the H1 distance to
 * solution j (and to -u_j under sign_quotient).  A new solution must clear
 * cfg.sep from every known one and pass the undeflated residual test (the
 * compactly supported bumps make the two actions agree away from the known
 * solutions, so the test is exact, not approximate).  Successive attempts
 * restart from the given endpoint, a lattice-scale oscillatory endpoint, and
 * a noise-shaken endpoint.  Empty `found` delegates to mountain_pass_search;
 * otherwise p must lie in (4,6).  nullopt = exhausted (budget reached or
 * three consecutive failed attempts). */
std::optional<SolverReport> deflate_and_restart(const ModelParams& mp, const Field& e,
                                                const std::vector<Field>& found,
                                                const SolverConfig& cfg,
                                                const PotentialSpec* V = nullptr);

/* Boundedness / convergence / per-iterate lower-bound flags read off a trace. */
PSDiagnostics ps_diagnostics(const std::vector<TraceRow>& trace, double tol);

}  // namespace mln
