#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mln/operators.hpp"
#include "mln/potential_spec.hpp"

namespace mln {

/* One application of the self-adjoint operator
 *   L u = kin(-Lap + alpha(-Lap)^s) u + V u . */
Field apply_operator(const Field& u, const ModelParams& mp, const PotentialSpec& V);

/* Lowest part of the spectrum of L plus the coercivity bookkeeping built
 * on it.  eigvecs are L2-orthonormal (h^3 inner product); eigvals ascend.
 * k0 is the 1-based index of the first positive eigenvalue (0 when none
 * was found among the computed ones), and c0 = c_w(1 - mu/(lam_{k0}+mu))
 * makes  B_{alpha,V}(u,u) >= c0 ||u||_W^2  on the complement of the first
 * k0-1 eigenvectors. */
struct Spectrum {
  std::vector<double> eigvals;
  std::vector<Field> eigvecs;
  std::vector<double> residuals;  // ||L e - lam e||_2 per pair
  double mu = 0.0;
  double c_w = 0.5;
  int k0 = 0;
  double c0 = 0.0;
  int iterations = 0;
  bool converged = false;  // all requested pairs under the residual target
};

struct EigenOptions {
  int k = 12;                  // eigenpairs wanted
  int max_iter = 500;
  double tol_rel = 1e-8;       // residual target: tol_rel*|lam| + tol_abs
  double tol_abs = 1e-10;
  std::uint64_t seed = 20240917;
};

/* Matrix-free block iteration (locally optimal preconditioned CG) with the
 * spectral preconditioner (kin k^2 + max(V0,1))^{-1}.  Non-convergence
 * within max_iter returns the partial spectrum with converged = false. */
Spectrum eigen_decompose(const ModelParams& mp, const PotentialSpec& V, const Grid3& g,
                         const EigenOptions& opt = {});

/* (k0, c0) from an already-computed spectrum (eigvals, mu, c_w must be
 * filled).  Throws a config refusal when no computed eigenvalue is
 * positive: a larger K is needed. */
std::pair<int, double> k0_and_c0(const Spectrum& spec);

}  // namespace mln
