#include "mln/energy.hpp"

#include <cmath>
#include <optional>

#include "mln/fft.hpp"
#include "mln/poisson.hpp"
#include "mln/spectral.hpp"
#include "mln/threads.hpp"

namespace mln {
namespace {

/* |u|^{p-2} u, continuous through 0 for p > 2 */
Field nonlinearity(const Field& u, double p) {
  Field f(u.grid);
  if (p == 4.0) {
    parallel_for(u.size(), [&](std::size_t i) {
      const double x = u.v[i];
      f.v[i] = x * x * x;
    });
  } else {
    const double e = 0.5 * (p - 2.0);
    parallel_for(u.size(), [&](std::size_t i) {
      const double x = u.v[i];
      f.v[i] = x * std::pow(x * x, e);
    });
  }
  return f;
}

EnergyBreakdown eval_impl(const Field& u, const ModelParams& mp, const Field* V) {
  mp.validate();
  require_finite(u, "energy");
  EnergyBreakdown e;
  SpectralField U = to_spectral(u);
  e.kinetic_local = 0.5 * mp.kin * grad_norm_sq(U);
  e.kinetic_nonlocal = 0.5 * mp.kin * mp.alpha * hs_seminorm_sq(U, mp.s);
  const double l2 = l2_norm_sq(u);
  if (V) {
    Field u2 = hadamard(u, u);
    e.mass_term = 0.5 * inner(*V, u2);
  } else {
    e.mass_term = 0.5 * mp.omega * l2;
  }
  PhiSolution phi = solve_phi(u);
  e.coupling = 0.25 * inner(phi.phi, hadamard(u, u));
  e.nonlinear = -std::pow(lp_norm(u, mp.p), mp.p) / mp.p;
  e.total = e.kinetic_local + e.kinetic_nonlocal + e.mass_term + e.coupling + e.nonlinear;
  e.gauge_diagnostic = 0.5 * phi.gauge_shift * l2 / (2.0 * M_PI);
  return e;
}

DualResidual grad_impl(const Field& u, const ModelParams& mp, const Field* V, double shift) {
  mp.validate();
  require_finite(u, "gradient");
  const Grid3& g = u.grid;
  PhiSolution phi = solve_phi(u);
  Field nl = nonlinearity(u, mp.p);

  // pointwise part: (omega or V) u + Phi u - |u|^{p-2} u
  Field pw(g);
  if (V) {
    parallel_for(u.size(),
                 [&](std::size_t i) { pw.v[i] = (V->v[i] + phi.phi.v[i]) * u.v[i] - nl.v[i]; });
  } else {
    parallel_for(u.size(), [&](std::size_t i) {
      pw.v[i] = (mp.omega + phi.phi.v[i]) * u.v[i] - nl.v[i];
    });
  }

  SpectralField R = to_spectral(pw);
  SpectralField U = to_spectral(u);
  const std::vector<double>& k2 = g.axis_k2();
  const double s = mp.s;
  double dual2 = 0.0;
  std::size_t idx = 0;
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy) {
      const double kyz = k2[iy] + k2[iz];
      for (int ix = 0; ix < g.n; ++ix, ++idx) {
        const double kk = k2[ix] + kyz;
        const double sym = kk > 0.0 ? mp.kin * (kk + mp.alpha * std::pow(kk, s)) : 0.0;
        R.c[idx] += sym * U.c[idx];
        dual2 += std::norm(R.c[idx]) / (mp.kin * kk + shift);
      }
    }
  DualResidual d;
  d.raw = from_spectral(R);
  apply_isotropic_multiplier(R, [&](double kk) { return 1.0 / (mp.kin * kk + shift); });
  d.riesz = from_spectral(R);
  d.dual_norm = std::sqrt(std::max(0.0, dual2));
  return d;
}

}  // namespace

EnergyBreakdown eval_J(const Field& u, const ModelParams& mp) { return eval_impl(u, mp, nullptr); }

EnergyBreakdown eval_JV(const Field& u, const ModelParams& mp, const PotentialSpec& V) {
  Field v = V.evaluate(u.grid);
  return eval_impl(u, mp, &v);
}

DualResidual grad_J(const Field& u, const ModelParams& mp) {
  return grad_impl(u, mp, nullptr, mp.omega);
}

DualResidual grad_JV(const Field& u, const ModelParams& mp, const PotentialSpec& V) {
  Field v = V.evaluate(u.grid);
  return grad_impl(u, mp, &v, std::max(V.v0, 1.0));
}

double directional_derivative(const Field& u, const Field& v, const ModelParams& mp) {
  return inner(grad_J(u, mp).raw, v);
}

}  // namespace mln
