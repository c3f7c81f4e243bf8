#include "mln/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mln/errors.hpp"
#include "mln/fft.hpp"
#include "mln/spectral.hpp"

namespace mln {

void ModelParams::validate() const {
  if (!(kin > 0.0) || !std::isfinite(kin))
    throw std::invalid_argument("model: kinetic coefficient must be positive");
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw std::invalid_argument("model: omega must be positive");
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("model: fractional order s must lie in (0,1)");
  if (!(p >= 4.0 && p < 6.0))
    throw std::invalid_argument("model: exponent p must lie in [4,6), got " + std::to_string(p));
  if (!std::isfinite(alpha)) throw std::invalid_argument("model: alpha must be finite");
}

double alpha_threshold(double s, double t) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("alpha_threshold: s must lie in (0,1)");
  if (!(t > 0.0)) throw std::invalid_argument("alpha_threshold: t must be positive");
  return std::pow(s, -s) * std::pow(1.0 - s, s - 1.0) * std::pow(t, 1.0 - s);
}

EpsInterval admissible_eps_interval(const ModelParams& mp) {
  mp.validate();
  EpsInterval w;
  const double am = mp.alpha_minus();
  if (am == 0.0) return w;  // (0, inf)
  const double s = mp.s;
  w.lo = std::pow((1.0 - s) * mp.kin * am / mp.omega, (1.0 - s) / s);
  w.hi = 1.0 / (am * s);
  w.empty = !(w.lo < w.hi);
  return w;
}

CoercivityConstants coercivity_constants(const ModelParams& mp) {
  CoercivityConstants cc;
  cc.interval = admissible_eps_interval(mp);
  const double am = mp.alpha_minus();
  if (am == 0.0) {
    cc.eps0 = 1.0;
    cc.c1 = mp.kin;
    cc.c2 = mp.omega;
    return cc;
  }
  if (cc.interval.empty)
    throw Refusal(Refusal::Kind::config,
                  "alpha threshold: alpha = " + std::to_string(mp.alpha) +
                      " is not above -alpha0 = " +
                      std::to_string(-alpha_threshold(mp.s, mp.omega / mp.kin)) +
                      "; the admissible eps window is empty");
  cc.eps0 = std::sqrt(cc.interval.lo * cc.interval.hi);
  cc.c1 = mp.kin * (1.0 - am * mp.s * cc.eps0);
  cc.c2 = mp.omega - mp.kin * am * (1.0 - mp.s) * std::pow(cc.eps0, -mp.s / (1.0 - mp.s));
  return cc;
}

double bilinear_alpha(const Field& u, const Field& v, const ModelParams& mp) {
  mp.validate();
  require_same_grid(u.grid, v.grid, "bilinear form");
  SpectralField U = to_spectral(u), V = to_spectral(v);
  const Grid3& g = u.grid;
  const std::vector<double>& k2 = g.axis_k2();
  const double s = mp.s;
  double acc = 0.0;
  std::size_t idx = 0;
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy) {
      const double kyz = k2[iy] + k2[iz];
      for (int ix = 0; ix < g.n; ++ix, ++idx) {
        const double kk = k2[ix] + kyz;
        if (kk == 0.0) continue;
        const double w = kk + mp.alpha * std::pow(kk, s);
        acc += w * (U.c[idx] * std::conj(V.c[idx])).real();
      }
    }
  return acc;
}

CoercivityReport coercivity_check(const Field& u, const ModelParams& mp) {
  CoercivityConstants cc = coercivity_constants(mp);
  CoercivityReport r;
  r.c1 = cc.c1;
  r.c2 = cc.c2;
  SpectralField U = to_spectral(u);
  r.lhs = mp.kin * bilinear_alpha(u, u, mp) + mp.omega * l2_norm_sq(u);
  r.rhs = cc.c1 * grad_norm_sq(U) + cc.c2 * l2_norm_sq(u);
  r.holds = r.lhs >= r.rhs - 1e-12 * std::max(std::fabs(r.lhs), 1.0);
  return r;
}

}  // namespace mln
