#include "mln/spectral.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mln {

double lp_norm(const Field& f, double p) {
  if (!(p >= 2.0 && p <= 6.0))
    throw std::invalid_argument("lp_norm: p must lie in [2,6], got " + std::to_string(p));
  double acc = 0.0;
  if (p == 2.0) {
    for (double x : f.v) acc += x * x;
  } else if (p == 4.0) {
    for (double x : f.v) {
      const double x2 = x * x;
      acc += x2 * x2;
    }
  } else {
    for (double x : f.v) acc += std::pow(std::fabs(x), p);
  }
  return std::pow(f.grid.cell_volume() * acc, 1.0 / p);
}

double l2_norm_sq(const Field& f) {
  double acc = 0.0;
  for (double x : f.v) acc += x * x;
  return f.grid.cell_volume() * acc;
}

double inner(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.v[i] * b.v[i];
  return a.grid.cell_volume() * acc;
}

double grad_norm_sq(const SpectralField& F) {
  return spectral_sum(F, [](double k2) { return k2; });
}

double grad_norm_sq(const Field& f) { return grad_norm_sq(to_spectral(f)); }

double hs_seminorm_sq(const SpectralField& F, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("hs_seminorm: s must lie in (0,1)");
  return spectral_sum(F, [s](double k2) { return k2 > 0.0 ? std::pow(k2, s) : 0.0; });
}

double hs_seminorm_sq(const Field& f, double s) { return hs_seminorm_sq(to_spectral(f), s); }

double h1_norm_sq(const Field& f) {
  SpectralField F = to_spectral(f);
  return spectral_sum(F, [](double k2) { return 1.0 + k2; });
}

double h1_norm_sq(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "h1 inner");
  SpectralField A = to_spectral(a), B = to_spectral(b);
  const std::vector<double>& k2 = a.grid.axis_k2();
  double acc = 0.0;
  std::size_t idx = 0;
  for (int iz = 0; iz < a.grid.n; ++iz)
    for (int iy = 0; iy < a.grid.n; ++iy) {
      const double kyz = k2[iy] + k2[iz];
      for (int ix = 0; ix < a.grid.n; ++ix, ++idx)
        acc += (1.0 + k2[ix] + kyz) * (A.c[idx] * std::conj(B.c[idx])).real();
    }
  return acc;
}

double plancherel_gap(const Field& f) {
  SpectralField F = to_spectral(f);
  double spec = 0.0;
  for (const auto& c : F.c) spec += std::norm(c);
  return std::fabs(spec - l2_norm_sq(f));
}

Field frac_laplacian(const Field& f, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("frac_laplacian: s must lie in (0,1)");
  SpectralField F = to_spectral(f);
  apply_isotropic_multiplier(F, [s](double k2) { return k2 > 0.0 ? std::pow(k2, s) : 0.0; });
  return from_spectral(F);
}

Field laplacian_neg(const Field& f) {
  SpectralField F = to_spectral(f);
  apply_isotropic_multiplier(F, [](double k2) { return k2; });
  return from_spectral(F);
}

double young_constant(double s, double eps) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("young_constant: s must lie in (0,1)");
  if (!(eps > 0.0)) throw std::invalid_argument("young_constant: eps must be positive");
  return (1.0 - s) * std::pow(s, s / (1.0 - s)) * std::pow(eps, -s / (1.0 - s));
}

YoungSplit young_bound_check(const Field& f, double s, double eps) {
  YoungSplit y;
  y.constant = young_constant(s, eps);
  SpectralField F = to_spectral(f);
  y.lhs = hs_seminorm_sq(F, s);
  y.rhs = eps * grad_norm_sq(F) + y.constant * l2_norm_sq(f);
  y.holds = y.lhs <= y.rhs * (1.0 + 1e-12) + 1e-300;
  return y;
}

Field random_band_limited(const Grid3& g, std::uint64_t seed, int band, bool include_mean) {
  if (band < 1 || band > g.n / 2) throw std::invalid_argument("random field: band out of range");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField F(g);
  // draw in a fixed mode order so the realization depends only on (seed, band)
  for (int mz = -band; mz <= band; ++mz)
    for (int my = -band; my <= band; ++my)
      for (int mx = -band; mx <= band; ++mx) {
        if (!include_mean && mx == 0 && my == 0 && mz == 0) continue;
        const int ix = (mx + g.n) % g.n, iy = (my + g.n) % g.n, iz = (mz + g.n) % g.n;
        F.c[g.index(ix, iy, iz)] = {gauss(rng), gauss(rng)};
      }
  // real part of the synthesis: equivalent to Hermitian-symmetrizing the draw
  return from_spectral(F);
}

}  // namespace mln
