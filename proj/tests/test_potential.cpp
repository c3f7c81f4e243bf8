#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mln/eigensolve.hpp"
#include "mln/errors.hpp"
#include "mln/potential_norms.hpp"
#include "mln/scaling.hpp"
#include "mln/spectral.hpp"
#include "oracles.hpp"

using namespace mln;

TEST_CASE("weighted norm reduces and matches quadrature") {
  Grid3 g = Grid3::create(32, 16.0);
  Field u = random_band_limited(g, 77, 8, true);

  // constant V: the weighted term vanishes identically
  PotentialSpec vc = PotentialSpec::constant(3.0);
  CHECK(w_norm_sq(u, vc) == doctest::Approx(h1_norm_sq(u)).epsilon(1e-13));

  Field zero(g);
  CHECK(w_norm_sq(zero, vc) == 0.0);

  // harmonic V, gaussian u: weighted term against radial quadrature
  PotentialSpec vh = PotentialSpec::harmonic(1.0, 0.7);
  Field gu = sample(RadialGenerator::gaussian(1.3, 0.5), g);
  const double weighted = w_norm_sq(gu, vh) - l2_norm_sq(gu) - grad_norm_sq(gu);
  const double expect =
      oracle::radial_integral([](double r) { return 0.7 * r * r * 1.69 * std::exp(-r * r); }, 8.0);
  CHECK(weighted == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("potential bilinear form") {
  Grid3 g = Grid3::create(32, 16.0);
  ModelParams mp;
  mp.kin = 1.7;
  mp.alpha = -0.5;
  mp.s = 0.5;
  mp.omega = 2.2;

  // constant V = omega: collapses onto the unweighted pieces
  PotentialSpec vc = PotentialSpec::constant(2.2);
  Field u = random_band_limited(g, 11, 8, true);
  Field v = random_band_limited(g, 12, 8, false);
  CHECK(bilinear_alpha_V(u, v, mp, vc) ==
        doctest::Approx(mp.kin * bilinear_alpha(u, v, mp) + 2.2 * inner(u, v)).epsilon(1e-12));

  // symmetry
  PotentialSpec vh = PotentialSpec::harmonic(0.3, 0.2);
  for (int i = 0; i < 5; ++i) {
    Field a = random_band_limited(g, 100 + i, 9, i % 2);
    Field b = random_band_limited(g, 200 + i, 9, !(i % 2));
    CHECK(bilinear_alpha_V(a, b, mp, vh) ==
          doctest::Approx(bilinear_alpha_V(b, a, mp, vh)).epsilon(1e-12));
  }

  // single mode u = cos(kappa x) against a hand evaluation: the gradient and
  // fractional pieces are exact mode arithmetic; the harmonic-weight piece
  // is an explicit 1D lattice sum done right here with plain loops
  const double kap = g.wavenumber(2);  // mhat = 2
  Field cu(g);
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        cu.v[g.index(ix, iy, iz)] = std::cos(kap * g.coord(ix));
  const double L = g.box_len, h = g.spacing;
  double sum_c = 0.0, sum_x2 = 0.0, sum_x2c = 0.0;  // 1D axis sums
  for (int i = 0; i < g.n; ++i) {
    const double x = g.coord(i), c2 = std::cos(kap * x) * std::cos(kap * x);
    sum_c += h * c2;
    sum_x2 += h * x * x;
    sum_x2c += h * x * x * c2;
  }
  // int (v0 + a|x|^2) cos^2: split into axis factors
  const double vterm = 0.3 * (sum_c * L * L) +
                       0.2 * (sum_x2c * L * L + 2.0 * sum_x2 * sum_c * L);
  const double hand =
      mp.kin * (kap * kap - 0.5 * kap) * (L * L * L / 2.0) + vterm;
  CHECK(bilinear_alpha_V(cu, cu, mp, vh) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("shift constants and the shifted lower bound") {
  // alpha = 0, kin = 1, V0 = 1: no shift needed, c_w = 1/2
  ModelParams mp;
  mp.kin = 1.0;
  mp.alpha = 0.0;
  MuConstants mc = mu_constants(mp, 1.0);
  CHECK(mc.mu == 0.0);
  CHECK(mc.c_w == 0.5);

  // alpha = -1, s = 1/2, kin = 1: eps_star = 1, gradient coefficient kin/2,
  // l2 loss = 1/2  ->  mu = max(0, 1/2 - v0 + 1/2)
  mp.alpha = -1.0;
  mp.s = 0.5;
  MuConstants mf = mu_constants(mp, 0.25);
  CHECK(mf.eps_star == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mf.c_w == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mf.mu == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(mu_constants(mp, 1.0).mu == doctest::Approx(0.0).epsilon(1e-14));

  // small kin caps c_w below 1/2
  ModelParams small = mp;
  small.alpha = 0.0;
  small.kin = 0.1;
  CHECK(mu_constants(small, 1.0).c_w == doctest::Approx(0.1).epsilon(1e-14));

  // randomized verification sweeps
  Grid3 g = Grid3::create(32, 16.0);
  ModelParams m1;
  m1.kin = 2.0;
  m1.alpha = 0.0;
  PotentialSpec v1 = PotentialSpec::constant(0.2);
  MuBound b1 = mu_and_lower_bound(m1, v1, g, 5, 200);
  CHECK(b1.mu == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(b1.verified);
  CHECK(b1.worst_margin >= -1e-12);

  ModelParams m2;
  m2.kin = 1.0;
  m2.alpha = -1.5;
  m2.s = 0.6;
  PotentialSpec v2 = PotentialSpec::harmonic(-2.0, 0.4);
  MuBound b2 = mu_and_lower_bound(m2, v2, g, 6, 200);
  CHECK(b2.verified);
  CHECK(b2.worst_margin >= -1e-12);

  // when mu is active the bound is tight on constants: equality to roundoff
  Field cf(g);
  for (double& x : cf.v) x = 2.5;
  QuadraticBoundReport eq = below2_check(cf, m1, v1, b1.mu, b1.c_w);
  CHECK(eq.holds);
  CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-13));

  // zero field: trivially 0 >= 0
  Field zero(g);
  QuadraticBoundReport zr = below2_check(zero, m1, v1, b1.mu, b1.c_w);
  CHECK(zr.holds);
  CHECK(zr.lhs == 0.0);
}

TEST_CASE("constant potential spectrum is the symbol list") {
  Grid3 g = Grid3::create(32, 16.0);
  ModelParams mp;
  mp.kin = 1.0;
  mp.alpha = -0.5;
  mp.s = 0.5;
  PotentialSpec vc = PotentialSpec::constant(2.0);
  EigenOptions opt;
  opt.k = 8;
  Spectrum sp = eigen_decompose(mp, vc, g, opt);
  REQUIRE(sp.converged);

  // enumerate the symbols kin(k^2 + alpha |k|) + v0 and sort
  std::vector<double> symbols;
  symbols.reserve(g.size());
  for (int mz = 0; mz < g.n; ++mz)
    for (int my = 0; my < g.n; ++my)
      for (int mx = 0; mx < g.n; ++mx) {
        const double k2 = g.wavenumber(mx) * g.wavenumber(mx) +
                          g.wavenumber(my) * g.wavenumber(my) +
                          g.wavenumber(mz) * g.wavenumber(mz);
        symbols.push_back(k2 > 0.0 ? mp.kin * (k2 - 0.5 * std::sqrt(k2)) + 2.0 : 2.0);
      }
  std::sort(symbols.begin(), symbols.end());
  for (int i = 0; i < opt.k; ++i)
    CHECK(sp.eigvals[i] == doctest::Approx(symbols[i]).epsilon(1e-8));

  // orthonormality and residual invariants
  for (int i = 0; i < opt.k; ++i) {
    for (int j = 0; j <= i; ++j)
      CHECK(std::abs(inner(sp.eigvecs[i], sp.eigvecs[j]) - (i == j ? 1.0 : 0.0)) <= 1e-10);
    CHECK(sp.residuals[i] <= 1e-8 * std::abs(sp.eigvals[i]) + 1e-10);
    // Rayleigh-quotient consistency through the module's own bilinear form
    CHECK(bilinear_alpha_V(sp.eigvecs[i], sp.eigvecs[i], mp, vc) /
              l2_norm_sq(sp.eigvecs[i]) ==
          doctest::Approx(sp.eigvals[i]).epsilon(1e-8));
  }

  // positive definite case: k0 = 1 and (mu = 0) c0 = c_w
  CHECK(sp.k0 == 1);
  CHECK(sp.mu == 0.0);
  CHECK(sp.c0 == doctest::Approx(sp.c_w).epsilon(1e-14));
}

TEST_CASE("oscillator ladder and the coercivity index") {
  Grid3 g = Grid3::create(32, 16.0);
  ModelParams mp;
  mp.kin = 1.0;
  mp.alpha = 0.0;
  PotentialSpec vh = PotentialSpec::harmonic(0.0, 1.0);
  EigenOptions opt;
  opt.k = 6;
  Spectrum sp = eigen_decompose(mp, vh, g, opt);
  REQUIRE(sp.converged);

  CHECK(sp.eigvals[0] == doctest::Approx(oracle::oscillator_eigenvalue(0)).epsilon(1e-2));
  for (int i = 1; i <= 3; ++i)
    CHECK(sp.eigvals[i] == doctest::Approx(oracle::oscillator_eigenvalue(i)).epsilon(1e-2));
  CHECK(sp.eigvals[4] == doctest::Approx(7.0).epsilon(1e-2));

  CHECK(sp.k0 == 1);
  CHECK(sp.eigvals[0] > -sp.mu);
  CHECK(sp.c0 ==
        doctest::Approx(sp.c_w * (1.0 - sp.mu / (sp.eigvals[0] + sp.mu))).epsilon(1e-14));
}

TEST_CASE("negative-floor harmonic potential: index 2 and projected coercivity") {
  Grid3 g = Grid3::create(32, 16.0);
  ModelParams mp;
  mp.kin = 1.0;
  mp.alpha = 0.0;
  PotentialSpec vh = PotentialSpec::harmonic(-4.0, 1.0);
  EigenOptions opt;
  opt.k = 5;
  Spectrum sp = eigen_decompose(mp, vh, g, opt);
  REQUIRE(sp.converged);

  // shifted oscillator: 3-4 = -1, then 5-4 = 1 three-fold
  CHECK(sp.eigvals[0] == doctest::Approx(-1.0).epsilon(1e-2));
  CHECK(sp.eigvals[1] == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(sp.eigvals[3] == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(sp.k0 == 2);
  CHECK(sp.mu == doctest::Approx(4.5).epsilon(1e-14));  // 1/2 - (-4)
  CHECK(sp.eigvals[0] > -sp.mu);
  CHECK(sp.c0 ==
        doctest::Approx(sp.c_w * (1.0 - sp.mu / (sp.eigvals[1] + sp.mu))).epsilon(1e-14));

  // projected coercivity: on the complement of the first eigenvector,
  // B_{alpha,V}(u,u) >= c0 ||u||_W^2
  for (int i = 0; i < 50; ++i) {
    Field u = random_band_limited(g, 900 + i, 8, i % 2);
    const double c = inner(u, sp.eigvecs[0]);
    for (std::size_t q = 0; q < u.size(); ++q) u.v[q] -= c * sp.eigvecs[0].v[q];
    const double lhs = bilinear_alpha_V(u, u, mp, vh);
    const double rhs = sp.c0 * w_norm_sq(u, vh);
    CHECK(lhs >= rhs - 1e-10 * (std::abs(lhs) + std::abs(rhs)));
  }
}

TEST_CASE("small-grid dense cross-check and the min-over-complement identity") {
  Grid3 g = Grid3::create(8, 8.0);
  ModelParams mp;
  mp.kin = 1.0;
  mp.alpha = -0.5;
  mp.s = 0.5;
  PotentialSpec vh = PotentialSpec::harmonic(0.5, 0.3);

  std::vector<double> dense = oracle::dense_eigenvalues(
      g, [&](const Field& u) { return apply_operator(u, mp, vh); });

  EigenOptions opt;
  opt.k = 10;
  Spectrum sp = eigen_decompose(mp, vh, g, opt);
  REQUIRE(sp.converged);
  for (int i = 0; i < opt.k; ++i)
    CHECK(std::abs(sp.eigvals[i] - dense[i]) <= 1e-8 * std::max(1.0, std::abs(dense[i])));

  // lam_k as the minimum of the Rayleigh quotient over the orthogonal
  // complement of the first k-1 eigenvectors (exact dense reduction)
  const int k = 3;
  const std::size_t N = g.size();
  Eigen::MatrixXd A(N, N);
  {
    Field e(g);
    for (std::size_t j = 0; j < N; ++j) {
      std::fill(e.v.begin(), e.v.end(), 0.0);
      e.v[j] = 1.0;
      Field col = apply_operator(e, mp, vh);
      for (std::size_t i = 0; i < N; ++i) A(int(i), int(j)) = col.v[i];
    }
    A = 0.5 * (A + A.transpose()).eval();
  }
  Eigen::MatrixXd E(N, k - 1);  // plain-orthonormal copies of the eigenvectors
  const double hh = std::sqrt(g.cell_volume());
  for (int j = 0; j < k - 1; ++j)
    for (std::size_t i = 0; i < N; ++i) E(int(i), j) = sp.eigvecs[j].v[i] * hh;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(E);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd Qc = Q.rightCols(int(N) - (k - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      (Qc.transpose() * A * Qc).eval(), Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues()[0] == doctest::Approx(sp.eigvals[k - 1]).epsilon(1e-6));
}

TEST_CASE("index/constant bookkeeping on prescribed spectra") {
  Spectrum fake;
  fake.eigvals = {-2.0, 3.0};
  fake.mu = 1.0;
  fake.c_w = 0.5;
  auto kc = k0_and_c0(fake);
  CHECK(kc.first == 2);
  CHECK(kc.second == doctest::Approx(3.0 / 8.0).epsilon(1e-14));

  Spectrum allneg;
  allneg.eigvals = {-3.0, -1.0};
  allneg.mu = 4.0;
  allneg.c_w = 0.5;
  CHECK_THROWS_AS(k0_and_c0(allneg), Refusal);
}

TEST_CASE("positive-floor coercivity bound") {
  Grid3 g = Grid3::create(32, 16.0);
  ModelParams mp;
  mp.kin = 1.0;
  mp.alpha = -1.0;
  mp.s = 0.5;
  PotentialSpec vh = PotentialSpec::harmonic(1.5, 0.5);

  // alpha0(1/2, 1.5) = 2 sqrt(1.5): -1 is admissible
  Below3Constants bc = below3_constants(mp, vh.v0);
  CHECK(bc.c2_hat > 0.0);
  CHECK(bc.c2_hat <= 1.0);
  CHECK(bc.factor > 0.0);
  CHECK(bc.factor <= 0.5);

  for (int i = 0; i < 100; ++i) {
    Field u = random_band_limited(g, 3000 + i, 9, i % 2);
    QuadraticBoundReport r = below3_check(u, mp, vh);
    CHECK(r.holds);
  }

  // inadmissible alpha at t = V0/kin refuses with the threshold message
  ModelParams bad = mp;
  bad.alpha = -2.5;
  try {
    below3_constants(bad, vh.v0);
    FAIL("expected a threshold refusal");
  } catch (const Refusal& r) {
    CHECK(r.kind == Refusal::Kind::config);
    CHECK(std::string(r.what()).find("alpha threshold") != std::string::npos);
  }

  // nonpositive floor refuses
  CHECK_THROWS_AS(below3_constants(mp, 0.0), Refusal);

  // dimensionless sanity: alpha = 0, V0 = 9 gives factor exactly 1/2
  ModelParams pos;
  pos.kin = 1.0;
  pos.alpha = 0.0;
  Below3Constants b9 = below3_constants(pos, 9.0);
  CHECK(b9.c2_hat == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b9.factor == doctest::Approx(0.5).epsilon(1e-14));
}
