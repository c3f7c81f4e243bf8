#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "mln/energy.hpp"
#include "mln/errors.hpp"
#include "mln/mpa.hpp"
#include "mln/poisson.hpp"
#include "mln/potential_spec.hpp"
#include "mln/scaling.hpp"
#include "mln/spectral.hpp"
#include "mln/symmetry.hpp"

using namespace mln;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double h1d(const Field& a, const Field& b) {
  Field d = a - b;
  return std::sqrt(h1_norm_sq(d));
}

// worst weak-form residual of u against 50 seeded band-limited test fields,
// normalized by ||u||_H1 ||v||_H1
double weak_form_max(const Field& u, const ModelParams& mp, const PotentialSpec* V = nullptr) {
  DualResidual dr = V ? grad_JV(u, mp, *V) : grad_J(u, mp);
  const double h1u = std::sqrt(h1_norm_sq(u));
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    Field v = random_band_limited(u.grid, 500 + k, 10, k % 2 == 0);
    worst = std::max(worst, std::abs(inner(dr.raw, v)) / (h1u * std::sqrt(h1_norm_sq(v))));
  }
  return worst;
}

// every converged run has to look like a discrete weak solution
void check_solution(const SolverReport& rep, const ModelParams& mp, const SolverConfig& cfg,
                    const PotentialSpec* V = nullptr) {
  CHECK(rep.converged);
  CHECK(rep.dual_residual <= cfg.tol);
  CHECK(rep.J_value > 0.0);
  CHECK(weak_form_max(rep.u_star, mp, V) <= cfg.tol);
  // the reported pair solves the constraint equation bit-for-bit
  CHECK(max_abs(rep.phi_star - solve_phi(rep.u_star).phi) == 0.0);
  if (cfg.radial) {
    CHECK(rep.symmetric);
    Field sym = symmetrize_radial(rep.u_star);
    CHECK(max_abs(sym - rep.u_star) / max_abs(rep.u_star) <= 1e-12);
  }
  PSDiagnostics d = ps_diagnostics(rep.ps_trace, cfg.tol);
  CHECK(d.energies_bounded);
  CHECK(d.residual_converged);
  CHECK(d.norms_bounded);
  CHECK(d.case1_available);
  CHECK(d.case1_ok);
  for (const TraceRow& r : rep.ps_trace) {
    CHECK(std::isfinite(r.J_max));
    CHECK(std::isfinite(r.dual_residual));
  }
}

const ModelParams kP4Frac{1.0, 1.0, -1.0, 0.5, 4.0};
const ModelParams kP5Frac{1.0, 1.0, -1.0, 0.5, 5.0};
const ModelParams kP4Zero{1.0, 1.0, 0.0, 0.5, 4.0};

}  // namespace

TEST_CASE("sphere probe pins its infimum and certificate") {
  Grid3 g = Grid3::create(32, 16.0);

  GeometryProbe pf = probe_sphere_infimum(kP4Frac, g, 0.5, 50);
  CHECK(pf.samples == 50);
  CHECK(pf.delta == doctest::Approx(0.0972938200978).epsilon(1e-9));
  CHECK(pf.certificate == doctest::Approx(0.0624999633168).epsilon(1e-9));
  CHECK(pf.cp_emp == doctest::Approx(0.0391436925417).epsilon(1e-9));
  CHECK(pf.rho_bound == doctest::Approx(652.644100925).epsilon(1e-9));
  CHECK(pf.within_bound);
  CHECK(pf.delta > 0.0);
  CHECK(pf.delta >= pf.certificate - 1e-12);

  GeometryProbe p5 = probe_sphere_infimum(kP5Frac, g, 0.5, 50);
  CHECK(p5.delta == doctest::Approx(0.0972938566076).epsilon(1e-9));
  CHECK(p5.certificate == doctest::Approx(0.0624999998826).epsilon(1e-9));
  CHECK(p5.cp_emp == doctest::Approx(0.028494092728).epsilon(1e-9));
  CHECK(p5.rho_bound == doctest::Approx(405.239666112).epsilon(1e-9));
  CHECK(p5.delta >= p5.certificate - 1e-12);

  GeometryProbe p0 = probe_sphere_infimum(kP4Zero, g, 0.5, 50);
  CHECK(p0.delta == doctest::Approx(0.124999975056).epsilon(1e-9));
  // same samples, same exponent: the empirical constant matches the frac probe
  CHECK(p0.cp_emp == doctest::Approx(pf.cp_emp).epsilon(1e-13));
}

TEST_CASE("sphere probe small-radius limit recovers the quadratic coefficient") {
  Grid3 g = Grid3::create(32, 16.0);

  // without the fractional term both coercivity constants are 1, so
  // delta/rho^2 -> 1/2 exactly; the quartic terms die off as rho^2
  GeometryProbe a = probe_sphere_infimum(kP4Zero, g, 1e-3, 20);
  GeometryProbe b = probe_sphere_infimum(kP4Zero, g, 1e-4, 20);
  CHECK(a.delta / (a.rho * a.rho) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(b.delta / (b.rho * b.rho) == doctest::Approx(0.5).epsilon(1e-11));
  CHECK(a.certificate / (a.rho * a.rho) == doctest::Approx(0.5).epsilon(1e-9));

  // with the negative fractional term the sampled quadratic form sits between
  // the certificate's 1/2 min{c1,c2} and 1/2, and stabilizes as rho -> 0
  GeometryProbe fa = probe_sphere_infimum(kP4Frac, g, 1e-3, 20);
  GeometryProbe fb = probe_sphere_infimum(kP4Frac, g, 1e-4, 20);
  const double qa = fa.delta / (fa.rho * fa.rho), qb = fb.delta / (fb.rho * fb.rho);
  CHECK(qa == doctest::Approx(0.389465190371).epsilon(1e-9));
  CHECK(qb == doctest::Approx(qa).epsilon(1e-7));
  CHECK(qa > fa.certificate / (fa.rho * fa.rho));
  CHECK(qa < 0.5);
}

TEST_CASE("sphere probe rejects degenerate requests") {
  Grid3 g = Grid3::create(16, 8.0);
  CHECK_THROWS_AS(probe_sphere_infimum(kP4Zero, g, 0.0, 10), Refusal);
  CHECK_THROWS_AS(probe_sphere_infimum(kP4Zero, g, -1.0, 10), Refusal);
  CHECK_THROWS_AS(probe_sphere_infimum(kP4Zero, g, 0.5, 0), Refusal);
  try {
    probe_sphere_infimum(kP4Zero, g, 0.0, 10);
  } catch (const Refusal& e) {
    CHECK(e.kind == Refusal::Kind::config);
  }
}

TEST_CASE("radial symmetrization is an averaging projector") {
  Grid3 g = Grid3::create(16, 8.0);

  Field rad = sample(RadialGenerator::gaussian(1.0, 0.7), g);
  Field srad = symmetrize_radial(rad);
  CHECK(max_abs(srad - rad) <= 1e-15 * max_abs(rad));

  // odd on the torus (x |-> coord(ix) is not: the boundary plane is even)
  Field odd(g);
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        odd.v[g.index(ix, iy, iz)] = std::sin(g.wavenumber(1) * g.coord(ix));
  CHECK(max_abs(symmetrize_radial(odd)) <= 1e-14 * max_abs(odd));

  Field rnd = random_band_limited(g, 77, 5, true);
  Field srnd = symmetrize_radial(rnd);
  CHECK(std::sqrt(inner(srnd, srnd)) <= std::sqrt(inner(rnd, rnd)) * (1.0 + 1e-13));
  // idempotent
  CHECK(max_abs(symmetrize_radial(srnd) - srnd) <= 1e-14 * max_abs(srnd));
}

TEST_CASE("mountain-pass search converges on the quartic model with fractional term") {
  Grid3 g = Grid3::create(32, 16.0);
  NegativeEnergyPoint np =
      find_negative_energy_point(RadialGenerator::gaussian(1.0, 0.4), kP4Frac, g, 1e-3);
  CHECK(np.J_value <= 0.0);

  SolverConfig cfg;
  SolverReport rep = mountain_pass_search(kP4Frac, np.e, cfg);
  check_solution(rep, kP4Frac, cfg);
  CHECK(rep.J_value == doctest::Approx(4363.15408953).epsilon(1e-8));
  CHECK(std::sqrt(h1_norm_sq(rep.u_star)) == doctest::Approx(176.437393713).epsilon(1e-8));
  CHECK(rep.iterations == 28);

  // the critical value sits above the sphere infimum
  GeometryProbe probe = probe_sphere_infimum(kP4Frac, g, 0.5, 50);
  CHECK(rep.J_value >= probe.delta);
  // and below the initial path's ridge (descent only lowers the max node)
  CHECK(rep.J_value <= rep.ps_trace.front().J_max);

  SUBCASE("restart from a perturbed solution recovers the critical value") {
    Field noise = random_band_limited(g, 4242, 10, false);
    noise *= 1.0 / std::sqrt(h1_norm_sq(noise));
    Field u0 = axpy(rep.u_star, 1e-3 * std::sqrt(h1_norm_sq(rep.u_star)), noise);
    SolverReport rr = refine_critical_point(kP4Frac, u0, cfg);
    CHECK(rr.converged);
    CHECK(rr.dual_residual <= cfg.tol);
    CHECK(std::abs(rr.J_value - rep.J_value) / rep.J_value <= 1e-8);
    CHECK(h1d(rr.u_star, rep.u_star) <= 1e-2);
  }

  SUBCASE("deflation with nothing found is the plain search") {
    auto opt = deflate_and_restart(kP4Frac, np.e, {}, cfg);
    REQUIRE(opt.has_value());
    CHECK(opt->J_value == rep.J_value);
    CHECK(opt->iterations == rep.iterations);
  }

  SUBCASE("deflation refuses exponents outside the multiplicity window") {
    CHECK_THROWS_AS((void)deflate_and_restart(kP4Frac, np.e, {rep.u_star}, cfg), Refusal);
    try {
      (void)deflate_and_restart(kP4Frac, np.e, {rep.u_star}, cfg);
    } catch (const Refusal& e) {
      CHECK(e.kind == Refusal::Kind::config);
    }
  }
}

TEST_CASE("deflation finds a second distinct solution at p = 5") {
  Grid3 g = Grid3::create(32, 16.0);
  NegativeEnergyPoint np =
      find_negative_energy_point(RadialGenerator::gaussian(1.0, 0.4), kP5Frac, g, 1e-3);

  SolverConfig cfg;
  cfg.max_iter = 800;  // a relapsing deflated attempt should fail fast
  SolverReport u1 = mountain_pass_search(kP5Frac, np.e, cfg);
  check_solution(u1, kP5Frac, cfg);
  CHECK(u1.J_value == doctest::Approx(6.32195910215).epsilon(1e-8));
  CHECK(std::sqrt(h1_norm_sq(u1.u_star)) == doctest::Approx(5.16139125068).epsilon(1e-8));

  auto u2 = deflate_and_restart(kP5Frac, np.e, {u1.u_star}, cfg);
  REQUIRE(u2.has_value());
  check_solution(*u2, kP5Frac, cfg);
  CHECK(u2->J_value == doctest::Approx(739.981272257).epsilon(1e-8));
  CHECK(h1d(u2->u_star, u1.u_star) >= cfg.sep);
  CHECK(h1d(u2->u_star, u1.u_star) == doctest::Approx(57.2172).epsilon(1e-4));
  CHECK(u2->J_value != u1.J_value);

  // the found list is full once it holds max_solutions entries
  SolverConfig one = cfg;
  one.max_solutions = 1;
  CHECK_FALSE(deflate_and_restart(kP5Frac, np.e, {u1.u_star}, one).has_value());
}

TEST_CASE("harmonic trap yields a weak solution at the same tolerances") {
  Grid3 g = Grid3::create(32, 16.0);
  PotentialSpec trap;
  trap.kind = PotentialSpec::Kind::harmonic;
  trap.v0 = 1.0;
  trap.curvature = 1.0;

  NegativeEnergyPoint np =
      find_negative_energy_point(RadialGenerator::gaussian(1.0, 0.4), kP4Frac, g, 1e-3, &trap);
  CHECK(np.J_value <= 0.0);

  SolverConfig cfg;
  SolverReport rep = mountain_pass_search(kP4Frac, np.e, cfg, &trap);
  check_solution(rep, kP4Frac, cfg, &trap);
  CHECK(rep.J_value == doctest::Approx(11772.5396533).epsilon(1e-8));
  CHECK(std::sqrt(h1_norm_sq(rep.u_star)) == doctest::Approx(133.358848221).epsilon(1e-8));

  Field noise = random_band_limited(g, 909, 10, false);
  noise *= 1.0 / std::sqrt(h1_norm_sq(noise));
  Field u0 = axpy(rep.u_star, 1e-3 * std::sqrt(h1_norm_sq(rep.u_star)), noise);
  SolverReport rr = refine_critical_point(kP4Frac, u0, cfg, &trap);
  CHECK(rr.converged);
  CHECK(std::abs(rr.J_value - rep.J_value) / rep.J_value <= 1e-8);
}

TEST_CASE("geometry refusals: crestless states and positive-action endpoints") {
  Grid3 g = Grid3::create(32, 16.0);
  SolverConfig cfg;

  // a broad positive bump never loses to its own quartic terms along the ray:
  // its ray has no crest to refine toward
  Field wide = sample(RadialGenerator::gaussian(1.0, 0.05), g);
  CHECK_THROWS_AS(refine_critical_point(kP4Zero, wide, cfg), Refusal);
  try {
    refine_critical_point(kP4Zero, wide, cfg);
  } catch (const Refusal& e) {
    CHECK(e.kind == Refusal::Kind::geometry);
  }

  // a positive-action endpoint cannot anchor a pass
  Field pos = sample(RadialGenerator::gaussian(1.0, 0.5), g);
  CHECK(eval_J(pos, kP4Frac).total > 0.0);
  CHECK_THROWS_AS(mountain_pass_search(kP4Frac, pos, cfg), Refusal);
  try {
    mountain_pass_search(kP4Frac, pos, cfg);
  } catch (const Refusal& e) {
    CHECK(e.kind == Refusal::Kind::geometry);
  }

  // malformed configs are refused before any work
  Field neg = pos;  // content irrelevant
  SolverConfig bad = cfg;
  bad.path_nodes = 2;
  CHECK_THROWS_AS(mountain_pass_search(kP4Frac, neg, bad), Refusal);
  bad = cfg;
  bad.tol = 0.0;
  CHECK_THROWS_AS(mountain_pass_search(kP4Frac, neg, bad), Refusal);
  CHECK_THROWS_AS(refine_critical_point(kP4Frac, neg, bad), Refusal);
}

TEST_CASE("descent diagnostics grade synthetic traces") {
  const double tol = 1e-6;
  auto row = [](int it, double J, double rel, double h1, double margin) {
    return TraceRow{it, J, rel, h1, 0.1, margin};
  };

  std::vector<TraceRow> good = {row(0, 100.0, 1.0, 10.0, 5.0), row(1, 90.0, 1e-3, 10.0, 4.0),
                                row(2, 89.0, 1e-7, 10.0, 4.0)};
  PSDiagnostics d = ps_diagnostics(good, tol);
  CHECK(d.energies_bounded);
  CHECK(d.residual_converged);
  CHECK(d.norms_bounded);
  CHECK(d.case1_available);
  CHECK(d.case1_ok);
  CHECK(d.min_case1_margin == doctest::Approx(4.0));

  std::vector<TraceRow> blowup = good;
  blowup.push_back(row(3, 1e11, 1e-7, 10.0, 4.0));
  CHECK_FALSE(ps_diagnostics(blowup, tol).energies_bounded);

  std::vector<TraceRow> stuck = {row(0, 100.0, 1.0, 10.0, 5.0), row(1, 90.0, 1e-3, 10.0, 4.0)};
  CHECK_FALSE(ps_diagnostics(stuck, tol).residual_converged);

  std::vector<TraceRow> escape = good;
  escape.push_back(row(3, 89.0, 1e-7, 1e7, 4.0));
  CHECK_FALSE(ps_diagnostics(escape, tol).norms_bounded);

  // quadratic lower bound violated at one iterate
  std::vector<TraceRow> dipped = good;
  dipped.push_back(row(3, 89.0, 1e-7, 10.0, -1.0));
  PSDiagnostics dd = ps_diagnostics(dipped, tol);
  CHECK(dd.case1_available);
  CHECK_FALSE(dd.case1_ok);
  CHECK(dd.min_case1_margin == doctest::Approx(-1.0));

  // constants unavailable: diagnostics degrade to the three flags
  std::vector<TraceRow> nomargin = {row(0, 100.0, 1.0, 10.0, kNaN), row(1, 90.0, 1e-7, 10.0, kNaN)};
  PSDiagnostics dn = ps_diagnostics(nomargin, tol);
  CHECK(dn.energies_bounded);
  CHECK(dn.residual_converged);
  CHECK(dn.norms_bounded);
  CHECK_FALSE(dn.case1_available);
  CHECK_FALSE(dn.case1_ok);
}
