#include "mln/mpa.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <utility>

#include "mln/errors.hpp"
#include "mln/fft.hpp"
#include "mln/operators.hpp"
#include "mln/poisson.hpp"
#include "mln/potential_norms.hpp"
#include "mln/spectral.hpp"
#include "mln/symmetry.hpp"

namespace mln {
namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

/* Along the ray t*u the action is the exact scalar polynomial
 *   F(t) = (a/2) t^2 + (b/4) t^4 - (c/p) t^p ,
 * a = quadratic part, b = 4*coupling, c = p-norm^p.  Its crest (argmax over
 * t > 0) is the positive root of  a + b t^2 - c t^{p-2}. */
struct RayCoeffs {
  double a = 0.0, b = 0.0, c = 0.0, p = 4.0;
  double value(double t) const {
    return 0.5 * a * t * t + 0.25 * b * t * t * t * t - c / p * std::pow(t, p);
  }
  double slope_factor(double t) const {  // F'(t) / t
    return a + b * t * t - c * std::pow(t, p - 2.0);
  }
};

RayCoeffs ray_coeffs(const EnergyBreakdown& e, double p) {
  RayCoeffs r;
  r.a = 2.0 * (e.kinetic_local + e.kinetic_nonlocal + e.mass_term);
  r.b = 4.0 * e.coupling;
  r.c = -p * e.nonlinear;
  r.p = p;
  return r;
}

/* crest parameter, or 0 when the ray has no interior maximum */
double ray_crest(const RayCoeffs& r) {
  if (r.a <= 0.0 || r.c <= 1e-300) return 0.0;
  if (r.p <= 4.0 + 1e-12 && r.c <= r.b) return 0.0;  // quartic never dips
  double lo = 1.0, hi = 1.0;
  if (r.slope_factor(1.0) > 0.0) {
    while (r.slope_factor(hi) > 0.0) {
      hi *= 2.0;
      if (hi > 1e8) return 0.0;
    }
    lo = 0.5 * hi;
  } else {
    while (r.slope_factor(lo) <= 0.0) {
      lo *= 0.5;
      if (lo < 1e-8) return 0.0;
    }
    hi = 2.0 * lo;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (r.slope_factor(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double h1_dist(const Field& a, const Field& b) { return std::sqrt(h1_norm_sq(a - b)); }

/* Driven functional: the action itself, or the deflated action
 * J(u) * prod_j (1 + s_j * chi_j(d_j^2) / d_j^power), d_j the H1 distance to
 * anchor j and s_j = defl_shift * |u_j|_{H1}^power, so each bump's width
 * tracks its anchor's own size.  chi_j is a C^1 cutoff that kills the bump
 * beyond twice the anchor's size: outside every cutoff zone the driven and
 * plain functionals agree exactly, so a critical point found out there is a
 * genuine critical point of the action, not a deflation-displaced one. */
struct Driver {
  const ModelParams& mp;
  const PotentialSpec* V;
  std::vector<Field> anchors;  // sign copies already included
  std::vector<double> anchor_h1sq;
  std::vector<double> shifts;  // per-anchor bump scale: defl_shift * |anchor|_{H1}^power
  std::vector<double> zone_d2;  // squared cutoff radius per anchor
  double dpow;
  double precond_shift;
  mutable double trap_shift = -1.0;  // lazily: mean of V over the grid

  Driver(const ModelParams& m, const PotentialSpec* vp, const std::vector<Field>& found,
         const SolverConfig& cfg)
      : mp(m), V(vp), dpow(cfg.defl_power) {
    for (const Field& f : found) {
      anchors.push_back(f);
      if (cfg.sign_quotient) anchors.push_back(-1.0 * f);
    }
    for (const Field& f : anchors) {
      const double h2 = h1_norm_sq(f);
      anchor_h1sq.push_back(h2);
      // zone radius: half the anchor's own H1 size; bump strength chosen so
      // the factor is 1.5 where the cutoff starts to bite and grows toward
      // the center as 1/d^power
      const double z2 = 0.25 * h2;
      zone_d2.push_back(z2);
      shifts.push_back(0.5 * cfg.defl_shift * std::pow(std::max(0.49 * z2, 1e-28), 0.5 * dpow));
    }
    precond_shift = V ? std::max(V->v0, 1.0) : mp.omega;
  }

  EnergyBreakdown plain_energy(const Field& u) const {
    return V ? eval_JV(u, mp, *V) : eval_J(u, mp);
  }

  // cutoff chi(xi), xi = d^2 / zone_d2: 1 on [0, 0.49], 0 beyond 1, smooth
  // cubic blend between; chi' is its derivative in xi
  static void cutoff(double xi, double& chi, double& dchi) {
    constexpr double xi0 = 0.49;
    if (xi <= xi0) {
      chi = 1.0;
      dchi = 0.0;
    } else if (xi >= 1.0) {
      chi = 0.0;
      dchi = 0.0;
    } else {
      const double y = (xi - xi0) / (1.0 - xi0);
      chi = 1.0 - y * y * (3.0 - 2.0 * y);
      dchi = -6.0 * y * (1.0 - y) / (1.0 - xi0);
    }
  }

  double factor_from_d2(double d2, std::size_t j) const {
    const double w = std::max(d2, 1e-28);
    double chi, dchi;
    cutoff(w / zone_d2[j], chi, dchi);
    return 1.0 + shifts[j] * chi / std::pow(w, 0.5 * dpow);
  }

  // scalar c such that the bump's gradient contribution is c * (1-Lap)(u-a),
  // divided by the bump factor itself (log-derivative, used with the product)
  double logcoef_from_d2(double d2, std::size_t j) const {
    const double w = std::max(d2, 1e-28);
    double chi, dchi;
    cutoff(w / zone_d2[j], chi, dchi);
    const double mw = chi / std::pow(w, 0.5 * dpow);
    const double dmw = (dchi / zone_d2[j] - 0.5 * dpow * chi / w) / std::pow(w, 0.5 * dpow);
    return 2.0 * shifts[j] * dmw / (1.0 + shifts[j] * mw);
  }

  struct Val {
    double driven = 0.0;
    double plain = 0.0;
  };
  Val value(const Field& u) const {
    Val out;
    out.plain = plain_energy(u).total;
    double fac = 1.0;
    for (std::size_t j = 0; j < anchors.size(); ++j)
      fac *= factor_from_d2(h1_norm_sq(u - anchors[j]), j);
    out.driven = out.plain * fac;
    return out;
  }

  struct GradOut {
    Field raw, riesz;     // of the driven functional
    double dual = 0.0;
    Field raw_plain;      // of the plain action (for diagnostics / weak form)
    double plain_dual = 0.0;
  };
  /* Descent metric.  Without a trap this is the same lift the module-level
   * gradient uses.  With one, the flat shift max(v0,1) under-damps wherever
   * V is large and Armijo rejects nearly every step, so steps are lifted
   * with the mean of V instead; convergence is still judged in the
   * module-level norm (plain_dual), which the caller reports. */
  double step_shift(const Grid3& g) const {
    if (!V) return precond_shift;
    if (trap_shift < 0.0) trap_shift = mean_value(V->evaluate(g));
    return trap_shift;
  }

  GradOut grad(const Field& u, double plain_value) const {
    GradOut o;
    DualResidual dr = V ? grad_JV(u, mp, *V) : grad_J(u, mp);
    o.raw_plain = dr.raw;
    o.plain_dual = dr.dual_norm;
    const double shift = step_shift(u.grid);
    if (anchors.empty() && !V) {
      o.raw = dr.raw;
      o.riesz = std::move(dr.riesz);
      o.dual = dr.dual_norm;
      return o;
    }
    Field raw = dr.raw;
    double fac = 1.0;
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      Field diff = u - anchors[j];
      SpectralField F = to_spectral(diff);
      const double d2 =
          std::max(spectral_sum(F, [](double k2) { return 1.0 + k2; }), 1e-28);
      fac *= factor_from_d2(d2, j);
      // log-derivative of the bump factor, acting through (1 - Lap)(u - a)
      const double coef = plain_value * logcoef_from_d2(d2, j);
      if (coef == 0.0) continue;  // outside the cutoff zone
      SpectralField Fr = F;
      apply_isotropic_multiplier(Fr, [](double k2) { return 1.0 + k2; });
      raw = axpy(raw, coef, from_spectral(Fr));
    }
    raw *= fac;
    // one lift of the total residual (linear, so it equals lifting each piece)
    SpectralField R = to_spectral(raw);
    const double kin = mp.kin;
    apply_isotropic_multiplier(R, [kin, shift](double k2) { return 1.0 / (kin * k2 + shift); });
    o.riesz = from_spectral(R);
    o.raw = std::move(raw);
    o.dual = std::sqrt(std::max(inner(o.raw, o.riesz), 0.0));
    return o;
  }
};

/* 1D relocation of a node onto the crest of its scaling ray.  Exact root
 * for the plain action; sampled + golden-section maximization for the
 * deflated one (the deflation factors are cheap scalar functions of t). */
double crest_parameter(const Driver& drv, const Field& u, const EnergyBreakdown& eb,
                       double h1sq_u, double min_pole) {
  RayCoeffs rc = ray_coeffs(eb, drv.mp.p);
  if (drv.anchors.empty()) return ray_crest(rc);
  std::vector<double> ip(drv.anchors.size());
  for (std::size_t j = 0; j < drv.anchors.size(); ++j)
    ip[j] = h1_norm_sq(u, drv.anchors[j]);
  auto d2_of = [&](std::size_t j, double t) {
    return std::max(t * t * h1sq_u - 2.0 * t * ip[j] + drv.anchor_h1sq[j], 0.0);
  };
  auto G = [&](double t) {
    double val = rc.value(t);
    for (std::size_t j = 0; j < drv.anchors.size(); ++j) {
      const double d2 = d2_of(j, t);
      if (d2 < min_pole * min_pole) return -std::numeric_limits<double>::infinity();
      val *= drv.factor_from_d2(d2, j);
    }
    return val;
  };
  // coarse log-spaced scan around t = 1, then golden refinement
  const int M = 61;
  double best_t = 1.0, best_v = G(1.0);
  for (int i = 0; i < M; ++i) {
    const double t = std::exp(std::log(0.05) + (std::log(20.0) - std::log(0.05)) * i / (M - 1));
    const double v = G(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  if (!std::isfinite(best_v)) return 0.0;
  double lo = best_t / 1.3, hi = best_t * 1.3;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = G(x1), f2 = G(x2);
  for (int i = 0; i < 80; ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = G(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = G(x1);
    }
  }
  const double t = 0.5 * (lo + hi);
  return std::isfinite(G(t)) ? t : 0.0;
}

/* Uniform H1-arclength resampling of nodes[first..last] along its own
 * polyline, endpoints kept. */
void resample_segment(std::vector<Field>& nodes, int first, int last) {
  const int M = last - first + 1;
  if (M < 3) return;
  std::vector<double> cum(M, 0.0);
  for (int j = 0; j + 1 < M; ++j)
    cum[j + 1] = cum[j] + h1_dist(nodes[first + j + 1], nodes[first + j]);
  if (cum.back() <= 0.0) return;
  std::vector<Field> fresh;
  fresh.reserve(M - 2);
  for (int i = 1; i + 1 < M; ++i) {
    const double target = cum.back() * i / (M - 1);
    int k = int(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
    k = std::clamp(k, 0, M - 2);
    const double seg = cum[k + 1] - cum[k];
    const double theta = seg > 0.0 ? (target - cum[k]) / seg : 0.0;
    fresh.push_back(axpy((1.0 - theta) * nodes[first + k], theta, nodes[first + k + 1]));
  }
  for (int i = 0; i + 2 < M; ++i) nodes[first + 1 + i] = std::move(fresh[i]);
}

/* Re-parametrize the path while pinning the current crest node, so the
 * resampling never undoes descent progress at the pass. */
void reequidistribute(std::vector<Field>& nodes, int pin) {
  const int N = int(nodes.size());
  if (pin <= 0 || pin >= N - 1) {
    resample_segment(nodes, 0, N - 1);
    return;
  }
  resample_segment(nodes, 0, pin);
  resample_segment(nodes, pin, N - 1);
}

/* Anderson mixing over the preconditioned-residual fixed point
 * u -> u - beta * riesz(u): secant extrapolation from a short history,
 * converging onto the nearby (saddle) critical point. */
struct AndersonMixer {
  double beta = 0.7;
  int depth = 5;
  std::vector<Field> us, rs;

  void reset() {
    us.clear();
    rs.clear();
  }
  void push(const Field& u, const Field& r) {
    us.push_back(u);
    rs.push_back(r);
    if (int(us.size()) > depth + 1) {
      us.erase(us.begin());
      rs.erase(rs.begin());
    }
  }
  Field next() const {
    const int m = int(us.size()) - 1;
    Field out = axpy(us[m], -beta, rs[m]);
    if (m == 0) return out;
    Eigen::MatrixXd G(m, m);
    Eigen::VectorXd b(m);
    std::vector<Field> dr;
    dr.reserve(m);
    for (int i = 0; i < m; ++i) dr.push_back(rs[i + 1] - rs[i]);
    for (int i = 0; i < m; ++i) {
      b[i] = inner(dr[i], rs[m]);
      for (int j = 0; j <= i; ++j) {
        G(i, j) = inner(dr[i], dr[j]);
        G(j, i) = G(i, j);
      }
    }
    G.diagonal().array() += 1e-12 * (G.trace() + 1e-300);
    Eigen::VectorXd eta = G.ldlt().solve(b);
    for (int i = 0; i < m; ++i) {
      if (!std::isfinite(eta[i])) return out;
      out = axpy(out, -eta[i], axpy(us[i + 1] - us[i], -beta, dr[i]));
    }
    return out;
  }
};

SolverReport run_path(const ModelParams& mp, const PotentialSpec* V, const Field& e0,
                      const SolverConfig& cfg, const std::vector<Field>& found) {
  if (cfg.path_nodes < 3)
    throw Refusal(Refusal::Kind::config, "the path needs at least three nodes");
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1)
    throw Refusal(Refusal::Kind::config, "solver tolerance and iteration budget must be positive");

  Driver drv(mp, V, found, cfg);
  Field e = cfg.radial ? symmetrize_radial(e0) : e0;
  if (drv.plain_energy(e).total > 0.0)
    throw Refusal(Refusal::Kind::geometry,
                  "path endpoint action is positive: supply a deeper negative-action endpoint");

  const int N = cfg.path_nodes;
  std::vector<Field> nodes;
  std::vector<double> vals(N), plains(N);
  nodes.reserve(N);
  for (int i = 0; i < N; ++i) {
    nodes.push_back((double(i) / (N - 1)) * e);
    Driver::Val v = drv.value(nodes.back());
    vals[i] = v.driven;
    plains[i] = v.plain;
  }
  auto interior_argmax = [&]() {
    int jm = 1;
    for (int j = 2; j + 1 < N; ++j)
      if (vals[j] > vals[jm]) jm = j;
    return jm;
  };
  auto max_val = [&]() { return *std::max_element(vals.begin(), vals.end()); };
  if (vals[interior_argmax()] <= 0.0)
    throw Refusal(Refusal::Kind::geometry,
                  "the initial path never rises above zero action: mountain-pass geometry "
                  "is absent for these parameters");

  // quadratic lower-bound constant for the per-iterate diagnostic
  double cmin = kNaN;
  try {
    if (V) {
      cmin = below3_constants(mp, V->v0).factor;
    } else {
      CoercivityConstants cc = coercivity_constants(mp);
      cmin = std::min(cc.c1, cc.c2);
    }
  } catch (const Refusal&) {
  }

  SolverReport rep;
  rep.deflation_count = int(found.size());
  rep.symmetric = cfg.radial;

  int iter = 0, stall = 0;
  double last_rel = std::numeric_limits<double>::infinity();
  double tau0 = 1.0;  // warm-started backtracking origin
  int star = -1;

  // local polish state (Anderson mixing on the pinned crest node)
  bool polishing = false;
  int jpol = -1, aa_worse = 0, aa_rollbacks = 0, path_until = 0;
  double best_dual = std::numeric_limits<double>::infinity();
  Field best_u, best_riesz;
  AndersonMixer aa;
  std::vector<double> ridge_hist;  // ridge height per path iteration

  const bool dbg = std::getenv("MLN_MPA_TRACE") != nullptr;

  while (iter < cfg.max_iter) {
    ++iter;
    int jmax = polishing ? jpol : interior_argmax();
    if (vals[jmax] <= 0.0) break;  // ridge lost: report non-convergence
    if (dbg && iter % 20 == 0)
      std::fprintf(stderr, "    [trace] it=%d anchors=%zu polish=%d j=%d val=%.6g plain=%.6g rel=%.3e\n",
                   iter, drv.anchors.size(), (int)polishing, jmax, vals[jmax], plains[jmax],
                   last_rel);

    // near the saddle, snap the max node onto the crest of its scaling ray
    // (cheap 1D maximization; a re-parametrization, not a descent step)
    bool relocated = false;
    if (!polishing && last_rel <= 0.3) {
      EnergyBreakdown eb = drv.plain_energy(nodes[jmax]);
      const double t =
          crest_parameter(drv, nodes[jmax], eb, h1_norm_sq(nodes[jmax]), 0.5 * cfg.sep);
      if (t > 0.0 && std::abs(t - 1.0) > 1e-12) {
        nodes[jmax] *= t;
        Driver::Val v = drv.value(nodes[jmax]);
        if (v.driven >= vals[jmax]) {  // crest never moves the value down
          vals[jmax] = v.driven;
          plains[jmax] = v.plain;
          relocated = true;
        } else {
          nodes[jmax] *= 1.0 / t;
        }
      }
    }

    const Field& u = nodes[jmax];
    Driver::GradOut go = drv.grad(u, plains[jmax]);
    const double h1u = std::sqrt(h1_norm_sq(u));
    const double rel = go.dual / std::max(h1u, 1e-30);
    last_rel = rel;
    const double margin =
        std::isnan(cmin)
            ? kNaN
            : mp.p * plains[jmax] - inner(go.raw_plain, u) -
                  (0.5 * mp.p - 1.0) * cmin * h1u * h1u;
    if (relocated) rep.ps_trace.push_back({iter, max_val(), rel, h1u, 0.0, margin});

    // steps run in the drive metric; convergence is judged on the residual
    // norm the report carries (they agree except under a trap)
    const bool done = (drv.anchors.empty() ? go.plain_dual : go.dual) /
                          std::max(h1u, 1e-30) <=
                      cfg.tol;
    if (done) {
      rep.ps_trace.push_back({iter, max_val(), rel, h1u, 0.0, margin});
      rep.converged = true;
      star = jmax;
      break;
    }

    // enter the polish phase once the path is close (small residual) or has
    // flattened out (ridge height no longer dropping): pin the crest node and
    // refine it alone
    const bool ridge_stalled =
        ridge_hist.size() >= 15 &&
        ridge_hist[ridge_hist.size() - 15] - ridge_hist.back() <=
            1e-4 * (1.0 + std::abs(ridge_hist.back()));
    if (!polishing && iter >= path_until && (rel <= 5e-2 || ridge_stalled)) {
      polishing = true;
      jpol = jmax;
      aa.reset();
      aa_worse = aa_rollbacks = 0;
      best_dual = std::numeric_limits<double>::infinity();
      ridge_hist.clear();
    }

    if (polishing) {
      // secant refinement of the crest node; rows are bookkeeping (step 0)
      if (go.dual < best_dual) {
        best_dual = go.dual;
        best_u = u;
        best_riesz = go.riesz;
        aa_worse = 0;
      } else if (++aa_worse >= 4) {
        // extrapolation wandered: restart the history from the best point
        Field fb = axpy(best_u, -aa.beta, best_riesz);
        if (cfg.radial) fb = symmetrize_radial(fb);
        const double tf = crest_parameter(drv, fb, drv.plain_energy(fb),
                                          h1_norm_sq(fb), 0.5 * cfg.sep);
        if (tf > 0.0) fb *= tf;
        Driver::Val vf = drv.value(fb);
        if (tf > 0.0 && vf.driven > 0.0) {
          nodes[jmax] = std::move(fb);
          vals[jmax] = vf.driven;
          plains[jmax] = vf.plain;
        }
        aa.reset();
        aa_worse = 0;
        if (++aa_rollbacks >= 3) {  // polish is not contracting: back to paths
          polishing = false;
          path_until = iter + 30;
          tau0 = 1.0;
        }
        rep.ps_trace.push_back({iter, max_val(), rel, h1u, 0.0, margin});
        continue;
      }
      aa.push(u, go.riesz);
      Field cand = aa.next();
      if (cfg.radial) cand = symmetrize_radial(cand);
      // project onto the crest of the candidate's scaling ray: every interior
      // critical point sits at crest parameter 1, while the trivial attractor
      // at the origin is off every crest, so the projection bars collapse
      const double tc = crest_parameter(drv, cand, drv.plain_energy(cand),
                                        h1_norm_sq(cand), 0.5 * cfg.sep);
      bool installed = false;
      if (tc > 0.0) {
        cand *= tc;
        Driver::Val vc = drv.value(cand);
        if (vc.driven > 0.0) {
          nodes[jmax] = std::move(cand);
          vals[jmax] = vc.driven;
          plains[jmax] = vc.plain;
          installed = true;
        }
      }
      if (!installed) {  // ray lost its crest: restart from the best point
        Field fb = axpy(best_u, -aa.beta, best_riesz);
        if (cfg.radial) fb = symmetrize_radial(fb);
        const double tf = crest_parameter(drv, fb, drv.plain_energy(fb),
                                          h1_norm_sq(fb), 0.5 * cfg.sep);
        if (tf > 0.0) fb *= tf;
        Driver::Val vf = drv.value(fb);
        if (tf > 0.0 && vf.driven > 0.0) {
          nodes[jmax] = std::move(fb);
          vals[jmax] = vf.driven;
          plains[jmax] = vf.plain;
        }
        aa.reset();
        if (++aa_rollbacks >= 3) {
          polishing = false;
          path_until = iter + 30;
          tau0 = 1.0;
        }
      }
      rep.ps_trace.push_back({iter, max_val(), rel, h1u, 0.0, margin});
      continue;
    }

    // monotone backtracking descent of the maximal node; the node must stay
    // on the positive side of the ridge (the pass value is positive, so a
    // sign flip means the step smashed through into the valley)
    const double slope = inner(go.raw, go.riesz);
    const double F0 = vals[jmax];
    const double dir_len = std::sqrt(h1_norm_sq(go.riesz));
    // trust cap: never move a node by more than a fraction of its own size
    const double tau_cap = std::max(1.0, 0.25 * h1u) / std::max(dir_len, 1e-30);
    double tau = std::min(2.0 * tau0, tau_cap);
    bool accepted = false;
    Field cand;
    Driver::Val vc;
    while (tau >= 1e-14) {
      cand = axpy(u, -tau, go.riesz);
      if (cfg.radial) cand = symmetrize_radial(cand);
      vc = drv.value(cand);
      if (vc.driven > 0.0 && vc.driven <= F0 - 1e-4 * tau * slope) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (accepted) {
      tau0 = tau;
      nodes[jmax] = std::move(cand);
      vals[jmax] = vc.driven;
      plains[jmax] = vc.plain;
      rep.ps_trace.push_back({iter, max_val(), rel, h1u, tau * dir_len, margin});
      stall = 0;
    } else {
      tau0 = std::max(0.25 * tau0, 1e-12);
      rep.ps_trace.push_back({iter, F0, rel, h1u, 0.0, margin});
      if (++stall >= 6) {  // descent can't move: hand the node to the polisher
        polishing = true;
        jpol = jmax;
        aa.reset();
        aa_worse = aa_rollbacks = 0;
        best_dual = std::numeric_limits<double>::infinity();
        ridge_hist.clear();
        stall = 0;
        continue;
      }
    }
    ridge_hist.push_back(max_val());

    if (iter % 10 == 0 || (!accepted && stall < 6)) {
      reequidistribute(nodes, jmax);
      for (int j = 1; j + 1 < N; ++j) {
        if (j == jmax) continue;  // pinned crest node is untouched
        Driver::Val v = drv.value(nodes[j]);
        vals[j] = v.driven;
        plains[j] = v.plain;
      }
      rep.ps_trace.push_back({iter, max_val(), last_rel,
                              std::sqrt(h1_norm_sq(nodes[interior_argmax()])), 0.0, margin});
    }
  }

  if (star < 0) star = interior_argmax();
  rep.u_star = nodes[star];
  rep.iterations = iter;
  rep.J_value = drv.plain_energy(rep.u_star).total;
  DualResidual fin = V ? grad_JV(rep.u_star, mp, *V) : grad_J(rep.u_star, mp);
  rep.dual_residual = fin.dual_norm / std::max(std::sqrt(h1_norm_sq(rep.u_star)), 1e-30);
  if (!rep.converged && std::isfinite(best_dual)) {
    // an unconverged run still reports its best polished iterate if that beats
    // the crest of the final path
    DualResidual bd = V ? grad_JV(best_u, mp, *V) : grad_J(best_u, mp);
    const double brel = bd.dual_norm / std::max(std::sqrt(h1_norm_sq(best_u)), 1e-30);
    if (brel < rep.dual_residual) {
      rep.u_star = best_u;
      rep.J_value = drv.plain_energy(rep.u_star).total;
      rep.dual_residual = brel;
    }
  }
  rep.phi_star = solve_phi(rep.u_star).phi;
  return rep;
}

}  // namespace

GeometryProbe probe_sphere_infimum(const ModelParams& mp, const Grid3& g, double rho,
                                   int n_samples, std::uint64_t seed,
                                   const PotentialSpec* V) {
  if (!(rho > 0.0))
    throw Refusal(Refusal::Kind::config, "sphere radius must be positive");
  if (n_samples < 1)
    throw Refusal(Refusal::Kind::config, "the sphere probe needs at least one sample");

  double qcoef;
  if (V) {
    qcoef = 0.5 * below3_constants(mp, V->v0).factor;
  } else {
    CoercivityConstants cc = coercivity_constants(mp);
    qcoef = 0.5 * std::min(cc.c1, cc.c2);
  }

  GeometryProbe probe;
  probe.rho = rho;
  probe.samples = n_samples;
  probe.delta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    Field u = random_band_limited(g, seed + std::uint64_t(i), std::max(2, g.n / 3), i % 2 == 0);
    u *= rho / std::sqrt(h1_norm_sq(u));
    probe.cp_emp = std::max(probe.cp_emp, lp_norm(u, mp.p) / rho);
    const double J = V ? eval_JV(u, mp, *V).total : eval_J(u, mp).total;
    probe.delta = std::min(probe.delta, J);
  }
  const double cpp = std::pow(probe.cp_emp, mp.p);
  probe.certificate = qcoef * rho * rho - cpp / mp.p * std::pow(rho, mp.p);
  probe.rho_bound = std::pow(mp.p * qcoef / cpp, 1.0 / (mp.p - 2.0));
  probe.within_bound = rho < probe.rho_bound;
  return probe;
}

SolverReport mountain_pass_search(const ModelParams& mp, const Field& e,
                                  const SolverConfig& cfg, const PotentialSpec* V) {
  return run_path(mp, V, e, cfg, {});
}

SolverReport refine_critical_point(const ModelParams& mp, const Field& u0,
                                   const SolverConfig& cfg, const PotentialSpec* V) {
  if (!(cfg.tol > 0.0) || cfg.max_iter < 1)
    throw Refusal(Refusal::Kind::config, "solver tolerance and iteration budget must be positive");
  Driver drv(mp, V, {}, cfg);

  Field u = cfg.radial ? symmetrize_radial(u0) : u0;
  const double tc =
      crest_parameter(drv, u, drv.plain_energy(u), h1_norm_sq(u), 0.5 * cfg.sep);
  if (tc <= 0.0 || !(drv.plain_energy(tc * u).total > 0.0))
    throw Refusal(Refusal::Kind::geometry,
                  "the start state's scaling ray has no crest above zero action: "
                  "nothing to refine toward");

  /* The ray through u keeps all the geometry the full search needs: its crest
   * sits at the start state, and past the crest the action drops through zero
   * (at a critical point the quartic balance guarantees it).  So refining is
   * just the ordinary search run along that ray. */
  double T = 2.0 * tc;
  while (drv.plain_energy(T * u).total > 0.0) {
    T *= 2.0;
    if (T > 1e12 * std::max(tc, 1.0))
      throw Refusal(Refusal::Kind::geometry,
                    "the start state's scaling ray never reaches negative action: "
                    "it cannot anchor a pass");
  }
  return run_path(mp, V, T * u, cfg, {});
}

std::optional<SolverReport> deflate_and_restart(const ModelParams& mp, const Field& e,
                                                const std::vector<Field>& found,
                                                const SolverConfig& cfg,
                                                const PotentialSpec* V) {
  if (found.empty()) return mountain_pass_search(mp, e, cfg, V);
  if (!(mp.p > 4.0 && mp.p < 6.0))
    throw Refusal(Refusal::Kind::config,
                  "deflation applies to nonlinearity exponents strictly between 4 and 6");
  if (int(found.size()) >= cfg.max_solutions) return std::nullopt;

  const Grid3& g = e.grid;
  // a deflated attempt that relapses toward a known basin rim never converges;
  // cap its budget so the remaining attempts get their turn promptly
  SolverConfig acfg = cfg;
  acfg.max_iter = std::min(cfg.max_iter, 1500);
  for (int attempt = 0; attempt < 3; ++attempt) {
    Field start = e;
    if (attempt == 1) {
      // a lattice-scale oscillatory endpoint: its path funnels toward the
      // short-wavelength passes, far from any smooth solution already found
      Field osc(g);
      const int mhat = std::max(2, g.n / 8);
      const double kap = 2.0 * M_PI * mhat / g.box_len;
      for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
          for (int ix = 0; ix < g.n; ++ix)
            osc.v[g.index(ix, iy, iz)] = std::cos(kap * g.coord(ix)) +
                                         std::cos(kap * g.coord(iy)) +
                                         std::cos(kap * g.coord(iz));
      if (cfg.radial) osc = symmetrize_radial(osc);
      osc *= 1.0 / std::sqrt(h1_norm_sq(osc));
      bool sank = false;
      for (int grow = 0; grow < 80; ++grow) {
        const double J = V ? eval_JV(osc, mp, *V).total : eval_J(osc, mp).total;
        if (J <= 0.0) {
          sank = true;
          break;
        }
        osc *= 2.0;
      }
      if (sank) start = std::move(osc);
    } else if (attempt == 2) {  // shake the endpoint, keeping its action nonpositive
      Field nz = random_band_limited(g, cfg.seed + 7919 * std::uint64_t(attempt) +
                                            131 * std::uint64_t(found.size()),
                                     std::max(2, g.n / 6), attempt % 2 == 0);
      if (cfg.radial) nz = symmetrize_radial(nz);
      double scale = 0.3 * std::sqrt(h1_norm_sq(e) / std::max(h1_norm_sq(nz), 1e-30));
      for (int halve = 0; halve < 40; ++halve) {
        start = axpy(e, scale, nz);
        const double J = V ? eval_JV(start, mp, *V).total : eval_J(start, mp).total;
        if (J <= 0.0) break;
        scale *= 0.5;
        if (halve == 39) start = e;
      }
    }
    SolverReport rep = run_path(mp, V, start, acfg, found);
    // the undeflated residual test: the driven and plain actions agree outside
    // the cutoff zones, and only a plain critical point counts
    bool ok = rep.converged && rep.dual_residual <= cfg.tol;
    double dmin = std::numeric_limits<double>::infinity();
    for (const Field& uj : found) {
      double d = h1_dist(rep.u_star, uj);
      if (cfg.sign_quotient) d = std::min(d, std::sqrt(h1_norm_sq(axpy(rep.u_star, 1.0, uj))));
      dmin = std::min(dmin, d);
      if (d < cfg.sep) ok = false;
    }
    if (std::getenv("MLN_MPA_TRACE"))
      std::fprintf(stderr, "  [defl attempt %d] conv=%d it=%d J=%.8g rel=%.3e dmin=%.4g\n",
                   attempt, (int)rep.converged, rep.iterations, rep.J_value, rep.dual_residual,
                   dmin);
    if (ok) return rep;
  }
  return std::nullopt;
}

PSDiagnostics ps_diagnostics(const std::vector<TraceRow>& trace, double tol) {
  PSDiagnostics d;
  if (trace.empty()) return d;
  d.energies_bounded = true;
  d.norms_bounded = true;
  d.case1_available = true;
  d.case1_ok = true;
  d.min_case1_margin = std::numeric_limits<double>::infinity();
  double best_rel = std::numeric_limits<double>::infinity();
  for (const TraceRow& r : trace) {
    if (!std::isfinite(r.J_max) || std::abs(r.J_max) > 1e10) d.energies_bounded = false;
    if (!std::isfinite(r.h1_norm_max_node) || r.h1_norm_max_node > 1e6) d.norms_bounded = false;
    best_rel = std::min(best_rel, r.dual_residual);
    if (std::isnan(r.case1_margin)) {
      d.case1_available = false;
    } else {
      d.min_case1_margin = std::min(d.min_case1_margin, r.case1_margin);
      const double scale = 1.0 + r.h1_norm_max_node * r.h1_norm_max_node;
      if (r.case1_margin < -1e-7 * scale) d.case1_ok = false;
    }
  }
  if (!d.case1_available) d.case1_ok = false;
  d.residual_converged = best_rel <= tol;
  return d;
}

}  // namespace mln
