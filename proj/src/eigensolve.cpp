#include "mln/eigensolve.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iterator>
#include <sstream>

#include "mln/errors.hpp"
#include "mln/potential_norms.hpp"
#include "mln/spectral.hpp"
#include "mln/threads.hpp"

namespace mln {

Field apply_operator(const Field& u, const ModelParams& mp, const PotentialSpec& V) {
  SpectralField F = to_spectral(u);
  const double a = mp.alpha, s = mp.s, kin = mp.kin;
  apply_isotropic_multiplier(
      F, [&](double k2) { return k2 > 0.0 ? kin * (k2 + a * std::pow(k2, s)) : 0.0; });
  Field out = from_spectral(F);
  Field vf = V.evaluate(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) out.v[i] += vf.v[i] * u.v[i];
  return out;
}

namespace {

using Block = std::vector<Field>;

/* h^3-weighted inner-product matrix A^T B */
Eigen::MatrixXd gram(const Block& A, const Block& B) {
  Eigen::MatrixXd G(A.size(), B.size());
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < B.size(); ++j) G(int(i), int(j)) = inner(A[i], B[j]);
  return G;
}

/* Z = S * C (columns of C give combination weights) */
Block combo(const Block& S, const Eigen::MatrixXd& C) {
  Block Z;
  Z.reserve(C.cols());
  const Grid3& g = S.front().grid;
  const int rows = int(S.size());
  for (int j = 0; j < C.cols(); ++j) {
    Field z(g);
    parallel_for(z.size(), [&](std::size_t q) {
      double acc = 0.0;
      for (int i = 0; i < rows; ++i) acc += C(i, j) * S[i].v[q];
      z.v[q] = acc;
    });
    Z.push_back(std::move(z));
  }
  return Z;
}

void append(Block& dst, Block&& src) {
  for (Field& f : src) dst.push_back(std::move(f));
}

/* Whitening orthonormalization: keeps only directions above a relative
 * rank cutoff, returns the transform so a shadow block (the operator
 * images) can be kept consistent. */
Eigen::MatrixXd whiten_transform(const Block& S) {
  Eigen::MatrixXd G = gram(S, S);
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const double cap = es.eigenvalues().maxCoeff();
  const double cut = std::max(cap, 0.0) * 1e-13;
  int keep = 0;
  for (int i = 0; i < G.rows(); ++i)
    if (es.eigenvalues()[i] > cut && es.eigenvalues()[i] > 0.0) ++keep;
  Eigen::MatrixXd C(G.rows(), keep);
  int c = 0;
  for (int i = 0; i < G.rows(); ++i) {
    if (!(es.eigenvalues()[i] > cut && es.eigenvalues()[i] > 0.0)) continue;
    C.col(c++) = es.eigenvectors().col(i) / std::sqrt(es.eigenvalues()[i]);
  }
  return C;
}

}  // namespace

Spectrum eigen_decompose(const ModelParams& mp, const PotentialSpec& V, const Grid3& g,
                         const EigenOptions& opt) {
  mp.validate();
  if (opt.k < 1) throw Refusal(Refusal::Kind::config, "eigen decomposition needs k >= 1");
  const int m = opt.k + std::max(4, opt.k / 4);  // guard block
  if (std::size_t(8 * m) > g.size())
    throw Refusal(Refusal::Kind::config,
                  "eigen block exceeds an eighth of the grid: raise n or lower k");

  const Field vf = V.evaluate(g);
  const double shift = std::max(V.v0, 1.0);
  const double kin = mp.kin, a = mp.alpha, s = mp.s;

  auto apply_L = [&](const Field& u) {
    SpectralField F = to_spectral(u);
    apply_isotropic_multiplier(
        F, [&](double k2) { return k2 > 0.0 ? kin * (k2 + a * std::pow(k2, s)) : 0.0; });
    Field out = from_spectral(F);
    for (std::size_t i = 0; i < u.size(); ++i) out.v[i] += vf.v[i] * u.v[i];
    return out;
  };
  auto apply_block = [&](const Block& X) {
    Block Y;
    Y.reserve(X.size());
    for (const Field& x : X) Y.push_back(apply_L(x));
    return Y;
  };
  auto precondition = [&](const Field& r) {
    SpectralField F = to_spectral(r);
    apply_isotropic_multiplier(F, [&](double k2) { return 1.0 / (kin * k2 + shift); });
    return from_spectral(F);
  };

  /* random orthonormal start; half the block carries the mean mode so a
   * constant-direction ground state is reachable */
  Block X;
  for (int j = 0; j < m; ++j)
    X.push_back(random_band_limited(g, opt.seed + std::uint64_t(j), std::max(2, g.n / 4),
                                    (j % 2) == 0));
  {
    Eigen::MatrixXd C = whiten_transform(X);
    X = combo(X, C);
    while (int(X.size()) < m) {  // rank top-up (essentially never taken)
      X.push_back(random_band_limited(g, opt.seed + 7919 + X.size(), std::max(2, g.n / 4), true));
      Eigen::MatrixXd C2 = whiten_transform(X);
      X = combo(X, C2);
    }
  }
  Block HX = apply_block(X);
  Block P, HP;

  Spectrum out;
  out.eigvals.assign(m, 0.0);
  Eigen::VectorXd lam(m);

  for (int it = 0; it < opt.max_iter; ++it) {
    out.iterations = it + 1;

    /* Rayleigh-Ritz over [X | W | P] (X alone on the first sweep) */
    Block S = std::move(X), HS = std::move(HX);
    const int nx = int(S.size());
    if (it > 0) {
      /* residuals and their preconditioned lifts */
      Block W;
      for (int j = 0; j < nx; ++j) {
        Field r = HS[j];
        for (std::size_t q = 0; q < r.size(); ++q) r.v[q] -= lam[j] * S[j].v[q];
        W.push_back(precondition(r));
      }
      /* project W (and P) off the current basis, then whiten each */
      Eigen::MatrixXd XtW = gram(S, W);
      {
        Eigen::MatrixXd C = -XtW;
        Block corr = combo(S, C);
        for (int j = 0; j < int(W.size()); ++j)
          for (std::size_t q = 0; q < W[j].size(); ++q) W[j].v[q] += corr[j].v[q];
      }
      Eigen::MatrixXd CW = whiten_transform(W);
      Block HW;
      W = combo(W, CW);
      HW = apply_block(W);
      if (!P.empty()) {
        Eigen::MatrixXd XtP = gram(S, P), WtP = gram(W, P);
        Block corrX = combo(S, Eigen::MatrixXd(-XtP)), corrW = combo(W, Eigen::MatrixXd(-WtP));
        Block corrHX = combo(HS, Eigen::MatrixXd(-XtP)), corrHW = combo(HW, Eigen::MatrixXd(-WtP));
        for (int j = 0; j < int(P.size()); ++j)
          for (std::size_t q = 0; q < P[j].size(); ++q) {
            P[j].v[q] += corrX[j].v[q] + corrW[j].v[q];
            HP[j].v[q] += corrHX[j].v[q] + corrHW[j].v[q];
          }
        Eigen::MatrixXd CP = whiten_transform(P);
        P = combo(P, CP);
        HP = combo(HP, CP);
      }
      append(S, std::move(W));
      append(HS, std::move(HW));
      append(S, std::move(P));
      append(HS, std::move(HP));
      P.clear();
      HP.clear();
    }

    Eigen::MatrixXd A = gram(S, HS);
    A = 0.5 * (A + A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const int take = std::min(m, int(S.size()));
    Eigen::MatrixXd Y = es.eigenvectors().leftCols(take);
    lam = es.eigenvalues().head(take);

    X = combo(S, Y);
    HX = combo(HS, Y);
    if (it > 0 && int(S.size()) > nx) {
      /* direction memory: the W/P part of the new X */
      Eigen::MatrixXd Ytail = Y;
      Ytail.topRows(nx).setZero();
      P = combo(S, Ytail);
      HP = combo(HS, Ytail);
    }

    /* convergence on the k requested pairs */
    bool done = true;
    out.residuals.assign(take, 0.0);
    for (int j = 0; j < take; ++j) {
      Field r = HX[j];
      for (std::size_t q = 0; q < r.size(); ++q) r.v[q] -= lam[j] * X[j].v[q];
      out.residuals[j] = std::sqrt(l2_norm_sq(r));
      if (j < opt.k && out.residuals[j] > opt.tol_rel * std::abs(lam[j]) + opt.tol_abs)
        done = false;
    }
    if (done) {
      out.converged = true;
      break;
    }
  }

  const int keep = std::min(opt.k, int(X.size()));
  out.eigvals.assign(lam.data(), lam.data() + keep);
  out.eigvecs.assign(std::make_move_iterator(X.begin()), std::make_move_iterator(X.begin() + keep));
  out.residuals.resize(keep);

  MuConstants mc = mu_constants(mp, V.v0);
  out.mu = mc.mu;
  out.c_w = mc.c_w;
  bool any_pos = false;
  for (double v : out.eigvals) any_pos = any_pos || v > 0.0;
  if (any_pos) {
    auto kc = k0_and_c0(out);
    out.k0 = kc.first;
    out.c0 = kc.second;
  }
  return out;
}

std::pair<int, double> k0_and_c0(const Spectrum& spec) {
  for (std::size_t i = 0; i < spec.eigvals.size(); ++i) {
    if (spec.eigvals[i] > 0.0) {
      const int k0 = int(i) + 1;  // 1-based
      const double lam = spec.eigvals[i];
      return {k0, spec.c_w * (1.0 - spec.mu / (lam + spec.mu))};
    }
  }
  throw Refusal(Refusal::Kind::config,
                "no positive eigenvalue among the computed ones: request a larger spectrum");
}

}  // namespace mln
