#pragma once
// First-order conic solver: homogeneous self-dual embedding with operator
// splitting. The canonical problem min <C,X>, A(X) = b, X in cone becomes
//   min c.x  s.t.  [A; -I] x + s = [b; 0],  s in {0}^m x K,
// so the variables x stay free and the cone lives in s. The linear systems
// reduce to (2I + A^T A), solved by preconditioned conjugate gradients.
// Accuracy is modest by design; use the interior point backend for tight
// tolerances.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdio>
#include <vector>

#include "qnl/sdp.hpp"

namespace qnl {

struct SplitOpts {
  double tol = 1e-4;
  int max_iters = 100000;
  int check_every = 25;
  double alpha = 1.5;  // over-relaxation
  bool verbose = false;
};

namespace split_detail {

struct ConeLayout {
  std::vector<BlockKind> kind;
  std::vector<int> side;
  std::vector<long> offset;  // into the packed x vector
  long n = 0;
};

inline ConeLayout layout(const SdpProblem& p) {
  ConeLayout L;
  for (const auto& b : p.blocks) {
    L.kind.push_back(b.kind);
    L.side.push_back(b.side);
    L.offset.push_back(L.n);
    L.n += (b.kind == BlockKind::psd) ? svec_len(b.side) : b.side;
  }
  return L;
}

inline long svec_index(long block_offset, int i, int j) {
  // column-major upper triangle: (i, j) with i <= j sits at j(j+1)/2 + i
  return block_offset + long(j) * (j + 1) / 2 + i;
}

// Project the cone part of a stacked vector onto K (in place).
inline void project_cone(const ConeLayout& L, Eigen::VectorXd& w, long base) {
  for (std::size_t b = 0; b < L.kind.size(); ++b) {
    long off = base + L.offset[b];
    if (L.kind[b] == BlockKind::diag) {
      for (int i = 0; i < L.side[b]; ++i) w(off + i) = std::max(0.0, w(off + i));
    } else {
      const int s = L.side[b];
      Eigen::MatrixXd M = svec_get(w.data() + off, s);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
      Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
      M = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      svec_put(M, w.data() + off);
    }
  }
}

}  // namespace split_detail

inline SdpSolution solve_splitting(const SdpProblem& input, const SplitOpts& opt = {}) {
  using Eigen::VectorXd;

  CanonicalSdp canon = canonicalize(input);
  const SdpProblem& p = canon.p;
  const int m = int(p.cons.size());
  split_detail::ConeLayout L = split_detail::layout(p);
  const long n = L.n;
  const long mext = m + n;  // rows of [A; -I]

  // Sparse A (m x n) in svec coordinates.
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < m; ++k)
    for (const auto& e : p.cons[k].a) {
      long col = (L.kind[e.block] == BlockKind::psd)
                     ? split_detail::svec_index(L.offset[e.block], e.i, e.j)
                     : L.offset[e.block] + e.i;
      double v = (e.i == e.j) ? e.v : std::sqrt(2.0) * e.v;
      trips.emplace_back(k, int(col), v);
    }
  Eigen::SparseMatrix<double, Eigen::RowMajor> A(m, n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseMatrix<double> Acm = A;  // column-major for transpose products

  VectorXd c = VectorXd::Zero(n);
  for (const auto& e : p.obj) {
    long col = (L.kind[e.block] == BlockKind::psd)
                   ? split_detail::svec_index(L.offset[e.block], e.i, e.j)
                   : L.offset[e.block] + e.i;
    c(col) += (e.i == e.j) ? e.v : std::sqrt(2.0) * e.v;
  }
  VectorXd b(m);
  for (int k = 0; k < m; ++k) b(k) = p.cons[k].rhs;

  // A' z = (A z, -z); A'^T (w1, w2) = A^T w1 - w2.
  auto At_ext = [&](const VectorXd& w) -> VectorXd {
    return Acm.transpose() * w.head(m) - w.tail(n);
  };

  // Jacobi-preconditioned CG on (2I + A^T A).
  VectorXd precond = VectorXd::Constant(n, 2.0);
  for (long j = 0; j < n; ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(Acm, j); it; ++it)
      precond(j) += it.value() * it.value();

  auto cg_solve = [&](const VectorXd& rhs, VectorXd& x0, double rel_tol) {
    VectorXd x = x0;
    VectorXd r = rhs - (2.0 * x + Acm.transpose() * (A * x));
    VectorXd zp = r.cwiseQuotient(precond);
    VectorXd pdir = zp;
    double rz = r.dot(zp);
    const double stop = rel_tol * std::max(rhs.norm(), 1e-30);
    for (int it = 0; it < 10 * n + 100; ++it) {
      if (r.norm() <= stop) break;
      VectorXd Ap = 2.0 * pdir + Acm.transpose() * (A * pdir);
      double alpha = rz / pdir.dot(Ap);
      x += alpha * pdir;
      r -= alpha * Ap;
      zp = r.cwiseQuotient(precond);
      double rz2 = r.dot(zp);
      pdir = zp + (rz2 / rz) * pdir;
      rz = rz2;
    }
    x0 = x;
    return x;
  };

  // h = (c, b, 0...); q = M^{-1} h with M = [[I, A'^T], [-A', I]].
  VectorXd bext = VectorXd::Zero(mext);
  bext.head(m) = b;
  VectorXd qx_init = VectorXd::Zero(n);
  VectorXd qx = cg_solve(c - Acm.transpose() * b, qx_init, 1e-12);
  VectorXd qy(mext);
  qy.head(m) = b + A * qx;
  qy.tail(n) = -qx;
  const double den = 1.0 + c.dot(qx) + bext.dot(qy);

  // u = (x, y, tau), v = (0, s, kappa).
  VectorXd u = VectorXd::Zero(n + mext + 1);
  VectorXd v = VectorXd::Zero(n + mext + 1);
  u(n + mext) = 1.0;
  v(n + mext) = 1.0;

  VectorXd warm = VectorXd::Zero(n);

  SdpSolution sol;
  sol.status = SdpStatus::iter_limit;

  auto extract = [&](double tau) {
    VectorXd xh = u.head(n) / tau;
    VectorXd yh = u.segment(n, mext) / tau;
    sol.X.assign(L.kind.size(), Eigen::MatrixXd());
    sol.Z.assign(L.kind.size(), Eigen::MatrixXd());
    for (std::size_t bb = 0; bb < L.kind.size(); ++bb) {
      if (L.kind[bb] == BlockKind::psd) {
        sol.X[bb] = svec_get(xh.data() + L.offset[bb], L.side[bb]);
        sol.Z[bb] = svec_get(yh.data() + m + L.offset[bb], L.side[bb]);
      } else {
        sol.X[bb] =
            Eigen::Map<VectorXd>(xh.data() + L.offset[bb], L.side[bb]).asDiagonal();
        sol.Z[bb] =
            Eigen::Map<VectorXd>(yh.data() + m + L.offset[bb], L.side[bb]).asDiagonal();
      }
    }
    sol.y = -yh.head(m);
    double pobj = c.dot(xh) + p.obj_offset;
    sol.objective = canon.negated ? -pobj : pobj;
    if (canon.slack_block >= 0) {
      sol.X.erase(sol.X.begin() + canon.slack_block);
      sol.Z.erase(sol.Z.begin() + canon.slack_block);
    }
  };

  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    // utilde = (I+Q)^{-1} (u + v)
    VectorXd w = u + v;
    double cg_tol = std::max(1e-12, 1e-5 / std::pow(iter + 1.0, 1.5));
    VectorXd rhs_x = w.head(n) - (Acm.transpose() * w.segment(n, m) - w.segment(n + m, n));
    VectorXd px = cg_solve(rhs_x, warm, cg_tol);
    VectorXd py(mext);
    py.head(m) = w.segment(n, m) + A * px;
    py.tail(n) = w.segment(n + m, n) - px;
    double wtau = w(n + mext);
    double ztau = (wtau + c.dot(px) + bext.dot(py)) / den;
    VectorXd ut(n + mext + 1);
    ut.head(n) = px - ztau * qx;
    ut.segment(n, mext) = py - ztau * qy;
    ut(n + mext) = ztau;

    // u+ = Pi_C(alpha*ut + (1-alpha)*u - v)
    VectorXd cand = opt.alpha * ut + (1.0 - opt.alpha) * u - v;
    split_detail::project_cone(L, cand, n + m);  // y cone rows onto K (self dual)
    cand(n + mext) = std::max(0.0, cand(n + mext));
    VectorXd u_next = cand;  // x rows and y eq rows are free: identity
    VectorXd v_next = v - opt.alpha * ut - (1.0 - opt.alpha) * u + u_next;
    u = u_next;
    v = v_next;

    if (!u.allFinite() || !v.allFinite()) {
      sol.status = SdpStatus::inaccurate;
      sol.note = "iterates diverged";
      break;
    }

    if ((iter + 1) % opt.check_every != 0) continue;

    const double tau = u(n + mext);
    const double kappa = v(n + mext);
    VectorXd ux = u.head(n);
    VectorXd uy = u.segment(n, mext);
    VectorXd vs = v.segment(n, mext);

    if (tau > 1e-9 * std::max(1.0, kappa)) {
      VectorXd xh = ux / tau;
      VectorXd sh = vs / tau;
      VectorXd yh = uy / tau;
      VectorXd prim = VectorXd(mext);
      prim.head(m) = A * xh;
      prim.tail(n) = -xh;
      prim += sh - bext;
      double pres = prim.norm() / (1.0 + bext.norm());
      double dres = (At_ext(yh) + c).norm() / (1.0 + c.norm());
      double pobj = c.dot(xh), dobj = -bext.dot(yh);
      double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (opt.verbose && ((iter + 1) % (opt.check_every * 40) == 0))
        std::fprintf(stderr, "split %6d p %.2e d %.2e g %.2e\n", iter + 1, pres,
                     dres, gap);
      if (pres <= opt.tol && dres <= opt.tol && gap <= opt.tol) {
        extract(tau);
        sol.status = SdpStatus::optimal;
        sol.prim_res = pres;
        sol.dual_res = dres;
        sol.gap = gap;
        sol.note = "converged";
        ++iter;
        break;
      }
    }

    // certificates from the homogeneous part
    double bty = bext.dot(uy);
    if (bty < 0) {
      double cert = At_ext(uy).norm() * std::max(1.0, bext.norm());
      if (cert <= opt.tol * (-bty)) {
        sol.status = SdpStatus::infeasible;
        sol.note = "dual ray certificate";
        sol.y = -uy.head(m) / (-bty);
        ++iter;
        break;
      }
    }
    double ctx = c.dot(ux);
    if (ctx < 0) {
      VectorXd resid(mext);
      resid.head(m) = A * ux;
      resid.tail(n) = -ux;
      resid += vs;
      double cert = resid.norm() * std::max(1.0, c.norm());
      if (cert <= opt.tol * (-ctx)) {
        sol.status = SdpStatus::unbounded;
        sol.note = "primal ray certificate";
        ++iter;
        break;
      }
    }
  }

  sol.iters = iter;
  if (sol.status == SdpStatus::iter_limit || sol.status == SdpStatus::inaccurate) {
    const double tau = u(n + mext);
    if (tau > 1e-12 && u.allFinite()) {
      extract(tau);
      VectorXd xh = u.head(n) / tau;
      VectorXd sh = v.segment(n, mext) / tau;
      VectorXd yh = u.segment(n, mext) / tau;
      VectorXd prim = VectorXd(mext);
      prim.head(m) = A * xh;
      prim.tail(n) = -xh;
      prim += sh - bext;
      sol.prim_res = prim.norm() / (1.0 + bext.norm());
      sol.dual_res = (At_ext(yh) + c).norm() / (1.0 + c.norm());
      double pobj = c.dot(xh), dobj = -bext.dot(yh);
      sol.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      if (sol.note.empty()) sol.note = "iteration limit";
    } else if (sol.note.empty()) {
      sol.status = SdpStatus::infeasible;
      sol.note = "tau collapsed without a clean certificate";
    }
  }
  if (sol.status == SdpStatus::optimal || sol.status == SdpStatus::unbounded) {
    // objective already set by extract for optimal; unbounded keeps sign info
    if (sol.status == SdpStatus::unbounded)
      sol.objective = canon.negated ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
  }
  return sol;
}

}  // namespace qnl
