#pragma once
// Primal-dual interior point solver with Nesterov-Todd scaling and a
// Mehrotra predictor-corrector step, on the canonical form
//   min <C,X>  s.t.  <A_k,X> = b_k,  X in (psd x diag) cone product.
//
// Scaling per psd block: with square roots F_x F_x^T = X, F_z F_z^T = Z and
// the SVD F_z^T F_x = U S V^T, the NT factor is G = F_x V S^{-1/2}; then
// G^{-1} X G^{-T} = G^T Z G = S, so the scaled point is the diagonal S and
// the Mehrotra correction is an entrywise formula. The Schur complement
// H = A W A^T (W = G G^T) is assembled densely, exploiting per-constraint
// sparsity; the practical limit is the number of constraints.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "qnl/sdp.hpp"

namespace qnl {

struct InteriorOpts {
  double tol = 1e-8;
  int max_iters = 200;
  int side_cap = 600;      // reject problems whose total block side exceeds this
  double cert_tol = 1e-9;  // Farkas certificate eigenvalue slack
  bool verbose = false;
};

namespace ip_detail {

struct Span {
  int con = 0;
  int first = 0, last = 0;  // entry range within cons[con]
};

inline double block_inner(const std::vector<SdpEntry>& es, int first, int last,
                          const Eigen::MatrixXd& M) {
  double v = 0;
  for (int t = first; t < last; ++t) {
    const auto& e = es[t];
    v += (e.i == e.j) ? e.v * M(e.i, e.i) : 2.0 * e.v * M(e.i, e.j);
  }
  return v;
}

// Largest alpha in (0, cap] with S + alpha * dLam psd, S = diag(sig) > 0.
inline double scaled_alpha(const Eigen::VectorXd& sig, const Eigen::MatrixXd& dLam) {
  Eigen::VectorXd isq = sig.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd M = isq.asDiagonal() * dLam * isq.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  double lam = es.eigenvalues()(0);
  return lam >= -1e-14 ? 1e30 : -1.0 / lam;
}

}  // namespace ip_detail

inline SdpSolution solve_interior_point(const SdpProblem& input,
                                        const InteriorOpts& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  CanonicalSdp canon = canonicalize(input);
  const SdpProblem& p = canon.p;
  const int nb = int(p.blocks.size());
  const int m = int(p.cons.size());

  long total_side = 0;
  for (const auto& b : p.blocks) total_side += b.side;
  if (total_side > opt.side_cap)
    throw SdpError("interior point: total block side exceeds the cap");
  if (m == 0) throw SdpError("interior point: no constraints");

  std::vector<std::vector<ip_detail::Span>> block_spans(nb);
  for (int k = 0; k < m; ++k) {
    const auto& es = p.cons[k].a;
    int t = 0;
    while (t < int(es.size())) {
      int b = es[t].block, first = t;
      while (t < int(es.size()) && es[t].block == b) ++t;
      block_spans[b].push_back({k, first, t});
    }
  }

  VectorXd b_rhs(m);
  for (int k = 0; k < m; ++k) b_rhs(k) = p.cons[k].rhs;
  const double b_norm = b_rhs.cwiseAbs().maxCoeff();

  std::vector<MatrixXd> C(nb);
  for (int b = 0; b < nb; ++b) C[b] = MatrixXd::Zero(p.blocks[b].side, p.blocks[b].side);
  double c_norm = 0;
  for (const auto& e : p.obj) {
    C[e.block](e.i, e.j) = e.v;
    C[e.block](e.j, e.i) = e.v;
    c_norm = std::max(c_norm, std::abs(e.v));
  }

  std::vector<BlockKind> kind(nb);
  std::vector<int> side(nb);
  std::vector<MatrixXd> Xm(nb), Zm(nb), Wm(nb), Gm(nb), Gim(nb);
  std::vector<VectorXd> sig(nb);          // psd: NT scaled point diagonal
  std::vector<VectorXd> xv(nb), zv(nb), w2(nb), gv(nb);  // diag blocks
  const double init_x = std::max(10.0, 2.0 * b_norm);
  const double init_z = std::max(10.0, 2.0 * c_norm);
  double nu = 0;
  for (int b = 0; b < nb; ++b) {
    kind[b] = p.blocks[b].kind;
    side[b] = p.blocks[b].side;
    nu += side[b];
    if (kind[b] == BlockKind::psd) {
      Xm[b] = init_x * MatrixXd::Identity(side[b], side[b]);
      Zm[b] = init_z * MatrixXd::Identity(side[b], side[b]);
    } else {
      xv[b] = VectorXd::Constant(side[b], init_x);
      zv[b] = VectorXd::Constant(side[b], init_z);
    }
  }

  VectorXd y = VectorXd::Zero(m);

  auto apply_A = [&](VectorXd& out) {
    for (int k = 0; k < m; ++k) out(k) = 0;
    for (int b = 0; b < nb; ++b)
      for (const auto& sp : block_spans[b]) {
        const auto& es = p.cons[sp.con].a;
        double v = 0;
        if (kind[b] == BlockKind::psd) {
          v = ip_detail::block_inner(es, sp.first, sp.last, Xm[b]);
        } else {
          for (int t = sp.first; t < sp.last; ++t) v += es[t].v * xv[b](es[t].i);
        }
        out(sp.con) += v;
      }
  };

  std::vector<MatrixXd> Rdm(nb);
  std::vector<VectorXd> Rdv(nb);
  auto compute_rd = [&](const VectorXd& yy) {
    for (int b = 0; b < nb; ++b) {
      if (kind[b] == BlockKind::psd) Rdm[b] = C[b] - Zm[b];
      else Rdv[b] = C[b].diagonal() - zv[b];
    }
    for (int b = 0; b < nb; ++b)
      for (const auto& sp : block_spans[b]) {
        const double w = yy(sp.con);
        if (w == 0.0) continue;
        const auto& es = p.cons[sp.con].a;
        for (int t = sp.first; t < sp.last; ++t) {
          const auto& e = es[t];
          if (kind[b] == BlockKind::psd) {
            Rdm[b](e.i, e.j) -= w * e.v;
            if (e.i != e.j) Rdm[b](e.j, e.i) -= w * e.v;
          } else {
            Rdv[b](e.i) -= w * e.v;
          }
        }
      }
  };

  // Farkas test: does y' = y / (b^T y) satisfy sum_k y'_k A_k <= 0 ?
  auto farkas_certified = [&](const VectorXd& yy) -> bool {
    double by = b_rhs.dot(yy);
    if (!(by > 1e-8 * (1 + b_norm) * std::max(1.0, yy.cwiseAbs().maxCoeff()))) return false;
    double worst = -std::numeric_limits<double>::infinity();
    double scale = 1e-30;
    for (int b = 0; b < nb; ++b) {
      MatrixXd S = MatrixXd::Zero(side[b], side[b]);
      for (const auto& sp : block_spans[b]) {
        const double w = yy(sp.con) / by;
        if (w == 0.0) continue;
        const auto& es = p.cons[sp.con].a;
        for (int t = sp.first; t < sp.last; ++t) {
          const auto& e = es[t];
          S(e.i, e.j) += w * e.v;
          if (e.i != e.j) S(e.j, e.i) += w * e.v;
        }
      }
      scale = std::max(scale, S.cwiseAbs().maxCoeff());
      if (kind[b] == BlockKind::psd) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
        worst = std::max(worst, es.eigenvalues()(side[b] - 1));
      } else {
        worst = std::max(worst, S.diagonal().maxCoeff());
      }
    }
    return worst <= opt.cert_tol * std::max(1.0, scale);
  };

  SdpSolution best;
  double best_merit = std::numeric_limits<double>::infinity();
  VectorXd Ax(m);

  auto finalize = [&](SdpStatus st, int iters, const std::string& note) {
    SdpSolution s = best;
    s.status = st;
    s.iters = iters;
    s.note = note;
    if (canon.slack_block >= 0 && int(s.X.size()) > canon.slack_block) {
      s.X.erase(s.X.begin() + canon.slack_block);
      s.Z.erase(s.Z.begin() + canon.slack_block);
    }
    if (canon.negated) s.objective = -s.objective;
    s.objective += input.obj_offset;
    return s;
  };

  int consecutive_small_steps = 0;

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    /* residuals */
    apply_A(Ax);
    VectorXd rp = b_rhs - Ax;
    compute_rd(y);
    double rd_norm = 0;
    for (int b = 0; b < nb; ++b)
      rd_norm = std::max(rd_norm, kind[b] == BlockKind::psd
                                      ? Rdm[b].cwiseAbs().maxCoeff()
                                      : Rdv[b].cwiseAbs().maxCoeff());
    double mu = 0;
    double pobj = 0;
    for (int b = 0; b < nb; ++b) {
      if (kind[b] == BlockKind::psd) {
        mu += (Xm[b].array() * Zm[b].array()).sum();
        pobj += (C[b].array() * Xm[b].array()).sum();
      } else {
        mu += xv[b].dot(zv[b]);
        pobj += C[b].diagonal().dot(xv[b]);
      }
    }
    mu /= nu;
    const double dobj = b_rhs.dot(y);
    const double rel_p = rp.cwiseAbs().maxCoeff() / (1 + b_norm);
    const double rel_d = rd_norm / (1 + c_norm);
    const double rel_g = std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj));
    const double merit = std::max({rel_p, rel_d, rel_g});

    if (merit < best_merit) {
      best_merit = merit;
      best.objective = pobj;
      best.prim_res = rel_p;
      best.dual_res = rel_d;
      best.gap = rel_g;
      best.y = y;
      best.X.assign(nb, MatrixXd());
      best.Z.assign(nb, MatrixXd());
      for (int b = 0; b < nb; ++b) {
        if (kind[b] == BlockKind::psd) {
          best.X[b] = Xm[b];
          best.Z[b] = Zm[b];
        } else {
          best.X[b] = xv[b].asDiagonal();
          best.Z[b] = zv[b].asDiagonal();
        }
      }
    }

    if (opt.verbose)
      std::fprintf(stderr, "ip %3d  p %.2e d %.2e g %.2e mu %.2e\n", iter, rel_p,
                   rel_d, rel_g, mu);

    if (rel_p <= opt.tol && rel_d <= opt.tol && rel_g <= opt.tol)
      return finalize(SdpStatus::optimal, iter, "converged");

    if (farkas_certified(y))
      return finalize(SdpStatus::infeasible, iter, "farkas certificate in y");
    if (pobj < -1e12 * (1 + c_norm) && rel_p <= 1e-6)
      return finalize(SdpStatus::unbounded, iter, "primal objective diverging");
    if (y.cwiseAbs().maxCoeff() > 1e13)
      return finalize(SdpStatus::inaccurate, iter, "dual iterate diverged");

    /* NT scaling */
    bool scale_ok = true;
    for (int b = 0; b < nb && scale_ok; ++b) {
      if (kind[b] == BlockKind::psd) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> ex(Xm[b]);
        Eigen::SelfAdjointEigenSolver<MatrixXd> ez(Zm[b]);
        if (ex.eigenvalues()(0) <= 0 || ez.eigenvalues()(0) <= 0) {
          scale_ok = false;
          break;
        }
        MatrixXd fx = ex.operatorSqrt();
        MatrixXd fxi = ex.operatorInverseSqrt();
        MatrixXd fz = ez.operatorSqrt();
        Eigen::JacobiSVD<MatrixXd> svd(fz.transpose() * fx,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
        sig[b] = svd.singularValues();
        if (sig[b].minCoeff() <= 0) {
          scale_ok = false;
          break;
        }
        VectorXd si = sig[b].cwiseSqrt().cwiseInverse();
        Gm[b] = fx * svd.matrixV() * si.asDiagonal();
        Gim[b] = sig[b].cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * fxi;
        Wm[b] = Gm[b] * Gm[b].transpose();
      } else {
        w2[b] = xv[b].cwiseQuotient(zv[b]);
        if (!(w2[b].minCoeff() > 0)) scale_ok = false;
        else gv[b] = w2[b].cwiseSqrt();
      }
    }
    if (!scale_ok)
      return finalize(best_merit <= 1e3 * opt.tol ? SdpStatus::optimal
                                                  : SdpStatus::inaccurate,
                      iter, "scaling breakdown near the boundary");

    /* Schur complement H = A W A^T (upper triangle) */
    MatrixXd H = MatrixXd::Zero(m, m);
    for (int b = 0; b < nb; ++b) {
      const auto& spans = block_spans[b];
      if (kind[b] == BlockKind::psd) {
        const MatrixXd& W = Wm[b];
        MatrixXd T(side[b], side[b]);
        for (std::size_t si_ = 0; si_ < spans.size(); ++si_) {
          const auto& sk = spans[si_];
          const auto& esk = p.cons[sk.con].a;
          T.setZero();
          for (int t = sk.first; t < sk.last; ++t) {
            const auto& e = esk[t];
            if (e.i == e.j)
              T.noalias() += e.v * (W.col(e.i) * W.row(e.i));
            else {
              T.noalias() += e.v * (W.col(e.i) * W.row(e.j));
              T.noalias() += e.v * (W.col(e.j) * W.row(e.i));
            }
          }
          for (std::size_t sj = si_; sj < spans.size(); ++sj) {
            const auto& sl = spans[sj];
            double v = ip_detail::block_inner(p.cons[sl.con].a, sl.first, sl.last, T);
            if (sk.con <= sl.con) H(sk.con, sl.con) += v;
            else H(sl.con, sk.con) += v;
          }
        }
      } else {
        for (std::size_t si_ = 0; si_ < spans.size(); ++si_) {
          const auto& sk = spans[si_];
          const auto& esk = p.cons[sk.con].a;
          for (std::size_t sj = si_; sj < spans.size(); ++sj) {
            const auto& sl = spans[sj];
            const auto& esl = p.cons[sl.con].a;
            double v = 0;
            int ti = sk.first, tj = sl.first;
            while (ti < sk.last && tj < sl.last) {
              if (esk[ti].i < esl[tj].i) ++ti;
              else if (esk[ti].i > esl[tj].i) ++tj;
              else {
                v += esk[ti].v * esl[tj].v * w2[b](esk[ti].i);
                ++ti;
                ++tj;
              }
            }
            if (sk.con <= sl.con) H(sk.con, sl.con) += v;
            else H(sl.con, sk.con) += v;
          }
        }
      }
    }
    H = H.selfadjointView<Eigen::Upper>();

    Eigen::LLT<MatrixXd> hfac(H);
    double ridge = 0;
    while (hfac.info() != Eigen::Success && ridge < 1e-6 * H.trace() / m + 1e-8) {
      ridge = ridge == 0 ? 1e-12 * (1 + H.trace() / m) : ridge * 100;
      hfac.compute(H + ridge * MatrixXd::Identity(m, m));
    }
    if (hfac.info() != Eigen::Success)
      return finalize(SdpStatus::inaccurate, iter, "schur factorization failed");

    std::vector<MatrixXd> Rcm(nb), dXm(nb), dZm(nb), dLx(nb), dLz(nb);
    std::vector<VectorXd> rcv(nb), dxv(nb), dzv(nb);

    // Solve the Newton system for the current Rc; fill dX, dZ and the scaled
    // directions dLx = G^{-1} dX G^{-T}, dLz = G^T dZ G.
    auto solve_newton = [&]() {
      VectorXd rhs = rp;
      for (int b = 0; b < nb; ++b) {
        if (kind[b] == BlockKind::psd) {
          MatrixXd Q = Wm[b] * Rdm[b] * Wm[b] - Rcm[b];
          for (const auto& sp : block_spans[b])
            rhs(sp.con) += ip_detail::block_inner(p.cons[sp.con].a, sp.first, sp.last, Q);
        } else {
          VectorXd q = w2[b].cwiseProduct(Rdv[b]) - rcv[b];
          for (const auto& sp : block_spans[b]) {
            const auto& es = p.cons[sp.con].a;
            double v = 0;
            for (int t = sp.first; t < sp.last; ++t) v += es[t].v * q(es[t].i);
            rhs(sp.con) += v;
          }
        }
      }
      VectorXd dy = hfac.solve(rhs);
      for (int b = 0; b < nb; ++b) {
        if (kind[b] == BlockKind::psd) {
          MatrixXd Aty = MatrixXd::Zero(side[b], side[b]);
          for (const auto& sp : block_spans[b]) {
            const double w = dy(sp.con);
            if (w == 0.0) continue;
            const auto& es = p.cons[sp.con].a;
            for (int t = sp.first; t < sp.last; ++t) {
              Aty(es[t].i, es[t].j) += w * es[t].v;
              if (es[t].i != es[t].j) Aty(es[t].j, es[t].i) += w * es[t].v;
            }
          }
          dZm[b] = Rdm[b] - Aty;
          dXm[b] = Rcm[b] - Wm[b] * dZm[b] * Wm[b];
          dXm[b] = 0.5 * (dXm[b] + dXm[b].transpose()).eval();
          MatrixXd t1 = Gim[b] * dXm[b] * Gim[b].transpose();
          dLx[b] = 0.5 * (t1 + t1.transpose());
          MatrixXd t2 = Gm[b].transpose() * dZm[b] * Gm[b];
          dLz[b] = 0.5 * (t2 + t2.transpose());
        } else {
          VectorXd aty = VectorXd::Zero(side[b]);
          for (const auto& sp : block_spans[b]) {
            const double w = dy(sp.con);
            if (w == 0.0) continue;
            const auto& es = p.cons[sp.con].a;
            for (int t = sp.first; t < sp.last; ++t) aty(es[t].i) += w * es[t].v;
          }
          dzv[b] = Rdv[b] - aty;
          dxv[b] = rcv[b] - w2[b].cwiseProduct(dzv[b]);
        }
      }
      return dy;
    };

    auto step_lengths = [&](double& ap, double& ad) {
      ap = 1e30;
      ad = 1e30;
      for (int b = 0; b < nb; ++b) {
        if (kind[b] == BlockKind::psd) {
          ap = std::min(ap, ip_detail::scaled_alpha(sig[b], dLx[b]));
          ad = std::min(ad, ip_detail::scaled_alpha(sig[b], dLz[b]));
        } else {
          for (int i = 0; i < side[b]; ++i) {
            if (dxv[b](i) < 0) ap = std::min(ap, -xv[b](i) / dxv[b](i));
            if (dzv[b](i) < 0) ad = std::min(ad, -zv[b](i) / dzv[b](i));
          }
        }
      }
      ap = std::min(1.0, 0.99 * ap);
      ad = std::min(1.0, 0.99 * ad);
    };

    /* predictor: Rc = -X */
    for (int b = 0; b < nb; ++b) {
      if (kind[b] == BlockKind::psd) Rcm[b] = -Xm[b];
      else rcv[b] = -xv[b];
    }
    solve_newton();
    double ap, ad;
    step_lengths(ap, ad);
    double mu_aff = 0;
    for (int b = 0; b < nb; ++b) {
      if (kind[b] == BlockKind::psd)
        mu_aff += ((Xm[b] + ap * dXm[b]).array() * (Zm[b] + ad * dZm[b]).array()).sum();
      else
        mu_aff += (xv[b] + ap * dxv[b]).dot(zv[b] + ad * dzv[b]);
    }
    mu_aff = std::max(mu_aff / nu, 0.0);
    double sigma = std::pow(std::min(1.0, mu_aff / std::max(mu, 1e-300)), 3.0);
    sigma = std::min(std::max(sigma, 1e-10), 1.0);

    /* corrector in the scaled space, where the NT point is diag(sig) */
    for (int b = 0; b < nb; ++b) {
      if (kind[b] == BlockKind::psd) {
        const int s = side[b];
        MatrixXd rhs_s = -0.5 * (dLx[b] * dLz[b] + dLz[b] * dLx[b]);
        for (int i2 = 0; i2 < s; ++i2) rhs_s(i2, i2) += sigma * mu - sig[b](i2) * sig[b](i2);
        for (int i2 = 0; i2 < s; ++i2)
          for (int j2 = 0; j2 < s; ++j2)
            rhs_s(i2, j2) *= 2.0 / (sig[b](i2) + sig[b](j2));
        Rcm[b] = Gm[b] * rhs_s * Gm[b].transpose();
        Rcm[b] = 0.5 * (Rcm[b] + Rcm[b].transpose()).eval();
      } else {
        rcv[b] = ((sigma * mu) * VectorXd::Ones(side[b]) -
                  xv[b].cwiseProduct(zv[b]) - dxv[b].cwiseProduct(dzv[b]))
                     .cwiseQuotient(zv[b]);
      }
    }
    VectorXd dy = solve_newton();
    step_lengths(ap, ad);

    for (int b = 0; b < nb; ++b) {
      if (kind[b] == BlockKind::psd) {
        Xm[b] += ap * dXm[b];
        Zm[b] += ad * dZm[b];
      } else {
        xv[b] += ap * dxv[b];
        zv[b] += ad * dzv[b];
      }
    }
    y += ad * dy;

    if (ap < 1e-4 && ad < 1e-4) {
      if (++consecutive_small_steps >= 5)
        return finalize(best_merit <= 1e3 * opt.tol ? SdpStatus::optimal
                                                    : SdpStatus::inaccurate,
                        iter, "step lengths collapsed");
    } else {
      consecutive_small_steps = 0;
    }
  }

  return finalize(best_merit <= opt.tol ? SdpStatus::optimal : SdpStatus::iter_limit,
                  opt.max_iters, "iteration limit");
}

}  // namespace qnl
