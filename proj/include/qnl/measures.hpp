#pragma once
// Distance and entanglement measures for real two-qubit (rebit pair) states.
//
// The separability distance is an SDP: trace distance to the set
// { sigma >= 0, tr sigma = 1, sigma^{T_1} = sigma }, which is exactly the
// real-separable set in dimension 2x2. The independence distance (distance
// to product states) is sandwiched between that SDP value and an alternating
// product fit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "qnl/qmat.hpp"
#include "qnl/rng.hpp"
#include "qnl/sdp.hpp"
#include "qnl/sdp_interior.hpp"

namespace qnl {

/* ---- linear independence certificate ---- */

// Certified maximum of the network functional over real models with fully
// independent sources (level-2 relaxation value, rounded up).
inline constexpr double kRealNetworkBound = 7.66;

// Minimal source correlation implied by an observed score: every real model
// with correlation eps is capped at kRealNetworkBound + 12 sqrt(2) eps.
inline double epsilon_lower_bound(double score) {
  return std::max(0.0, (score - kRealNetworkBound) / (12.0 * std::sqrt(2.0)));
}

/* ---- entanglement of formation ---- */

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

// sigma_y tensor sigma_y is real for rebit pairs.
inline Mat spin_flip_form() {
  Eigen::MatrixXd yy = Eigen::MatrixXd::Zero(4, 4);
  yy(0, 3) = -1;
  yy(1, 2) = 1;
  yy(2, 1) = 1;
  yy(3, 0) = -1;
  return real_mat(yy);
}

inline double concurrence_two_rebit(const Mat& rho) {
  density_matrix(rho, {2, 2});
  if (rho.field != Field::real) throw ValidationError("concurrence_two_rebit: state must be real");
  return std::min(1.0, std::abs(hs_inner(spin_flip_form(), rho)));
}

inline double ef_two_rebit(const Mat& rho) {
  double c = concurrence_two_rebit(rho);
  return binary_entropy(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c))));
}

/* ---- pure state helpers ---- */

// Schmidt coefficients (descending) of a bipartite pure vector.
inline std::vector<double> schmidt_coeffs(const Mat& psi, int da, int db) {
  if (psi.cols() != 1 || psi.rows() != long(da) * db)
    throw ValidationError("schmidt_coeffs: vector shape mismatch");
  Mat m = Mat::zero(psi.field, da, db);
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b) {
      m.re(a, b) = psi.re(a * db + b, 0);
      if (psi.field == Field::cplx) m.im(a, b) = psi.im(a * db + b, 0);
    }
  Eigh eg = eigh(mul(m, dagger(m)));
  std::vector<double> out;
  for (long k = eg.vals.size() - 1; k >= 0; --k)
    out.push_back(std::sqrt(std::max(0.0, eg.vals[k])));
  return out;
}

// Upper bound on the separability distance of a two-qubit pure state: the
// product of its Schmidt coefficients, at most 1/2, tight for Bell states.
inline double pure_sep_upper(const Mat& psi) {
  auto sc = schmidt_coeffs(psi, 2, 2);
  return sc[0] * sc[1];
}

/* ---- separability distance SDP ---- */

struct SepDistance {
  double value = 0;   // SDP optimum
  double td = 0;      // trace distance from rho to the optimizer
  Mat sigma;          // closest invariant state
  SdpStatus status = SdpStatus::optimal;
};

namespace measures_detail {

// Index of (r, c) after transposing the first tensor factor of a dxd x dxd
// system, acting on row indices r = a*d + b.
inline std::pair<int, int> pt_first_image(int r, int c, int d) {
  int a = r / d, b = r % d, a2 = c / d, b2 = c % d;
  return {a2 * d + b, a * d + b2};
}

// Equalities pinning sigma^{T_1} = sigma for a symmetric matrix: one row per
// unordered entry pair exchanged by the partial transpose.
inline void add_pt_invariance(SdpProblem& p, int block, int d) {
  std::set<std::pair<int, int>> done;
  for (int i = 0; i < d * d; ++i)
    for (int j = i; j < d * d; ++j) {
      auto [i2, j2] = pt_first_image(i, j, d);
      if (i2 > j2) std::swap(i2, j2);
      std::pair<int, int> a{i, j}, b{i2, j2};
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (!done.insert(a).second) continue;
      SdpConstraint con;
      con.a.push_back({block, a.first, a.second, a.first == a.second ? 1.0 : 0.5});
      con.a.push_back({block, b.first, b.second, b.first == b.second ? -1.0 : -0.5});
      con.rhs = 0;
      p.cons.push_back(std::move(con));
    }
}

// Shared frame: block 0 is the 8x8 witness Gram matrix whose off-diagonal
// corner is pinned to rho minus the candidate state; minimizing a quarter of
// its trace yields the trace distance (Watrous' SDP).
inline SdpProblem distance_frame() {
  SdpProblem p;
  p.sense = Sense::min;
  p.add_block("gram", 8, BlockKind::psd);
  for (int k = 0; k < 8; ++k) p.obj.push_back({0, k, k, 0.25});
  return p;
}

}  // namespace measures_detail

inline SepDistance dsep_two_rebit(const Mat& rho, const InteriorOpts& opt = {}) {
  density_matrix(rho, {2, 2});
  if (rho.field != Field::real) throw ValidationError("dsep_two_rebit: state must be real");

  SdpProblem p = measures_detail::distance_frame();
  int sig = p.add_block("sigma", 4, BlockKind::psd);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      SdpConstraint con;
      con.a.push_back({0, i, 4 + j, 0.5});
      con.a.push_back({sig, std::min(i, j), std::max(i, j), i == j ? 1.0 : 0.5});
      con.rhs = rho.re(i, j);
      p.cons.push_back(std::move(con));
    }
  SdpConstraint tr;
  for (int k = 0; k < 4; ++k) tr.a.push_back({sig, k, k, 1.0});
  tr.rhs = 1;
  p.cons.push_back(std::move(tr));
  measures_detail::add_pt_invariance(p, sig, 2);

  SdpSolution sol = solve_interior_point(p, opt);
  SepDistance out;
  out.status = sol.status;
  out.value = sol.objective;
  if (sol.status == SdpStatus::optimal || sol.status == SdpStatus::inaccurate) {
    out.sigma = real_mat(sol.X.at(sig));
    out.sigma = scale(add(out.sigma, transpose(out.sigma)), 0.5);
    out.td = trace_distance(rho, out.sigma);
  }
  return out;
}

/* ---- independence distance ---- */

struct IndBounds {
  double lower = 0;  // separability distance
  double upper = 0;  // best product fit found
  Mat sigma_a, sigma_b;
  int rounds = 0;
};

namespace measures_detail {

// Best trace distance to { t tensor fixed } (side == 0) or { fixed tensor t }
// (side == 1) over the free 2x2 factor t.
inline std::pair<double, Mat> best_factor(const Mat& rho, const Mat& fixed, int side,
                                          const InteriorOpts& opt) {
  SdpProblem p = distance_frame();
  int tb = p.add_block("factor", 2, BlockKind::psd);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      int a = i / 2, b = i % 2, a2 = j / 2, b2 = j % 2;
      int fi = side == 0 ? a : b, fj = side == 0 ? a2 : b2;
      double w = side == 0 ? fixed.re(b, b2) : fixed.re(a, a2);
      SdpConstraint con;
      con.a.push_back({0, i, 4 + j, 0.5});
      double v = (fi == fj ? 1.0 : 0.5) * w;
      if (v != 0.0) con.a.push_back({tb, std::min(fi, fj), std::max(fi, fj), v});
      con.rhs = rho.re(i, j);
      p.cons.push_back(std::move(con));
    }
  SdpConstraint tr;
  tr.a.push_back({tb, 0, 0, 1.0});
  tr.a.push_back({tb, 1, 1, 1.0});
  tr.rhs = 1;
  p.cons.push_back(std::move(tr));

  SdpSolution sol = solve_interior_point(p, opt);
  if (sol.status != SdpStatus::optimal && sol.status != SdpStatus::inaccurate)
    throw SdpError(std::string("best_factor: solve failed: ") + to_string(sol.status));
  Mat t = real_mat(sol.X.at(tb));
  t = scale(add(t, transpose(t)), 0.5);
  ClipResult cr = clip_psd(t);
  return {sol.objective, scale(cr.m, 1.0 / trace_re(cr.m))};
}

}  // namespace measures_detail

// Alternating descent of D(rho, a tensor b) from several starting factors;
// the first start is the maximally mixed factor, the rest are random.
inline IndBounds dind_bounds(const Mat& rho, int n_starts = 8, std::uint64_t seed = 0,
                             const InteriorOpts& opt = {}) {
  density_matrix(rho, {2, 2});
  if (rho.field != Field::real) throw ValidationError("dind_bounds: state must be real");

  IndBounds out;
  out.lower = dsep_two_rebit(rho, opt).value;
  out.upper = 1e300;
  Rng base(seed);
  for (int start = 0; start < std::max(1, n_starts); ++start) {
    Rng rk = base.fork(start);
    Mat b = start == 0 ? scale(Mat::id(Field::real, 2), 0.5) : random_state(Field::real, 2, rk).m;
    Mat a = b;
    double val = 1e300;
    int round = 0;
    for (; round < 40; ++round) {
      auto [va, na] = measures_detail::best_factor(rho, b, 0, opt);
      a = na;
      auto [vb, nb] = measures_detail::best_factor(rho, a, 1, opt);
      b = nb;
      if (val - vb < 1e-9) {
        val = std::min(val, vb);
        break;
      }
      val = vb;
    }
    if (val < out.upper) {
      out.upper = val;
      out.sigma_a = a;
      out.sigma_b = b;
      out.rounds = round + 1;
    }
  }
  return out;
}

}  // namespace qnl
