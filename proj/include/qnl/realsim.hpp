#pragma once
// Simulation of complex quantum models by real ones with a delocalized
// phase-reference register: one rebit per site, jointly encoding a logical
// rebit on which the J rotation acts like the imaginary unit.
//
// Conventions: a lifted object lives on (registers) tensor (rebits), rebits
// appended last. frame vectors r, i live on n rebits; the lift of a complex
// density matrix rho is rho_re x (rr'+ii')/2 + rho_im x (ir'-ri')/2.

#include <cmath>
#include <string>
#include <vector>

#include "qnl/bellnet.hpp"
#include "qnl/qmat.hpp"

namespace qnl {

/* ---- phase frame ---- */

// J = i sigma_y, the real rotation standing in for the imaginary unit.
inline Mat j_op() {
  Eigen::MatrixXd j(2, 2);
  j << 0, 1, -1, 0;
  return real_mat(j);
}

// frame_r(n)[b] ~ cos(pi |b| / 2), frame_i(n)[b] ~ -sin(pi |b| / 2): the real
// and imaginary logical vectors of the y+/y- encoding on n rebits.
inline Mat frame_r(int n) {
  long d = 1L << n;
  Mat v = Mat::zero(Field::real, d, 1);
  double norm = std::sqrt(2.0 * double(1L << n));
  for (long b = 0; b < d; ++b) {
    int ones = __builtin_popcountll(b);
    int rem = ones % 4;
    double c = rem == 0 ? 1.0 : rem == 2 ? -1.0 : 0.0;
    v.re(b, 0) = 2.0 * c / norm;
  }
  return v;
}

inline Mat frame_i(int n) {
  long d = 1L << n;
  Mat v = Mat::zero(Field::real, d, 1);
  double norm = std::sqrt(2.0 * double(1L << n));
  for (long b = 0; b < d; ++b) {
    int ones = __builtin_popcountll(b);
    int rem = ones % 4;
    double s = rem == 1 ? 1.0 : rem == 3 ? -1.0 : 0.0;
    v.re(b, 0) = -2.0 * s / norm;
  }
  return v;
}

// Dephased frame density (rr' + ii') / 2: the state actually shared.
inline Mat frame_state(int n) {
  Mat r = frame_r(n), i = frame_i(n);
  return scale(add(outer(r, r), outer(i, i)), 0.5);
}

// Antisymmetric part (ir' - ri') / 2 carrying the imaginary components.
inline Mat frame_flip(int n) {
  Mat r = frame_r(n), i = frame_i(n);
  return scale(sub(outer(i, r), outer(r, i)), 0.5);
}

/* ---- lifts ---- */

// Real image of a complex density matrix with an n-rebit frame attached.
inline Mat lift_state(const Mat& rho, int n) {
  Mat c = rho.to_field(Field::cplx);
  Mat out = tensor(real_mat(c.re), frame_state(n));
  if (c.im.cwiseAbs().maxCoeff() > 0)
    out = add(out, tensor(real_mat(c.im), frame_flip(n)));
  return out;
}

// Real image of a complex operator; the J factor may act on any one rebit.
inline Mat lift_op(const Mat& m, int n, int rebit) {
  Mat c = m.to_field(Field::cplx);
  std::vector<int> ldims(n, 2);
  Mat out = tensor(real_mat(c.re), Mat::id(Field::real, 1L << n));
  if (c.im.cwiseAbs().maxCoeff() > 0)
    out = add(out, tensor(real_mat(c.im), embed_op(j_op(), {rebit}, ldims)));
  return out;
}

/* ---- local broadcast ---- */

// Orthogonal map copying the y-basis of one rebit onto a fresh |0> rebit:
// |y+,0> -> |y+,y+> and |y-,0> -> |y-,y->, hence frame(n) -> frame(n+1).
inline Mat broadcast_unitary() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd u(4, 4);
  u << r, r, 0, 0,
       0, 0, r, -r,
       0, 0, r, r,
       -r, r, 0, 0;
  return real_mat(u);
}

// Append a fresh rebit (last site) and entangle it with the rebit at `site`.
inline Mat broadcast_rebit(const Mat& state, const std::vector<int>& dims, int site) {
  Mat zero = Mat::zero(Field::real, 2, 2);
  zero.re(0, 0) = 1.0;
  Mat grown = tensor(state, zero);
  std::vector<int> dims2 = dims;
  dims2.push_back(2);
  Mat u = embed_op(broadcast_unitary(), {site, int(dims2.size()) - 1}, dims2);
  return mul(u, grown, transpose(u));
}

/* ---- complexification check ---- */

// Choi matrix of a Kraus map read over the complex field.
inline Mat kraus_choi(const KrausMap& km) {
  long din = km.ks.at(0).cols(), dout = km.ks.at(0).rows();
  Mat choi = Mat::zero(Field::cplx, din * dout, din * dout);
  for (const auto& k : km.ks) {
    Mat kc = k.to_field(Field::cplx);
    Mat v = Mat::zero(Field::cplx, din * dout, 1);
    for (long i = 0; i < din; ++i)
      for (long o = 0; o < dout; ++o) {
        v.re(i * dout + o, 0) = kc.re(o, i);
        v.im(i * dout + o, 0) = kc.im(o, i);
      }
    choi = add(choi, outer(v, v));
  }
  return choi;
}

// How far the complexified map is from completely positive (0 for CP).
inline double complexification_cp_defect(const KrausMap& km) {
  return std::max(0.0, -min_eig(kraus_choi(km)));
}

// Choi matrix of the transpose map: the swap operator, with negative
// eigenvalues. Kept as the reference non-CP control.
inline Mat transpose_map_choi(int d) {
  Mat s = Mat::zero(Field::real, long(d) * d, long(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s.re(i * d + j, j * d + i) = 1.0;
  return s;
}

/* ---- network simulation ---- */

struct NetworkAudit {
  std::string actor;
  std::string op;
  std::vector<int> touched;  // final site indexing: registers 0..3, rebits 4..8
};

struct NetworkSim {
  Behavior behavior;            // produced by the real model
  double score = 0;             // functional value of that behavior
  double behavior_defect = 0;   // worst entry gap to the complex model
  double prep_defect = 0;       // sources' output vs the target lift, before broadcast
  double pre_measure_defect = 0;   // distributed state vs the 5-rebit lift
  double source_frame_defect = 0;  // source rebit marginal vs frame_state(2)
  double post_frame_defect = 0;    // same after a measurement update
  double post_state_defect = 0;    // updated state vs the lifted complex posterior
  std::vector<NetworkAudit> log;
};

namespace realsim_detail {

// Complex unitary whose first column is psi (Gram-Schmidt completion).
inline Mat prep_unitary(const Mat& psi) {
  long d = psi.rows();
  Mat u = Mat::zero(Field::cplx, d, d);
  Mat p = psi.to_field(Field::cplx);
  u.re.col(0) = p.re.col(0);
  u.im.col(0) = p.im.col(0);
  long have = 1;
  for (long k = 0; k < d && have < d; ++k) {
    Eigen::VectorXd re = Eigen::VectorXd::Zero(d), im = Eigen::VectorXd::Zero(d);
    re(k) = 1.0;
    for (long j = 0; j < have; ++j) {
      double cr = u.re.col(j).dot(re) + u.im.col(j).dot(im);
      double ci = u.re.col(j).dot(im) - u.im.col(j).dot(re);
      re -= cr * u.re.col(j) - ci * u.im.col(j);
      im -= cr * u.im.col(j) + ci * u.re.col(j);
    }
    double nrm = std::sqrt(re.squaredNorm() + im.squaredNorm());
    if (nrm < 1e-8) continue;
    u.re.col(have) = re / nrm;
    u.im.col(have) = im / nrm;
    ++have;
  }
  if (have != d) throw ValidationError("prep_unitary: completion failed");
  return u;
}

inline void log_op(NetworkSim& sim, std::string actor, std::string op, std::vector<int> touched) {
  static const std::vector<std::vector<int>> owned = {
      {0, 1, 4, 6, 7},  // source1: its pair, its rebit, the rebits it creates
      {2, 3, 5, 8},     // source2
      {0, 6},           // alice
      {1, 2, 7},        // bob
      {3, 8},           // charlie
  };
  static const std::vector<std::string> names = {"source1", "source2", "alice", "bob", "charlie"};
  for (size_t k = 0; k < names.size(); ++k)
    if (names[k] == actor) {
      for (int t : touched) {
        bool ok = false;
        for (int s : owned[k]) ok = ok || s == t;
        if (!ok) throw ValidationError("network audit: " + actor + " touched a foreign site");
      }
      sim.log.push_back({std::move(actor), std::move(op), std::move(touched)});
      return;
    }
  throw ValidationError("network audit: unknown actor " + actor);
}

}  // namespace realsim_detail

// Run the two-source network strategy entirely inside the real model: the
// sources share only the two-rebit frame, prepare their pairs locally,
// broadcast one frame rebit to each party, and the parties measure lifted
// POVMs on their own register and rebit. Defects quantify how exactly the
// real run reproduces the complex one.
inline NetworkSim simulate_network(const Strategy& strat) {
  if (strat.da != 2 || strat.db != 4 || strat.dc != 2)
    throw ValidationError("simulate_network: expected qubit-pair sources");
  NetworkSim sim;
  const std::vector<int> cdims{2, 2, 2, 2};

  Mat rho1 = partial_trace(strat.state, {0, 1}, cdims);
  Mat rho2 = partial_trace(strat.state, {2, 3}, cdims);
  if (max_abs(sub(tensor(rho1, rho2), strat.state)) > 1e-10)
    throw ValidationError("simulate_network: strategy state is not a product of two sources");

  // Sources prepare spectral branches of their pair through lifted unitaries
  // acting on their own registers and their own frame rebit.
  Eigh e1 = eigh(rho1), e2 = eigh(rho2);
  Mat v1 = e1.vecs.to_field(Field::cplx), v2 = e2.vecs.to_field(Field::cplx);
  std::vector<int> dims6{2, 2, 2, 2, 2, 2};
  Mat ket0 = Mat::zero(Field::cplx, 16, 16);
  ket0.re(0, 0) = 1.0;
  Mat base = lift_state(ket0, 2);  // |0000> with the shared two-rebit frame
  Mat state = Mat::zero(Field::real, 64, 64);
  for (long i = 0; i < 4; ++i) {
    if (e1.vals[i] < 1e-12) continue;
    Mat psi1 = Mat::zero(Field::cplx, 4, 1);
    psi1.re = v1.re.col(i);
    psi1.im = v1.im.col(i);
    Mat u1 = embed_op(realsim_detail::prep_unitary(psi1), {0, 1}, cdims);
    Mat lu1 = lift_op(u1, 2, 0);
    for (long j = 0; j < 4; ++j) {
      if (e2.vals[j] < 1e-12) continue;
      Mat psi2 = Mat::zero(Field::cplx, 4, 1);
      psi2.re = v2.re.col(j);
      psi2.im = v2.im.col(j);
      Mat u2 = embed_op(realsim_detail::prep_unitary(psi2), {2, 3}, cdims);
      Mat lu2 = lift_op(u2, 2, 1);
      Mat branch = mul(lu2, mul(lu1, base, transpose(lu1)), transpose(lu2));
      state = add(state, scale(branch, e1.vals[i] * e2.vals[j]));
    }
  }
  realsim_detail::log_op(sim, "source1", "prepare pair from spectral branches", {0, 1, 4});
  realsim_detail::log_op(sim, "source2", "prepare pair from spectral branches", {2, 3, 5});
  sim.prep_defect = max_abs(sub(state, lift_state(tensor(rho1, rho2), 2)));

  // Distribute one frame rebit per party: source1 serves alice and bob,
  // source2 serves charlie.
  state = broadcast_rebit(state, dims6, 4);
  realsim_detail::log_op(sim, "source1", "broadcast frame rebit to alice", {4, 6});
  std::vector<int> dims7 = dims6;
  dims7.push_back(2);
  state = broadcast_rebit(state, dims7, 4);
  realsim_detail::log_op(sim, "source1", "broadcast frame rebit to bob", {4, 7});
  std::vector<int> dims8 = dims7;
  dims8.push_back(2);
  state = broadcast_rebit(state, dims8, 5);
  realsim_detail::log_op(sim, "source2", "broadcast frame rebit to charlie", {5, 8});
  std::vector<int> dims9 = dims8;
  dims9.push_back(2);

  sim.pre_measure_defect = max_abs(sub(state, lift_state(tensor(rho1, rho2), 5)));
  sim.source_frame_defect =
      max_abs(sub(partial_trace(state, {4, 5}, dims9), frame_state(2)));

  // Lifted measurements: each party's element acts on its register(s) and
  // its own rebit (J on rebits 2, 3, 4 of the five-rebit frame).
  auto lifted_party = [&](const Mat& el, const std::vector<int>& sites, int rebit) {
    return lift_op(embed_op(el, sites, cdims), 5, rebit);
  };
  std::vector<std::vector<Mat>> la(kNA), lc(kNC);
  std::vector<Mat> lb;
  for (int x = 0; x < kNA; ++x)
    for (int a = 0; a < 2; ++a) la[x].push_back(lifted_party(strat.alice[x][a], {0}, 2));
  for (int b = 0; b < 4; ++b) lb.push_back(lifted_party(strat.bob[b], {1, 2}, 3));
  for (int z = 0; z < kNC; ++z)
    for (int c = 0; c < 2; ++c) lc[z].push_back(lifted_party(strat.charlie[z][c], {3}, 4));
  for (int x = 0; x < kNA; ++x)
    realsim_detail::log_op(sim, "alice", "measure setting " + std::to_string(x + 1), {0, 6});
  realsim_detail::log_op(sim, "bob", "measure", {1, 2, 7});
  for (int z = 0; z < kNC; ++z)
    realsim_detail::log_op(sim, "charlie", "measure setting " + std::to_string(z + 1), {3, 8});

  Behavior complex_q = behavior_from_strategy(strat);
  for (int x = 0; x < kNA; ++x)
    for (int a = 0; a < 2; ++a) {
      Mat t1 = mul(la[x][a], state);
      for (int b = 0; b < 4; ++b) {
        Mat t2 = mul(lb[b], t1);
        for (int z = 0; z < kNC; ++z)
          for (int c = 0; c < 2; ++c) {
            double p = hs_inner(lc[z][c], t2);  // all factors symmetric
            sim.behavior.at(x, z, a, b, c) = p;
            sim.behavior_defect = std::max(
                sim.behavior_defect, std::abs(p - complex_q.at(x, z, a, b, c)));
          }
      }
    }
  sim.score = bell_score(sim.behavior);

  // One explicit update: alice applies the square-root instrument of her
  // first setting, outcome +. The real posterior must be the lift of the
  // complex posterior, and the sources' frame must survive for reuse.
  {
    Mat k = psd_sqrt(strat.alice[0][0].to_field(Field::cplx));
    Mat kfull = embed_op(k, {0}, cdims);
    Mat lk = lifted_party(k, {0}, 2);
    Mat post = mul(lk, state, transpose(lk));
    double p = trace_re(post);
    post = scale(post, 1.0 / p);
    Mat cpost = mul(kfull, tensor(rho1, rho2), dagger(kfull));
    cpost = scale(cpost, 1.0 / trace_re(cpost));
    sim.post_state_defect = max_abs(sub(post, lift_state(cpost, 5)));
    sim.post_frame_defect =
        max_abs(sub(partial_trace(post, {4, 5}, dims9), frame_state(2)));
  }
  return sim;
}

}  // namespace qnl
