#pragma once
// Tripartite line-network Bell functional and strategy optimization.
//
// Parties: A (3 settings), B (no setting, 4 outcomes), C (6 settings);
// A and C have outcomes +1/-1 stored as indices 0/1. Bob outcomes carry two
// bits b = (b1, b2) stored as b = 2*b1 + b2. The functional combines three
// CHSH-style blocks between A and C conditioned on b through two-body
// correlators S^b_xz = sum_{a,c} sign(a) sign(c) p(a, b, c | x, z).

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qnl/io_json.hpp"
#include "qnl/qmat.hpp"
#include "qnl/rng.hpp"

namespace qnl {

inline constexpr int kNA = 3;  // Alice settings
inline constexpr int kNC = 6;  // Charlie settings

// Maximum of the functional over all (complex) quantum models, attained by
// the two-singlet strategy below.
inline const double kComplexMaxScore = 6.0 * std::sqrt(2.0);

struct Behavior {
  // p[x][z][a][b][c]
  double p[kNA][kNC][2][4][2] = {};

  double& at(int x, int z, int a, int b, int c) { return p[x][z][a][b][c]; }
  double at(int x, int z, int a, int b, int c) const { return p[x][z][a][b][c]; }
};

// Coefficient of S^b_xz in the functional; x, z are 0-based.
inline double bell_weight(int x, int z, int b) {
  const int b1 = (b >> 1) & 1, b2 = b & 1;
  const double s1 = (b1 ? -1.0 : 1.0);
  const double s2 = (b2 ? -1.0 : 1.0);
  const double s12 = s1 * s2;
  switch (x * 10 + z) {
    case 0 * 10 + 0: return s2;    // (1,1)
    case 0 * 10 + 1: return s2;    // (1,2)
    case 1 * 10 + 0: return s1;    // (2,1)
    case 1 * 10 + 1: return -s1;   // (2,2)
    case 0 * 10 + 2: return s2;    // (1,3)
    case 0 * 10 + 3: return s2;    // (1,4)
    case 2 * 10 + 2: return -s12;  // (3,3)
    case 2 * 10 + 3: return s12;   // (3,4)
    case 1 * 10 + 4: return s1;    // (2,5)
    case 1 * 10 + 5: return s1;    // (2,6)
    case 2 * 10 + 4: return -s12;  // (3,5)
    case 2 * 10 + 5: return s12;   // (3,6)
    default: return 0.0;
  }
}

inline double correlator(const Behavior& q, int x, int z, int b) {
  double s = 0;
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      s += (a ? -1.0 : 1.0) * (c ? -1.0 : 1.0) * q.at(x, z, a, b, c);
  return s;
}

inline double bell_score(const Behavior& q) {
  double v = 0;
  for (int b = 0; b < 4; ++b)
    for (int x = 0; x < kNA; ++x)
      for (int z = 0; z < kNC; ++z) {
        double w = bell_weight(x, z, b);
        if (w != 0.0) v += w * correlator(q, x, z, b);
      }
  return v;
}

// Score restricted to one Bob outcome (the functional is their sum).
inline double bell_score_sector(const Behavior& q, int b) {
  double v = 0;
  for (int x = 0; x < kNA; ++x)
    for (int z = 0; z < kNC; ++z) {
      double w = bell_weight(x, z, b);
      if (w != 0.0) v += w * correlator(q, x, z, b);
    }
  return v;
}

// Largest violation of normalization and no-signaling:
// each p(.|x,z) sums to 1; the AB marginal is independent of z; the BC
// marginal is independent of x.
inline double ns_check(const Behavior& q) {
  double worst = 0;
  for (int x = 0; x < kNA; ++x)
    for (int z = 0; z < kNC; ++z) {
      double s = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 2; ++c) s += q.at(x, z, a, b, c);
      worst = std::max(worst, std::abs(s - 1.0));
    }
  for (int x = 0; x < kNA; ++x)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 4; ++b) {
        double ref = q.at(x, 0, a, b, 0) + q.at(x, 0, a, b, 1);
        for (int z = 1; z < kNC; ++z) {
          double v = q.at(x, z, a, b, 0) + q.at(x, z, a, b, 1);
          worst = std::max(worst, std::abs(v - ref));
        }
      }
  for (int z = 0; z < kNC; ++z)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 2; ++c) {
        double ref = q.at(0, z, 0, b, c) + q.at(0, z, 1, b, c);
        for (int x = 1; x < kNA; ++x) {
          double v = q.at(x, z, 0, b, c) + q.at(x, z, 1, b, c);
          worst = std::max(worst, std::abs(v - ref));
        }
      }
  return worst;
}

/* ---- strategies ---- */

struct Strategy {
  int da = 2, db = 4, dc = 2;
  Mat state;  // density matrix on da*db*dc, subsystem order (A, B, C)
  std::vector<std::array<Mat, 2>> alice;    // [x][a], da x da
  std::vector<Mat> bob;                     // [b], db x db
  std::vector<std::array<Mat, 2>> charlie;  // [z][c], dc x dc
};

// POVM completeness and positivity across all parties, plus state validity.
inline void strategy_check(const Strategy& s, double tol = 1e-9) {
  density_matrix(s.state, {s.da, s.db, s.dc});
  auto check_povm = [&](const std::vector<Mat>& es, int d, const char* who) {
    Mat sum = Mat::zero(es.at(0).field, d, d);
    for (const auto& e : es) {
      if (min_eig(e) < -tol) throw ValidationError(std::string(who) + ": negative element");
      sum = add(sum, e);
    }
    if (max_abs(sub(sum, Mat::id(sum.field, d))) > tol)
      throw ValidationError(std::string(who) + ": POVM does not sum to identity");
  };
  if (int(s.alice.size()) != kNA || int(s.charlie.size()) != kNC || int(s.bob.size()) != 4)
    throw ValidationError("strategy: wrong measurement counts");
  for (const auto& pair : s.alice) check_povm({pair[0], pair[1]}, s.da, "alice");
  check_povm(s.bob, s.db, "bob");
  for (const auto& pair : s.charlie) check_povm({pair[0], pair[1]}, s.dc, "charlie");
}

inline Behavior behavior_from_strategy(const Strategy& s) {
  Behavior q;
  std::vector<int> dims{s.da, s.db, s.dc};
  for (int x = 0; x < kNA; ++x)
    for (int z = 0; z < kNC; ++z)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 2; ++c) {
            Mat op = tensor(tensor(s.alice[x][a], s.bob[b]), s.charlie[z][c]);
            q.at(x, z, a, b, c) = hs_inner(op, s.state);
          }
  return q;
}

/* The frozen optimal complex strategy: two maximally entangled pairs, Bell
   measurement in the middle, mutually unbiased qubit observables outside.
   Its score is 6*sqrt(2). */

inline Mat obs_diff(const Mat& plus, const Mat& minus) { return sub(plus, minus); }

inline std::array<Mat, 2> projectors_of_obs(const Mat& o) {
  // o is an involution (o^2 = I): projectors (I +- o) / 2
  Mat id = Mat::id(o.field, o.rows());
  return {scale(add(id, o), 0.5), scale(sub(id, o), 0.5)};
}

inline Strategy build_optimal_complex_strategy() {
  Strategy s;
  s.da = 2;
  s.db = 4;
  s.dc = 2;
  const double r = 1.0 / std::sqrt(2.0);

  Mat phi = bell_proj(0);  // phi+ on each source
  s.state = tensor(phi, phi).to_field(Field::cplx);  // order (A, B1, B2, C)

  s.alice = {projectors_of_obs(pauli_z().to_field(Field::cplx)),
             projectors_of_obs(pauli_x().to_field(Field::cplx)),
             projectors_of_obs(pauli_y())};

  // b = 2*b1 + b2 labels [phi+, psi+, phi-, psi-]
  for (int b = 0; b < 4; ++b) s.bob.push_back(bell_proj(b).to_field(Field::cplx));

  auto cz = [&](const Mat& u, const Mat& v, double sv) {
    return projectors_of_obs(scale(add(u, scale(v, sv)), r));
  };
  Mat Z = pauli_z().to_field(Field::cplx), X = pauli_x().to_field(Field::cplx), Y = pauli_y();
  s.charlie = {cz(Z, X, 1), cz(Z, X, -1), cz(Z, Y, 1),
               cz(Z, Y, -1), cz(X, Y, 1), cz(X, Y, -1)};
  return s;
}

/* ---- seesaw ---- */

struct SeesawOpts {
  int max_rounds = 300;
  double tol = 1e-11;
};

struct SeesawResult {
  double score = 0;
  Strategy strat;
  int rounds = 0;
};

namespace bellnet_detail {

// W = sum of w(x,z,b) * O^A_x tensor B^b tensor O^C_z over nonzero weights.
inline Mat score_operator(const Strategy& s) {
  Field f = s.state.field;
  Mat W = Mat::zero(f, s.da * s.db * s.dc, s.da * s.db * s.dc);
  for (int x = 0; x < kNA; ++x) {
    Mat oa = obs_diff(s.alice[x][0], s.alice[x][1]);
    for (int z = 0; z < kNC; ++z) {
      Mat oc = obs_diff(s.charlie[z][0], s.charlie[z][1]);
      for (int b = 0; b < 4; ++b) {
        double w = bell_weight(x, z, b);
        if (w == 0.0) continue;
        W = add(W, scale(tensor(tensor(oa, s.bob[b]), oc), w));
      }
    }
  }
  return W;
}

inline double score_of(const Strategy& s) {
  return hs_inner(score_operator(s), s.state);
}

}  // namespace bellnet_detail

// One seesaw pass from the given strategy: alternate optimal updates of the
// state (top eigenvector of the score operator), each two-outcome POVM
// (positive eigenspace of its conditional operator), and Bob's four-outcome
// POVM (monotone pairwise mass exchanges). The score never decreases.
inline SeesawResult seesaw_polish(Strategy s, const SeesawOpts& opt = {}) {
  const std::vector<int> dims{s.da, s.db, s.dc};
  Field f = s.state.field;
  double score = bellnet_detail::score_of(s);
  int round = 0;
  for (; round < opt.max_rounds; ++round) {
    // state
    Mat W = bellnet_detail::score_operator(s);
    Eigh ew = eigh(W);
    long top = ew.vals.size() - 1;
    Mat v = Mat::zero(f, W.rows(), 1);
    v.re = ew.vecs.re.col(top);
    if (f == Field::cplx) v.im = ew.vecs.im.col(top);
    s.state = outer(v, v);

    // Alice
    for (int x = 0; x < kNA; ++x) {
      Mat M = Mat::zero(f, s.db * s.dc, s.db * s.dc);
      for (int z = 0; z < kNC; ++z) {
        Mat oc = obs_diff(s.charlie[z][0], s.charlie[z][1]);
        for (int b = 0; b < 4; ++b) {
          double w = bell_weight(x, z, b);
          if (w != 0.0) M = add(M, scale(tensor(s.bob[b], oc), w));
        }
      }
      Mat field_a = partial_trace(mul(s.state, embed_op(M, {1, 2}, dims)), {0}, dims);
      field_a = scale(add(field_a, dagger(field_a)), 0.5);
      Mat eplus = pos_eigenspace_projector(field_a, 1e-12);
      s.alice[x] = {eplus, sub(Mat::id(f, s.da), eplus)};
    }

    // Bob: pairwise exchanges until no pair improves
    {
      std::vector<Mat> S(4);
      for (int b = 0; b < 4; ++b) {
        Mat N = Mat::zero(f, s.da * s.dc, s.da * s.dc);
        for (int x = 0; x < kNA; ++x) {
          Mat oa = obs_diff(s.alice[x][0], s.alice[x][1]);
          for (int z = 0; z < kNC; ++z) {
            double w = bell_weight(x, z, b);
            if (w != 0.0)
              N = add(N, scale(tensor(oa, obs_diff(s.charlie[z][0], s.charlie[z][1])), w));
          }
        }
        Mat op = embed_op(N, {0, 2}, dims);
        S[b] = partial_trace(mul(s.state, op), {1}, dims);
        S[b] = scale(add(S[b], dagger(S[b])), 0.5);
      }
      for (int sweep = 0; sweep < 8; ++sweep) {
        double gain = 0;
        for (int b = 0; b < 4; ++b)
          for (int b2 = b + 1; b2 < 4; ++b2) {
            double before = hs_inner(s.bob[b], S[b]) + hs_inner(s.bob[b2], S[b2]);
            Mat T = add(s.bob[b], s.bob[b2]);
            Mat th = psd_sqrt(T);
            Mat D = mul(th, sub(S[b], S[b2]), th);
            D = scale(add(D, dagger(D)), 0.5);
            Mat Q = pos_eigenspace_projector(D, 1e-12);
            Mat nb = mul(th, Q, th);
            Mat nb2 = sub(T, nb);
            double after = hs_inner(nb, S[b]) + hs_inner(nb2, S[b2]);
            if (after > before + 1e-14) {
              s.bob[b] = nb;
              s.bob[b2] = nb2;
              gain += after - before;
            }
          }
        if (gain < opt.tol) break;
      }
    }

    // Charlie
    for (int z = 0; z < kNC; ++z) {
      Mat M = Mat::zero(f, s.da * s.db, s.da * s.db);
      for (int x = 0; x < kNA; ++x) {
        Mat oa = obs_diff(s.alice[x][0], s.alice[x][1]);
        for (int b = 0; b < 4; ++b) {
          double w = bell_weight(x, z, b);
          if (w != 0.0) M = add(M, scale(tensor(oa, s.bob[b]), w));
        }
      }
      Mat field_c = partial_trace(mul(s.state, embed_op(M, {0, 1}, dims)), {2}, dims);
      field_c = scale(add(field_c, dagger(field_c)), 0.5);
      Mat eplus = pos_eigenspace_projector(field_c, 1e-12);
      s.charlie[z] = {eplus, sub(Mat::id(f, s.dc), eplus)};
    }

    double next = bellnet_detail::score_of(s);
    if (next <= score + opt.tol * (1 + std::abs(score))) {
      score = std::max(score, next);
      ++round;
      break;
    }
    score = next;
  }
  return {score, std::move(s), round};
}

inline Strategy random_strategy(Field f, int da, int db, int dc, Rng& rng) {
  Strategy s;
  s.da = da;
  s.db = db;
  s.dc = dc;
  Mat v = random_pure_vec(f, da * db * dc, rng);
  s.state = outer(v, v);
  for (int x = 0; x < kNA; ++x) {
    auto ps = random_projective(f, da, 2, rng);
    s.alice.push_back({ps[0], ps[1]});
  }
  s.bob = random_projective(f, db, 4, rng);
  for (int z = 0; z < kNC; ++z) {
    auto ps = random_projective(f, dc, 2, rng);
    s.charlie.push_back({ps[0], ps[1]});
  }
  return s;
}

struct SeesawBest {
  SeesawResult best;
  int n_converged = 0;  // seeds within 1e-6 of the best score
  std::vector<double> scores;
};

// Multi-start seesaw; trial k uses the fork(k) stream of the given seed, so
// results are independent of evaluation order. Extra warm starts are polished
// after the random ones.
inline SeesawBest seesaw_search(Field f, int da, int db, int dc, int n_seeds,
                                std::uint64_t seed,
                                const std::vector<Strategy>& warm = {},
                                const SeesawOpts& opt = {}) {
  SeesawBest out;
  Rng base(seed);
  out.best.score = -1e300;
  for (int k = 0; k < n_seeds; ++k) {
    Rng rk = base.fork(k);
    SeesawResult r = seesaw_polish(random_strategy(f, da, db, dc, rk), opt);
    out.scores.push_back(r.score);
    if (r.score > out.best.score) out.best = std::move(r);
  }
  for (const auto& w : warm) {
    SeesawResult r = seesaw_polish(w, opt);
    out.scores.push_back(r.score);
    if (r.score > out.best.score) out.best = std::move(r);
  }
  for (double v : out.scores)
    if (v >= out.best.score - 1e-6) ++out.n_converged;
  return out;
}

/* ---- serialization ---- */

inline json behavior_to_json(const Behavior& q) {
  json jp = json::array();
  for (int x = 0; x < kNA; ++x) {
    json jx = json::array();
    for (int z = 0; z < kNC; ++z) {
      json jz = json::array();
      for (int a = 0; a < 2; ++a) {
        json ja = json::array();
        for (int b = 0; b < 4; ++b) {
          json jb = json::array();
          for (int c = 0; c < 2; ++c) jb.push_back(q.at(x, z, a, b, c));
          ja.push_back(std::move(jb));
        }
        jz.push_back(std::move(ja));
      }
      jx.push_back(std::move(jz));
    }
    jp.push_back(std::move(jx));
  }
  return json{{"p", std::move(jp)}};
}

inline Behavior behavior_from_json(const json& j) {
  Behavior q;
  const json& jp = j.at("p");
  for (int x = 0; x < kNA; ++x)
    for (int z = 0; z < kNC; ++z)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 2; ++c)
            q.at(x, z, a, b, c) = jp.at(x).at(z).at(a).at(b).at(c).get<double>();
  return q;
}

inline json strategy_to_json(const Strategy& s) {
  json j;
  j["dims"] = {{"a", s.da}, {"b", s.db}, {"c", s.dc}};
  j["state"] = mat_to_json(s.state);
  json ja = json::array();
  for (const auto& pr : s.alice) ja.push_back({mat_to_json(pr[0]), mat_to_json(pr[1])});
  j["alice"] = std::move(ja);
  json jb = json::array();
  for (const auto& e : s.bob) jb.push_back(mat_to_json(e));
  j["bob"] = std::move(jb);
  json jc = json::array();
  for (const auto& pr : s.charlie) jc.push_back({mat_to_json(pr[0]), mat_to_json(pr[1])});
  j["charlie"] = std::move(jc);
  return j;
}

inline Strategy strategy_from_json(const json& j) {
  Strategy s;
  s.da = j.at("dims").at("a").get<int>();
  s.db = j.at("dims").at("b").get<int>();
  s.dc = j.at("dims").at("c").get<int>();
  s.state = mat_from_json(j.at("state"));
  for (const auto& pr : j.at("alice"))
    s.alice.push_back({mat_from_json(pr.at(0)), mat_from_json(pr.at(1))});
  for (const auto& e : j.at("bob")) s.bob.push_back(mat_from_json(e));
  for (const auto& pr : j.at("charlie"))
    s.charlie.push_back({mat_from_json(pr.at(0)), mat_from_json(pr.at(1))});
  strategy_check(s);
  return s;
}

}  // namespace qnl
