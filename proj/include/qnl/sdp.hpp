#pragma once
// Semidefinite programming core: problem description shared by the two
// in-repo backends (interior point, operator splitting) and the SDPA file
// layer.
//
// Entry convention: entries address the upper triangle (i <= j) of a
// symmetric coefficient matrix A; an off-diagonal entry v means
// A_ij = A_ji = v, so <A, X> = sum_i A_ii X_ii + 2 sum_{i<j} A_ij X_ij.
// Diagonal blocks (kind diag) hold elementwise nonnegative vectors and only
// admit i == j entries.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qnl {

struct SdpError : std::runtime_error {
  explicit SdpError(const std::string& what) : std::runtime_error(what) {}
};

enum class BlockKind { psd, diag };
enum class Rel { eq, le };
enum class Sense { min, max };

struct SdpBlock {
  std::string name;
  int side = 0;
  BlockKind kind = BlockKind::psd;
};

struct SdpEntry {
  int block = 0;
  int i = 0;  // 0-based, i <= j
  int j = 0;
  double v = 0;
};

struct SdpConstraint {
  std::vector<SdpEntry> a;
  double rhs = 0;
  Rel rel = Rel::eq;
};

struct SdpProblem {
  std::vector<SdpBlock> blocks;
  std::vector<SdpConstraint> cons;
  std::vector<SdpEntry> obj;
  Sense sense = Sense::min;
  double obj_offset = 0;

  int add_block(std::string name, int side, BlockKind kind = BlockKind::psd) {
    blocks.push_back({std::move(name), side, kind});
    return int(blocks.size()) - 1;
  }
};

enum class SdpStatus { optimal, inaccurate, infeasible, unbounded, iter_limit };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::inaccurate: return "inaccurate";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::iter_limit: return "iter_limit";
  }
  return "?";
}

struct SdpSolution {
  SdpStatus status = SdpStatus::inaccurate;
  double objective = 0;  // in the problem's own sense, offset included
  std::vector<Eigen::MatrixXd> X;  // per block; diag blocks as diagonal matrices
  Eigen::VectorXd y;               // per constraint
  std::vector<Eigen::MatrixXd> Z;
  double prim_res = 0, dual_res = 0, gap = 0;
  int iters = 0;
  std::string note;
};

namespace sdp_detail {

inline void check_entries(const SdpProblem& p, const std::vector<SdpEntry>& es,
                          const char* where) {
  for (const auto& e : es) {
    if (e.block < 0 || e.block >= int(p.blocks.size()))
      throw SdpError(std::string(where) + ": entry block out of range");
    const auto& b = p.blocks[e.block];
    if (e.i < 0 || e.j < e.i || e.j >= b.side)
      throw SdpError(std::string(where) + ": entry index out of range");
    if (b.kind == BlockKind::diag && e.i != e.j)
      throw SdpError(std::string(where) + ": off-diagonal entry in diag block");
  }
}

inline void validate(const SdpProblem& p) {
  for (const auto& b : p.blocks)
    if (b.side <= 0) throw SdpError("block with nonpositive side");
  check_entries(p, p.obj, "objective");
  for (std::size_t k = 0; k < p.cons.size(); ++k) {
    if (p.cons[k].a.empty()) throw SdpError("constraint with no entries");
    check_entries(p, p.cons[k].a, "constraint");
  }
}

// Deduplicate entries (summing values), drop exact zeros, sort by
// (block, i, j). All writers go through this so output ordering is canonical.
inline std::vector<SdpEntry> canonical_entries(std::vector<SdpEntry> es) {
  std::sort(es.begin(), es.end(), [](const SdpEntry& a, const SdpEntry& b) {
    return std::tie(a.block, a.i, a.j) < std::tie(b.block, b.i, b.j);
  });
  std::vector<SdpEntry> out;
  for (const auto& e : es) {
    if (!out.empty() && out.back().block == e.block && out.back().i == e.i &&
        out.back().j == e.j)
      out.back().v += e.v;
    else
      out.push_back(e);
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const SdpEntry& e) { return e.v == 0.0; }),
            out.end());
  return out;
}

}  // namespace sdp_detail

// <A, X> under the symmetric-entry convention.
inline double sdp_inner(const std::vector<SdpEntry>& a,
                        const std::vector<Eigen::MatrixXd>& X) {
  double v = 0;
  for (const auto& e : a)
    v += (e.i == e.j) ? e.v * X[e.block](e.i, e.i)
                      : 2.0 * e.v * X[e.block](e.i, e.j);
  return v;
}

// Canonical form: minimize, equalities only. Inequalities gain one shared
// diag slack block appended after the original blocks.
struct CanonicalSdp {
  SdpProblem p;       // sense == min, all constraints eq
  bool negated = false;  // objective was flipped from max
  int slack_block = -1;  // index of appended slack block, -1 if none
};

inline CanonicalSdp canonicalize(const SdpProblem& in) {
  sdp_detail::validate(in);
  CanonicalSdp c;
  c.p = in;
  if (in.sense == Sense::max) {
    c.negated = true;
    c.p.sense = Sense::min;
    for (auto& e : c.p.obj) e.v = -e.v;
    c.p.obj_offset = -in.obj_offset;
  }
  int n_le = 0;
  for (const auto& con : c.p.cons)
    if (con.rel == Rel::le) ++n_le;
  if (n_le > 0) {
    c.slack_block = c.p.add_block("_slack", n_le, BlockKind::diag);
    int k = 0;
    for (auto& con : c.p.cons)
      if (con.rel == Rel::le) {
        con.a.push_back({c.slack_block, k, k, 1.0});
        con.rel = Rel::eq;
        ++k;
      }
  }
  for (auto& con : c.p.cons) con.a = sdp_detail::canonical_entries(std::move(con.a));
  c.p.obj = sdp_detail::canonical_entries(std::move(c.p.obj));
  return c;
}

// Residuals of a returned solution against the problem it was built from.
struct SdpResiduals {
  double primal = 0;  // max |<A_i,X> - b_i| (slack-adjusted for le)
  double cone = 0;    // most negative eigenvalue across blocks, clipped at 0
};

inline SdpResiduals sdp_check(const SdpProblem& p, const SdpSolution& s) {
  SdpResiduals r;
  for (std::size_t k = 0; k < p.cons.size(); ++k) {
    double lhs = sdp_inner(p.cons[k].a, s.X);
    double viol = (p.cons[k].rel == Rel::eq) ? std::abs(lhs - p.cons[k].rhs)
                                             : std::max(0.0, lhs - p.cons[k].rhs);
    r.primal = std::max(r.primal, viol);
  }
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    if (s.X.size() <= b || s.X[b].size() == 0) continue;
    if (p.blocks[b].kind == BlockKind::diag) {
      r.cone = std::max(r.cone, -s.X[b].diagonal().minCoeff());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.X[b]);
      r.cone = std::max(r.cone, -es.eigenvalues()(0));
    }
  }
  r.cone = std::max(r.cone, 0.0);
  return r;
}

/* ---- svec packing (shared by the splitting backend and tests) ----
   Off-diagonal entries scale by sqrt(2) so Euclidean and trace inner
   products coincide. */

inline long svec_len(int side) { return long(side) * (side + 1) / 2; }

inline void svec_put(const Eigen::MatrixXd& m, double* out) {
  const int s = int(m.rows());
  const double r2 = std::sqrt(2.0);
  long k = 0;
  for (int j = 0; j < s; ++j)
    for (int i = 0; i <= j; ++i) out[k++] = (i == j) ? m(i, j) : r2 * m(i, j);
}

inline Eigen::MatrixXd svec_get(const double* in, int side) {
  Eigen::MatrixXd m(side, side);
  const double ir2 = 1.0 / std::sqrt(2.0);
  long k = 0;
  for (int j = 0; j < side; ++j)
    for (int i = 0; i <= j; ++i) {
      double v = in[k++];
      if (i == j) m(i, j) = v;
      else m(i, j) = m(j, i) = ir2 * v;
    }
  return m;
}

}  // namespace qnl
