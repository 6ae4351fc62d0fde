#pragma once
// Moment-matrix relaxation of the network score under a source-closeness
// budget. One moment block per Bob outcome holds the conditional Alice/Charlie
// moments; a PPT-symmetrized block models the separable-side certificate; a
// doubled block carries the trace-distance witness pair, its corner tied to
// the difference of the two. Everything compiles into the block SDP form the
// in-process solvers and the file exporter consume.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qnl/bellnet.hpp"
#include "qnl/sdp.hpp"
#include "qnl/sdp_interior.hpp"
#include "qnl/sdp_splitting.hpp"
#include "qnl/sdpa_io.hpp"

namespace qnl {

using Word = std::vector<int>;

// Collapse immediate repetitions (projector idempotence). A single pass
// suffices: every run of equal letters shrinks to one letter.
inline Word reduce_word(const Word& w) {
  Word r;
  r.reserve(w.size());
  for (int s : w)
    if (r.empty() || r.back() != s) r.push_back(s);
  return r;
}

inline Word reversed_word(Word w) {
  std::reverse(w.begin(), w.end());
  return w;
}

inline std::string word_key(const Word& w) {
  std::string k;
  k.reserve(w.size());
  for (int s : w) k.push_back(char('a' + s));
  return k;
}

struct MonomialBasis {
  int n_ops = 0;
  int level = 0;
  std::vector<Word> words;           // sorted by (length, lex); words[0] = identity
  std::map<std::string, int> index;  // word_key -> position

  int find(const Word& w) const {
    auto it = index.find(word_key(w));
    return it == index.end() ? -1 : it->second;
  }
};

enum class Party { alice, charlie };

inline MonomialBasis build_basis(Party party, int level) {
  if (level < 1 || level > 3)
    throw ValidationError("build_basis: level must be 1, 2, or 3");
  MonomialBasis b;
  b.n_ops = (party == Party::alice) ? kNA : kNC;
  b.level = level;
  b.words.push_back({});
  std::vector<Word> prev = {Word{}};
  for (int len = 1; len <= level; ++len) {
    std::vector<Word> cur;
    for (const auto& w : prev)
      for (int s = 0; s < b.n_ops; ++s) {
        if (!w.empty() && w.back() == s) continue;  // reduced words only
        Word e = w;
        e.push_back(s);
        cur.push_back(std::move(e));
      }
    for (const auto& w : cur) b.words.push_back(w);
    prev = std::move(cur);
  }
  for (int i = 0; i < int(b.words.size()); ++i) b.index[word_key(b.words[i])] = i;
  return b;
}

// One scalar moment; every coordinate in the list carries the same value.
struct MomentClass {
  std::string key;  // canonical reduced word pair "alice|charlie"
  std::vector<std::pair<int, int>> coords;  // (row <= col) within one block
};

// Where a behavior component sits inside the outcome-b moment block.
struct PEntryRef {
  int b = 0;
  int x = -1, z = -1;  // -1 marks the marginalized party
  int row = 0, col = 0;
};

struct MomentProblem {
  int level = 1;
  double eps = 0;
  MonomialBasis alice, charlie;
  int side = 0;
  std::vector<MomentClass> tau_classes;    // same index structure in every tau block
  std::vector<MomentClass> sigma_classes;  // PPT fold also merges reversed Alice words
  std::vector<PEntryRef> p_map;
  std::array<std::map<std::pair<int, int>, double>, 4> obj;  // coordinate -> coefficient
  bool fixed = false;  // feasibility mode: p_map entries pinned to `target`
  Behavior target;
};

namespace hierarchy_detail {

// Entry (row, col) of a moment block carries the word pair
// (reduce(rev(alice_col) alice_row), reduce(rev(charlie_col) charlie_row)).
inline std::pair<Word, Word> entry_words(const MonomialBasis& a, const MonomialBasis& c,
                                         int row, int col) {
  const int nc = int(c.words.size());
  Word ua = reversed_word(a.words[col / nc]);
  const Word& ar = a.words[row / nc];
  ua.insert(ua.end(), ar.begin(), ar.end());
  Word uc = reversed_word(c.words[col % nc]);
  const Word& cr = c.words[row % nc];
  uc.insert(uc.end(), cr.begin(), cr.end());
  return {reduce_word(ua), reduce_word(uc)};
}

inline std::string pair_key(const Word& ua, const Word& uc) {
  return word_key(ua) + "|" + word_key(uc);
}

// Canonical key of an entry's equality class. Transposing the block reverses
// both words (states here are real symmetric, so the value is unchanged); the
// PPT fold additionally reverses the Alice word alone.
inline std::string canon_key(const Word& ua, const Word& uc, bool ppt) {
  const Word ra = reversed_word(ua), rc = reversed_word(uc);
  std::string best = pair_key(ua, uc);
  best = std::min(best, pair_key(ra, rc));
  if (ppt) {
    best = std::min(best, pair_key(ra, uc));
    best = std::min(best, pair_key(ua, rc));
  }
  return best;
}

inline std::vector<MomentClass> build_classes(const MonomialBasis& a, const MonomialBasis& c,
                                              bool ppt) {
  const int side = int(a.words.size()) * int(c.words.size());
  std::vector<MomentClass> cls;
  std::unordered_map<std::string, int> idx;
  idx.reserve(std::size_t(side) * (side + 1) / 3);
  for (int i = 0; i < side; ++i)
    for (int j = i; j < side; ++j) {
      auto [ua, uc] = entry_words(a, c, i, j);
      std::string k = canon_key(ua, uc, ppt);
      auto it = idx.find(k);
      if (it == idx.end()) {
        it = idx.emplace(std::move(k), int(cls.size())).first;
        cls.push_back({it->first, {}});
      }
      cls[it->second].coords.push_back({i, j});
    }
  std::sort(cls.begin(), cls.end(),
            [](const MomentClass& l, const MomentClass& r) { return l.key < r.key; });
  return cls;
}

// Value of a p_map component in a given behavior. Marginals use setting 0
// for the dropped party; no-signaling inputs make that choice immaterial.
inline double behavior_component(const Behavior& q, const PEntryRef& pe) {
  const int x = pe.x < 0 ? 0 : pe.x;
  const int z = pe.z < 0 ? 0 : pe.z;
  double v = 0;
  for (int a = 0; a < 2; ++a) {
    if (pe.x >= 0 && a != 0) continue;
    for (int c = 0; c < 2; ++c) {
      if (pe.z >= 0 && c != 0) continue;
      v += q.at(x, z, a, pe.b, c);
    }
  }
  return v;
}

inline double svec_coeff(int i, int j) { return i == j ? 1.0 : 0.5; }

}  // namespace hierarchy_detail

inline MomentProblem build_moment_problem(int level, double eps,
                                          std::optional<Behavior> fixed_behavior = {}) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw ValidationError("build_moment_problem: epsilon must lie in [0, 1]");
  MomentProblem mp;
  mp.level = level;
  mp.eps = eps;
  mp.alice = build_basis(Party::alice, level);
  mp.charlie = build_basis(Party::charlie, level);
  const int nc = int(mp.charlie.words.size());
  mp.side = int(mp.alice.words.size()) * nc;
  mp.tau_classes = hierarchy_detail::build_classes(mp.alice, mp.charlie, false);
  mp.sigma_classes = hierarchy_detail::build_classes(mp.alice, mp.charlie, true);

  // Degree <= 1 positions: row/column words of one letter against identity.
  const auto dx = [nc](int x) { return (1 + x) * nc; };
  const auto dz = [](int z) { return 1 + z; };
  for (int b = 0; b < 4; ++b) {
    mp.p_map.push_back({b, -1, -1, 0, 0});
    for (int x = 0; x < kNA; ++x) mp.p_map.push_back({b, x, -1, 0, dx(x)});
    for (int z = 0; z < kNC; ++z) mp.p_map.push_back({b, -1, z, 0, dz(z)});
    for (int x = 0; x < kNA; ++x)
      for (int z = 0; z < kNC; ++z) mp.p_map.push_back({b, x, z, dz(z), dx(x)});
  }

  // Functional over behaviors, rewritten over the stored components:
  // each correlator is 4 p(+,b,+|x,z) - 2 p(+,b|x) - 2 p(b,+|z) + p(b).
  for (int b = 0; b < 4; ++b)
    for (int x = 0; x < kNA; ++x)
      for (int z = 0; z < kNC; ++z) {
        const double w = bell_weight(x, z, b);
        if (w == 0.0) continue;
        mp.obj[b][{dz(z), dx(x)}] += 4 * w;
        mp.obj[b][{0, dx(x)}] -= 2 * w;
        mp.obj[b][{0, dz(z)}] -= 2 * w;
        mp.obj[b][{0, 0}] += w;
      }

  if (fixed_behavior) {
    mp.fixed = true;
    mp.target = *fixed_behavior;
  }
  return mp;
}

struct CompiledMoment {
  SdpProblem sdp;
  std::array<int, 4> tau{};
  int sigma = -1;
  int dist = -1;  // doubled witness block; -1 when eps == 0
};

inline CompiledMoment compile_sdp(const MomentProblem& mp) {
  if (mp.side > 400)
    throw SdpError("compile_sdp: moment blocks beyond level 2 exceed the in-process budget");
  CompiledMoment cm;
  SdpProblem& p = cm.sdp;
  p.sense = Sense::max;
  const int s = mp.side;
  static const char* tau_names[4] = {"tau_00", "tau_01", "tau_10", "tau_11"};
  for (int b = 0; b < 4; ++b) cm.tau[b] = p.add_block(tau_names[b], s);
  cm.sigma = p.add_block("sigma", s);
  const bool budget = mp.eps > 0;
  if (budget) cm.dist = p.add_block("dist", 2 * s);

  const auto half = hierarchy_detail::svec_coeff;

  // Equal-moment ties: every coordinate of a class equals its representative.
  auto tie_classes = [&](int block, const std::vector<MomentClass>& classes) {
    for (const auto& cl : classes) {
      const auto& r0 = cl.coords.front();
      for (std::size_t k = 1; k < cl.coords.size(); ++k) {
        const auto& ck = cl.coords[k];
        SdpConstraint con;
        con.a.push_back({block, ck.first, ck.second, half(ck.first, ck.second)});
        con.a.push_back({block, r0.first, r0.second, -half(r0.first, r0.second)});
        p.cons.push_back(std::move(con));
      }
    }
  };
  for (int b = 0; b < 4; ++b) tie_classes(cm.tau[b], mp.tau_classes);
  tie_classes(cm.sigma, mp.sigma_classes);

  {  // identity-word normalization of both sides
    SdpConstraint ct;
    for (int b = 0; b < 4; ++b) ct.a.push_back({cm.tau[b], 0, 0, 1.0});
    ct.rhs = 1;
    p.cons.push_back(std::move(ct));
    SdpConstraint cs;
    cs.a.push_back({cm.sigma, 0, 0, 1.0});
    cs.rhs = 1;
    p.cons.push_back(std::move(cs));
  }

  if (budget) {
    // Witness corner equals the summed-tau-minus-sigma moments entrywise;
    // the two diagonal corners of the doubled block pay the budget.
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        SdpConstraint con;
        con.a.push_back({cm.dist, i, s + j, 0.5});
        const int lo = std::min(i, j), hi = std::max(i, j);
        for (int b = 0; b < 4; ++b) con.a.push_back({cm.tau[b], lo, hi, -half(lo, hi)});
        con.a.push_back({cm.sigma, lo, hi, half(lo, hi)});
        p.cons.push_back(std::move(con));
      }
    SdpConstraint bud;
    bud.a.push_back({cm.dist, 0, 0, 1.0});
    bud.a.push_back({cm.dist, s, s, 1.0});
    bud.rhs = 4 * mp.eps;
    bud.rel = Rel::le;
    p.cons.push_back(std::move(bud));
  } else {
    // At eps = 0 the witness block only forces the identity row/column of
    // the difference to vanish; pin that row and drop the block.
    for (int j = 1; j < s; ++j) {
      SdpConstraint con;
      for (int b = 0; b < 4; ++b) con.a.push_back({cm.tau[b], 0, j, 0.5});
      con.a.push_back({cm.sigma, 0, j, -0.5});
      p.cons.push_back(std::move(con));
    }
  }

  // Remaining outcome probabilities of the reconstructed behavior stay
  // nonnegative (the (+,b,+) ones are diagonal entries, hence free).
  const int nc = int(mp.charlie.words.size());
  const auto dx = [nc](int x) { return (1 + x) * nc; };
  const auto dz = [](int z) { return 1 + z; };
  for (int b = 0; b < 4; ++b)
    for (int x = 0; x < kNA; ++x)
      for (int z = 0; z < kNC; ++z) {
        const int t = cm.tau[b];
        SdpConstraint c1;  // p(+,b,-|x,z) >= 0
        c1.a.push_back({t, dz(z), dx(x), 0.5});
        c1.a.push_back({t, 0, dx(x), -0.5});
        c1.rel = Rel::le;
        p.cons.push_back(std::move(c1));
        SdpConstraint c2;  // p(-,b,+|x,z) >= 0
        c2.a.push_back({t, dz(z), dx(x), 0.5});
        c2.a.push_back({t, 0, dz(z), -0.5});
        c2.rel = Rel::le;
        p.cons.push_back(std::move(c2));
        SdpConstraint c3;  // p(-,b,-|x,z) >= 0
        c3.a.push_back({t, 0, 0, -1.0});
        c3.a.push_back({t, 0, dx(x), 0.5});
        c3.a.push_back({t, 0, dz(z), 0.5});
        c3.a.push_back({t, dz(z), dx(x), -0.5});
        c3.rel = Rel::le;
        p.cons.push_back(std::move(c3));
      }

  if (mp.fixed) {
    for (const auto& pe : mp.p_map) {
      SdpConstraint con;
      con.a.push_back({cm.tau[pe.b], pe.row, pe.col, half(pe.row, pe.col)});
      con.rhs = hierarchy_detail::behavior_component(mp.target, pe);
      p.cons.push_back(std::move(con));
    }
  }

  for (int b = 0; b < 4; ++b)
    for (const auto& [rc, w] : mp.obj[b])
      p.obj.push_back({cm.tau[b], rc.first, rc.second, w * half(rc.first, rc.second)});
  return cm;
}

enum class HierarchyBackend { interior, splitting, export_file };

inline const char* to_string(HierarchyBackend b) {
  switch (b) {
    case HierarchyBackend::interior: return "interior";
    case HierarchyBackend::splitting: return "splitting";
    case HierarchyBackend::export_file: return "export";
  }
  return "?";
}

struct HierarchyOpts {
  std::string export_path = "hierarchy.dat-s";
  InteriorOpts interior{};
  SplitOpts splitting{};
  double feas_margin = 1e-5;  // target must beat the bound by this to be rejected
};

struct HierarchyReport {
  int level = 1;
  double eps = 0;
  std::string backend;
  double bound = 0;
  SdpStatus status = SdpStatus::inaccurate;
  double prim_res = 0, dual_res = 0, gap = 0;
  int iters = 0;
  bool fixed = false;
  double target_score = 0;  // feasibility mode
  std::string verdict;      // feasible | infeasible | undetermined
  std::string path;         // export backend
  std::string note;
};

inline HierarchyReport solve_hierarchy(const MomentProblem& mp, HierarchyBackend backend,
                                       const HierarchyOpts& opt = {}) {
  HierarchyReport rep;
  rep.level = mp.level;
  rep.eps = mp.eps;
  rep.backend = to_string(backend);
  rep.fixed = mp.fixed;

  if (backend == HierarchyBackend::export_file) {
    CompiledMoment cm = compile_sdp(mp);
    // The file format carries equalities over a min objective; inequality
    // rows gain a diagonal slack block and the optimum flips sign.
    export_sdpa_file(canonicalize(cm.sdp).p, opt.export_path);
    rep.path = opt.export_path;
    std::string sides;
    for (const auto& blk : cm.sdp.blocks) {
      if (!sides.empty()) sides += ",";
      sides += std::to_string(blk.side);
    }
    rep.note = "instance written, no solve; moment block sides " + sides;
    return rep;
  }

  const auto run = [&](const MomentProblem& m) {
    CompiledMoment cm = compile_sdp(m);
    return backend == HierarchyBackend::interior ? solve_interior_point(cm.sdp, opt.interior)
                                                 : solve_splitting(cm.sdp, opt.splitting);
  };
  const auto fill = [&rep](const SdpSolution& sol) {
    rep.bound = sol.objective;
    rep.status = sol.status;
    rep.prim_res = sol.prim_res;
    rep.dual_res = sol.dual_res;
    rep.gap = sol.gap;
    rep.iters = sol.iters;
    rep.note = sol.note;
  };

  if (!mp.fixed) {
    fill(run(mp));
    return rep;
  }

  // Feasibility mode. A relaxation bound below the target's score rejects the
  // behavior at this level and every deeper one; otherwise solve the pinned
  // instance and read its status.
  rep.target_score = bell_score(mp.target);
  MomentProblem relax = mp;
  relax.fixed = false;
  fill(run(relax));
  if (rep.status == SdpStatus::optimal && rep.target_score > rep.bound + opt.feas_margin) {
    rep.verdict = "infeasible";
    rep.note = "target score exceeds the relaxation bound";
    return rep;
  }
  const double relax_bound = rep.bound;
  fill(run(mp));
  if (rep.status == SdpStatus::optimal)
    rep.verdict = "feasible";
  else if (rep.status == SdpStatus::infeasible)
    rep.verdict = "infeasible";
  else
    rep.verdict = "undetermined";
  rep.note = "pinned solve after relaxation bound " + std::to_string(relax_bound) +
             (rep.note.empty() ? "" : "; " + rep.note);
  return rep;
}

inline nlohmann::json report_to_json(const HierarchyReport& r) {
  nlohmann::json j{{"level", r.level},
                   {"eps", r.eps},
                   {"bound", r.bound},
                   {"backend", r.backend},
                   {"status", to_string(r.status)},
                   {"iters", r.iters},
                   {"residuals",
                    {{"primal", r.prim_res}, {"dual", r.dual_res}, {"gap", r.gap}}}};
  if (r.fixed) {
    j["verdict"] = r.verdict;
    j["target_score"] = r.target_score;
  }
  if (!r.path.empty()) j["path"] = r.path;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace qnl
