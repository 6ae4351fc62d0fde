// Network functional checks. The key frozen constant is the maximal score
// 6*sqrt(2) of the two-singlet / Bell-measurement strategy.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qnl/bellnet.hpp"

using namespace qnl;

namespace {
const double kMaxScore = 6.0 * std::sqrt(2.0);
}

TEST_CASE("weight table") {
  // 12 nonzero pairs, each weight +-1, for every Bob outcome.
  for (int b = 0; b < 4; ++b) {
    int nonzero = 0;
    for (int x = 0; x < kNA; ++x)
      for (int z = 0; z < kNC; ++z) {
        double w = bell_weight(x, z, b);
        if (w != 0.0) {
          ++nonzero;
          REQUIRE(std::abs(w) == 1.0);
        }
      }
    REQUIRE(nonzero == 12);
  }
  // spot values at b = (0,0) and b = (1,1)
  REQUIRE(bell_weight(0, 0, 0) == 1.0);
  REQUIRE(bell_weight(1, 1, 0) == -1.0);
  REQUIRE(bell_weight(2, 2, 0) == -1.0);
  REQUIRE(bell_weight(2, 3, 0) == 1.0);
  REQUIRE(bell_weight(0, 0, 3) == -1.0);
  REQUIRE(bell_weight(1, 1, 3) == 1.0);
  REQUIRE(bell_weight(2, 2, 3) == -1.0);
}

TEST_CASE("deterministic behavior scores 6") {
  // Everyone outputs the first outcome: S^0_xz = 1, other sectors vanish,
  // so the score is the sum of the b=0 weight row, which is 6.
  Behavior q;
  for (int x = 0; x < kNA; ++x)
    for (int z = 0; z < kNC; ++z) q.at(x, z, 0, 0, 0) = 1.0;
  REQUIRE(ns_check(q) <= 1e-15);
  REQUIRE(bell_score(q) == 6.0);
  REQUIRE(bell_score_sector(q, 0) == 6.0);
  REQUIRE(bell_score_sector(q, 1) == 0.0);
}

TEST_CASE("optimal strategy reaches 6 sqrt 2") {
  Strategy s = build_optimal_complex_strategy();
  strategy_check(s, 1e-12);
  Behavior q = behavior_from_strategy(s);
  REQUIRE(ns_check(q) <= 1e-12);

  REQUIRE(std::abs(bell_score(q) - kMaxScore) <= 1e-12);
  // equal split over Bob outcomes, every sector contributes a quarter
  for (int b = 0; b < 4; ++b) {
    double pb = 0;
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c) pb += q.at(0, 0, a, b, c);
    REQUIRE(std::abs(pb - 0.25) <= 1e-12);
    REQUIRE(std::abs(bell_score_sector(q, b) - kMaxScore / 4) <= 1e-12);
  }
  // one hand-computed correlator: conditioned on the first Bob outcome the
  // end states share a maximally entangled pair, and the first setting pair
  // gives tr(Z (Z+X)/sqrt(2)) / 2 scaled by p(b) = 1/4.
  REQUIRE(std::abs(correlator(q, 0, 0, 0) - 1.0 / (4.0 * std::sqrt(2.0))) <= 1e-12);
}

TEST_CASE("end-party sign pattern is the unique maximizer") {
  // Flip the sign of any subset of Charlie observables (swap both outcome
  // projectors): only the frozen all-plus assignment attains the maximum.
  Strategy base = build_optimal_complex_strategy();
  double best = -1e9;
  int best_mask = -1;
  double second = -1e9;
  for (int mask = 0; mask < 64; ++mask) {
    Strategy s = base;
    for (int z = 0; z < kNC; ++z)
      if (mask & (1 << z)) std::swap(s.charlie[z][0], s.charlie[z][1]);
    double v = bell_score(behavior_from_strategy(s));
    if (v > best) {
      second = best;
      best = v;
      best_mask = mask;
    } else if (v > second) {
      second = v;
    }
  }
  REQUIRE(best_mask == 0);
  REQUIRE(std::abs(best - kMaxScore) <= 1e-12);
  REQUIRE(second < best - 1e-3);
}

TEST_CASE("ns_check flags signaling") {
  Behavior q = behavior_from_strategy(build_optimal_complex_strategy());
  q.at(0, 0, 0, 0, 0) += 1e-3;
  REQUIRE(ns_check(q) >= 1e-4);
}

TEST_CASE("behavior json round trip") {
  Behavior q = behavior_from_strategy(build_optimal_complex_strategy());
  Behavior r = behavior_from_json(behavior_to_json(q));
  for (int x = 0; x < kNA; ++x)
    for (int z = 0; z < kNC; ++z)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 2; ++c)
            REQUIRE(r.at(x, z, a, b, c) == q.at(x, z, a, b, c));
}

TEST_CASE("strategy json round trip") {
  Strategy s = build_optimal_complex_strategy();
  Strategy r = strategy_from_json(strategy_to_json(s));
  REQUIRE(r.da == 2);
  REQUIRE(r.db == 4);
  REQUIRE(r.dc == 2);
  Behavior qa = behavior_from_strategy(s), qb = behavior_from_strategy(r);
  for (int x = 0; x < kNA; ++x)
    for (int z = 0; z < kNC; ++z)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 2; ++c)
            REQUIRE(std::abs(qa.at(x, z, a, b, c) - qb.at(x, z, a, b, c)) <= 1e-15);
}

TEST_CASE("polish keeps the optimum") {
  SeesawResult r = seesaw_polish(build_optimal_complex_strategy());
  REQUIRE(r.score >= kMaxScore - 1e-10);
  REQUIRE(r.score <= kMaxScore + 1e-9);
}

TEST_CASE("seesaw finds the maximum from random starts") {
  SeesawBest sb = seesaw_search(Field::cplx, 2, 4, 2, 12, /*seed=*/7);
  REQUIRE(sb.best.score >= kMaxScore - 1e-6);
  for (double v : sb.scores) REQUIRE(v <= kMaxScore + 1e-8);

  strategy_check(sb.best.strat, 1e-8);
  Behavior q = behavior_from_strategy(sb.best.strat);
  REQUIRE(ns_check(q) <= 1e-10);
  REQUIRE(std::abs(bell_score(q) - sb.best.score) <= 1e-9);
}

TEST_CASE("seesaw is deterministic in the seed") {
  SeesawBest a = seesaw_search(Field::cplx, 2, 4, 2, 3, 11);
  SeesawBest b = seesaw_search(Field::cplx, 2, 4, 2, 3, 11);
  REQUIRE(a.scores == b.scores);
}

TEST_CASE("real seesaw stays below the complex maximum") {
  SeesawBest sb = seesaw_search(Field::real, 2, 4, 2, 6, 3);
  REQUIRE(sb.best.score <= kMaxScore + 1e-8);
  REQUIRE(sb.best.score >= 5.0);
}
