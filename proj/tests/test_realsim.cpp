// Real-model simulation checks: frame algebra, lifts, broadcast, and the
// full network run reproducing the complex behavior entry by entry.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qnl/realsim.hpp"

using namespace qnl;

namespace {

// The lift formula applied to an arbitrary (not necessarily Hermitian)
// complex matrix; used to express product identities in tests.
Mat lift_any(const Mat& m, int n) {
  Mat c = m.to_field(Field::cplx);
  return add(tensor(real_mat(c.re), frame_state(n)),
             tensor(real_mat(c.im), frame_flip(n)));
}

std::vector<int> rebit_dims(int n) { return std::vector<int>(n, 2); }

}  // namespace

TEST_CASE("frame vectors are orthonormal and J rotates them") {
  for (int n = 1; n <= 6; ++n) {
    Mat r = frame_r(n), i = frame_i(n);
    REQUIRE(std::abs(fro_norm(r) - 1.0) <= 1e-12);
    REQUIRE(std::abs(fro_norm(i) - 1.0) <= 1e-12);
    REQUIRE(std::abs(hs_inner(r, i)) <= 1e-12);
    REQUIRE(std::abs(trace_re(frame_state(n)) - 1.0) <= 1e-12);

    for (int k = 0; k < n; ++k) {
      Mat jk = embed_op(j_op(), {k}, rebit_dims(n));
      REQUIRE(max_abs(sub(mul(jk, r), i)) <= 1e-12);
      REQUIRE(max_abs(add(mul(jk, i), r)) <= 1e-12);
    }
  }
}

TEST_CASE("one-rebit frame is the computational basis") {
  REQUIRE(frame_r(1).re(0, 0) == 1.0);
  REQUIRE(frame_r(1).re(1, 0) == 0.0);
  REQUIRE(frame_i(1).re(0, 0) == 0.0);
  REQUIRE(frame_i(1).re(1, 0) == -1.0);
  // two rebits: the odd-parity Bell pair, the shared source resource
  Mat expect = scale(add(bell_proj(2), bell_proj(1)), 0.5).to_field(Field::real);
  REQUIRE(max_abs(sub(frame_state(2), expect)) <= 1e-12);
}

TEST_CASE("lifted states are valid and reproduce probabilities") {
  Rng rng(101);
  for (int t = 0; t < 100; ++t) {
    int d = 2 + int(rng.uniform_index(3));
    int n = 1 + int(rng.uniform_index(3));
    int rebit = int(rng.uniform_index(n));
    Mat rho = random_state(Field::cplx, d, rng).m;
    Mat lift = lift_state(rho, n);
    density_matrix(lift, {int(d), 1 << n});

    auto povm = random_povm(Field::cplx, d, 3, rng);
    double total = 0;
    for (const auto& e : povm) {
      double complex_p = hs_inner(e, rho);
      double real_p = hs_inner(lift_op(e, n, rebit), lift);
      REQUIRE(std::abs(real_p - complex_p) <= 1e-10);
      total += real_p;
    }
    REQUIRE(std::abs(total - 1.0) <= 1e-10);
  }
}

TEST_CASE("lifted operators compose like their complex counterparts") {
  Rng rng(55);
  for (int t = 0; t < 40; ++t) {
    int d = 2 + int(rng.uniform_index(2));
    int n = 2 + int(rng.uniform_index(2));
    int ra = int(rng.uniform_index(n));
    int rb = int(rng.uniform_index(n));
    Mat a = random_hermitian(Field::cplx, d, rng);
    Mat b = random_hermitian(Field::cplx, d, rng);
    Mat rho = random_state(Field::cplx, d, rng).m;
    Mat left = mul(lift_op(a, n, ra), mul(lift_op(b, n, rb), lift_state(rho, n)));
    Mat right = lift_any(mul(a, mul(b, rho)), n);
    REQUIRE(max_abs(sub(left, right)) <= 1e-11);
  }
}

TEST_CASE("broadcast unitary is orthogonal and copies the y basis") {
  Mat u = broadcast_unitary();
  REQUIRE(max_abs(sub(mul(u, transpose(u)), Mat::id(Field::real, 4))) <= 1e-12);

  Mat yp = Mat::zero(Field::cplx, 2, 1), ym = Mat::zero(Field::cplx, 2, 1);
  yp.re(0, 0) = ym.re(0, 0) = 1 / std::sqrt(2.0);
  yp.im(1, 0) = 1 / std::sqrt(2.0);
  ym.im(1, 0) = -1 / std::sqrt(2.0);
  Mat k0 = Mat::zero(Field::cplx, 2, 1);
  k0.re(0, 0) = 1.0;
  Mat uc = u.to_field(Field::cplx);
  REQUIRE(max_abs(sub(mul(uc, tensor(yp, k0)), tensor(yp, yp))) <= 1e-12);
  REQUIRE(max_abs(sub(mul(uc, tensor(ym, k0)), tensor(ym, ym))) <= 1e-12);
}

TEST_CASE("broadcast grows the frame and transports lifts") {
  for (int n = 1; n <= 5; ++n) {
    Mat grown = broadcast_rebit(frame_state(n), rebit_dims(n), 0);
    REQUIRE(max_abs(sub(grown, frame_state(n + 1))) <= 1e-12);
    Mat grown_last = broadcast_rebit(frame_state(n), rebit_dims(n), n - 1);
    REQUIRE(max_abs(sub(grown_last, frame_state(n + 1))) <= 1e-12);
  }

  Rng rng(77);
  Mat rho = random_state(Field::cplx, 3, rng).m;
  for (int n = 1; n <= 3; ++n) {
    std::vector<int> dims{3};
    for (int k = 0; k < n; ++k) dims.push_back(2);
    Mat lifted = broadcast_rebit(lift_state(rho, n), dims, 1 + int(rng.uniform_index(n)));
    REQUIRE(max_abs(sub(lifted, lift_state(rho, n + 1))) <= 1e-12);
  }
}

TEST_CASE("complexified real maps stay completely positive") {
  Rng rng(202);
  for (int t = 0; t < 40; ++t) {
    int d = 2 + int(rng.uniform_index(3));
    KrausMap km = random_tp_map(Field::real, d, 1 + int(rng.uniform_index(4)), rng);
    REQUIRE(complexification_cp_defect(km) <= 1e-10);
  }
  // identity map: the unnormalized maximally entangled projector
  KrausMap idm;
  idm.ks.push_back(Mat::id(Field::real, 2));
  Mat choi = kraus_choi(idm);
  REQUIRE(std::abs(trace_re(choi) - 2.0) <= 1e-12);
  REQUIRE(min_eig(choi) >= -1e-12);

  // transpose map: not completely positive, eigenvalue -1
  REQUIRE(std::abs(min_eig(transpose_map_choi(2)) + 1.0) <= 1e-12);
}

TEST_CASE("network simulation reproduces the optimal complex run") {
  NetworkSim sim = simulate_network(build_optimal_complex_strategy());
  REQUIRE(sim.prep_defect <= 1e-11);
  REQUIRE(sim.pre_measure_defect <= 1e-11);
  REQUIRE(sim.source_frame_defect <= 1e-12);
  REQUIRE(sim.behavior_defect <= 1e-11);
  REQUIRE(sim.post_state_defect <= 1e-11);
  REQUIRE(sim.post_frame_defect <= 1e-11);
  REQUIRE(std::abs(sim.score - kComplexMaxScore) <= 1e-9);
  REQUIRE(ns_check(sim.behavior) <= 1e-10);
  REQUIRE(sim.log.size() >= 13);
  REQUIRE(sim.log.front().actor == "source1");
}

TEST_CASE("network simulation handles mixed sources and generic devices") {
  Rng rng(909);
  Strategy s;
  s.da = 2;
  s.db = 4;
  s.dc = 2;
  Mat rho1 = random_state(Field::cplx, 4, rng, 2).m;
  Mat rho2 = random_state(Field::cplx, 4, rng, 3).m;
  s.state = tensor(rho1, rho2);
  for (int x = 0; x < kNA; ++x) {
    auto povm = random_povm(Field::cplx, 2, 2, rng);
    s.alice.push_back({povm[0], povm[1]});
  }
  s.bob = random_povm(Field::cplx, 4, 4, rng);
  for (int z = 0; z < kNC; ++z) {
    auto povm = random_povm(Field::cplx, 2, 2, rng);
    s.charlie.push_back({povm[0], povm[1]});
  }
  strategy_check(s, 1e-9);

  NetworkSim sim = simulate_network(s);
  REQUIRE(sim.prep_defect <= 1e-10);
  REQUIRE(sim.pre_measure_defect <= 1e-10);
  REQUIRE(sim.behavior_defect <= 1e-10);
  REQUIRE(sim.post_state_defect <= 1e-10);
  REQUIRE(ns_check(sim.behavior) <= 1e-9);
}

TEST_CASE("network simulation rejects cross-source entanglement") {
  Strategy s = build_optimal_complex_strategy();
  Rng rng(4);
  Mat v = random_pure_vec(Field::cplx, 16, rng);
  s.state = outer(v, v);
  REQUIRE_THROWS_AS(simulate_network(s), ValidationError);
}
