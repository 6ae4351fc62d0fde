// Matrix layer checks. Expected values are hand-derived constants.

#include <catch2/catch_amalgamated.hpp>

#include "qnl/io_json.hpp"
#include "qnl/qmat.hpp"

using namespace qnl;

namespace {

Mat rho_bar() {
  // Equal mixture of the two Bell projectors phi-, psi+.
  return scale(add(bell_proj(2), bell_proj(1)), 0.5);
}

}  // namespace

TEST_CASE("pauli algebra") {
  Mat y2 = mul(pauli_y(), pauli_y());
  REQUIRE(approx_equal(y2, Mat::id(Field::cplx, 2), 1e-14));

  // x y = i z
  Mat xy = mul(pauli_x(), pauli_y());
  REQUIRE(xy.re.cwiseAbs().maxCoeff() <= 1e-14);
  REQUIRE(std::abs(xy.im(0, 0) - 1.0) <= 1e-14);
  REQUIRE(std::abs(xy.im(1, 1) + 1.0) <= 1e-14);

  REQUIRE(herm_defect(pauli_y()) == 0.0);
}

TEST_CASE("tensor product entries") {
  Mat zx = tensor(pauli_z(), pauli_x());
  Eigen::MatrixXd want(4, 4);
  want << 0, 1, 0, 0,
          1, 0, 0, 0,
          0, 0, 0, -1,
          0, 0, -1, 0;
  REQUIRE((zx.re - want).cwiseAbs().maxCoeff() <= 1e-15);
  REQUIRE(zx.is_real());

  // mixed-field tensor promotes
  Mat zy = tensor(pauli_z(), pauli_y());
  REQUIRE(zy.field == Field::cplx);
  REQUIRE(std::abs(zy.im(0, 1) + 1.0) <= 1e-15);
  REQUIRE(std::abs(zy.im(2, 3) - 1.0) <= 1e-15);
}

TEST_CASE("bell vectors and the two-bell mixture") {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double ip = hs_inner(bell_vec(i), bell_vec(j));
      REQUIRE(std::abs(ip - (i == j ? 1.0 : 0.0)) <= 1e-14);
    }

  Mat rb = rho_bar();
  Eigen::MatrixXd want(4, 4);
  want << 0.25, 0, 0, -0.25,
          0, 0.25, 0.25, 0,
          0, 0.25, 0.25, 0,
          -0.25, 0, 0, 0.25;
  REQUIRE((rb.re - want).cwiseAbs().maxCoeff() <= 1e-15);

  Eigh e = eigh(rb);
  REQUIRE(std::abs(e.vals(0)) <= 1e-12);
  REQUIRE(std::abs(e.vals(1)) <= 1e-12);
  REQUIRE(std::abs(e.vals(2) - 0.5) <= 1e-12);
  REQUIRE(std::abs(e.vals(3) - 0.5) <= 1e-12);

  // distance to the maximally mixed state: eigenvalues of the difference are
  // (+-1/4, +-1/4), so half the trace norm is 1/2
  Mat mm = scale(Mat::id(Field::real, 4), 0.25);
  REQUIRE(std::abs(trace_distance(rb, mm) - 0.5) <= 1e-12);
}

TEST_CASE("partial trace") {
  Mat b0 = bell_proj(0);
  Mat half = scale(Mat::id(Field::real, 2), 0.5);
  REQUIRE(approx_equal(partial_trace(b0, {0}, {2, 2}), half, 1e-14));
  REQUIRE(approx_equal(partial_trace(b0, {1}, {2, 2}), half, 1e-14));

  // kept subsystems stay in original order, whatever order keep lists them
  Eigen::MatrixXd da(2, 2), db(2, 2), dc(2, 2);
  da << 1, 0, 0, 0;
  db << 0.3, 0, 0, 0.7;
  dc << 0.2, 0, 0, 0.8;
  Mat rho = tensor(tensor(real_mat(da), real_mat(db)), real_mat(dc));
  Mat want = tensor(real_mat(da), real_mat(dc));
  REQUIRE(approx_equal(partial_trace(rho, {0, 2}, {2, 2, 2}), want, 1e-14));
  REQUIRE(approx_equal(partial_trace(rho, {2, 0}, {2, 2, 2}), want, 1e-14));

  // complex input
  Mat ry = scale(add(Mat::id(Field::cplx, 2), pauli_y()), 0.5);
  Mat joint = tensor(ry, real_mat(db));
  REQUIRE(approx_equal(partial_trace(joint, {0}, {2, 2}), ry, 1e-14));
}

TEST_CASE("partial transpose of a bell projector is half a swap") {
  Mat pt = partial_transpose(bell_proj(0), {1}, {2, 2});
  Eigen::MatrixXd want(4, 4);
  want << 0.5, 0, 0, 0,
          0, 0, 0.5, 0,
          0, 0.5, 0, 0,
          0, 0, 0, 0.5;
  REQUIRE((pt.re - want).cwiseAbs().maxCoeff() <= 1e-15);
  REQUIRE(std::abs(min_eig(pt) + 0.5) <= 1e-12);
  REQUIRE(std::abs(trace_norm(pt) - 2.0) <= 1e-12);

  // transposing both subsystems equals the full transpose
  Rng rng(7);
  Mat h = random_hermitian(Field::cplx, 4, rng);
  REQUIRE(approx_equal(partial_transpose(h, {0, 1}, {2, 2}), transpose(h), 1e-13));
}

TEST_CASE("embed_op places factors on the right sites") {
  std::vector<int> dims{2, 2, 2};
  Mat i2 = Mat::id(Field::real, 2);
  REQUIRE(approx_equal(embed_op(pauli_z(), {1}, dims),
                       tensor(tensor(i2, pauli_z()), i2), 1e-15));
  Mat op = tensor(pauli_z(), pauli_x());
  REQUIRE(approx_equal(embed_op(op, {0, 2}, dims),
                       tensor(tensor(pauli_z(), i2), pauli_x()), 1e-15));
  // slot order follows the sites list
  REQUIRE(approx_equal(embed_op(op, {2, 0}, dims),
                       tensor(tensor(pauli_x(), i2), pauli_z()), 1e-15));
  // complex operator
  REQUIRE(approx_equal(embed_op(pauli_y(), {0}, {2, 2}),
                       tensor(pauli_y(), i2), 1e-15));
}

TEST_CASE("hermitian eigensolver") {
  SECTION("pauli y") {
    Eigh e = eigh(pauli_y());
    REQUIRE(std::abs(e.vals(0) + 1.0) <= 1e-12);
    REQUIRE(std::abs(e.vals(1) - 1.0) <= 1e-12);
    REQUIRE(approx_equal(eigh_reconstruct(e), pauli_y(), 1e-12));
    REQUIRE(approx_equal(mul(dagger(e.vecs), e.vecs), Mat::id(Field::cplx, 2), 1e-12));
  }
  SECTION("random hermitian, both fields, unit scale") {
    Rng rng(11);
    for (Field f : {Field::real, Field::cplx}) {
      for (int trial = 0; trial < 25; ++trial) {
        long d = 2 + long(rng.uniform_index(15));
        Mat h = random_hermitian(f, d, rng);
        h = scale(h, 1.0 / std::max(1.0, max_abs(h)));
        Eigh e = eigh(h);
        REQUIRE(approx_equal(eigh_reconstruct(e), h, 1e-9));
        REQUIRE(approx_equal(mul(dagger(e.vecs), e.vecs), Mat::id(f, d), 1e-10));
        for (long k = 1; k < d; ++k) REQUIRE(e.vals(k) >= e.vals(k - 1));
      }
    }
  }
  SECTION("degenerate complex spectrum") {
    Mat h = Mat::id(Field::cplx, 6);
    Eigh e = eigh(h);
    REQUIRE(approx_equal(mul(dagger(e.vecs), e.vecs), Mat::id(Field::cplx, 6), 1e-10));
    REQUIRE(approx_equal(eigh_reconstruct(e), h, 1e-10));

    Mat rb = rho_bar().to_field(Field::cplx);
    Eigh e2 = eigh(rb);
    REQUIRE(approx_equal(eigh_reconstruct(e2), rb, 1e-10));
  }
}

TEST_CASE("trace norm and spectral helpers") {
  Eigen::MatrixXd d2(2, 2);
  d2 << 3, 0, 0, -2;
  REQUIRE(std::abs(trace_norm(real_mat(d2)) - 5.0) <= 1e-13);
  REQUIRE(std::abs(trace_norm(real_mat(d2).to_field(Field::cplx)) - 5.0) <= 1e-12);

  Eigen::MatrixXd d3(2, 2);
  d3 << 4, 0, 0, 9;
  REQUIRE(approx_equal(psd_sqrt(real_mat(d3)),
                       real_mat(Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix()),
                       1e-12));

  Mat p = pos_eigenspace_projector(pauli_z());
  Eigen::MatrixXd want(2, 2);
  want << 1, 0, 0, 0;
  REQUIRE((p.re - want).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("clip_psd removes negative mass and restores the trace") {
  Eigen::MatrixXd d = Eigen::Vector3d(0.6, 0.5, -0.1).asDiagonal();
  ClipResult c = clip_psd(real_mat(d));
  REQUIRE(std::abs(c.clipped - 0.1) <= 1e-12);
  REQUIRE(std::abs(trace_re(c.m) - 1.0) <= 1e-12);
  REQUIRE(std::abs(c.m.re(0, 0) - 0.6 / 1.1) <= 1e-12);
  REQUIRE(std::abs(c.m.re(1, 1) - 0.5 / 1.1) <= 1e-12);
  REQUIRE(std::abs(c.m.re(2, 2)) <= 1e-12);
  REQUIRE(min_eig(c.m) >= -1e-12);
}

TEST_CASE("density matrix validation") {
  REQUIRE_NOTHROW(density_matrix(rho_bar(), {2, 2}));
  REQUIRE_THROWS_AS(density_matrix(scale(rho_bar(), 1.1), {2, 2}), ValidationError);
  REQUIRE_THROWS_AS(density_matrix(rho_bar(), {2, 3}), ValidationError);

  Eigen::MatrixXd nh(2, 2);
  nh << 0.5, 0.1, 0.3, 0.5;
  REQUIRE_THROWS_AS(density_matrix(real_mat(nh), {2}), ValidationError);

  Eigen::MatrixXd neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  REQUIRE_THROWS_AS(density_matrix(real_mat(neg), {2}), ValidationError);
}

TEST_CASE("random ensembles") {
  Rng rng(3);
  SECTION("povm completeness and positivity") {
    for (Field f : {Field::real, Field::cplx}) {
      auto povm = random_povm(f, 4, 3, rng);
      Mat s = Mat::zero(f, 4, 4);
      for (auto& e : povm) {
        REQUIRE(min_eig(e) >= -1e-11);
        s = add(s, e);
      }
      REQUIRE(approx_equal(s, Mat::id(f, 4), 1e-10));
    }
  }
  SECTION("projective measurements") {
    auto ps = random_projective(Field::cplx, 4, 4, rng);
    Mat s = Mat::zero(Field::cplx, 4, 4);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      REQUIRE(approx_equal(mul(ps[i], ps[i]), ps[i], 1e-11));
      for (std::size_t j = i + 1; j < ps.size(); ++j)
        REQUIRE(max_abs(mul(ps[i], ps[j])) <= 1e-11);
      s = add(s, ps[i]);
    }
    REQUIRE(approx_equal(s, Mat::id(Field::cplx, 4), 1e-11));
  }
  SECTION("trace preserving maps preserve states") {
    for (Field f : {Field::real, Field::cplx}) {
      for (int t = 0; t < 10; ++t) {
        KrausMap e = random_tp_map(f, 4, 3, rng);
        REQUIRE(tp_defect(e) <= 1e-10);
        DensityMatrix rho = random_state(f, 4, rng);
        Mat out = apply(e, rho.m);
        REQUIRE(std::abs(trace_re(out) - 1.0) <= 1e-10);
        REQUIRE(min_eig(out) >= -1e-10);
        REQUIRE(herm_defect(out) <= 1e-10);
      }
    }
  }
  SECTION("random states are states") {
    for (int t = 0; t < 5; ++t) {
      DensityMatrix rho = random_state(Field::cplx, 6, rng);
      REQUIRE(std::abs(trace_re(rho.m) - 1.0) <= 1e-12);
      REQUIRE(min_eig(rho.m) >= -1e-12);
    }
  }
}

TEST_CASE("rng determinism") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
  Rng c(42), d(43);
  bool differ = false;
  for (int i = 0; i < 10; ++i) differ |= (c.next_u64() != d.next_u64());
  REQUIRE(differ);

  Rng base(7);
  Rng f0 = base.fork(0), f1 = base.fork(1), f0b = base.fork(0);
  REQUIRE(f0.next_u64() == f0b.next_u64());
  REQUIRE(f0.next_u64() != f1.next_u64());
}

TEST_CASE("json round trip") {
  Rng rng(5);
  Mat h = random_hermitian(Field::cplx, 3, rng);
  json j = mat_to_json(h);
  std::string text = j.dump();
  Mat back = mat_from_json(json::parse(text));
  REQUIRE(back.field == Field::cplx);
  REQUIRE((back.re - h.re).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.im - h.im).cwiseAbs().maxCoeff() == 0.0);

  DensityMatrix rho = density_matrix(rho_bar(), {2, 2});
  DensityMatrix rho2 = state_from_json(json::parse(state_to_json(rho).dump()));
  REQUIRE(rho2.dims == std::vector<int>{2, 2});
  REQUIRE(approx_equal(rho2.m, rho.m, 0.0));

  // malformed inputs are rejected
  REQUIRE_THROWS_AS(mat_from_json(json::parse(R"({"field":"real","re":[[1,0],[0]]})")),
                    ValidationError);
  REQUIRE_THROWS_AS(state_from_json(json::parse(R"({"field":"real","re":[[1,0],[0,1]]})")),
                    ValidationError);
}

TEST_CASE("kraus maps contract trace distance") {
  // data processing: distances never grow under trace preserving maps
  Rng rng(13);
  for (int t = 0; t < 40; ++t) {
    Field f = (t % 2 == 0) ? Field::real : Field::cplx;
    KrausMap e = random_tp_map(f, 4, 2 + int(rng.uniform_index(3)), rng);
    DensityMatrix a = random_state(f, 4, rng);
    DensityMatrix b = random_state(f, 4, rng);
    double before = trace_distance(a.m, b.m);
    double after = trace_distance(apply(e, a.m), apply(e, b.m));
    REQUIRE(after <= before + 1e-9);
  }
}
