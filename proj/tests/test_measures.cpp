// Distance and entanglement measure checks. Reference values: the mixture
// of the two odd-parity Bell projectors sits at distance 1/2 from both the
// separable and the product set with closest state I/4, every Bell projector
// sits at distance 1/2, and a Schmidt pair (c, s) pure state sits at c*s.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qnl/measures.hpp"

using namespace qnl;

namespace {

Mat rho_bar() {
  return scale(add(bell_proj(2), bell_proj(1)), 0.5).to_field(Field::real);
}

Mat random_two_rebit(Rng& rng, long rank = 0) {
  return random_state(Field::real, 4, rng, rank).m;
}

Mat random_rotation(Rng& rng) {
  double th = rng.uniform() * 2 * M_PI;
  Eigen::MatrixXd o(2, 2);
  o << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  if (rng.uniform() < 0.5) o.col(1) *= -1;  // allow reflections
  return real_mat(o);
}

Mat conj_local(const Mat& rho, const Mat& oa, const Mat& ob) {
  Mat u = tensor(oa, ob);
  return mul(u, rho, transpose(u));
}

Mat pure_schmidt(double theta) {
  Mat psi = Mat::zero(Field::real, 4, 1);
  psi.re(0, 0) = std::cos(theta);
  psi.re(3, 0) = std::sin(theta);
  return psi;
}

double round1(double x) { return std::floor(x * 10 + 0.5) / 10; }

}  // namespace

TEST_CASE("separability distance of the reference mixture") {
  SepDistance d = dsep_two_rebit(rho_bar());
  REQUIRE(d.status == SdpStatus::optimal);
  REQUIRE(std::abs(d.value - 0.5) <= 1e-7);
  REQUIRE(std::abs(d.td - d.value) <= 1e-7);
  // closest invariant state is maximally mixed
  REQUIRE(max_abs(sub(d.sigma, scale(Mat::id(Field::real, 4), 0.25))) <= 1e-5);
}

TEST_CASE("all Bell projectors sit at distance one half") {
  for (int k = 0; k < 4; ++k) {
    SepDistance d = dsep_two_rebit(bell_proj(k).to_field(Field::real));
    REQUIRE(std::abs(d.value - 0.5) <= 1e-7);
  }
}

TEST_CASE("pure states sit at the product of their Schmidt coefficients") {
  for (double th : {0.1, 0.3, 0.5, M_PI / 4, 1.0, 1.4}) {
    Mat psi = pure_schmidt(th);
    double cs = std::cos(th) * std::sin(th);
    REQUIRE(std::abs(pure_sep_upper(psi) - cs) <= 1e-12);
    SepDistance d = dsep_two_rebit(outer(psi, psi));
    REQUIRE(std::abs(d.value - cs) <= 1e-7);
  }
}

TEST_CASE("schmidt coefficients") {
  Mat psi = Mat::zero(Field::real, 4, 1);
  psi.re(0, 0) = 0.6;
  psi.re(3, 0) = 0.8;
  auto sc = schmidt_coeffs(psi, 2, 2);
  REQUIRE(std::abs(sc[0] - 0.8) <= 1e-12);
  REQUIRE(std::abs(sc[1] - 0.6) <= 1e-12);
  REQUIRE(std::abs(pure_sep_upper(psi) - 0.48) <= 1e-12);

  // complex vector (|01> + i|10>)/sqrt(2) is maximally entangled
  Mat chi = Mat::zero(Field::cplx, 4, 1);
  chi.re(1, 0) = 1 / std::sqrt(2.0);
  chi.im(2, 0) = 1 / std::sqrt(2.0);
  auto sc2 = schmidt_coeffs(chi, 2, 2);
  REQUIRE(std::abs(sc2[0] - 1 / std::sqrt(2.0)) <= 1e-12);
  REQUIRE(std::abs(sc2[1] - 1 / std::sqrt(2.0)) <= 1e-12);
}

TEST_CASE("separability distance never exceeds one half") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    SepDistance d = dsep_two_rebit(random_two_rebit(rng));
    REQUIRE(d.value >= -1e-9);
    REQUIRE(d.value <= 0.5 + 1e-7);
    REQUIRE(std::abs(d.td - d.value) <= 1e-6);
  }
}

TEST_CASE("product mixtures are at distance zero") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    Mat rho = Mat::zero(Field::real, 4, 4);
    double wsum = 0;
    for (int k = 0; k < 4; ++k) {
      Mat a = random_pure_vec(Field::real, 2, rng), b = random_pure_vec(Field::real, 2, rng);
      double w = 0.1 + rng.uniform();
      rho = add(rho, scale(outer(tensor(a, b), tensor(a, b)), w));
      wsum += w;
    }
    rho = scale(rho, 1.0 / wsum);
    REQUIRE(dsep_two_rebit(rho).value <= 1e-6);
  }
}

TEST_CASE("separability distance is invariant under local rotations") {
  Rng rng(13);
  for (int t = 0; t < 8; ++t) {
    Mat rho = random_two_rebit(rng);
    double base = dsep_two_rebit(rho).value;
    double rot = dsep_two_rebit(conj_local(rho, random_rotation(rng), random_rotation(rng))).value;
    REQUIRE(std::abs(base - rot) <= 1e-6);
  }
}

TEST_CASE("mixing toward the maximally mixed state contracts the distance") {
  Rng rng(31);
  for (int t = 0; t < 8; ++t) {
    Mat rho = random_two_rebit(rng);
    double lam = 0.2 + 0.6 * rng.uniform();
    Mat mix = add(scale(rho, lam), scale(Mat::id(Field::real, 4), 0.25 * (1 - lam)));
    REQUIRE(dsep_two_rebit(mix).value <= lam * dsep_two_rebit(rho).value + 1e-7);
  }
}

TEST_CASE("one-sided channels never increase the separability distance") {
  Rng rng(43);
  Mat id2 = Mat::id(Field::real, 2);
  for (int t = 0; t < 8; ++t) {
    Mat rho = random_two_rebit(rng);
    KrausMap local = random_tp_map(Field::real, 2, 2, rng);
    KrausMap lifted;
    for (const auto& k : local.ks) lifted.ks.push_back(tensor(k, id2));
    Mat out = apply(lifted, rho);
    REQUIRE(dsep_two_rebit(out).value <= dsep_two_rebit(rho).value + 1e-6);
  }
}

TEST_CASE("entanglement of formation reference values") {
  REQUIRE(std::abs(ef_two_rebit(rho_bar()) - 1.0) <= 1e-12);
  REQUIRE(std::abs(concurrence_two_rebit(rho_bar()) - 1.0) <= 1e-12);
  for (int k = 0; k < 4; ++k)
    REQUIRE(std::abs(ef_two_rebit(bell_proj(k).to_field(Field::real)) - 1.0) <= 1e-12);
  REQUIRE(ef_two_rebit(scale(Mat::id(Field::real, 4), 0.25)) == 0.0);

  // pure Schmidt states: entropy of the marginal
  for (double th : {0.2, 0.6, 1.1}) {
    Mat psi = pure_schmidt(th);
    double c2 = std::cos(th) * std::cos(th);
    REQUIRE(std::abs(ef_two_rebit(outer(psi, psi)) - binary_entropy(c2)) <= 1e-12);
  }
}

TEST_CASE("entanglement of formation vanishes on products") {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    Mat a = random_state(Field::real, 2, rng).m, b = random_state(Field::real, 2, rng).m;
    REQUIRE(ef_two_rebit(tensor(a, b)) <= 1e-10);
  }
}

TEST_CASE("entanglement of formation is convex and locally invariant") {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    Mat r1 = random_two_rebit(rng), r2 = random_two_rebit(rng);
    double lam = rng.uniform();
    Mat mix = add(scale(r1, lam), scale(r2, 1 - lam));
    REQUIRE(ef_two_rebit(mix) <= lam * ef_two_rebit(r1) + (1 - lam) * ef_two_rebit(r2) + 1e-10);

    double base = ef_two_rebit(r1);
    double rot = ef_two_rebit(conj_local(r1, random_rotation(rng), random_rotation(rng)));
    REQUIRE(std::abs(base - rot) <= 1e-10);
  }
}

TEST_CASE("one-sided channels never increase the entanglement of formation") {
  Rng rng(29);
  Mat id2 = Mat::id(Field::real, 2);
  for (int t = 0; t < 20; ++t) {
    Mat rho = random_two_rebit(rng);
    KrausMap local = random_tp_map(Field::real, 2, 2, rng);
    KrausMap lifted;
    for (const auto& k : local.ks) lifted.ks.push_back(tensor(id2, k));
    REQUIRE(ef_two_rebit(apply(lifted, rho)) <= ef_two_rebit(rho) + 1e-10);
  }
}

TEST_CASE("independence distance of the reference mixture") {
  IndBounds b = dind_bounds(rho_bar(), 4, 1);
  REQUIRE(std::abs(b.lower - 0.5) <= 1e-7);
  REQUIRE(std::abs(b.upper - 0.5) <= 1e-7);
  // optimizer is a product of maximally mixed factors
  REQUIRE(max_abs(sub(tensor(b.sigma_a, b.sigma_b), scale(Mat::id(Field::real, 4), 0.25))) <= 1e-4);
}

TEST_CASE("independence bounds are ordered") {
  Rng rng(53);
  for (int t = 0; t < 5; ++t) {
    IndBounds b = dind_bounds(random_two_rebit(rng), 3, 100 + t);
    REQUIRE(b.lower <= b.upper + 1e-7);
    REQUIRE(b.upper <= 0.75 + 1e-7);
  }
}

TEST_CASE("linear certificate values") {
  REQUIRE(epsilon_lower_bound(7.66) == 0.0);
  REQUIRE(epsilon_lower_bound(7.0) == 0.0);
  REQUIRE(std::abs(epsilon_lower_bound(8.09) - 0.0253) <= 5e-5);
  REQUIRE(std::abs(epsilon_lower_bound(7.83) - 0.0100) <= 5e-5);

  const double scores[] = {7.66, 7.72, 7.78, 7.88, 8.06, 8.22, 8.37, 8.50};
  const double percents[] = {0.0, 0.4, 0.7, 1.3, 2.4, 3.3, 4.2, 4.9};
  for (int k = 0; k < 8; ++k)
    REQUIRE(round1(100 * epsilon_lower_bound(scores[k])) == percents[k]);
}
