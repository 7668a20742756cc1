#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "binaural/errors.hpp"
#include "binaural/linalg.hpp"
#include "test_util.hpp"

using namespace binaural;
using namespace binaural::testutil;

TEST_CASE("herm_solve identity and scaling") {
  const CMatrix eye = CMatrix::Identity(4, 4);
  Rng rng(11);
  const CVector b = random_vector(rng, 4);
  CHECK(rel_error(herm_solve(eye, b), b) < 1e-15);

  CVector e1 = CVector::Zero(4);
  e1(0) = 1.0;
  const CVector x = herm_solve(2.0 * eye, e1);
  CHECK(std::abs(x(0) - Complex(0.5, 0.0)) < 1e-15);
  CHECK(x.tail(3).norm() < 1e-15);
}

TEST_CASE("herm_solve matches dense elimination oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix a = random_pd(rng, 4);
    const CVector b = random_vector(rng, 4);
    const CVector want = gauss_solve(a, b);
    CHECK(rel_error(herm_solve(a, b), want) < 1e-10);
  }
}

TEST_CASE("herm_solve residual over random PD matrices") {
  Rng rng(13);
  for (Index m : {2, 4, 6}) {
    for (int trial = 0; trial < 340; ++trial) {
      const CMatrix a = random_pd(rng, m);
      const CVector b = random_vector(rng, m);
      const CVector x = herm_solve(a, b);
      CHECK((a * x - b).norm() / b.norm() < 1e-10);
      CHECK(x.allFinite());
    }
  }
}

TEST_CASE("herm_solve diagonal loading on a singular PSD matrix") {
  Rng rng(14);
  const CVector v = random_vector(rng, 4);
  const CMatrix singular = (v * v.adjoint()).eval();  // rank 1
  const CVector b = random_vector(rng, 4);
  const CVector x = herm_solve(singular, b);  // succeeds via loading
  CHECK(x.allFinite());
}

TEST_CASE("herm_solve errors") {
  const CMatrix eye = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(herm_solve(eye, CVector::Zero(4)), DimensionMismatch);

  CMatrix indefinite = CMatrix::Zero(2, 2);
  indefinite(0, 0) = 1.0;
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(herm_solve(indefinite, CVector::Ones(2)), NotPositiveDefinite);

  CMatrix bad = eye;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(herm_solve(bad, CVector::Ones(3)), NonFiniteInput);
}

TEST_CASE("gevd_principal diagonal case") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  const auto [lambda, v] = gevd_principal(a, CMatrix::Identity(2, 2));
  CHECK(lambda == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(v(0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(v(1)) < 1e-12);
}

TEST_CASE("gevd_principal rank-1 update eigenvector is B^{-1} a") {
  Rng rng(15);
  for (int trial = 0; trial < 25; ++trial) {
    const CMatrix b = random_pd(rng, 5);
    const CVector a_vec = random_vector(rng, 5);
    const CMatrix a = 2.5 * (a_vec * a_vec.adjoint()) + b;
    const auto [lambda, v] = gevd_principal(a, b);
    const CVector want = gauss_solve(b, a_vec).normalized();
    const double cosine = std::abs(want.dot(v));
    CHECK(cosine >= 1.0 - 1e-8);
    CHECK((a * v - lambda * b * v).norm() / (a * v).norm() < 1e-8);
  }
}

TEST_CASE("gevd_principal degenerate pencil A = B") {
  Rng rng(16);
  const CMatrix b = random_pd(rng, 3);
  const auto [lambda, v] = gevd_principal(b, b);
  CHECK(lambda == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gevd_principal eigenvalue dominates Rayleigh quotients") {
  Rng rng(17);
  const CMatrix a_h = random_pd(rng, 4, 0.01);
  const CMatrix b = random_pd(rng, 4);
  const auto [lambda, v] = gevd_principal(a_h, b);
  for (int probe = 0; probe < 100; ++probe) {
    const CVector z = random_vector(rng, 4);
    const double quotient = std::real(z.dot(a_h * z)) / std::real(z.dot(b * z));
    CHECK(lambda >= quotient - 1e-10 * std::abs(lambda));
  }
}

TEST_CASE("gevd_principal requires PD B") {
  CMatrix indefinite = CMatrix::Zero(2, 2);
  indefinite(0, 0) = 1.0;
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(gevd_principal(CMatrix::Identity(2, 2), indefinite), NotPositiveDefinite);
}

TEST_CASE("check_psd") {
  CHECK(check_psd(CMatrix::Identity(3, 3), 1e-12));
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -0.1;
  CHECK_FALSE(check_psd(m, 1e-9));
  // Tiny negative eigenvalue within tolerance passes.
  m(1, 1) = -1e-13;
  CHECK(check_psd(m, 1e-9));
}

TEST_CASE("is_hermitian") {
  Rng rng(18);
  CHECK(is_hermitian(random_pd(rng, 4)));
  CMatrix m = random_pd(rng, 3);
  m(0, 1) += Complex(0.1, 0.0);
  CHECK_FALSE(is_hermitian(m));
  CHECK(is_hermitian(CMatrix::Zero(2, 2)));
}
