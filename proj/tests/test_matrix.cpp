#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "lts/matrix.hpp"
#include "lts/systems.hpp"

using lts::CMatrix;
using lts::Complex;

namespace {

// Hand oracle: largest eigenvalue of a 2x2 Hermitian matrix in closed form.
double hermitian2_eig_max(const CMatrix& h) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const double off = std::abs(h(0, 1));
  return 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + off * off);
}

CMatrix random_matrix(lts::Rng& rng, int dim) {
  CMatrix a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = rng.cnormal();
  return a;
}

}  // namespace

TEST_CASE("mat_exp on canonical inputs") {
  SECTION("zero matrix gives the identity") {
    const CMatrix e = lts::mat_exp(CMatrix::Zero(2, 2));
    REQUIRE((e - lts::identity(2)).norm() == 0.0);
  }

  SECTION("nilpotent series terminates") {
    CMatrix a(2, 2);
    a << 0, 1, 0, 0;
    const CMatrix e = lts::mat_exp(a);
    CHECK(std::abs(e(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(e(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(e(1, 0)) < 1e-15);
    CHECK(std::abs(e(1, 1) - 1.0) < 1e-15);
  }

  SECTION("diagonal case") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = std::log(2.0);
    a(1, 1) = -1.0;
    const CMatrix e = lts::mat_exp(a);
    CHECK(std::abs(e(0, 0) - 2.0) < 1e-14);
    CHECK(std::abs(e(1, 1) - std::exp(-1.0)) < 1e-15);
    CHECK(std::abs(e(0, 1)) == 0.0);
  }

  SECTION("rejects empty and non-finite input") {
    CHECK_THROWS_AS(lts::mat_exp(CMatrix(0, 0)), std::invalid_argument);
    CMatrix bad(2, 2);
    bad << 1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0;
    CHECK_THROWS_AS(lts::mat_exp(bad), std::invalid_argument);
    CHECK_THROWS_AS(lts::mat_exp(CMatrix::Zero(2, 3)), std::invalid_argument);
  }
}

TEST_CASE("spectral_norm on canonical inputs") {
  SECTION("identity has norm 1 for several dims") {
    for (int dim : {1, 2, 5, 16}) CHECK(lts::spectral_norm(lts::identity(dim)) == Catch::Approx(1.0).epsilon(1e-14));
  }

  SECTION("diagonal singular values") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = 3.0;
    a(1, 1) = -4.0;
    CHECK(lts::spectral_norm(a) == Catch::Approx(4.0).epsilon(1e-14));
  }

  SECTION("nilpotent matrix against the 2x2 hand oracle") {
    CMatrix a(2, 2);
    a << 0, 2, 0, 0;
    const double expected = std::sqrt(hermitian2_eig_max(a.adjoint() * a));
    CHECK(expected == Catch::Approx(2.0).margin(1e-15));
    CHECK(lts::spectral_norm(a) == Catch::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("matrix arithmetic invariants on random inputs") {
  lts::Rng rng(42);

  SECTION("exp(A) exp(-A) = I for ||A|| <= 1") {
    for (int trial = 0; trial < 20; ++trial) {
      const int dim = 2 + static_cast<int>(rng.uniform() * 5);
      CMatrix a = random_matrix(rng, dim);
      const double n = lts::spectral_norm(a);
      if (n > 1.0) a *= (0.9999 / n);
      const CMatrix prod = lts::mat_exp(a) * lts::mat_exp(CMatrix(-a));
      CHECK(lts::spectral_norm(prod - lts::identity(dim)) <= 1e-12);
    }
  }

  SECTION("anti-Hermitian generators exponentiate to unitaries") {
    for (int trial = 0; trial < 20; ++trial) {
      const int dim = 2 + static_cast<int>(rng.uniform() * 5);
      const CMatrix a = lts::random_antihermitian(rng, dim, 2.0);
      CHECK(lts::spectral_norm(lts::mat_exp(a)) == Catch::Approx(1.0).margin(1e-12));
    }
  }

  SECTION("spectral norm is submultiplicative") {
    for (int trial = 0; trial < 20; ++trial) {
      const int dim = 2 + static_cast<int>(rng.uniform() * 5);
      const CMatrix a = random_matrix(rng, dim);
      const CMatrix b = random_matrix(rng, dim);
      CHECK(lts::spectral_norm(a * b) <=
            lts::spectral_norm(a) * lts::spectral_norm(b) + 1e-12);
    }
  }

  SECTION("diagonal exponentials match the scalar exponential entrywise") {
    for (int trial = 0; trial < 10; ++trial) {
      const int dim = 2 + static_cast<int>(rng.uniform() * 5);
      CMatrix a = CMatrix::Zero(dim, dim);
      for (int i = 0; i < dim; ++i) a(i, i) = Complex(2.0 * rng.normal(), rng.normal());
      const CMatrix e = lts::mat_exp(a);
      for (int i = 0; i < dim; ++i) {
        const Complex expected = std::exp(a(i, i));
        CHECK(std::abs(e(i, i) - expected) <= 1e-14 * std::abs(expected));
      }
    }
  }
}
