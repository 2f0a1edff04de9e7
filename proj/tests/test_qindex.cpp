#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qsft/qindex.hpp"
#include "qsft/rng.hpp"

using namespace qsft;

TEST_CASE("inner products reduce mod q", "[qindex]") {
  CHECK(inner_product(QIndex(3, {1, 2}), QIndex(3, {2, 2})) == 0);
  CHECK(inner_product(QIndex(4, {0, 0}), QIndex(4, {3, 1})) == 0);
  CHECK(inner_product(QIndex(2, {1, 1, 0}), QIndex(2, {1, 0, 1})) == 1);
}

TEST_CASE("inner product rejects mismatched operands", "[qindex]") {
  CHECK_THROWS_AS(inner_product(QIndex(3, {1, 2}), QIndex(3, {1, 2, 0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(inner_product(QIndex(3, {1, 2}), QIndex(4, {1, 2})), std::invalid_argument);
}

TEST_CASE("digit vectors validate their range", "[qindex]") {
  CHECK_THROWS_AS(QIndex(3, {0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(QIndex(1, {0}), std::invalid_argument);
}

TEST_CASE("rank and unrank round-trip", "[qindex]") {
  for (std::uint32_t q : {2u, 3u, 5u}) {
    const std::size_t n = 4;
    const auto N = pow_u64(q, n);
    for (std::uint64_t r = 0; r < N; ++r) {
      const QIndex x = QIndex::unrank(q, n, r);
      CHECK(x.rank() == r);
      CHECK(QIndex::unrank(q, n, x.rank()) == x);
    }
  }
  CHECK_THROWS_AS(QIndex::unrank(2, 3, 8), std::invalid_argument);
}

TEST_CASE("text form is most-significant-digit first", "[qindex]") {
  const QIndex x = QIndex::parse(3, "0211");
  CHECK(x.n() == 4);
  CHECK(x.to_string() == "0211");
  // "0211" as a base-3 numeral.
  CHECK(x.rank() == 0 * 27 + 2 * 9 + 1 * 3 + 1);
  CHECK(QIndex::parse(3, x.to_string()) == x);
  CHECK_THROWS_AS(QIndex::parse(3, "031"), std::invalid_argument);
}

TEST_CASE("modular add and sub are inverse", "[qindex]") {
  Rng rng(7);
  for (int it = 0; it < 50; ++it) {
    const auto x = rng.qindex(5, 6);
    const auto y = rng.qindex(5, 6);
    CHECK(x.add(y).sub(y) == x);
    CHECK(x.sub(x).is_zero());
  }
}

TEST_CASE("matrix-vector products over Z_q", "[qindex]") {
  SECTION("identity fixes every vector") {
    const auto I = QMatrix::identity(5, 4);
    Rng rng(3);
    for (int it = 0; it < 20; ++it) {
      const auto x = rng.qindex(5, 4);
      CHECK(I.mul(x) == x);
      CHECK(I.mul_transposed(x) == x);
    }
  }
  SECTION("explicit 3x2 example") {
    QMatrix M(3, 3, 2);
    M.at(0, 0) = 1;
    M.at(1, 1) = 1;
    M.at(2, 0) = 1;
    M.at(2, 1) = 1;
    const QIndex x(3, {1, 2, 2});
    CHECK(M.mul_transposed(x) == QIndex(3, {0, 1}));
  }
  SECTION("zero matrix annihilates") {
    const QMatrix Z(3, 4, 2);
    CHECK(Z.mul(QIndex(3, {1, 2})) == QIndex::zero(3, 4));
  }
  SECTION("shape mismatch throws") {
    const QMatrix M(3, 4, 2);
    CHECK_THROWS_AS(M.mul(QIndex(3, {1, 2, 0})), std::invalid_argument);
  }
  SECTION("distributes over modular addition") {
    Rng rng(11);
    for (int it = 0; it < 50; ++it) {
      QMatrix M(4, 5, 3);
      for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 3; ++c) M.at(r, c) = rng.below(4);
      const auto x = rng.qindex(4, 3);
      const auto y = rng.qindex(4, 3);
      CHECK(M.mul(x.add(y)) == M.mul(x).add(M.mul(y)));
    }
  }
}

TEST_CASE("root of unity table", "[qindex]") {
  for (std::uint32_t q = 2; q <= 9; ++q) {
    const RootOfUnity w(q);
    for (std::uint32_t a = 0; a < q; ++a) {
      CHECK(std::abs(std::abs(w.pow(a)) - 1.0) < 1e-12);
      for (std::uint32_t b = 0; b < q; ++b)
        CHECK(std::abs(w.pow(a) * w.pow(b) - w.pow((a + b) % q)) < 1e-12);
    }
  }
}

TEST_CASE("character sums over Z_q^b vanish except at zero", "[qindex]") {
  for (std::uint32_t q : {2u, 3u, 4u}) {
    for (std::size_t b = 1; b <= 4; ++b) {
      const RootOfUnity w(q);
      const auto B = pow_u64(q, b);
      for (std::uint64_t ar = 0; ar < B; ++ar) {
        const QIndex a = QIndex::unrank(q, b, ar);
        cplx sum{0.0, 0.0};
        for (std::uint64_t lr = 0; lr < B; ++lr)
          sum += w.pow(inner_product(QIndex::unrank(q, b, lr), a));
        const cplx expect = a.is_zero() ? cplx{static_cast<double>(B), 0.0} : cplx{0.0, 0.0};
        CHECK(std::abs(sum - expect) < 1e-9 * static_cast<double>(B));
      }
    }
  }
}

TEST_CASE("arg_q hits every root of unity exactly", "[qindex]") {
  for (std::uint32_t q = 2; q <= 10; ++q) {
    const RootOfUnity w(q);
    for (std::uint32_t a = 0; a < q; ++a) CHECK(arg_q(w.pow(a), q) == a);
  }
}

TEST_CASE("arg_q quantizes perturbed phases", "[qindex]") {
  // e^{j(pi/2 + 0.3)} sits within the q=4 cell around w^1.
  CHECK(arg_q(std::polar(1.0, std::numbers::pi / 2 + 0.3), 4) == 1);
  // e^{-j pi/2}: the floor lands at -1, which reduces to 3 mod 4.
  CHECK(arg_q(std::polar(1.0, -std::numbers::pi / 2), 4) == 3);
}

TEST_CASE("arg_q rejects zero", "[qindex]") {
  CHECK_THROWS_AS(arg_q(cplx(0.0, 0.0), 4), std::domain_error);
}

TEST_CASE("arg_q is stable across its whole quantization cell", "[qindex]") {
  // Any magnitude and any phase offset strictly inside (-pi/q, pi/q) must
  // leave the sector unchanged.
  for (std::uint32_t q = 2; q <= 8; ++q) {
    for (std::uint32_t a = 0; a < q; ++a) {
      for (double rho : {0.25, 1.0, 7.5}) {
        for (int step = -9; step <= 9; ++step) {
          const double theta = (std::numbers::pi / q) * (step / 10.0);
          const double phase = 2.0 * std::numbers::pi * a / q + theta;
          CHECK(arg_q(std::polar(rho, phase), q) == a);
        }
      }
    }
  }
}
