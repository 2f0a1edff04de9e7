#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "qsft/rng.hpp"
#include "qsft/spectrum.hpp"

using namespace qsft;

namespace {

SparseSpectrum random_spectrum(std::uint32_t q, std::size_t n, std::size_t S, Rng& rng) {
  SparseSpectrum F(q, n);
  while (F.size() < S) {
    const auto k = rng.qindex(q, n);
    if (F.contains(k)) continue;
    F.set(k, {rng.unit() * 2.0 - 1.0, rng.unit() * 2.0 - 1.0});
  }
  return F;
}

// Reference transform straight from the defining double sum.
SparseSpectrum forward_by_definition(const DenseSignal& f) {
  SparseSpectrum F(f.q(), f.n());
  const RootOfUnity w(f.q());
  for (std::uint64_t kr = 0; kr < f.size(); ++kr) {
    const QIndex k = QIndex::unrank(f.q(), f.n(), kr);
    cplx acc{0.0, 0.0};
    for (std::uint64_t mr = 0; mr < f.size(); ++mr)
      acc += f[mr] * w.conj_pow(inner_product(QIndex::unrank(f.q(), f.n(), mr), k));
    acc /= static_cast<double>(f.size());
    if (std::abs(acc) > 1e-12) F.set(k, acc);
  }
  return F;
}

}  // namespace

TEST_CASE("constant signals transform to a DC coefficient", "[spectrum]") {
  DenseSignal f(3, 3);
  for (std::uint64_t r = 0; r < f.size(); ++r) f[r] = 1.0;
  const auto F = dense_forward(f);
  REQUIRE(F.size() == 1);
  CHECK(std::abs(F.at(QIndex::zero(3, 3)) - cplx{1.0, 0.0}) < 1e-12);
}

TEST_CASE("a pure character transforms to a single spike", "[spectrum]") {
  const QIndex k0(4, {3, 1, 2});
  DenseSignal f(4, 3);
  const RootOfUnity w(4);
  for (std::uint64_t r = 0; r < f.size(); ++r)
    f[r] = w.pow(inner_product(QIndex::unrank(4, 3, r), k0));
  const auto F = dense_forward(f);
  REQUIRE(F.size() == 1);
  CHECK(std::abs(F.at(k0) - cplx{1.0, 0.0}) < 1e-12);
}

TEST_CASE("synthesis and analysis are mutually inverse", "[spectrum]") {
  Rng rng(42);
  SECTION("3-sparse round trip") {
    const auto F = random_spectrum(3, 4, 3, rng);
    const auto F2 = dense_forward(dense_inverse(F));
    REQUIRE(F2.size() == F.size());
    for (const auto& [k, v] : F.entries()) CHECK(std::abs(F2.at(k) - v) < 1e-10);
  }
  SECTION("8-sparse round trip at q=3 n=5") {
    const auto F = random_spectrum(3, 5, 8, rng);
    const auto F2 = dense_forward(dense_inverse(F));
    double worst = 0.0;
    for (const auto& [k, v] : F.entries()) worst = std::max(worst, std::abs(F2.at(k) - v));
    for (const auto& [k, v] : F2.entries())
      if (!F.contains(k)) worst = std::max(worst, std::abs(v));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("empty and constant spectra synthesize trivially", "[spectrum]") {
  const SparseSpectrum empty(3, 3);
  const auto f0 = dense_inverse(empty);
  for (std::uint64_t r = 0; r < f0.size(); ++r) CHECK(f0[r] == cplx{0.0, 0.0});

  SparseSpectrum dc(3, 3);
  const cplx c{0.7, -0.2};
  dc.set(QIndex::zero(3, 3), c);
  const auto fc = dense_inverse(dc);
  for (std::uint64_t r = 0; r < fc.size(); ++r) CHECK(std::abs(fc[r] - c) < 1e-12);
}

TEST_CASE("radix passes match the defining double sum", "[spectrum]") {
  Rng rng(5);
  for (std::uint32_t q : {2u, 3u, 5u}) {
    for (std::size_t n = 1; n <= 4; ++n) {
      DenseSignal f(q, n);
      for (std::uint64_t r = 0; r < f.size(); ++r)
        f[r] = {rng.unit() * 2.0 - 1.0, rng.unit() * 2.0 - 1.0};
      const auto fast = dense_forward(f, 0.0);
      const auto naive = forward_by_definition(f);
      for (std::uint64_t kr = 0; kr < f.size(); ++kr) {
        const QIndex k = QIndex::unrank(q, n, kr);
        CHECK(std::abs(fast.at(k) - naive.at(k)) < 1e-9);
      }
    }
  }
}

TEST_CASE("signal energy equals N times coefficient energy", "[spectrum]") {
  Rng rng(9);
  for (int it = 0; it < 5; ++it) {
    const auto F = random_spectrum(3, 4, 6, rng);
    const auto f = dense_inverse(F);
    const double lhs = f.energy();
    const double rhs = static_cast<double>(f.size()) * F.norm2();
    CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, rhs));
  }
}

TEST_CASE("nmse compares over the union of supports", "[spectrum]") {
  SparseSpectrum truth(3, 2);
  truth.set(QIndex(3, {1, 2}), {1.0, 0.0});

  SECTION("identical estimate scores zero") { CHECK(nmse(truth, truth) == 0.0); }
  SECTION("empty estimate scores one") {
    const SparseSpectrum empty(3, 2);
    CHECK(nmse(empty, truth) == 1.0);
  }
  SECTION("half-magnitude estimate scores a quarter") {
    SparseSpectrum est(3, 2);
    est.set(QIndex(3, {1, 2}), {0.5, 0.0});
    CHECK(std::abs(nmse(est, truth) - 0.25) < 1e-15);
  }
  SECTION("spurious coefficients count against the estimate") {
    SparseSpectrum est = truth;
    est.set(QIndex(3, {0, 1}), {1.0, 0.0});
    CHECK(std::abs(nmse(est, truth) - 1.0) < 1e-15);
  }
  SECTION("all-zero truth is a domain error") {
    const SparseSpectrum empty(3, 2);
    CHECK_THROWS_AS(nmse(truth, empty), std::domain_error);
  }
}

TEST_CASE("spectrum files round-trip doubles exactly", "[spectrum]") {
  Rng rng(1234);
  const auto F = random_spectrum(5, 4, 7, rng);
  std::stringstream ss;
  write_spectrum(ss, F);
  const auto G = read_spectrum(ss);
  REQUIRE(G.size() == F.size());
  CHECK(G.q() == F.q());
  CHECK(G.n() == F.n());
  for (const auto& [k, v] : F.entries()) CHECK(G.at(k) == v);
}

TEST_CASE("spectrum files reject malformed input", "[spectrum]") {
  {
    std::stringstream ss("nonsense\n");
    CHECK_THROWS_WITH(read_spectrum(ss), Catch::Matchers::ContainsSubstring("header"));
  }
  {
    std::stringstream ss("q=3 n=2\n12 not-a-number 0\n");
    CHECK_THROWS_WITH(read_spectrum(ss), Catch::Matchers::ContainsSubstring("line 2"));
  }
  {
    std::stringstream ss("q=3 n=2\n120 1 0\n");
    CHECK_THROWS_WITH(read_spectrum(ss), Catch::Matchers::ContainsSubstring("length"));
  }
}
