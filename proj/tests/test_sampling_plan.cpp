#include <catch2/catch_amalgamated.hpp>

#include "qsft/sampling_plan.hpp"
#include "test_helpers.hpp"

using namespace qsft;

namespace {

// Rank of a matrix over F_q (prime q), by Gaussian elimination.
std::size_t rank_mod_prime(std::vector<std::vector<std::uint32_t>> m, std::uint32_t q) {
  std::size_t rank = 0;
  const std::size_t rows = m.size(), cols = m.empty() ? 0 : m[0].size();
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[rank], m[pivot]);
    // scale to 1
    std::uint32_t inv = 1;
    while ((m[rank][c] * inv) % q != 1) ++inv;
    for (auto& v : m[rank]) v = (v * inv) % q;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || m[r][c] == 0) continue;
      const std::uint32_t f = m[r][c];
      for (std::size_t cc = 0; cc < cols; ++cc)
        m[r][cc] = (m[r][cc] + (q - f) * m[rank][cc]) % q;
    }
    ++rank;
  }
  return rank;
}

}  // namespace

TEST_CASE("identity-block matrices select digit windows", "[plan]") {
  Rng rng(1);
  const auto ms = make_subsampling_matrices(3, 4, 2, 2, rng);
  REQUIRE(ms.size() == 2);
  const QIndex k(3, {1, 2, 0, 2});
  CHECK(ms[0].mul_transposed(k) == QIndex(3, {1, 2}));  // digits {0,1}
  CHECK(ms[1].mul_transposed(k) == QIndex(3, {0, 2}));  // digits {2,3}
}

TEST_CASE("full sampling degenerates to the identity", "[plan]") {
  Rng rng(1);
  const auto ms = make_subsampling_matrices(5, 3, 3, 1, rng);
  REQUIRE(ms.size() == 1);
  CHECK(ms[0] == QMatrix::identity(5, 3));
}

TEST_CASE("oversubscribed groups fall back to seeded random matrices", "[plan]") {
  Rng rng1(99), rng2(99), rng3(100);
  const auto a = make_subsampling_matrices(2, 4, 2, 3, rng1);
  const auto b = make_subsampling_matrices(2, 4, 2, 3, rng2);
  const auto c = make_subsampling_matrices(2, 4, 2, 3, rng3);
  REQUIRE(a.size() == 3);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("b larger than n is a usage error", "[plan]") {
  Rng rng(1);
  CHECK_THROWS_AS(make_subsampling_matrices(3, 2, 3, 1, rng), std::invalid_argument);
}

TEST_CASE("identity-block column spaces cover every digit when C*b = n", "[plan]") {
  Rng rng(1);
  const auto ms = make_subsampling_matrices(3, 6, 2, 3, rng);
  std::vector<bool> covered(6, false);
  for (const auto& M : ms)
    for (std::size_t u = 0; u < M.cols(); ++u)
      for (std::size_t r = 0; r < M.rows(); ++r)
        if (M.at(r, u) != 0) covered[r] = true;
  for (bool c : covered) CHECK(c);
}

TEST_CASE("random fallback matrices jointly span (prime q, fixed seed)", "[plan]") {
  Rng rng(7);
  const std::uint32_t q = 3;
  const std::size_t n = 4, b = 2, C = 3;
  const auto ms = make_subsampling_matrices(q, n, b, C, rng);
  std::vector<std::vector<std::uint32_t>> stacked(n, std::vector<std::uint32_t>(C * b));
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t u = 0; u < b; ++u)
      for (std::size_t r = 0; r < n; ++r) stacked[r][c * b + u] = ms[c].at(r, u);
  CHECK(rank_mod_prime(stacked, q) == n);
}

TEST_CASE("noiseless offsets are the zero row plus the identity rows", "[plan]") {
  Rng rng(1);
  const auto rows = make_offsets(Regime::Noiseless, 3, 2, 2, rng);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == QIndex(3, {0, 0}));
  CHECK(rows[1] == QIndex(3, {1, 0}));
  CHECK(rows[2] == QIndex(3, {0, 1}));
  CHECK_THROWS_AS(make_offsets(Regime::Noiseless, 3, 2, 5, rng), std::invalid_argument);
}

TEST_CASE("modulated offsets shift one digit at a time", "[plan]") {
  const QIndex base(4, {1, 2, 0});
  CHECK(base.add(QIndex::unit(4, 3, 0)) == QIndex(4, {2, 2, 0}));
  CHECK(base.add(QIndex::unit(4, 3, 1)) == QIndex(4, {1, 3, 0}));
  CHECK(base.add(QIndex::unit(4, 3, 2)) == QIndex(4, {1, 2, 1}));

  Rng rng(5);
  const std::size_t n = 5, P1 = 3;
  const auto rows = make_offsets(Regime::RobustSubLinear, 4, n, P1, rng);
  REQUIRE(rows.size() == P1 * (n + 1));
  for (std::size_t p = 0; p < P1; ++p) {
    const auto& d = rows[p * (n + 1)];
    for (std::size_t r = 0; r < n; ++r)
      CHECK(rows[p * (n + 1) + 1 + r].sub(d) == QIndex::unit(4, n, r));
  }
}

TEST_CASE("near-linear offsets are seed-reproducible uniform draws", "[plan]") {
  Rng rng1(17), rng2(17);
  const auto a = make_offsets(Regime::RobustNearLinear, 3, 4, 16, rng1);
  const auto b = make_offsets(Regime::RobustNearLinear, 3, 4, 16, rng2);
  REQUIRE(a.size() == 16);
  CHECK(a == b);
}

TEST_CASE("coded offsets cannot be drawn randomly", "[plan]") {
  Rng rng(1);
  CHECK_THROWS_AS(make_offsets(Regime::Coded, 3, 9, 4, rng), std::invalid_argument);
}

TEST_CASE("query points enumerate the affine sets offset-major", "[plan]") {
  SECTION("b=0 reduces to the offsets themselves") {
    PlanConfig pc;
    pc.q = 3;
    pc.n = 2;
    pc.b = 0;
    pc.C = 1;
    pc.regime = Regime::Noiseless;
    const auto plan = make_plan(pc);
    const auto pts = query_points(plan, 0);
    REQUIRE(pts.size() == plan.groups[0].offsets.size());
    CHECK(pts == plan.groups[0].offsets);
  }
  SECTION("explicit 2x1 example") {
    SamplingPlan plan;
    plan.q = 2;
    plan.n = 2;
    plan.b = 1;
    plan.C = 1;
    QMatrix M(2, 2, 1);
    M.at(0, 0) = 1;
    plan.groups.push_back({M, {QIndex(2, {0, 1})}});
    const auto pts = query_points(plan, 0);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0] == QIndex(2, {0, 1}));
    CHECK(pts[1] == QIndex(2, {1, 1}));
  }
  SECTION("noiseless plans query C*(n+1)*q^b points") {
    PlanConfig pc;
    pc.q = 3;
    pc.n = 4;
    pc.b = 2;
    pc.C = 2;
    pc.regime = Regime::Noiseless;
    const auto plan = make_plan(pc);
    std::size_t total = 0;
    for (std::size_t c = 0; c < plan.groups.size(); ++c) total += query_points(plan, c).size();
    CHECK(total == pc.C * (pc.n + 1) * pow_u64(pc.q, pc.b));
    CHECK(plan.raw_query_count() == total);
  }
}

TEST_CASE("plans serialize deterministically and round-trip", "[plan]") {
  PlanConfig pc;
  pc.q = 4;
  pc.n = 5;
  pc.b = 2;
  pc.C = 3;
  pc.regime = Regime::RobustSubLinear;
  pc.P1 = 4;
  pc.seed = 31337;

  const auto plan1 = make_plan(pc);
  const auto plan2 = make_plan(pc);
  const std::string dump1 = plan_to_json(plan1).dump();
  CHECK(dump1 == plan_to_json(plan2).dump());

  pc.seed = 31338;
  const auto plan3 = make_plan(pc);
  CHECK(dump1 != plan_to_json(plan3).dump());

  const auto parsed = plan_from_json(nlohmann::json::parse(dump1));
  CHECK(parsed.q == plan1.q);
  CHECK(parsed.regime == plan1.regime);
  REQUIRE(parsed.groups.size() == plan1.groups.size());
  for (std::size_t c = 0; c < parsed.groups.size(); ++c) {
    CHECK(parsed.groups[c].M == plan1.groups[c].M);
    CHECK(parsed.groups[c].offsets == plan1.groups[c].offsets);
  }
  CHECK(plan_to_json(parsed).dump() == dump1);
}

TEST_CASE("regime tags parse and reject unknowns", "[plan]") {
  CHECK(parse_regime("noiseless") == Regime::Noiseless);
  CHECK(parse_regime("robust-nl") == Regime::RobustNearLinear);
  CHECK(parse_regime("robust-sl") == Regime::RobustSubLinear);
  CHECK(parse_regime("coded") == Regime::Coded);
  CHECK_THROWS_AS(parse_regime("fancy"), std::invalid_argument);
}
