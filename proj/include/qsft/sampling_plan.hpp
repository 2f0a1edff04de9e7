// Subsampling designs. A plan fixes, per group c, the matrix M_c in
// Z_q^{n x b} that folds frequencies into B = q^b bins via k -> M_c^T k, and
// an ordered list of offsets d_{c,p} whose phase signatures w^{<d,k>} encode
// the surviving index. Offset layout per regime:
//
//   noiseless        zero row, then the n rows of the identity
//   robust-nl        P1 rows drawn uniformly at random
//   robust-sl        P1 blocks [d_p | d_p+e_1 | ... | d_p+e_n]
//   coded            zero row, then the 2t*ceil(log_q n) parity rows
//
// Plans are value types, deterministic in (config, seed), and serialize to
// JSON byte-for-byte reproducibly.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsft/coded_offsets.hpp"
#include "qsft/qindex.hpp"
#include "qsft/rng.hpp"

namespace qsft {

enum class Regime { Noiseless, RobustNearLinear, RobustSubLinear, Coded };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::Noiseless: return "noiseless";
    case Regime::RobustNearLinear: return "robust-nl";
    case Regime::RobustSubLinear: return "robust-sl";
    case Regime::Coded: return "coded";
  }
  throw std::invalid_argument("to_string: bad regime value");
}

inline Regime parse_regime(std::string_view s) {
  if (s == "noiseless") return Regime::Noiseless;
  if (s == "robust-nl") return Regime::RobustNearLinear;
  if (s == "robust-sl") return Regime::RobustSubLinear;
  if (s == "coded") return Regime::Coded;
  throw std::invalid_argument("unknown regime tag '" + std::string(s) +
                              "' (expected noiseless|robust-nl|robust-sl|coded)");
}

struct SamplingGroup {
  QMatrix M;                    // n x b
  std::vector<QIndex> offsets;  // rows of D_c, in order
};

struct SamplingPlan {
  std::uint32_t q = 2;
  std::size_t n = 1;
  std::size_t b = 1;
  std::size_t C = 1;
  Regime regime = Regime::Noiseless;
  std::size_t P1 = 0;  // robust regimes only
  std::uint64_t seed = 0;
  std::vector<SamplingGroup> groups;
  std::optional<CodedOffsetPlan> coded;

  std::uint64_t bins() const { return pow_u64(q, b); }
  std::size_t offsets_per_group() const { return groups.empty() ? 0 : groups[0].offsets.size(); }
  std::uint64_t raw_query_count() const {
    std::uint64_t total = 0;
    for (const auto& g : groups) total += g.offsets.size() * bins();
    return total;
  }
};

/// Identity-block matrices when C*b <= n (group c covers digit window
/// [(c-1)b, cb)), uniformly random matrices otherwise.
inline std::vector<QMatrix> make_subsampling_matrices(std::uint32_t q, std::size_t n,
                                                      std::size_t b, std::size_t C, Rng& rng) {
  if (b > n) throw std::invalid_argument("make_subsampling_matrices: b must not exceed n");
  if (C < 1) throw std::invalid_argument("make_subsampling_matrices: C must be >= 1");
  std::vector<QMatrix> out;
  out.reserve(C);
  if (C * b <= n) {
    for (std::size_t c = 0; c < C; ++c) {
      QMatrix M(q, n, b);
      for (std::size_t u = 0; u < b; ++u) M.at(c * b + u, u) = 1;
      out.push_back(std::move(M));
    }
  } else {
    for (std::size_t c = 0; c < C; ++c) {
      QMatrix M(q, n, b);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t u = 0; u < b; ++u) M.at(r, u) = rng.below(q);
      out.push_back(std::move(M));
    }
  }
  return out;
}

/// Ordered offset rows for one group. For the sub-linear regime the list has
/// P1*(n+1) rows, each base immediately followed by its n modulated copies.
inline std::vector<QIndex> make_offsets(Regime regime, std::uint32_t q, std::size_t n,
                                        std::size_t P, Rng& rng) {
  std::vector<QIndex> rows;
  switch (regime) {
    case Regime::Noiseless: {
      if (P != n)
        throw std::invalid_argument(
            "make_offsets: noiseless offsets are the zero row plus the identity; P must "
            "equal n");
      rows.push_back(QIndex::zero(q, n));
      for (std::size_t r = 0; r < n; ++r) rows.push_back(QIndex::unit(q, n, r));
      return rows;
    }
    case Regime::RobustNearLinear: {
      if (P < 1) throw std::invalid_argument("make_offsets: need at least one offset");
      for (std::size_t p = 0; p < P; ++p) rows.push_back(rng.qindex(q, n));
      return rows;
    }
    case Regime::RobustSubLinear: {
      if (P < 1) throw std::invalid_argument("make_offsets: need at least one offset block");
      for (std::size_t p = 0; p < P; ++p) {
        const QIndex base = rng.qindex(q, n);
        rows.push_back(base);
        for (std::size_t r = 0; r < n; ++r) rows.push_back(base.add(QIndex::unit(q, n, r)));
      }
      return rows;
    }
    case Regime::Coded:
      throw std::invalid_argument(
          "make_offsets: coded offsets come from build_parity_check, not from random draws");
  }
  throw std::invalid_argument("make_offsets: unknown regime tag");
}

/// Zero row plus the parity rows of a coded plan.
inline std::vector<QIndex> coded_offset_rows(const CodedOffsetPlan& coded) {
  std::vector<QIndex> rows;
  rows.reserve(coded.P + 1);
  rows.push_back(QIndex::zero(coded.q, coded.n));
  for (std::size_t r = 0; r < coded.P; ++r) rows.push_back(coded.H.row(r));
  return rows;
}

/// All oracle inputs for group c, offset-major, l in rank order within each
/// offset. Total count offsets * q^b.
inline std::vector<QIndex> query_points(const SamplingPlan& plan, std::size_t c) {
  if (c >= plan.groups.size()) throw std::invalid_argument("query_points: bad group index");
  const auto& g = plan.groups[c];
  const std::uint64_t B = plan.bins();
  std::vector<QIndex> points;
  points.reserve(g.offsets.size() * B);
  for (const auto& d : g.offsets)
    for (std::uint64_t r = 0; r < B; ++r)
      points.push_back(g.M.mul(QIndex::unrank(plan.q, plan.b, r)).add(d));
  return points;
}

struct PlanConfig {
  std::uint32_t q = 2;
  std::size_t n = 1;
  std::size_t b = 1;
  std::size_t C = 3;
  Regime regime = Regime::Noiseless;
  std::size_t P1 = 0;      // robust regimes; defaults to n when 0
  std::uint32_t t = 1;     // coded regime degree bound
  std::uint64_t seed = 1;
};

inline SamplingPlan make_plan(const PlanConfig& cfg) {
  SamplingPlan plan;
  plan.q = cfg.q;
  plan.n = cfg.n;
  plan.b = cfg.b;
  plan.C = cfg.C;
  plan.regime = cfg.regime;
  plan.seed = cfg.seed;
  Rng rng(derive_seed(cfg.seed, "plan"));
  auto matrices = make_subsampling_matrices(cfg.q, cfg.n, cfg.b, cfg.C, rng);

  std::vector<QIndex> coded_rows;
  if (cfg.regime == Regime::Coded) {
    plan.coded = build_parity_check(cfg.q, cfg.n, cfg.t);
    coded_rows = coded_offset_rows(*plan.coded);
  }
  if (cfg.regime == Regime::RobustNearLinear || cfg.regime == Regime::RobustSubLinear)
    plan.P1 = cfg.P1 ? cfg.P1 : cfg.n;

  for (std::size_t c = 0; c < cfg.C; ++c) {
    SamplingGroup g{std::move(matrices[c]), {}};
    switch (cfg.regime) {
      case Regime::Noiseless:
        g.offsets = make_offsets(Regime::Noiseless, cfg.q, cfg.n, cfg.n, rng);
        break;
      case Regime::RobustNearLinear:
        g.offsets = make_offsets(Regime::RobustNearLinear, cfg.q, cfg.n, plan.P1, rng);
        break;
      case Regime::RobustSubLinear:
        g.offsets = make_offsets(Regime::RobustSubLinear, cfg.q, cfg.n, plan.P1, rng);
        break;
      case Regime::Coded:
        g.offsets = coded_rows;
        break;
    }
    plan.groups.push_back(std::move(g));
  }
  return plan;
}

// --- JSON serialization -------------------------------------------------------

inline nlohmann::json plan_to_json(const SamplingPlan& plan) {
  nlohmann::json j;
  j["q"] = plan.q;
  j["n"] = plan.n;
  j["b"] = plan.b;
  j["C"] = plan.C;
  j["regime"] = to_string(plan.regime);
  j["P1"] = plan.P1;
  j["seed"] = plan.seed;
  auto groups = nlohmann::json::array();
  for (const auto& g : plan.groups) {
    nlohmann::json jg;
    auto cols = nlohmann::json::array();
    for (std::size_t u = 0; u < g.M.cols(); ++u) cols.push_back(g.M.column(u).to_string());
    jg["matrix_columns"] = cols;
    auto offs = nlohmann::json::array();
    for (const auto& d : g.offsets) offs.push_back(d.to_string());
    jg["offsets"] = offs;
    groups.push_back(std::move(jg));
  }
  j["groups"] = std::move(groups);
  if (plan.coded) {
    nlohmann::json jc;
    jc["t"] = plan.coded->t;
    jc["c"] = plan.coded->c;
    jc["P"] = plan.coded->P;
    jc["field_modulus"] = plan.coded->field_modulus;
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < plan.coded->P; ++r)
      rows.push_back(plan.coded->H.row(r).to_string());
    jc["parity_rows"] = rows;
    j["coded"] = std::move(jc);
  }
  return j;
}

inline SamplingPlan plan_from_json(const nlohmann::json& j) {
  SamplingPlan plan;
  plan.q = j.at("q").get<std::uint32_t>();
  plan.n = j.at("n").get<std::size_t>();
  plan.b = j.at("b").get<std::size_t>();
  plan.C = j.at("C").get<std::size_t>();
  plan.regime = parse_regime(j.at("regime").get<std::string>());
  plan.P1 = j.value("P1", std::size_t{0});
  plan.seed = j.value("seed", std::uint64_t{0});
  for (const auto& jg : j.at("groups")) {
    const auto cols = jg.at("matrix_columns");
    QMatrix M(plan.q, plan.n, cols.size());
    for (std::size_t u = 0; u < cols.size(); ++u) {
      const QIndex col = QIndex::parse(plan.q, cols[u].get<std::string>());
      if (col.n() != plan.n) throw std::invalid_argument("plan json: bad matrix column length");
      for (std::size_t r = 0; r < plan.n; ++r) M.at(r, u) = col.digit(r);
    }
    SamplingGroup g{std::move(M), {}};
    for (const auto& jo : jg.at("offsets"))
      g.offsets.push_back(QIndex::parse(plan.q, jo.get<std::string>()));
    plan.groups.push_back(std::move(g));
  }
  if (j.contains("coded")) {
    // The table is rebuilt rather than stored; the construction is
    // deterministic in (q, n, t).
    plan.coded = build_parity_check(plan.q, plan.n, j.at("coded").at("t").get<std::uint32_t>());
  }
  return plan;
}

}  // namespace qsft
