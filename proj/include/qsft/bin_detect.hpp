// Bin classification: given one bin's observation vector U (one entry per
// offset row), decide zero-ton / singleton(k, v) / multi-ton.
//
// Noiseless rule: U = 0 is a zero-ton; a singleton has |U_p / U_0| = 1 for
// every offset row and its index falls out of the quantized phases
// arg_q(U_p / U_0), directly (identity offsets) or via syndrome decoding
// (coded offsets). Anything else is a multi-ton.
//
// Robust rules compare per-offset average energies against (1 + gamma) nu^2
// with nu^2 = sigma^2 / B, estimate the index by exhaustive signature search
// (near-linear) or per-digit majority vote over modulated offset ratios
// (sub-linear), and confirm with a residual test before accepting a
// singleton.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsft/qindex.hpp"
#include "qsft/sampling_plan.hpp"

namespace qsft {

/// Raised when the near-linear search space q^(n-b) exceeds the configured
/// budget; the sub-linear detector avoids the search entirely.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class BinType { ZeroTon, Singleton, MultiTon, Unresolved };

struct Classification {
  BinType type = BinType::Unresolved;
  QIndex k;
  cplx v{0.0, 0.0};

  static Classification zero_ton() { return {BinType::ZeroTon, {}, {0.0, 0.0}}; }
  static Classification multi_ton() { return {BinType::MultiTon, {}, {0.0, 0.0}}; }
  static Classification singleton(QIndex k, cplx v) {
    return {BinType::Singleton, std::move(k), v};
  }
};

inline const char* to_string(BinType t) {
  switch (t) {
    case BinType::ZeroTon: return "zero-ton";
    case BinType::Singleton: return "singleton";
    case BinType::MultiTon: return "multi-ton";
    case BinType::Unresolved: return "unresolved";
  }
  return "?";
}

/// Finite value set {rho w_kappa^a}; estimates snap to the nearest point.
struct Constellation {
  double rho = 1.0;
  std::uint32_t kappa = 4;

  cplx snap(cplx z) const {
    if (z == cplx{0.0, 0.0}) return std::polar(rho, 0.0);
    const double step = 2.0 * std::numbers::pi / kappa;
    const auto a = static_cast<std::int64_t>(std::llround(std::arg(z) / step));
    return std::polar(rho, step * static_cast<double>(mod_q(a, kappa)));
  }
};

struct DetectorConfig {
  Regime regime = Regime::Noiseless;
  double gamma = 0.5;   // threshold slack, in (0, 1)
  double nu2 = 0.0;     // per-bin noise power sigma^2 / B
  std::optional<Constellation> constellation;
  std::size_t P1 = 0;   // offset blocks (sub-linear) / offsets (near-linear)
  std::uint64_t mle_budget = 1ull << 20;

  // Noiseless-mode tolerances (pure float round-off regime).
  double zero_tol = 1e-9;
  double ratio_tol = 1e-6;
};

namespace detail {

// Absolute floor so that sigma^2 = 0 degenerates to exact-arithmetic checks
// instead of an unpassable threshold of 0.
constexpr double kEnergyFloor = 1e-18;
constexpr double kEnergyRel = 1e-12;

inline double mean_energy(const std::vector<cplx>& v) {
  double e = 0.0;
  for (const auto& x : v) e += std::norm(x);
  return e / static_cast<double>(v.size());
}

// True when each column has a single nonzero entry equal to 1 and the pivot
// rows are distinct; then M^T k = j just reads b digits of k.
inline bool selection_rows(const QMatrix& M, std::vector<std::size_t>& rows) {
  rows.clear();
  for (std::size_t u = 0; u < M.cols(); ++u) {
    std::size_t pivot = M.rows();
    for (std::size_t r = 0; r < M.rows(); ++r) {
      const auto v = M.at(r, u);
      if (v == 0) continue;
      if (v != 1 || pivot != M.rows()) return false;
      pivot = r;
    }
    if (pivot == M.rows()) return false;
    if (std::find(rows.begin(), rows.end(), pivot) != rows.end()) return false;
    rows.push_back(pivot);
  }
  return true;
}

}  // namespace detail

/// All k with M^T k = j, enumerated within the budget. Selection matrices
/// (the identity-block construction) enumerate q^(n-b) directly; for general
/// matrices a full scan of Z_q^n is used when it fits the budget.
inline std::vector<QIndex> hash_preimages(const QMatrix& M, const QIndex& j,
                                          std::uint64_t budget) {
  const std::uint32_t q = M.q();
  const std::size_t n = M.rows(), b = M.cols();
  if (j.n() != b || j.q() != q)
    throw std::invalid_argument("hash_preimages: bin index has wrong shape");

  std::vector<QIndex> out;
  std::vector<std::size_t> pivots;
  if (detail::selection_rows(M, pivots)) {
    const std::size_t free_count = n - b;
    double cost = 1.0;
    for (std::size_t i = 0; i < free_count; ++i) cost *= q;
    if (cost > static_cast<double>(budget))
      throw ResourceError("singleton search over q^(n-b) = " + std::to_string(cost) +
                          " candidates exceeds the enumeration budget; use the sub-linear "
                          "detection regime");
    std::vector<std::size_t> free_pos;
    for (std::size_t r = 0; r < n; ++r)
      if (std::find(pivots.begin(), pivots.end(), r) == pivots.end()) free_pos.push_back(r);
    const auto total = pow_u64(q, free_count);
    std::vector<std::uint32_t> digits(n, 0);
    for (std::size_t u = 0; u < b; ++u) digits[pivots[u]] = j.digit(u);
    for (std::uint64_t r = 0; r < total; ++r) {
      std::uint64_t rr = r;
      for (std::size_t i = 0; i < free_count; ++i) {
        digits[free_pos[i]] = static_cast<std::uint32_t>(rr % q);
        rr /= q;
      }
      out.emplace_back(q, digits);
    }
    return out;
  }

  // General matrix: filter the whole module.
  const double full = std::pow(static_cast<double>(q), static_cast<double>(n));
  if (full > static_cast<double>(budget))
    throw ResourceError("singleton search with an unstructured subsampling matrix requires "
                        "scanning q^n = " + std::to_string(full) +
                        " candidates, beyond the enumeration budget; use the sub-linear "
                        "detection regime");
  const auto N = pow_u64(q, n);
  for (std::uint64_t r = 0; r < N; ++r) {
    QIndex k = QIndex::unrank(q, n, r);
    if (M.mul_transposed(k) == j) out.push_back(std::move(k));
  }
  return out;
}

// --- Noiseless rule -----------------------------------------------------------

inline Classification detect_noiseless(const std::vector<cplx>& U, const SamplingGroup& group,
                                       const QIndex& j, const SamplingPlan& plan,
                                       const DetectorConfig& cfg) {
  const std::size_t rows = group.offsets.size();
  if (U.size() != rows)
    throw std::invalid_argument("detect_noiseless: observation/offset size mismatch");
  if (rows == 0 || !group.offsets[0].is_zero())
    throw std::invalid_argument("detect_noiseless: plan must carry the zero offset first");

  bool all_zero = true;
  for (const auto& u : U)
    if (std::abs(u) > cfg.zero_tol) {
      all_zero = false;
      break;
    }
  if (all_zero) return Classification::zero_ton();

  const cplx u0 = U[0];
  if (std::abs(u0) <= cfg.zero_tol) return Classification::multi_ton();
  for (std::size_t p = 1; p < rows; ++p)
    if (std::abs(std::abs(U[p] / u0) - 1.0) > cfg.ratio_tol)
      return Classification::multi_ton();

  // Quantized phases of U_p / U_0 are the rows of D k.
  std::vector<std::uint32_t> phases(rows - 1);
  for (std::size_t p = 1; p < rows; ++p) phases[p - 1] = arg_q(U[p] / u0, plan.q);

  QIndex k;
  if (plan.regime == Regime::Coded) {
    if (!plan.coded) throw std::logic_error("detect_noiseless: coded plan without parity data");
    const auto decoded = syndrome_decode(*plan.coded, QIndex(plan.q, phases));
    if (!decoded) return Classification::multi_ton();
    k = *decoded;
  } else {
    if (phases.size() != plan.n)
      throw std::invalid_argument("detect_noiseless: expected n identity offsets");
    k = QIndex(plan.q, phases);
  }

  if (!(group.M.mul_transposed(k) == j)) return Classification::multi_ton();

  // The decoded index must reproduce every observation, not only quantize
  // consistently.
  const RootOfUnity w(plan.q);
  for (std::size_t p = 1; p < rows; ++p) {
    const cplx predicted = u0 * w.pow(inner_product(group.offsets[p], k));
    if (std::abs(U[p] - predicted) > cfg.ratio_tol * std::abs(u0))
      return Classification::multi_ton();
  }
  return Classification::singleton(std::move(k), u0);
}

// --- Robust rules ---------------------------------------------------------------

namespace detail {

struct SingletonFit {
  QIndex k;
  cplx value;
  double residual;  // mean squared residual per offset
};

inline cplx correlate(const RootOfUnity& w, const std::vector<QIndex>& offsets,
                      const std::vector<cplx>& U, const QIndex& k) {
  cplx acc{0.0, 0.0};
  for (std::size_t p = 0; p < offsets.size(); ++p)
    acc += w.conj_pow(inner_product(offsets[p], k)) * U[p];
  return acc / static_cast<double>(offsets.size());
}

inline double residual_energy(const RootOfUnity& w, const std::vector<QIndex>& offsets,
                              const std::vector<cplx>& U, const QIndex& k, cplx value) {
  double e = 0.0;
  for (std::size_t p = 0; p < offsets.size(); ++p)
    e += std::norm(U[p] - value * w.pow(inner_product(offsets[p], k)));
  return e / static_cast<double>(offsets.size());
}

inline cplx estimate_value(const DetectorConfig& cfg, cplx correlation) {
  return cfg.constellation ? cfg.constellation->snap(correlation) : correlation;
}

}  // namespace detail

/// The exhaustive search step: among the k with M^T k = j, the one whose
/// best single-signature fit leaves the least residual, i.e. the argmax of
/// |s_k^H U|. Ties break toward the lexicographically smallest k.
inline QIndex mle_search(const std::vector<cplx>& U, const QIndex& j,
                         const SamplingGroup& group, std::uint64_t budget) {
  const RootOfUnity w(group.M.q());
  const auto candidates = hash_preimages(group.M, j, budget);
  if (candidates.empty())
    throw std::invalid_argument("mle_search: the bin has no candidate frequencies");
  const QIndex* best = nullptr;
  double best_score = -1.0;
  for (const auto& k : candidates) {
    const double score = std::norm(detail::correlate(w, group.offsets, U, k));
    if (score > best_score || (score == best_score && k < *best)) {
      best = &k;
      best_score = score;
    }
  }
  return *best;
}

/// Exhaustive-signature detection with P1 random offsets.
inline Classification detect_robust_near_linear(const std::vector<cplx>& U, const QIndex& j,
                                                const SamplingGroup& group,
                                                const DetectorConfig& cfg) {
  const std::size_t P = group.offsets.size();
  if (U.size() != P)
    throw std::invalid_argument("detect_robust_near_linear: observation size mismatch");

  const double energy = detail::mean_energy(U);
  const double zero_thr =
      (1.0 + cfg.gamma) * cfg.nu2 + detail::kEnergyFloor;
  if (energy <= zero_thr) return Classification::zero_ton();

  const RootOfUnity w(group.M.q());
  const QIndex best = mle_search(U, j, group, cfg.mle_budget);
  const cplx value = detail::estimate_value(cfg, detail::correlate(w, group.offsets, U, best));
  const double resid = detail::residual_energy(w, group.offsets, U, best, value);
  const double thr = (1.0 + cfg.gamma) * cfg.nu2 + detail::kEnergyFloor +
                     detail::kEnergyRel * energy;
  if (resid <= thr) return Classification::singleton(best, value);
  return Classification::multi_ton();
}

/// Majority-vote detection over modulated offset blocks.
inline Classification detect_robust_sub_linear(const std::vector<cplx>& U, const QIndex& j,
                                               const SamplingGroup& group,
                                               const DetectorConfig& cfg) {
  const std::size_t n = group.M.rows();
  const std::uint32_t q = group.M.q();
  const std::size_t block = n + 1;
  if (group.offsets.size() % block != 0)
    throw std::invalid_argument("detect_robust_sub_linear: offsets are not in base+modulated "
                                "blocks");
  const std::size_t P1 = group.offsets.size() / block;
  if (U.size() != group.offsets.size())
    throw std::invalid_argument("detect_robust_sub_linear: observation size mismatch");

  std::vector<cplx> base(P1);
  std::vector<QIndex> base_offsets;
  base_offsets.reserve(P1);
  for (std::size_t p = 0; p < P1; ++p) {
    base[p] = U[p * block];
    base_offsets.push_back(group.offsets[p * block]);
  }

  const double energy = detail::mean_energy(base);
  const double zero_thr = (1.0 + cfg.gamma) * cfg.nu2 + detail::kEnergyFloor;
  if (energy <= zero_thr) return Classification::zero_ton();

  // Digit r of k from the majority over arg_q(U_{p,r} / U_p); blocks with an
  // exactly-zero observation abstain (their phase is undefined).
  std::vector<std::uint32_t> digits(n, 0);
  std::vector<std::uint32_t> votes(q);
  for (std::size_t r = 0; r < n; ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    std::uint32_t cast = 0;
    for (std::size_t p = 0; p < P1; ++p) {
      const cplx ub = U[p * block];
      const cplx um = U[p * block + 1 + r];
      if (ub == cplx{0.0, 0.0} || um == cplx{0.0, 0.0}) continue;
      ++votes[arg_q(um / ub, q)];
      ++cast;
    }
    if (cast == 0) return Classification::multi_ton();
    std::uint32_t best = 0;
    for (std::uint32_t a = 1; a < q; ++a)
      if (votes[a] > votes[best]) best = a;  // ties keep the smaller symbol
    digits[r] = best;
  }
  QIndex k(q, std::move(digits));

  if (!(group.M.mul_transposed(k) == j)) return Classification::multi_ton();

  const RootOfUnity w(q);
  const cplx value = detail::estimate_value(cfg, detail::correlate(w, base_offsets, base, k));
  const double resid = detail::residual_energy(w, base_offsets, base, k, value);
  const double thr = (1.0 + cfg.gamma) * cfg.nu2 + detail::kEnergyFloor +
                     detail::kEnergyRel * energy;
  if (resid <= thr) return Classification::singleton(std::move(k), value);
  return Classification::multi_ton();
}

inline Classification detect(const std::vector<cplx>& U, const QIndex& j,
                             const SamplingGroup& group, const SamplingPlan& plan,
                             const DetectorConfig& cfg) {
  switch (cfg.regime) {
    case Regime::Noiseless:
    case Regime::Coded:
      return detect_noiseless(U, group, j, plan, cfg);
    case Regime::RobustNearLinear:
      return detect_robust_near_linear(U, j, group, cfg);
    case Regime::RobustSubLinear:
      return detect_robust_sub_linear(U, j, group, cfg);
  }
  throw std::invalid_argument("detect: unknown regime");
}

}  // namespace qsft
