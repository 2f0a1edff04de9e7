// The query boundary: anything that can answer f[m] for m in Z_q^n.
//
// The base class owns raw/unique query accounting and the optional cache.
// With the cache on (default) a given index is evaluated once and every
// repeat returns the identical value; with it off every raw query evaluates
// afresh. Either way results are deterministic functions of (index, seed,
// repeat count), never of call order, so concurrent querying is safe.

#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsft/qindex.hpp"
#include "qsft/rng.hpp"
#include "qsft/spectrum.hpp"

namespace qsft {

class OracleError : public std::runtime_error {
 public:
  explicit OracleError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
struct Key128 {
  std::uint64_t hi = 0, lo = 0;
  friend bool operator==(const Key128&, const Key128&) = default;
};

struct Key128Hash {
  std::size_t operator()(const Key128& k) const {
    std::uint64_t s = k.hi ^ 0x9E3779B97F4A7C15ull;
    const std::uint64_t a = splitmix64(s);
    s ^= k.lo;
    return static_cast<std::size_t>(splitmix64(s) ^ a);
  }
};

inline Key128 key_of(const QIndex& m) {
  const unsigned __int128 r = m.rank128();
  return {static_cast<std::uint64_t>(r >> 64), static_cast<std::uint64_t>(r)};
}
}  // namespace detail

class FunctionOracle {
 public:
  FunctionOracle(std::uint32_t q, std::size_t n, bool cache = true)
      : q_(q), n_(n), cache_enabled_(cache) {}
  virtual ~FunctionOracle() = default;

  std::uint32_t q() const { return q_; }
  std::size_t n() const { return n_; }
  bool caching() const { return cache_enabled_; }

  cplx query(const QIndex& m) {
    std::vector<cplx> out(1);
    query_many({m}, out);
    return out[0];
  }

  void query_many(const std::vector<QIndex>& ms, std::vector<cplx>& out) {
    out.resize(ms.size());
    raw_ += ms.size();
    std::scoped_lock lock(mu_);
    std::vector<QIndex> pending;
    std::vector<std::uint64_t> repeats;
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      check_index(ms[i]);
      const auto key = detail::key_of(ms[i]);
      if (cache_enabled_) {
        const auto it = cache_.find(key);
        if (it != cache_.end()) {
          out[i] = it->second;
          continue;
        }
      }
      pending.push_back(ms[i]);
      repeats.push_back(seen_[key]++);
      slots.push_back(i);
    }
    if (pending.empty()) return;
    std::vector<cplx> values(pending.size());
    evaluate_batch(pending, repeats, values);
    for (std::size_t i = 0; i < pending.size(); ++i) {
      out[slots[i]] = values[i];
      if (cache_enabled_) cache_.emplace(detail::key_of(pending[i]), values[i]);
    }
  }

  std::uint64_t raw_queries() const { return raw_.load(); }
  std::uint64_t unique_queries() const {
    std::scoped_lock lock(mu_);
    return seen_.size();
  }

 protected:
  virtual cplx evaluate(const QIndex& m, std::uint64_t repeat) = 0;

  // Batch hook; the default just loops. Overridden where one external call
  // can serve many indices.
  virtual void evaluate_batch(const std::vector<QIndex>& ms,
                              const std::vector<std::uint64_t>& repeats,
                              std::vector<cplx>& out) {
    for (std::size_t i = 0; i < ms.size(); ++i) out[i] = evaluate(ms[i], repeats[i]);
  }

 private:
  void check_index(const QIndex& m) const {
    if (m.q() != q_ || m.n() != n_)
      throw std::invalid_argument("oracle query: index alphabet or length mismatch");
  }

  std::uint32_t q_;
  std::size_t n_;
  bool cache_enabled_;
  std::atomic<std::uint64_t> raw_{0};
  mutable std::mutex mu_;
  std::unordered_map<detail::Key128, cplx, detail::Key128Hash> cache_;
  std::unordered_map<detail::Key128, std::uint64_t, detail::Key128Hash> seen_;
};

// --- Synthetic signals -------------------------------------------------------

enum class SynthMode { Assumption2, General };

struct SyntheticSpec {
  std::uint32_t q = 2;
  std::size_t n = 1;
  std::size_t S = 0;

  SynthMode mode = SynthMode::General;
  double rho = 1.0;          // constellation magnitude (Assumption2)
  std::uint32_t kappa = 4;   // constellation size (Assumption2)
  double rho_min = 1.0;      // magnitude range (General)
  double rho_max = 1.0;

  // Noise power, or an SNR target from which it is derived. SNR here is the
  // linear ratio ||F||^2 / sigma^2.
  std::optional<double> sigma2;
  std::optional<double> snr;

  // Restrict support to indices of at most this many nonzero digits (< 0
  // means unrestricted). Used with coded offset plans.
  int max_weight = -1;

  std::uint64_t support_seed = 1;
  std::uint64_t value_seed = 2;
  std::uint64_t noise_seed = 3;

  bool cache = true;
};

/// Lazily evaluates f[m] = sum_k F[k] w^{<m,k>} plus complex Gaussian noise
/// per unique query. Memory stays O(S + unique queries).
class SyntheticOracle final : public FunctionOracle {
 public:
  SyntheticOracle(SparseSpectrum truth, double sigma2, std::uint64_t noise_seed,
                  bool cache = true)
      : FunctionOracle(truth.q(), truth.n(), cache),
        truth_(std::move(truth)),
        w_(truth_.q()),
        sigma2_(sigma2),
        noise_seed_(noise_seed) {}

  double sigma2() const { return sigma2_; }

 protected:
  cplx evaluate(const QIndex& m, std::uint64_t repeat) override {
    cplx acc{0.0, 0.0};
    for (const auto& [k, v] : truth_.entries()) acc += v * w_.pow(inner_product(m, k));
    return acc + keyed_complex_gaussian(noise_seed_, m.rank128(), repeat, sigma2_);
  }

 private:
  SparseSpectrum truth_;
  RootOfUnity w_;
  double sigma2_;
  std::uint64_t noise_seed_;
};

struct Synthesized {
  SparseSpectrum truth;
  std::unique_ptr<FunctionOracle> oracle;
  double sigma2 = 0.0;
};

namespace detail {
// Draw one index uniformly from {k : weight(k) <= max_w}: pick a weight w
// with probability proportional to C(n,w)(q-1)^w, then positions and values.
inline QIndex random_bounded_weight(Rng& rng, std::uint32_t q, std::size_t n, int max_w) {
  const auto wmax = static_cast<std::size_t>(max_w);
  std::vector<double> mass(wmax + 1);
  double binom = 1.0, pw = 1.0;
  for (std::size_t w = 0; w <= wmax; ++w) {
    mass[w] = binom * pw;
    binom *= static_cast<double>(n - w) / static_cast<double>(w + 1);
    pw *= static_cast<double>(q - 1);
  }
  double total = 0.0;
  for (double m : mass) total += m;
  double pick = rng.unit() * total;
  std::size_t w = 0;
  while (w < wmax && pick > mass[w]) {
    pick -= mass[w];
    ++w;
  }
  std::vector<std::uint32_t> digits(n, 0);
  std::vector<std::size_t> positions;
  while (positions.size() < w) {
    const std::size_t p = rng.below(static_cast<std::uint32_t>(n));
    if (std::find(positions.begin(), positions.end(), p) == positions.end())
      positions.push_back(p);
  }
  for (auto p : positions) digits[p] = 1 + rng.below(q - 1);
  return QIndex(q, std::move(digits));
}
}  // namespace detail

inline Synthesized synthesize(const SyntheticSpec& spec) {
  const auto N_cap = static_cast<double>(spec.n) * std::log2(static_cast<double>(spec.q));
  if (N_cap <= 63 && spec.S > pow_u64(spec.q, spec.n))
    throw std::invalid_argument("synthesize: S exceeds q^n");
  if (spec.mode == SynthMode::General && spec.rho_min > spec.rho_max)
    throw std::invalid_argument("synthesize: rho_min > rho_max");

  SparseSpectrum truth(spec.q, spec.n);
  Rng support_rng(spec.support_seed);
  Rng value_rng(spec.value_seed);

  while (truth.size() < spec.S) {
    const QIndex k = spec.max_weight >= 0
                         ? detail::random_bounded_weight(support_rng, spec.q, spec.n,
                                                         spec.max_weight)
                         : support_rng.qindex(spec.q, spec.n);
    if (truth.contains(k)) continue;
    cplx v;
    if (spec.mode == SynthMode::Assumption2) {
      const auto a = value_rng.below(spec.kappa);
      v = std::polar(spec.rho, 2.0 * std::numbers::pi * a / spec.kappa);
    } else {
      const double mag = spec.rho_min + (spec.rho_max - spec.rho_min) * value_rng.unit();
      const double phase = 2.0 * std::numbers::pi * value_rng.unit();
      v = std::polar(mag, -phase);
    }
    if (v == cplx{0.0, 0.0}) continue;
    truth.set(k, v);
  }

  double sigma2 = 0.0;
  if (spec.sigma2) {
    sigma2 = *spec.sigma2;
  } else if (spec.snr) {
    if (*spec.snr <= 0.0) throw std::invalid_argument("synthesize: SNR must be positive");
    sigma2 = truth.norm2() / *spec.snr;
  }

  Synthesized out{std::move(truth), nullptr, sigma2};
  out.oracle = std::make_unique<SyntheticOracle>(out.truth, sigma2, spec.noise_seed, spec.cache);
  return out;
}

// --- Sample-table oracle ------------------------------------------------------
// File format: header "q=<q> n=<n>", then "<digit-string> <re> <im>" per line.

class TableOracle final : public FunctionOracle {
 public:
  explicit TableOracle(const std::string& path, std::uint32_t expect_q = 0,
                       std::size_t expect_n = 0)
      : FunctionOracle(parse_header(path, expect_q, expect_n).first,
                       parse_header(path, expect_q, expect_n).second, /*cache=*/true) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("sample table: cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);  // header, validated in parse_header
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string digits;
      double re = 0.0, im = 0.0;
      if (!(ss >> digits >> re >> im))
        throw OracleError("sample table '" + path + "': malformed line " +
                          std::to_string(lineno));
      QIndex m = QIndex::parse(q(), digits);
      if (m.n() != n())
        throw OracleError("sample table '" + path + "': wrong index length at line " +
                          std::to_string(lineno));
      table_[detail::key_of(m)] = {re, im};
    }
  }

  bool contains(const QIndex& m) const { return table_.count(detail::key_of(m)) != 0; }
  std::size_t table_size() const { return table_.size(); }

 protected:
  cplx evaluate(const QIndex& m, std::uint64_t) override {
    const auto it = table_.find(detail::key_of(m));
    if (it == table_.end())
      throw OracleError("sample table: no entry for index " + m.to_string());
    return it->second;
  }

 private:
  static std::pair<std::uint32_t, std::size_t> parse_header(const std::string& path,
                                                            std::uint32_t expect_q,
                                                            std::size_t expect_n) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("sample table: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
      throw OracleError("sample table '" + path + "': empty file, missing header");
    const auto qn = parse_qn_header(line, "sample table");
    if ((expect_q && qn.first != expect_q) || (expect_n && qn.second != expect_n))
      throw std::invalid_argument("sample table '" + path + "': header (q=" +
                                  std::to_string(qn.first) + ", n=" + std::to_string(qn.second) +
                                  ") does not match the configured problem");
    return qn;
  }

  std::unordered_map<detail::Key128, cplx, detail::Key128Hash> table_;
};

}  // namespace qsft
