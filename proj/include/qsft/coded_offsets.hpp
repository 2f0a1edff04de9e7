// Offsets for bounded-degree indices. When every nonzero frequency k has at
// most t nonzero digits, the P = 2t*ceil(log_q n) rows of the parity-check
// matrix of a t-error-correcting code suffice to pin k down: k is recovered
// from its syndrome H k. The code is a Reed-Solomon evaluation code over
// F_{q^c} restricted to F_q symbols and shortened to length n; any 2t of its
// columns are independent, so all weight-<=t vectors have distinct syndromes.
//
// Requires prime q (the construction lives in a field). Decoding here is an
// exhaustive syndrome table over the sum_{w<=t} C(n,w)(q-1)^w candidates,
// which is exact at the problem sizes this library targets; an algebraic
// decoder could be swapped in behind the same interface.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsft/qindex.hpp"

namespace qsft {

inline bool is_prime(std::uint32_t v) {
  if (v < 2) return false;
  for (std::uint32_t d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

/// F_{q^c} in a polynomial basis over F_q. Elements are ranks in [0, q^c);
/// the digit vector of a rank gives the basis coefficients, degree 0 first.
class PrimeExtField {
 public:
  PrimeExtField(std::uint32_t q, std::uint32_t c) : q_(q), c_(c) {
    if (!is_prime(q)) throw std::invalid_argument("PrimeExtField: q must be prime");
    if (c == 0) throw std::invalid_argument("PrimeExtField: extension degree must be >= 1");
    size_ = 1;
    for (std::uint32_t i = 0; i < c; ++i) size_ *= q;
    modulus_ = find_irreducible();
  }

  std::uint32_t q() const { return q_; }
  std::uint32_t degree() const { return c_; }
  std::uint32_t size() const { return size_; }

  // Coefficients of the canonical irreducible modulus, degree 0 first,
  // including the leading 1 (length c+1).
  const std::vector<std::uint32_t>& modulus() const { return modulus_; }

  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    std::uint32_t out = 0, pw = 1;
    for (std::uint32_t i = 0; i < c_; ++i) {
      out += ((a % q_ + b % q_) % q_) * pw;
      a /= q_;
      b /= q_;
      pw *= q_;
    }
    return out;
  }

  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    // Polynomial product, reduced by the modulus.
    std::vector<std::uint32_t> prod(2 * c_ - 1, 0);
    std::vector<std::uint32_t> da = digits(a), db = digits(b);
    for (std::uint32_t i = 0; i < c_; ++i)
      for (std::uint32_t j = 0; j < c_; ++j)
        prod[i + j] = (prod[i + j] + da[i] * db[j]) % q_;
    for (std::size_t d = prod.size(); d-- > c_;) {
      const std::uint32_t lead = prod[d];
      if (lead == 0) continue;
      prod[d] = 0;
      // x^d = -modulus_tail * x^{d-c} (modulus is monic).
      for (std::uint32_t i = 0; i < c_; ++i) {
        const std::uint32_t sub = (lead * modulus_[i]) % q_;
        prod[d - c_ + i] = (prod[d - c_ + i] + q_ - sub) % q_;
      }
    }
    std::uint32_t out = 0, pw = 1;
    for (std::uint32_t i = 0; i < c_; ++i) {
      out += prod[i] * pw;
      pw *= q_;
    }
    return out;
  }

  std::uint32_t pow(std::uint32_t a, std::uint32_t e) const {
    std::uint32_t r = 1;
    for (std::uint32_t i = 0; i < e; ++i) r = mul(r, a);
    return r;
  }

  // Basis coefficient u of element a: just digit u of its rank.
  std::uint32_t basis_coeff(std::uint32_t a, std::uint32_t u) const {
    for (std::uint32_t i = 0; i < u; ++i) a /= q_;
    return a % q_;
  }

 private:
  std::vector<std::uint32_t> digits(std::uint32_t a) const {
    std::vector<std::uint32_t> d(c_);
    for (std::uint32_t i = 0; i < c_; ++i) {
      d[i] = a % q_;
      a /= q_;
    }
    return d;
  }

  // Smallest monic irreducible of degree c in coefficient-rank order; for
  // c = 1 the modulus is x itself and arithmetic is plain mod q.
  std::vector<std::uint32_t> find_irreducible() const {
    if (c_ == 1) return {0, 1};
    std::uint32_t tail_count = 1;
    for (std::uint32_t i = 0; i < c_; ++i) tail_count *= q_;
    for (std::uint32_t tail = 0; tail < tail_count; ++tail) {
      std::vector<std::uint32_t> cand(c_ + 1, 0);
      std::uint32_t t = tail;
      for (std::uint32_t i = 0; i < c_; ++i) {
        cand[i] = t % q_;
        t /= q_;
      }
      cand[c_] = 1;
      if (irreducible(cand)) return cand;
    }
    throw std::logic_error("PrimeExtField: no irreducible polynomial found");
  }

  bool irreducible(const std::vector<std::uint32_t>& poly) const {
    // Trial division by every monic polynomial of degree 1..c/2.
    for (std::uint32_t deg = 1; deg <= c_ / 2; ++deg) {
      std::uint32_t count = 1;
      for (std::uint32_t i = 0; i < deg; ++i) count *= q_;
      for (std::uint32_t tail = 0; tail < count; ++tail) {
        std::vector<std::uint32_t> div(deg + 1, 0);
        std::uint32_t t = tail;
        for (std::uint32_t i = 0; i < deg; ++i) {
          div[i] = t % q_;
          t /= q_;
        }
        div[deg] = 1;
        if (divides(div, poly)) return false;
      }
    }
    return true;
  }

  bool divides(const std::vector<std::uint32_t>& div, std::vector<std::uint32_t> rem) const {
    const std::size_t dd = div.size() - 1;
    for (std::size_t d = rem.size(); d-- > dd;) {
      const std::uint32_t lead = rem[d];
      if (lead == 0) continue;
      // div is monic, so the quotient coefficient is just lead.
      for (std::size_t i = 0; i <= dd; ++i) {
        const std::uint32_t sub = (lead * div[i]) % q_;
        rem[d - dd + i] = (rem[d - dd + i] + q_ - sub) % q_;
      }
    }
    for (std::size_t i = 0; i < dd; ++i)
      if (rem[i] != 0) return false;
    return true;
  }

  std::uint32_t q_, c_, size_;
  std::vector<std::uint32_t> modulus_;
};

struct CodedOffsetPlan {
  std::uint32_t q = 0;
  std::size_t n = 0;
  std::uint32_t t = 0;
  std::uint32_t c = 0;           // extension degree, ceil(log_q n)
  std::size_t P = 0;             // 2 t c syndrome rows
  QMatrix H{2, 0, 0};            // P x n over F_q
  std::vector<std::uint32_t> field_modulus;
  std::vector<std::string> warnings;
  std::unordered_map<std::string, QIndex> table;  // syndrome -> unique k, weight <= t
};

namespace detail {
inline std::string syndrome_key(const QIndex& s) {
  std::string key(s.n(), '\0');
  for (std::size_t i = 0; i < s.n(); ++i) key[i] = static_cast<char>(s.digit(i));
  return key;
}

// Visit every k in F_q^n with weight(k) <= t.
template <typename Fn>
void for_each_bounded_weight(std::uint32_t q, std::size_t n, std::uint32_t t, Fn&& fn) {
  std::vector<std::uint32_t> digits(n, 0);
  QIndex zero(q, digits);
  fn(zero);
  std::vector<std::size_t> pos;
  auto rec = [&](auto&& self, std::size_t start, std::uint32_t left) -> void {
    if (left == 0) return;
    for (std::size_t p = start; p < n; ++p) {
      for (std::uint32_t v = 1; v < q; ++v) {
        digits[p] = v;
        fn(QIndex(q, digits));
        self(self, p + 1, left - 1);
      }
      digits[p] = 0;
    }
  };
  rec(rec, 0, t);
}
}  // namespace detail

inline CodedOffsetPlan build_parity_check(std::uint32_t q, std::size_t n, std::uint32_t t) {
  if (!is_prime(q))
    throw std::invalid_argument("build_parity_check: q must be prime (field structure)");
  if (n < 1) throw std::invalid_argument("build_parity_check: n must be >= 1");

  CodedOffsetPlan plan;
  plan.q = q;
  plan.n = n;
  plan.t = t;

  // c = ceil(log_q n): smallest c with q^c >= n.
  std::uint32_t c = 0;
  std::uint64_t qc = 1;
  while (qc < n) {
    qc *= q;
    ++c;
  }
  plan.c = c;
  plan.P = static_cast<std::size_t>(2) * t * c;
  plan.H = QMatrix(q, plan.P, n);

  if (t == 0) {
    // Degenerate: empty syndrome, only k = 0 recoverable.
    plan.table.emplace(std::string(), QIndex::zero(q, n));
    return plan;
  }
  if (plan.P > n)
    plan.warnings.push_back("coded offsets: 2t*ceil(log_q n) = " + std::to_string(plan.P) +
                            " rows exceed n = " + std::to_string(n) +
                            "; identity offsets would be cheaper");

  if (c >= 1) {
    const PrimeExtField field(q, c);
    plan.field_modulus = field.modulus();
    // Column j evaluates at the field element of rank j; syndrome rows are
    // the basis coefficients of alpha_j^i for i = 0..2t-1.
    for (std::size_t j = 0; j < n; ++j) {
      const auto alpha = static_cast<std::uint32_t>(j);
      std::uint32_t power = 1;
      for (std::uint32_t i = 0; i < 2 * t; ++i) {
        for (std::uint32_t u = 0; u < field.degree(); ++u)
          plan.H.at(i * field.degree() + u, j) = field.basis_coeff(power, u);
        power = field.mul(power, alpha);
      }
    }
  }

  // Exhaustive syndrome table; a collision means the construction failed.
  detail::for_each_bounded_weight(q, n, t, [&](const QIndex& k) {
    const QIndex s = plan.H.mul(k);
    const auto key = detail::syndrome_key(s);
    const auto [it, inserted] = plan.table.emplace(key, k);
    if (!inserted && !(it->second == k))
      throw std::runtime_error(
          "build_parity_check: syndrome collision between weight-" +
          std::to_string(it->second.weight()) + " and weight-" + std::to_string(k.weight()) +
          " indices; construction invalid for q=" + std::to_string(q) +
          " n=" + std::to_string(n) + " t=" + std::to_string(t));
  });
  return plan;
}

/// The unique k of weight <= t with H k = s, or nothing (not a bounded-degree
/// singleton).
inline std::optional<QIndex> syndrome_decode(const CodedOffsetPlan& plan,
                                             const QIndex& syndrome) {
  if (syndrome.n() != plan.P || syndrome.q() != plan.q)
    throw std::invalid_argument("syndrome_decode: syndrome has wrong length or alphabet");
  const auto it = plan.table.find(detail::syndrome_key(syndrome));
  if (it == plan.table.end()) return std::nullopt;
  return it->second;
}

}  // namespace qsft
