// Exact arithmetic over Z_q and Z_q^n: digit vectors, matrices, the root-of-
// unity power table and the sector quantizer arg_q. Everything downstream
// computes on these.
//
// Ranking is mixed-radix with digit 0 least significant, so enumerating ranks
// 0..q^n-1 walks digit 0 fastest. The text form prints the most significant
// digit first, like an ordinary base-q numeral.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qsft {

using cplx = std::complex<double>;

inline std::uint32_t mod_q(std::int64_t v, std::uint32_t q) {
  const auto m = v % static_cast<std::int64_t>(q);
  return static_cast<std::uint32_t>(m < 0 ? m + q : m);
}

inline std::uint64_t pow_u64(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (r > ~0ull / base) throw std::overflow_error("pow_u64: overflow");
    r *= base;
  }
  return r;
}

namespace detail {
constexpr char kDigitChars[] = "0123456789abcdefghijklmnopqrstuvwxyz";

inline std::uint32_t digit_from_char(char ch) {
  if (ch >= '0' && ch <= '9') return static_cast<std::uint32_t>(ch - '0');
  if (ch >= 'a' && ch <= 'z') return static_cast<std::uint32_t>(ch - 'a' + 10);
  throw std::invalid_argument(std::string("invalid digit character '") + ch + "'");
}
}  // namespace detail

/// An element of Z_q^n. Doubles as a function input and a frequency index.
class QIndex {
 public:
  QIndex() = default;

  QIndex(std::uint32_t q, std::vector<std::uint32_t> digits)
      : q_(q), digits_(std::move(digits)) {
    if (q_ < 2) throw std::invalid_argument("QIndex: alphabet size must be >= 2");
    for (auto d : digits_)
      if (d >= q_) throw std::invalid_argument("QIndex: digit out of range");
  }

  static QIndex zero(std::uint32_t q, std::size_t n) {
    return QIndex(q, std::vector<std::uint32_t>(n, 0));
  }

  // Unit vector e_{r+1}: a single 1 at digit position r.
  static QIndex unit(std::uint32_t q, std::size_t n, std::size_t r) {
    if (r >= n) throw std::invalid_argument("QIndex::unit: position out of range");
    std::vector<std::uint32_t> d(n, 0);
    d[r] = 1;
    return QIndex(q, std::move(d));
  }

  static QIndex unrank(std::uint32_t q, std::size_t n, std::uint64_t rank) {
    std::vector<std::uint32_t> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = static_cast<std::uint32_t>(rank % q);
      rank /= q;
    }
    if (rank != 0) throw std::invalid_argument("QIndex::unrank: rank exceeds q^n");
    return QIndex(q, std::move(d));
  }

  // Parse the text form: most significant digit first.
  static QIndex parse(std::uint32_t q, std::string_view text) {
    if (q > 36) throw std::invalid_argument("QIndex::parse: text form supports q <= 36");
    std::vector<std::uint32_t> d(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      const auto v = detail::digit_from_char(text[i]);
      if (v >= q) throw std::invalid_argument("QIndex::parse: digit out of range for q");
      d[text.size() - 1 - i] = v;
    }
    return QIndex(q, std::move(d));
  }

  std::uint32_t q() const { return q_; }
  std::size_t n() const { return digits_.size(); }
  std::uint32_t digit(std::size_t i) const { return digits_[i]; }
  const std::vector<std::uint32_t>& digits() const { return digits_; }

  std::uint64_t rank() const {
    std::uint64_t r = 0;
    for (std::size_t i = digits_.size(); i-- > 0;) r = r * q_ + digits_[i];
    return r;
  }

  // Rank in 128 bits, for keying noise draws at sizes where q^n overflows 64.
  unsigned __int128 rank128() const {
    unsigned __int128 r = 0;
    for (std::size_t i = digits_.size(); i-- > 0;) r = r * q_ + digits_[i];
    return r;
  }

  std::string to_string() const {
    if (q_ > 36) throw std::invalid_argument("QIndex::to_string: text form supports q <= 36");
    std::string s(digits_.size(), '0');
    for (std::size_t i = 0; i < digits_.size(); ++i)
      s[digits_.size() - 1 - i] = detail::kDigitChars[digits_[i]];
    return s;
  }

  QIndex add(const QIndex& o) const {
    check_compatible(o, "QIndex::add");
    std::vector<std::uint32_t> d(digits_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (digits_[i] + o.digits_[i]) % q_;
    return QIndex(q_, std::move(d));
  }

  QIndex sub(const QIndex& o) const {
    check_compatible(o, "QIndex::sub");
    std::vector<std::uint32_t> d(digits_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (digits_[i] + q_ - o.digits_[i]) % q_;
    return QIndex(q_, std::move(d));
  }

  bool is_zero() const {
    return std::all_of(digits_.begin(), digits_.end(), [](auto d) { return d == 0; });
  }

  std::size_t weight() const {
    return static_cast<std::size_t>(
        std::count_if(digits_.begin(), digits_.end(), [](auto d) { return d != 0; }));
  }

  friend bool operator==(const QIndex& a, const QIndex& b) {
    return a.q_ == b.q_ && a.digits_ == b.digits_;
  }

  // Lexicographic over digit positions; used for deterministic tie-breaking.
  friend bool operator<(const QIndex& a, const QIndex& b) {
    if (a.q_ != b.q_) return a.q_ < b.q_;
    return std::lexicographical_compare(a.digits_.begin(), a.digits_.end(),
                                        b.digits_.begin(), b.digits_.end());
  }

  void check_compatible(const QIndex& o, const char* where) const {
    if (q_ != o.q_ || digits_.size() != o.digits_.size())
      throw std::invalid_argument(std::string(where) + ": alphabet or length mismatch");
  }

 private:
  std::uint32_t q_ = 2;
  std::vector<std::uint32_t> digits_;
};

/// <x, y> = (sum_i x_i * y_i) mod q.
inline std::uint32_t inner_product(const QIndex& x, const QIndex& y) {
  x.check_compatible(y, "inner_product");
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < x.n(); ++i)
    acc += static_cast<std::uint64_t>(x.digit(i)) * y.digit(i);
  return static_cast<std::uint32_t>(acc % x.q());
}

/// Dense matrix over Z_q, row-major.
class QMatrix {
 public:
  QMatrix(std::uint32_t q, std::size_t rows, std::size_t cols)
      : q_(q), rows_(rows), cols_(cols), data_(rows * cols, 0) {
    if (q < 2) throw std::invalid_argument("QMatrix: alphabet size must be >= 2");
  }

  static QMatrix identity(std::uint32_t q, std::size_t n) {
    QMatrix m(q, n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  std::uint32_t q() const { return q_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::uint32_t& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::uint32_t at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void set(std::size_t r, std::size_t c, std::uint32_t v) {
    if (v >= q_) throw std::invalid_argument("QMatrix::set: entry out of range");
    at(r, c) = v;
  }

  QIndex row(std::size_t r) const {
    std::vector<std::uint32_t> d(data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_);
    return QIndex(q_, std::move(d));
  }

  QIndex column(std::size_t c) const {
    std::vector<std::uint32_t> d(rows_);
    for (std::size_t r = 0; r < rows_; ++r) d[r] = at(r, c);
    return QIndex(q_, std::move(d));
  }

  // M x, with x of length cols().
  QIndex mul(const QIndex& x) const {
    if (x.q() != q_ || x.n() != cols_)
      throw std::invalid_argument("QMatrix::mul: shape or alphabet mismatch");
    std::vector<std::uint32_t> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      std::uint64_t acc = 0;
      for (std::size_t c = 0; c < cols_; ++c)
        acc += static_cast<std::uint64_t>(at(r, c)) * x.digit(c);
      out[r] = static_cast<std::uint32_t>(acc % q_);
    }
    return QIndex(q_, std::move(out));
  }

  // M^T x, with x of length rows().
  QIndex mul_transposed(const QIndex& x) const {
    if (x.q() != q_ || x.n() != rows_)
      throw std::invalid_argument("QMatrix::mul_transposed: shape or alphabet mismatch");
    std::vector<std::uint32_t> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
      std::uint64_t acc = 0;
      for (std::size_t r = 0; r < rows_; ++r)
        acc += static_cast<std::uint64_t>(at(r, c)) * x.digit(r);
      out[c] = static_cast<std::uint32_t>(acc % q_);
    }
    return QIndex(q_, std::move(out));
  }

  friend bool operator==(const QMatrix&, const QMatrix&) = default;

 private:
  std::uint32_t q_;
  std::size_t rows_, cols_;
  std::vector<std::uint32_t> data_;
};

inline QIndex mat_vec(const QMatrix& m, const QIndex& x) { return m.mul(x); }

/// Power table of w = e^{j 2 pi / q}. pow(a) looks up w^{a mod q}.
class RootOfUnity {
 public:
  explicit RootOfUnity(std::uint32_t q) : q_(q), table_(q) {
    if (q < 2) throw std::invalid_argument("RootOfUnity: q must be >= 2");
    for (std::uint32_t a = 0; a < q; ++a)
      table_[a] = std::polar(1.0, 2.0 * std::numbers::pi * a / q);
  }

  std::uint32_t q() const { return q_; }
  cplx pow(std::int64_t a) const { return table_[mod_q(a, q_)]; }
  cplx conj_pow(std::int64_t a) const { return std::conj(table_[mod_q(a, q_)]); }

 private:
  std::uint32_t q_;
  std::vector<cplx> table_;
};

/// Quantize a nonzero complex number to the root-of-unity sector it falls in:
/// floor((q / 2 pi) * arg(z * e^{j pi / q})), reduced into [0, q). The shift
/// by pi/q centers cell a on phase 2 pi a / q, so arg_q(w^a) = a exactly and
/// any perturbation smaller than pi/q in phase stays in the same cell.
inline std::uint32_t arg_q(cplx z, std::uint32_t q) {
  if (z == cplx{0.0, 0.0}) throw std::domain_error("arg_q: zero has no phase");
  const double shifted = std::arg(z * std::polar(1.0, std::numbers::pi / q));
  const auto cell = static_cast<std::int64_t>(std::floor(shifted * q / (2.0 * std::numbers::pi)));
  return mod_q(cell, q);
}

}  // namespace qsft
