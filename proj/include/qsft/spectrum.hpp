// Dense reference transform over Z_q^n and the sparse coefficient map.
//
// The forward direction is F[k] = (1/N) sum_m f[m] w^{-<m,k>} and the
// synthesis direction is f[m] = sum_k F[k] w^{<m,k>}. The dense transform is
// computed as n successive radix-q passes, one per digit position, which is
// also the kernel the subsampled transform reuses over Z_q^b.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsft/qindex.hpp"

namespace qsft {

/// f: Z_q^n -> C stored densely, indexed by rank.
class DenseSignal {
 public:
  DenseSignal(std::uint32_t q, std::size_t n)
      : q_(q), n_(n), values_(pow_u64(q, n), cplx{0.0, 0.0}) {}

  std::uint32_t q() const { return q_; }
  std::size_t n() const { return n_; }
  std::uint64_t size() const { return values_.size(); }

  cplx& operator[](std::uint64_t rank) { return values_[rank]; }
  cplx operator[](std::uint64_t rank) const { return values_[rank]; }
  cplx& at(const QIndex& m) { return values_[m.rank()]; }
  cplx at(const QIndex& m) const { return values_[m.rank()]; }

  std::vector<cplx>& values() { return values_; }
  const std::vector<cplx>& values() const { return values_; }

  double energy() const {
    double e = 0.0;
    for (const auto& v : values_) e += std::norm(v);
    return e;
  }

 private:
  std::uint32_t q_;
  std::size_t n_;
  std::vector<cplx> values_;
};

/// Sparse coefficient map k -> F[k]. Entries with value exactly zero are
/// never stored. Ordered by the deterministic QIndex comparison.
class SparseSpectrum {
 public:
  SparseSpectrum(std::uint32_t q, std::size_t n) : q_(q), n_(n) {}

  std::uint32_t q() const { return q_; }
  std::size_t n() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  void set(const QIndex& k, cplx v) {
    check_key(k);
    if (v == cplx{0.0, 0.0}) {
      entries_.erase(k);
    } else {
      entries_[k] = v;
    }
  }

  cplx at(const QIndex& k) const {
    const auto it = entries_.find(k);
    return it == entries_.end() ? cplx{0.0, 0.0} : it->second;
  }

  bool contains(const QIndex& k) const { return entries_.count(k) != 0; }

  const std::map<QIndex, cplx>& entries() const { return entries_; }

  double norm2() const {
    double e = 0.0;
    for (const auto& [k, v] : entries_) e += std::norm(v);
    return e;
  }

 private:
  void check_key(const QIndex& k) const {
    if (k.q() != q_ || k.n() != n_)
      throw std::invalid_argument("SparseSpectrum: key alphabet or length mismatch");
  }

  std::uint32_t q_;
  std::size_t n_;
  std::map<QIndex, cplx> entries_;
};

// In-place transform of a rank-ordered array over Z_q^b:
//   forward (conjugate=true):  y[j] = sum_l x[l] w^{-<j,l>}
//   synthesis (conjugate=false): y[m] = sum_k x[k] w^{<m,k>}
// One radix-q pass per digit position; no scaling applied here.
inline void radix_passes_inplace(std::vector<cplx>& x, std::uint32_t q, std::size_t b,
                                 bool conjugate) {
  if (x.size() != pow_u64(q, b)) throw std::invalid_argument("radix_passes_inplace: bad length");
  const RootOfUnity w(q);
  std::vector<cplx> fiber(q), out(q);
  std::uint64_t stride = 1;
  for (std::size_t axis = 0; axis < b; ++axis) {
    const std::uint64_t block = stride * q;
    for (std::uint64_t base = 0; base < x.size(); base += block) {
      for (std::uint64_t inner = 0; inner < stride; ++inner) {
        const std::uint64_t origin = base + inner;
        for (std::uint32_t a = 0; a < q; ++a) fiber[a] = x[origin + a * stride];
        for (std::uint32_t jd = 0; jd < q; ++jd) {
          cplx acc{0.0, 0.0};
          for (std::uint32_t a = 0; a < q; ++a) {
            const auto e = static_cast<std::int64_t>(jd) * a;
            acc += fiber[a] * (conjugate ? w.conj_pow(e) : w.pow(e));
          }
          out[jd] = acc;
        }
        for (std::uint32_t jd = 0; jd < q; ++jd) x[origin + jd * stride] = out[jd];
      }
    }
    stride = block;
  }
}

/// Full transform of a dense signal; coefficients below prune_rel of the
/// largest magnitude are dropped from the sparse result.
inline SparseSpectrum dense_forward(const DenseSignal& f, double prune_rel = 1e-8) {
  std::vector<cplx> work = f.values();
  radix_passes_inplace(work, f.q(), f.n(), /*conjugate=*/true);
  const double scale = 1.0 / static_cast<double>(f.size());
  double peak = 0.0;
  for (auto& v : work) {
    v *= scale;
    peak = std::max(peak, std::abs(v));
  }
  SparseSpectrum out(f.q(), f.n());
  const double cutoff = peak * prune_rel;
  for (std::uint64_t r = 0; r < work.size(); ++r)
    if (std::abs(work[r]) > cutoff && work[r] != cplx{0.0, 0.0})
      out.set(QIndex::unrank(f.q(), f.n(), r), work[r]);
  return out;
}

/// Synthesis by direct summation over the support: f[m] = sum_k F[k] w^{<m,k>}.
inline DenseSignal dense_inverse(const SparseSpectrum& F) {
  DenseSignal f(F.q(), F.n());
  const RootOfUnity w(F.q());
  for (std::uint64_t r = 0; r < f.size(); ++r) {
    const QIndex m = QIndex::unrank(F.q(), F.n(), r);
    cplx acc{0.0, 0.0};
    for (const auto& [k, v] : F.entries()) acc += v * w.pow(inner_product(m, k));
    f[r] = acc;
  }
  return f;
}

/// ||estimate - truth||^2 / ||truth||^2 over the union of supports.
inline double nmse(const SparseSpectrum& estimate, const SparseSpectrum& truth) {
  if (truth.empty()) throw std::domain_error("nmse: truth spectrum is identically zero");
  double num = 0.0;
  for (const auto& [k, v] : truth.entries()) num += std::norm(estimate.at(k) - v);
  for (const auto& [k, v] : estimate.entries())
    if (!truth.contains(k)) num += std::norm(v);
  return num / truth.norm2();
}

// --- Spectrum file format ---------------------------------------------------
// Header line "q=<q> n=<n>", then one entry per line:
//   <digit-string> <re> <im>
// Values are printed with 17 significant digits so doubles round-trip exactly.

inline void write_spectrum(std::ostream& os, const SparseSpectrum& F) {
  os << "q=" << F.q() << " n=" << F.n() << "\n";
  os << std::setprecision(17);
  for (const auto& [k, v] : F.entries())
    os << k.to_string() << " " << v.real() << " " << v.imag() << "\n";
}

inline std::pair<std::uint32_t, std::size_t> parse_qn_header(const std::string& line,
                                                             const char* what) {
  std::uint32_t q = 0;
  std::size_t n = 0;
  if (std::sscanf(line.c_str(), "q=%u n=%zu", &q, &n) != 2)
    throw std::runtime_error(std::string(what) + ": malformed header line '" + line + "'");
  return {q, n};
}

inline SparseSpectrum read_spectrum(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("spectrum file: missing header");
  const auto [q, n] = parse_qn_header(line, "spectrum file");
  SparseSpectrum F(q, n);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string digits;
    double re = 0.0, im = 0.0;
    if (!(ss >> digits >> re >> im))
      throw std::runtime_error("spectrum file: malformed line " + std::to_string(lineno));
    QIndex k = QIndex::parse(q, digits);
    if (k.n() != n)
      throw std::runtime_error("spectrum file: wrong index length at line " +
                               std::to_string(lineno));
    F.set(k, {re, im});
  }
  return F;
}

}  // namespace qsft
