// Shared test utilities: ad-hoc oracles and brute-force reference
// computations kept deliberately independent of the library's fast paths.

#pragma once

#include <functional>

#include "qsft/oracle.hpp"
#include "qsft/rng.hpp"
#include "qsft/sampling_plan.hpp"
#include "qsft/spectrum.hpp"

namespace qsft::testing {

/// Oracle over an explicit dense signal.
class DenseOracle final : public FunctionOracle {
 public:
  explicit DenseOracle(DenseSignal f, bool cache = true)
      : FunctionOracle(f.q(), f.n(), cache), f_(std::move(f)) {}

 protected:
  cplx evaluate(const QIndex& m, std::uint64_t) override { return f_.at(m); }

 private:
  DenseSignal f_;
};

/// Oracle over an arbitrary callable.
class FnOracle final : public FunctionOracle {
 public:
  FnOracle(std::uint32_t q, std::size_t n, std::function<cplx(const QIndex&)> fn,
           bool cache = true)
      : FunctionOracle(q, n, cache), fn_(std::move(fn)) {}

 protected:
  cplx evaluate(const QIndex& m, std::uint64_t) override { return fn_(m); }

 private:
  std::function<cplx(const QIndex&)> fn_;
};

/// The aliasing sum evaluated directly over the support: for each bin j,
/// sum of F[k] w^{<d,k>} over the k with M^T k = j.
inline std::vector<cplx> aliasing_by_support(const SparseSpectrum& F, const QMatrix& M,
                                             const QIndex& d) {
  const std::uint64_t B = pow_u64(M.q(), M.cols());
  std::vector<cplx> bins(B, cplx{0.0, 0.0});
  const RootOfUnity w(M.q());
  for (const auto& [k, v] : F.entries())
    bins[M.mul_transposed(k).rank()] += v * w.pow(inner_product(d, k));
  return bins;
}

inline SparseSpectrum random_spectrum(std::uint32_t q, std::size_t n, std::size_t S, Rng& rng) {
  SparseSpectrum F(q, n);
  while (F.size() < S) {
    const auto k = rng.qindex(q, n);
    if (F.contains(k)) continue;
    F.set(k, std::polar(0.5 + rng.unit(), 2.0 * std::numbers::pi * rng.unit()));
  }
  return F;
}

}  // namespace qsft::testing
