// Subsampled transform: query the oracle on the affine set {M l + d : l in
// Z_q^b} and transform the B = q^b samples in O(B b q) multiply-adds,
//
//   U[j] = (1/B) sum_l f[M l + d] w^{-<j, l>}.
//
// Each coefficient U[j] is the aliasing sum of F over the frequencies k with
// M^T k = j, phase-rotated by w^{<d, k>}.

#pragma once

#include <vector>

#include "qsft/oracle.hpp"
#include "qsft/qindex.hpp"
#include "qsft/spectrum.hpp"

namespace qsft {

/// Enumerate the affine query set in rank order of l.
inline std::vector<QIndex> affine_points(const QMatrix& M, const QIndex& d) {
  const std::uint32_t q = M.q();
  const std::size_t b = M.cols();
  if (M.rows() != d.n() || M.q() != d.q())
    throw std::invalid_argument("affine_points: matrix and offset disagree");
  const std::uint64_t B = pow_u64(q, b);
  std::vector<QIndex> points;
  points.reserve(B);
  for (std::uint64_t r = 0; r < B; ++r)
    points.push_back(M.mul(QIndex::unrank(q, b, r)).add(d));
  return points;
}

inline std::vector<cplx> subsample_transform(FunctionOracle& oracle, const QMatrix& M,
                                             const QIndex& d) {
  const auto points = affine_points(M, d);
  std::vector<cplx> values;
  oracle.query_many(points, values);
  radix_passes_inplace(values, M.q(), M.cols(), /*conjugate=*/true);
  const double scale = 1.0 / static_cast<double>(values.size());
  for (auto& v : values) v *= scale;
  return values;
}

}  // namespace qsft
