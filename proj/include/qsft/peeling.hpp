// The outer loop: subsample every group, classify bins, then repeatedly peel
// singletons. Peeling a recovered (k, v) subtracts v w^{<d, k>} from the bin
// M_c^T k of every group and marks those bins for reclassification, so
// multi-tons shed terms and expose new singletons. A key is recovered at most
// once; the loop terminates when no fresh singleton remains or the iteration
// cap trips (non-converged partial result, not an error).
//
// Determinism: singletons are processed in (group, bin-rank) order, and only
// bins touched by a peel are re-run through detection.

#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qsft/bin_detect.hpp"
#include "qsft/oracle.hpp"
#include "qsft/sampling_plan.hpp"
#include "qsft/spectrum.hpp"
#include "qsft/subsample.hpp"

namespace qsft {

struct PeelEvent {
  std::size_t iteration = 0;
  std::size_t c = 0;           // group the singleton was found in
  std::uint64_t j_rank = 0;    // its bin
  QIndex k;
  cplx value{0.0, 0.0};
};

struct GroupTable {
  std::vector<std::vector<cplx>> bins;  // [rank(j)] -> observation vector over offsets
  std::vector<Classification> types;
};

struct DecodeOptions {
  std::size_t iteration_cap = 0;  // 0 -> 4 * C * max(sparsity_hint, 8)
  std::size_t sparsity_hint = 0;
  bool eager_rebuild = false;  // rebuild the singleton list after every peel
  bool keep_state = false;     // retain final bin tables in the result
};

struct DecodeResult {
  SparseSpectrum estimate{2, 1};
  bool converged = true;
  std::size_t iterations = 0;
  std::uint64_t samples_raw = 0;
  std::uint64_t samples_unique = 0;
  std::size_t multitons_remaining = 0;
  std::size_t zerotons = 0;
  std::size_t stale_singletons = 0;  // singleton-typed bins whose key was already recovered
  double residual_energy = 0.0;  // sum of |U|^2 over all bins after peeling
  std::vector<PeelEvent> events;
  std::vector<GroupTable> state;  // populated when keep_state
};

class DecoderState {
 public:
  DecoderState(const SamplingPlan& plan, const DetectorConfig& cfg)
      : plan_(plan), cfg_(cfg), w_(plan.q), estimate_(plan.q, plan.n) {
    tables_.resize(plan.groups.size());
  }

  void subsample(FunctionOracle& oracle) {
    const std::uint64_t B = plan_.bins();
    for (std::size_t c = 0; c < plan_.groups.size(); ++c) {
      const auto& g = plan_.groups[c];
      auto& table = tables_[c];
      table.bins.assign(B, std::vector<cplx>(g.offsets.size()));
      table.types.assign(B, Classification{});
      for (std::size_t p = 0; p < g.offsets.size(); ++p) {
        const auto U = subsample_transform(oracle, g.M, g.offsets[p]);
        for (std::uint64_t j = 0; j < B; ++j) table.bins[j][p] = U[j];
      }
    }
  }

  void classify_all() {
    for (std::size_t c = 0; c < tables_.size(); ++c)
      for (std::uint64_t j = 0; j < plan_.bins(); ++j) classify(c, j);
  }

  void classify(std::size_t c, std::uint64_t j_rank) {
    const QIndex j = QIndex::unrank(plan_.q, plan_.b, j_rank);
    tables_[c].types[j_rank] = detect(tables_[c].bins[j_rank], j, plan_.groups[c], plan_, cfg_);
  }

  // Record (k, v) found in group c_src / bin j_src, subtract its signature
  // from every group, and mark the touched bins. k must be fresh.
  void peel_one(std::size_t c_src, std::uint64_t j_src, const QIndex& k, cplx v,
                std::size_t iteration) {
    if (recovered_.count(k))
      throw std::logic_error("peel_one: key was already peeled; caller must honor the "
                             "recovered set");
    recovered_.insert(k);
    estimate_.set(k, v);
    events_.push_back({iteration, c_src, j_src, k, v});
    for (std::size_t c = 0; c < tables_.size(); ++c) {
      const auto& g = plan_.groups[c];
      const std::uint64_t j = g.M.mul_transposed(k).rank();
      auto& bin = tables_[c].bins[j];
      for (std::size_t p = 0; p < g.offsets.size(); ++p)
        bin[p] -= v * w_.pow(inner_product(g.offsets[p], k));
      touched_.insert({c, j});
    }
  }

  void reclassify_touched() {
    for (const auto& [c, j] : touched_) classify(c, j);
    touched_.clear();
  }

  // Fresh singletons in deterministic (group, bin-rank) order.
  std::vector<std::tuple<std::size_t, std::uint64_t, QIndex, cplx>> fresh_singletons() const {
    std::vector<std::tuple<std::size_t, std::uint64_t, QIndex, cplx>> out;
    for (std::size_t c = 0; c < tables_.size(); ++c)
      for (std::uint64_t j = 0; j < plan_.bins(); ++j) {
        const auto& t = tables_[c].types[j];
        if (t.type == BinType::Singleton && !recovered_.count(t.k))
          out.emplace_back(c, j, t.k, t.v);
      }
    return out;
  }

  bool recovered(const QIndex& k) const { return recovered_.count(k) != 0; }
  const SparseSpectrum& estimate() const { return estimate_; }
  const std::vector<GroupTable>& tables() const { return tables_; }
  std::vector<GroupTable>& tables() { return tables_; }
  const std::vector<PeelEvent>& events() const { return events_; }

  double residual_energy() const {
    double e = 0.0;
    for (const auto& table : tables_)
      for (const auto& bin : table.bins)
        for (const auto& u : bin) e += std::norm(u);
    return e;
  }

 private:
  const SamplingPlan& plan_;
  const DetectorConfig& cfg_;
  RootOfUnity w_;
  SparseSpectrum estimate_;
  std::vector<GroupTable> tables_;
  std::set<QIndex> recovered_;
  std::set<std::pair<std::size_t, std::uint64_t>> touched_;
  std::vector<PeelEvent> events_;
};

inline DecodeResult decode(FunctionOracle& oracle, const SamplingPlan& plan,
                           const DetectorConfig& cfg, const DecodeOptions& opts = {}) {
  const std::uint64_t raw0 = oracle.raw_queries();

  DecoderState state(plan, cfg);
  state.subsample(oracle);
  state.classify_all();

  const std::size_t cap = opts.iteration_cap
                              ? opts.iteration_cap
                              : 4 * plan.groups.size() * std::max<std::size_t>(opts.sparsity_hint, 8);

  DecodeResult result;
  result.converged = true;
  std::size_t iter = 0;
  while (true) {
    auto fresh = state.fresh_singletons();
    if (fresh.empty()) break;
    if (iter >= cap) {
      result.converged = false;
      break;
    }
    ++iter;
    if (opts.eager_rebuild) {
      const auto& [c, j, k, v] = fresh.front();
      state.peel_one(c, j, k, v, iter);
      state.reclassify_touched();
    } else {
      for (const auto& [c, j, k, v] : fresh) {
        if (state.recovered(k)) continue;
        state.peel_one(c, j, k, v, iter);
      }
      state.reclassify_touched();
    }
  }

  result.estimate = state.estimate();
  result.iterations = iter;
  result.samples_raw = oracle.raw_queries() - raw0;
  result.samples_unique = oracle.unique_queries();
  result.residual_energy = state.residual_energy();
  result.events = state.events();
  for (const auto& table : state.tables())
    for (const auto& t : table.types) {
      if (t.type == BinType::MultiTon) ++result.multitons_remaining;
      if (t.type == BinType::ZeroTon) ++result.zerotons;
      if (t.type == BinType::Singleton) ++result.stale_singletons;
    }
  if (opts.keep_state) result.state = state.tables();
  return result;
}

}  // namespace qsft
