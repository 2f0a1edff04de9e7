// Experiment harness: turn a flat configuration into a plan, an oracle and a
// decode run, and drive seeded sweeps that emit one CSV row per (cell, trial).
// Rows are reproducible bit-for-bit given seeds, except the wall-time column.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qsft/oracle.hpp"
#include "qsft/peeling.hpp"
#include "qsft/sampling_plan.hpp"
#include "qsft/subprocess_oracle.hpp"

namespace qsft {

struct ExperimentConfig {
  std::uint32_t q = 0;
  std::size_t n = 0;
  std::size_t b = 0;   // 0: derive from sparsity and eta
  std::size_t C = 3;
  std::size_t P1 = 0;  // 0: defaults to n in robust regimes
  Regime regime = Regime::Noiseless;
  double gamma = 0.5;
  double eta = 1.0;    // bin redundancy target B/S used when b is derived
  std::optional<double> snr_db;
  std::optional<double> sigma2;
  std::size_t sparsity = 0;  // S (synthetic signal size; also drives derived b)
  std::uint32_t t = 1;       // degree bound, coded regime
  std::uint64_t seed = 1;
  bool cache = true;

  // Oracle binding: "synthetic", "table:PATH" or "cmd:TEMPLATE".
  std::string oracle = "synthetic";

  // Synthetic value model.
  SynthMode synth_mode = SynthMode::General;
  double rho = 1.0;
  std::uint32_t kappa = 4;
  double rho_min = 1.0;
  double rho_max = 1.0;

  std::optional<std::string> truth_path;  // spectrum file for NMSE with external oracles
  std::uint64_t mle_budget = 1ull << 20;
  std::size_t iteration_cap = 0;
};

struct TransformOutcome {
  SamplingPlan plan;
  DecodeResult result;
  std::optional<double> nmse;
  std::optional<SparseSpectrum> truth;
  double sigma2 = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {
inline double snr_linear(double db) { return std::pow(10.0, db / 10.0); }

inline std::size_t derive_b(std::uint32_t q, std::size_t n, std::size_t S, double eta) {
  if (S == 0)
    throw std::invalid_argument("config: either set b explicitly or give --sparsity so b "
                                "can be derived");
  const double target = std::max(1.0, eta * static_cast<double>(S));
  std::size_t b = 1;
  double bins = q;
  while (bins < target && b < n) {
    bins *= q;
    ++b;
  }
  return b;
}
}  // namespace detail

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.q < 2) throw std::invalid_argument("config: q must be >= 2");
  if (cfg.n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (cfg.C < 1) throw std::invalid_argument("config: need at least one subsampling group");
  if (cfg.gamma <= 0.0 || cfg.gamma >= 1.0)
    throw std::invalid_argument("config: gamma must lie in (0, 1)");
  const bool robust =
      cfg.regime == Regime::RobustNearLinear || cfg.regime == Regime::RobustSubLinear;
  if (robust && cfg.oracle != "synthetic" && !cfg.sigma2 && !cfg.snr_db)
    throw std::invalid_argument("config: robust regimes need the noise power; pass --sigma2 "
                                "(or --snr-db for synthetic signals)");
  if (cfg.oracle == "synthetic" && cfg.sparsity == 0 && cfg.regime != Regime::Noiseless)
    throw std::invalid_argument("config: synthetic oracle needs --sparsity");
}

inline SamplingPlan plan_from_config(const ExperimentConfig& cfg) {
  PlanConfig pc;
  pc.q = cfg.q;
  pc.n = cfg.n;
  pc.b = cfg.b ? cfg.b : detail::derive_b(cfg.q, cfg.n, cfg.sparsity, cfg.eta);
  if (pc.b > cfg.n) pc.b = cfg.n;
  pc.C = cfg.C;
  pc.regime = cfg.regime;
  pc.P1 = cfg.P1;
  pc.t = cfg.t;
  pc.seed = cfg.seed;
  return make_plan(pc);
}

struct BoundOracle {
  std::unique_ptr<FunctionOracle> oracle;
  std::optional<SparseSpectrum> truth;
  double sigma2 = 0.0;
};

inline BoundOracle bind_oracle(const ExperimentConfig& cfg, const SamplingPlan& plan) {
  BoundOracle out;
  if (cfg.oracle == "synthetic") {
    SyntheticSpec spec;
    spec.q = cfg.q;
    spec.n = cfg.n;
    spec.S = cfg.sparsity;
    spec.mode = cfg.synth_mode;
    spec.rho = cfg.rho;
    spec.kappa = cfg.kappa;
    spec.rho_min = cfg.rho_min;
    spec.rho_max = cfg.rho_max;
    if (cfg.regime == Regime::Coded) spec.max_weight = static_cast<int>(cfg.t);
    spec.sigma2 = cfg.sigma2;
    if (!cfg.sigma2 && cfg.snr_db) spec.snr = detail::snr_linear(*cfg.snr_db);
    spec.support_seed = derive_seed(cfg.seed, "support");
    spec.value_seed = derive_seed(cfg.seed, "value");
    spec.noise_seed = derive_seed(cfg.seed, "noise");
    spec.cache = cfg.cache;
    auto synth = synthesize(spec);
    out.oracle = std::move(synth.oracle);
    out.truth = std::move(synth.truth);
    out.sigma2 = synth.sigma2;
    return out;
  }
  if (cfg.oracle.rfind("table:", 0) == 0) {
    const std::string path = cfg.oracle.substr(6);
    if (!std::filesystem::exists(path))
      throw std::invalid_argument("oracle file '" + path + "' does not exist");
    auto table = std::make_unique<TableOracle>(path, cfg.q, cfg.n);
    // Upfront coverage check against everything the plan will ask for.
    for (std::size_t c = 0; c < plan.groups.size(); ++c)
      for (const auto& m : query_points(plan, c))
        if (!table->contains(m))
          throw OracleError("sample table '" + path + "' does not cover index " +
                            m.to_string() + " required by the plan");
    out.oracle = std::move(table);
  } else if (cfg.oracle.rfind("cmd:", 0) == 0) {
    out.oracle = std::make_unique<SubprocessOracle>(cfg.oracle.substr(4), cfg.q, cfg.n);
  } else {
    throw std::invalid_argument("config: unknown oracle binding '" + cfg.oracle +
                                "' (expected synthetic, table:PATH or cmd:TEMPLATE)");
  }
  out.sigma2 = cfg.sigma2.value_or(0.0);
  if (cfg.truth_path) {
    std::ifstream in(*cfg.truth_path);
    if (!in) throw std::invalid_argument("truth file '" + *cfg.truth_path + "' does not exist");
    out.truth = read_spectrum(in);
  }
  return out;
}

inline DetectorConfig detector_from_config(const ExperimentConfig& cfg,
                                           const SamplingPlan& plan, double sigma2) {
  DetectorConfig det;
  det.regime = cfg.regime;
  det.gamma = cfg.gamma;
  det.nu2 = sigma2 / static_cast<double>(plan.bins());
  det.P1 = plan.P1;
  det.mle_budget = cfg.mle_budget;
  if (cfg.oracle == "synthetic" && cfg.synth_mode == SynthMode::Assumption2)
    det.constellation = Constellation{cfg.rho, cfg.kappa};
  return det;
}

inline TransformOutcome run_transform(const ExperimentConfig& cfg,
                                      const SamplingPlan* preset_plan = nullptr) {
  validate(cfg);
  TransformOutcome out{preset_plan ? *preset_plan : plan_from_config(cfg),
                       {}, std::nullopt, std::nullopt, 0.0, 0.0, {}};
  if (preset_plan && (preset_plan->q != cfg.q || preset_plan->n != cfg.n))
    throw std::invalid_argument("plan file does not match the configured q and n");
  auto bound = bind_oracle(cfg, out.plan);
  out.sigma2 = bound.sigma2;

  // gamma must stay below (eta/2) SNR for the residual tests to separate.
  if (cfg.snr_db && cfg.sparsity > 0) {
    const double eta = static_cast<double>(out.plan.bins()) / static_cast<double>(cfg.sparsity);
    const double snr = detail::snr_linear(*cfg.snr_db);
    if (cfg.gamma >= 0.5 * eta * snr)
      out.warnings.push_back("gamma=" + std::to_string(cfg.gamma) +
                             " is not below (eta/2)*SNR = " + std::to_string(0.5 * eta * snr) +
                             "; detection thresholds may misbehave");
  }
  if (cfg.regime == Regime::Coded)
    out.warnings.push_back("coded regime: recovery with random subsampling matrices is a "
                           "heuristic, not a guarantee");
  if (out.plan.coded)
    for (const auto& w : out.plan.coded->warnings) out.warnings.push_back(w);

  const DetectorConfig det = detector_from_config(cfg, out.plan, bound.sigma2);
  DecodeOptions opts;
  opts.sparsity_hint = cfg.sparsity ? cfg.sparsity : out.plan.bins();
  opts.iteration_cap = cfg.iteration_cap;

  const auto t0 = std::chrono::steady_clock::now();
  out.result = decode(*bound.oracle, out.plan, det, opts);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (bound.truth && !bound.truth->empty()) {
    out.nmse = nmse(out.result.estimate, *bound.truth);
    out.truth = std::move(bound.truth);
  }
  return out;
}

// --- Sweeps ---------------------------------------------------------------------

struct SweepSpec {
  std::vector<ExperimentConfig> cells;
  std::size_t trials = 1;
  std::uint64_t seed_base = 1;
  std::string out_path;          // per-trial rows
  std::string summary_path;      // per-cell aggregates ("" = out_path + ".summary.csv")
  double success_nmse = 0.1;     // success threshold used in the summary
};

inline const char* kSweepHeader =
    "cell,trial,q,n,b,C,P1,regime,S,snr_db,sigma2,gamma,seed,samples_raw,samples_unique,"
    "wall_time_s,nmse,converged";

namespace detail {
inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::set<std::pair<std::size_t, std::size_t>> existing_rows(const std::string& path) {
  std::set<std::pair<std::size_t, std::size_t>> keys;
  std::ifstream in(path);
  if (!in) return keys;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::size_t cell = 0, trial = 0;
    if (std::sscanf(line.c_str(), "%zu,%zu", &cell, &trial) == 2) keys.insert({cell, trial});
  }
  return keys;
}
}  // namespace detail

struct SweepRow {
  std::size_t cell = 0, trial = 0;
  ExperimentConfig cfg;
  std::uint64_t samples_raw = 0, samples_unique = 0;
  double wall = 0.0;
  double nmse_value = -1.0;  // -1: truth unavailable
  bool converged = true;
};

inline std::string format_row(const SweepRow& r, std::size_t resolved_b, std::size_t resolved_P1) {
  std::ostringstream os;
  os << r.cell << ',' << r.trial << ',' << r.cfg.q << ',' << r.cfg.n << ',' << resolved_b << ','
     << r.cfg.C << ',' << resolved_P1 << ',' << to_string(r.cfg.regime) << ',' << r.cfg.sparsity
     << ',' << (r.cfg.snr_db ? detail::fmt_double(*r.cfg.snr_db) : "") << ','
     << (r.cfg.sigma2 ? detail::fmt_double(*r.cfg.sigma2) : "") << ','
     << detail::fmt_double(r.cfg.gamma) << ',' << r.cfg.seed << ',' << r.samples_raw << ','
     << r.samples_unique << ',' << detail::fmt_double(r.wall) << ','
     << (r.nmse_value >= 0.0 ? detail::fmt_double(r.nmse_value) : "") << ','
     << (r.converged ? 1 : 0);
  return os.str();
}

struct SweepOutcome {
  std::size_t rows_written = 0;
  std::size_t rows_skipped = 0;
  bool all_converged = true;
};

/// Runs every (cell, trial) pair not already present in the output file and
/// appends its row; then rewrites the per-cell summary. Trial seeds are
/// seed_base + trial so cells are independently re-runnable.
inline SweepOutcome run_sweep(const SweepSpec& spec) {
  if (spec.cells.empty()) throw std::invalid_argument("sweep: no cells");
  if (spec.out_path.empty()) throw std::invalid_argument("sweep: no output path");

  const auto existing = detail::existing_rows(spec.out_path);
  const bool fresh = existing.empty();
  std::ofstream out(spec.out_path, fresh ? std::ios::trunc : std::ios::app);
  if (!out) throw std::invalid_argument("sweep: cannot open output '" + spec.out_path + "'");
  if (fresh) out << kSweepHeader << "\n";

  struct CellAgg {
    std::size_t trials = 0, successes = 0, converged = 0;
    double nmse_sum = 0.0, samples_sum = 0.0;
    bool has_nmse = true;
  };
  std::map<std::size_t, CellAgg> agg;

  SweepOutcome outcome;
  for (std::size_t ci = 0; ci < spec.cells.size(); ++ci) {
    for (std::size_t trial = 0; trial < spec.trials; ++trial) {
      SweepRow row;
      row.cell = ci;
      row.trial = trial;
      row.cfg = spec.cells[ci];
      row.cfg.seed = spec.seed_base + trial;
      if (existing.count({ci, trial})) {
        ++outcome.rows_skipped;
        continue;
      }
      const auto res = run_transform(row.cfg);
      row.samples_raw = res.result.samples_raw;
      row.samples_unique = res.result.samples_unique;
      row.wall = res.wall_seconds;
      row.nmse_value = res.nmse.value_or(-1.0);
      row.converged = res.result.converged;
      out << format_row(row, res.plan.b, res.plan.P1) << "\n";
      out.flush();
      ++outcome.rows_written;
      outcome.all_converged = outcome.all_converged && row.converged;

      auto& a = agg[ci];
      ++a.trials;
      a.converged += row.converged ? 1 : 0;
      if (row.nmse_value >= 0.0) {
        a.nmse_sum += row.nmse_value;
        if (row.nmse_value <= spec.success_nmse) ++a.successes;
      } else {
        a.has_nmse = false;
      }
      a.samples_sum += static_cast<double>(row.samples_raw);
    }
  }

  const std::string summary_path =
      spec.summary_path.empty() ? spec.out_path + ".summary.csv" : spec.summary_path;
  std::ofstream sum(summary_path, std::ios::trunc);
  sum << "cell,q,n,regime,S,snr_db,trials,mean_nmse,success_rate,success_nmse_threshold,"
         "mean_samples_raw,converged_rate\n";
  for (const auto& [ci, a] : agg) {
    const auto& c = spec.cells[ci];
    const auto trials = static_cast<double>(a.trials);
    sum << ci << ',' << c.q << ',' << c.n << ',' << to_string(c.regime) << ',' << c.sparsity
        << ',' << (c.snr_db ? detail::fmt_double(*c.snr_db) : "") << ',' << a.trials << ','
        << (a.has_nmse && a.trials ? detail::fmt_double(a.nmse_sum / trials) : "") << ','
        << (a.has_nmse && a.trials ? detail::fmt_double(a.successes / trials) : "") << ','
        << detail::fmt_double(spec.success_nmse) << ','
        << (a.trials ? detail::fmt_double(a.samples_sum / trials) : "") << ','
        << (a.trials ? detail::fmt_double(a.converged / trials) : "") << "\n";
  }
  return outcome;
}

}  // namespace qsft
