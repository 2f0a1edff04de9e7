// qsft command line: single-shot transforms and seeded experiment sweeps.
//
//   qsft transform --q 3 --n 6 --sparsity 10 --regime noiseless --out Fhat.txt
//   qsft sweep --config sweep.json --trials 20 --out rows.csv
//
// Exit codes: 0 success, 1 non-convergence (partial results written),
// 2 usage/config error, 3 oracle failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qsft/qsft.hpp"

namespace {

struct CliOptions {
  std::optional<std::uint64_t> q, n, b, C, P1, sparsity, t, seed, trials, seed_base, mle_budget,
      iteration_cap;
  std::optional<double> gamma, eta, snr_db, sigma2, rho, rho_min, rho_max, success_nmse;
  std::optional<std::uint32_t> kappa;
  std::optional<std::string> regime, oracle, synth_mode, truth, config, plan, out, summary,
      peel_log;
  bool no_cache = false;
  bool emit_plan = false;
};

void add_common_options(CLI::App* app, CliOptions& o) {
  app->add_option("--q", o.q, "alphabet size");
  app->add_option("--n", o.n, "sequence length");
  app->add_option("--b", o.b, "bins exponent (B = q^b); derived from sparsity if omitted");
  app->add_option("--c-groups", o.C, "number of subsampling groups");
  app->add_option("--p1", o.P1, "offsets (robust-nl) or offset blocks (robust-sl)");
  app->add_option("--regime", o.regime, "noiseless | robust-nl | robust-sl | coded");
  app->add_option("--gamma", o.gamma, "detection threshold slack in (0,1)");
  app->add_option("--eta", o.eta, "bin redundancy target B/S used when deriving b");
  app->add_option("--snr-db", o.snr_db, "target SNR in dB (synthetic oracle)");
  app->add_option("--sigma2", o.sigma2, "noise power sigma^2");
  app->add_option("--sparsity", o.sparsity, "number of nonzero coefficients S");
  app->add_option("--t", o.t, "degree bound for the coded regime");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("--oracle", o.oracle, "synthetic | table:PATH | cmd:TEMPLATE");
  app->add_flag("--no-cache", o.no_cache, "draw fresh noise on repeated queries");
  app->add_option("--synth-mode", o.synth_mode, "assumption2 | general");
  app->add_option("--rho", o.rho, "constellation magnitude (assumption2)");
  app->add_option("--kappa", o.kappa, "constellation size (assumption2)");
  app->add_option("--rho-min", o.rho_min, "min magnitude (general)");
  app->add_option("--rho-max", o.rho_max, "max magnitude (general)");
  app->add_option("--truth", o.truth, "spectrum file with the true coefficients (for NMSE)");
  app->add_option("--mle-budget", o.mle_budget, "candidate cap for the near-linear search");
  app->add_option("--iteration-cap", o.iteration_cap, "peeling iteration cap");
  app->add_option("--config", o.config, "JSON config mirroring these flags; flags override");
  app->add_option("--plan", o.plan, "plan JSON: output path with --emit-plan, else input");
  app->add_flag("--emit-plan", o.emit_plan, "write the sampling plan and exit");
  app->add_option("--out", o.out, "output path (spectrum / CSV rows)");
}

void overlay_json(const nlohmann::json& j, qsft::ExperimentConfig& cfg) {
  if (j.contains("q")) cfg.q = j["q"].get<std::uint32_t>();
  if (j.contains("n")) cfg.n = j["n"].get<std::size_t>();
  if (j.contains("b")) cfg.b = j["b"].get<std::size_t>();
  if (j.contains("C")) cfg.C = j["C"].get<std::size_t>();
  if (j.contains("p1")) cfg.P1 = j["p1"].get<std::size_t>();
  if (j.contains("regime")) cfg.regime = qsft::parse_regime(j["regime"].get<std::string>());
  if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
  if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
  if (j.contains("snr_db")) cfg.snr_db = j["snr_db"].get<double>();
  if (j.contains("sigma2")) cfg.sigma2 = j["sigma2"].get<double>();
  if (j.contains("sparsity")) cfg.sparsity = j["sparsity"].get<std::size_t>();
  if (j.contains("t")) cfg.t = j["t"].get<std::uint32_t>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("cache")) cfg.cache = j["cache"].get<bool>();
  if (j.contains("oracle")) cfg.oracle = j["oracle"].get<std::string>();
  if (j.contains("synth_mode"))
    cfg.synth_mode = j["synth_mode"].get<std::string>() == "assumption2"
                         ? qsft::SynthMode::Assumption2
                         : qsft::SynthMode::General;
  if (j.contains("rho")) cfg.rho = j["rho"].get<double>();
  if (j.contains("kappa")) cfg.kappa = j["kappa"].get<std::uint32_t>();
  if (j.contains("rho_min")) cfg.rho_min = j["rho_min"].get<double>();
  if (j.contains("rho_max")) cfg.rho_max = j["rho_max"].get<double>();
  if (j.contains("truth")) cfg.truth_path = j["truth"].get<std::string>();
  if (j.contains("mle_budget")) cfg.mle_budget = j["mle_budget"].get<std::uint64_t>();
  if (j.contains("iteration_cap")) cfg.iteration_cap = j["iteration_cap"].get<std::size_t>();
}

void overlay_flags(const CliOptions& o, qsft::ExperimentConfig& cfg) {
  if (o.q) cfg.q = static_cast<std::uint32_t>(*o.q);
  if (o.n) cfg.n = *o.n;
  if (o.b) cfg.b = *o.b;
  if (o.C) cfg.C = *o.C;
  if (o.P1) cfg.P1 = *o.P1;
  if (o.regime) cfg.regime = qsft::parse_regime(*o.regime);
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.eta) cfg.eta = *o.eta;
  if (o.snr_db) cfg.snr_db = *o.snr_db;
  if (o.sigma2) cfg.sigma2 = *o.sigma2;
  if (o.sparsity) cfg.sparsity = *o.sparsity;
  if (o.t) cfg.t = static_cast<std::uint32_t>(*o.t);
  if (o.seed) cfg.seed = *o.seed;
  if (o.no_cache) cfg.cache = false;
  if (o.oracle) cfg.oracle = *o.oracle;
  if (o.synth_mode)
    cfg.synth_mode = *o.synth_mode == "assumption2" ? qsft::SynthMode::Assumption2
                                                    : qsft::SynthMode::General;
  if (o.rho) cfg.rho = *o.rho;
  if (o.kappa) cfg.kappa = *o.kappa;
  if (o.rho_min) cfg.rho_min = *o.rho_min;
  if (o.rho_max) cfg.rho_max = *o.rho_max;
  if (o.truth) cfg.truth_path = *o.truth;
  if (o.mle_budget) cfg.mle_budget = *o.mle_budget;
  if (o.iteration_cap) cfg.iteration_cap = *o.iteration_cap;
}

qsft::ExperimentConfig build_config(const CliOptions& o) {
  qsft::ExperimentConfig cfg;
  if (o.config) {
    std::ifstream in(*o.config);
    if (!in) throw std::invalid_argument("config file '" + *o.config + "' does not exist");
    nlohmann::json j;
    in >> j;
    overlay_json(j, cfg);
  }
  overlay_flags(o, cfg);
  return cfg;
}

int run_transform_cmd(const CliOptions& o) {
  qsft::ExperimentConfig cfg = build_config(o);

  if (o.emit_plan) {
    const auto plan = qsft::plan_from_config(cfg);
    const std::string path = o.plan.value_or(o.out.value_or(""));
    const auto j = qsft::plan_to_json(plan);
    if (path.empty()) {
      std::cout << j.dump(2) << "\n";
    } else {
      std::ofstream out(path);
      if (!out) throw std::invalid_argument("cannot write plan to '" + path + "'");
      out << j.dump(2) << "\n";
      std::cout << "plan written to " << path << "\n";
    }
    return 0;
  }

  std::optional<qsft::SamplingPlan> preset;
  if (o.plan) {
    std::ifstream in(*o.plan);
    if (!in) throw std::invalid_argument("plan file '" + *o.plan + "' does not exist");
    nlohmann::json j;
    in >> j;
    preset = qsft::plan_from_json(j);
  }

  const auto outcome = qsft::run_transform(cfg, preset ? &*preset : nullptr);
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";

  const auto& r = outcome.result;
  std::cout << "regime " << qsft::to_string(outcome.plan.regime) << "  q " << outcome.plan.q
            << "  n " << outcome.plan.n << "  b " << outcome.plan.b << "  C " << outcome.plan.C
            << "\n";
  std::cout << "recovered " << r.estimate.size() << " coefficients in " << r.iterations
            << " iterations (" << (r.converged ? "converged" : "NOT converged") << ")\n";
  std::cout << "samples raw " << r.samples_raw << "  unique " << r.samples_unique << "\n";
  std::cout << "bins: zero-ton " << r.zerotons << "  multi-ton " << r.multitons_remaining
            << "  stale-singleton " << r.stale_singletons << "\n";
  std::cout << "residual bin energy " << r.residual_energy << "\n";
  std::cout << "wall time " << outcome.wall_seconds << " s\n";
  if (outcome.nmse) std::cout << "NMSE " << *outcome.nmse << "\n";

  if (o.out) {
    std::ofstream out(*o.out);
    if (!out) throw std::invalid_argument("cannot write spectrum to '" + *o.out + "'");
    qsft::write_spectrum(out, r.estimate);
    std::cout << "estimate written to " << *o.out << "\n";
  }
  if (o.peel_log) {
    std::ofstream log(*o.peel_log);
    if (!log) throw std::invalid_argument("cannot write peel log to '" + *o.peel_log + "'");
    for (const auto& e : r.events) {
      nlohmann::json je;
      je["iteration"] = e.iteration;
      je["c"] = e.c;
      je["j"] = qsft::QIndex::unrank(outcome.plan.q, outcome.plan.b, e.j_rank).to_string();
      je["k"] = e.k.to_string();
      je["value"] = {e.value.real(), e.value.imag()};
      log << je.dump() << "\n";
    }
  }
  return r.converged ? 0 : 1;
}

int run_sweep_cmd(const CliOptions& o) {
  qsft::SweepSpec spec;
  qsft::ExperimentConfig base;
  nlohmann::json jconfig = nlohmann::json::object();
  if (o.config) {
    std::ifstream in(*o.config);
    if (!in) throw std::invalid_argument("config file '" + *o.config + "' does not exist");
    in >> jconfig;
    overlay_json(jconfig, base);
  }
  overlay_flags(o, base);

  if (jconfig.contains("cells")) {
    for (const auto& jc : jconfig["cells"]) {
      qsft::ExperimentConfig cell = base;
      overlay_json(jc, cell);
      spec.cells.push_back(cell);
    }
  } else {
    spec.cells.push_back(base);
  }
  spec.trials = o.trials.value_or(jconfig.value("trials", std::size_t{1}));
  spec.seed_base = o.seed_base.value_or(jconfig.value("seed_base", base.seed));
  spec.out_path = o.out.value_or(jconfig.value("out", std::string{}));
  spec.summary_path = o.summary.value_or(jconfig.value("summary", std::string{}));
  spec.success_nmse = o.success_nmse.value_or(jconfig.value("success_nmse", 0.1));

  const auto outcome = qsft::run_sweep(spec);
  std::cout << "sweep: " << outcome.rows_written << " rows written, " << outcome.rows_skipped
            << " already present\n";
  std::cout << "rows: " << spec.out_path << "\n";
  std::cout << "summary: "
            << (spec.summary_path.empty() ? spec.out_path + ".summary.csv" : spec.summary_path)
            << "\n";
  return outcome.all_converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse Fourier transforms of functions over Z_q^n"};
  app.require_subcommand(1);

  CliOptions topt;
  auto* transform = app.add_subcommand("transform", "run one decode and write the estimate");
  add_common_options(transform, topt);
  transform->add_option("--peel-log", topt.peel_log, "write peel events as JSON lines");

  CliOptions sopt;
  auto* sweep = app.add_subcommand("sweep", "run seeded (cell, trial) grids, emit CSV");
  add_common_options(sweep, sopt);
  sweep->add_option("--trials", sopt.trials, "trials per cell");
  sweep->add_option("--seed-base", sopt.seed_base, "seed for trial 0; trial i uses base + i");
  sweep->add_option("--success-nmse", sopt.success_nmse, "NMSE threshold for the summary");
  sweep->add_option("--summary", sopt.summary, "summary CSV path");

  try {
    app.parse(argc, argv);
    if (transform->parsed()) return run_transform_cmd(topt);
    if (sweep->parsed()) return run_sweep_cmd(sopt);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const qsft::OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return 3;
  } catch (const qsft::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
