// Command-line front end: simulate / select / fit / evaluate / bench.

#include <cstdint>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "binclust/bench.hpp"
#include "binclust/data.hpp"
#include "binclust/json_io.hpp"
#include "binclust/metrics.hpp"
#include "binclust/postfit.hpp"
#include "binclust/selection.hpp"
#include "binclust/simulate.hpp"
#include "binclust/version.hpp"

namespace {

using namespace binclust;

Noise parse_noise(const std::string& s) {
  if (s == "gaussian") return Noise::Gaussian;
  if (s == "student") return Noise::StudentT3;
  if (s == "laplace") return Noise::Laplace;
  throw CLI::ValidationError("--noise", "expected gaussian|student|laplace");
}

PenaltyRule parse_penalty(const std::string& s) {
  if (s == "bic") return PenaltyRule::bic();
  if (s == "aic") return PenaltyRule::aic();
  if (s.rfind("c=", 0) == 0) return PenaltyRule::custom(std::stod(s.substr(2)));
  throw CLI::ValidationError("--penalty", "expected bic|aic|c=<float>");
}

BinningMode parse_bins_mode(const std::string& s) {
  if (s == "quantile") return BinningMode::Quantile;
  if (s == "equal-width") return BinningMode::EqualWidth;
  throw CLI::ValidationError("--bins-mode", "expected quantile|equal-width");
}

EmInit parse_init(const std::string& s) {
  if (s == "random-resp") return EmInit::RandomResponsibilities;
  if (s == "random-rows") return EmInit::RandomRows;
  throw CLI::ValidationError("--init", "expected random-resp|random-rows");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

struct BinsFlags {
  int fixed = 0;
  int rate = 6;
  std::string mode = "quantile";

  void attach(CLI::App* cmd) {
    cmd->add_option("--bins", fixed, "fixed bin count per continuous variable");
    cmd->add_option("--bins-rate", rate, "s in B = round(n^(1/s))")->capture_default_str();
    cmd->add_option("--bins-mode", mode, "quantile|equal-width")->capture_default_str();
  }
  BinsConfig resolve() const {
    BinsConfig cfg;
    if (fixed > 0) cfg.fixed_bins = fixed;
    cfg.rate_denominator = rate;
    cfg.mode = parse_bins_mode(mode);
    return cfg;
  }
  json to_json() const {
    json j = {{"bins_mode", mode}};
    if (fixed > 0)
      j["bins"] = fixed;
    else
      j["bins_rate"] = rate;
    return j;
  }
};

Dataset load_dataset(const std::string& path, const std::string& kinds) {
  std::optional<std::vector<VariableKind>> spec;
  if (!kinds.empty()) spec = parse_kind_spec(kinds);
  return load_csv(path, spec);
}

int cmd_simulate(const std::string& design, const std::string& noise, int n, int J,
                 double error, double tau, std::uint64_t seed, const std::string& out,
                 const std::string& truth_out) {
  SimOutput sim;
  if (design == "kasahara") {
    sim = generate(KasaharaDesign{n}, seed);
  } else if (design == "shift") {
    const Noise nz = parse_noise(noise);
    const double t = tau > 0.0 ? tau : tau_for_error(nz, error);
    sim = generate(ShiftDesign{n, J, nz, t}, seed);
  } else {
    throw CLI::ValidationError("--design", "expected shift|kasahara");
  }
  save_csv(sim.data, out);
  if (!truth_out.empty()) save_labels_csv(sim.truth.labels, truth_out);
  std::cout << "wrote " << sim.data.n() << " x " << sim.data.cols() << " dataset to " << out
            << "\n";
  return 0;
}

void print_selection_summary(const SelectionResult& res) {
  char buf[160];
  std::printf("%4s %10s %12s %12s %8s %s\n", "K", "nu", "loglik", "criterion", "iters",
              "omega");
  for (const auto& kf : res.per_k) {
    if (kf.failed) {
      std::printf("%4d  failed: %s\n", kf.K, kf.error.c_str());
      continue;
    }
    std::string omega = "{";
    for (std::size_t i = 0; i < kf.fit.params.omega.size(); ++i)
      omega += (i ? "," : "") + std::to_string(kf.fit.params.omega[i]);
    omega += "}";
    std::snprintf(buf, sizeof(buf), "%4d %10d %12.3f %12.3f %8d %s%s\n", kf.K, kf.fit.nu,
                  kf.fit.loglik, kf.fit.criterion, kf.fit.iterations, omega.c_str(),
                  (res.best_index == kf.K - 1) ? "  <- best" : "");
    std::fputs(buf, stdout);
  }
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_select(const std::string& data, const std::string& kinds, int kmax,
               const std::string& penalty, int restarts, std::uint64_t seed, bool fixed_omega,
               const BinsFlags& bins, const std::string& init, double tol, int max_iter,
               const std::string& out, const std::string& scheme_out,
               const std::string& partition_out, int jobs) {
  const Dataset ds = load_dataset(data, kinds);
  SelectionSettings s;
  s.kmax = kmax;
  s.rule = parse_penalty(penalty);
  s.bins = bins.resolve();
  s.restarts = restarts;
  s.seed = seed;
  s.init = parse_init(init);
  s.tol = tol;
  s.max_iter = max_iter;
  s.jobs = jobs;
  const SelectionResult res = fixed_omega ? select_k_only(ds, s) : select_full(ds, s);
  print_selection_summary(res);

  if (!out.empty()) {
    json doc = selection_to_json(res);
    doc["config"] = {{"command", "select"},  {"data", data},
                     {"kinds", kinds},       {"kmax", kmax},
                     {"penalty", penalty},   {"restarts", restarts},
                     {"seed", seed},         {"fixed_omega", fixed_omega},
                     {"init", init},          {"tol", tol},
                     {"max_iter", max_iter}};
    doc["config"].update(bins.to_json());
    write_json(doc, out);
  }
  if (!scheme_out.empty()) {
    json doc = scheme_to_json(res.scheme);
    doc["version"] = kVersion;
    write_json(doc, scheme_out);
  }
  if (!partition_out.empty())
    save_labels_csv(hard_partition(res.best().posterior), partition_out);
  return 0;
}

int cmd_fit(const std::string& data, const std::string& kinds, int k,
            const std::string& omega_str, const std::string& penalty, int restarts,
            std::uint64_t seed, const BinsFlags& bins, const std::string& init, double tol,
            int max_iter, const std::string& scheme_in, bool refine, int grid, int sweeps,
            const std::string& out, const std::string& partition_out,
            const std::string& densities_out, const std::string& scheme_out) {
  const Dataset ds = load_dataset(data, kinds);
  BinningScheme scheme;
  if (!scheme_in.empty()) {
    scheme = scheme_from_json(read_json(scheme_in));
  } else {
    const BinsConfig cfg = bins.resolve();
    scheme = build_scheme(ds, std::vector<int>(ds.cols(), cfg.resolve(ds.n())), cfg.mode);
  }
  const DiscretizedData dd = discretize(ds, scheme);
  const PenaltyRule rule = parse_penalty(penalty);

  std::optional<std::vector<int>> pinned;
  if (!omega_str.empty()) {
    pinned = parse_int_list(omega_str);
    for (int j : *pinned)
      if (j < 0 || j >= ds.cols()) throw CLI::ValidationError("--omega", "index out of range");
  }
  EmOptions em;
  em.init = parse_init(init);
  em.tol = tol;
  em.max_iter = max_iter;
  const KFit kfit = best_restart_fit(k, dd, rule.c_n(ds.n()), restarts, seed, pinned, 1, em);
  if (kfit.failed) throw std::runtime_error("fit failed: " + kfit.error);
  const FitResult& fit = kfit.fit;

  char buf[128];
  std::snprintf(buf, sizeof(buf), "K=%d nu=%d loglik=%.3f criterion=%.3f iters=%d%s\n",
                fit.params.K, fit.nu, fit.loglik, fit.criterion, fit.iterations,
                fit.converged ? "" : " (not converged)");
  std::fputs(buf, stdout);

  json densities = json::array();
  for (const auto& d : bin_densities(fit, scheme)) densities.push_back(bin_density_to_json(d));
  std::vector<int> labels = hard_partition(fit.posterior);

  json refine_meta;
  if (refine) {
    const RefineResult rr = kernel_refine(fit, ds, grid, sweeps);
    if (rr.aborted) {
      std::cerr << "warning: kernel refinement aborted (component lost all mass); "
                   "binned densities returned\n";
    } else {
      densities = json::array();
      for (const auto& d : rr.densities) densities.push_back(kernel_density_to_json(d));
      for (const auto& d : rr.categorical) densities.push_back(bin_density_to_json(d));
      labels = hard_partition(rr.posterior);
      refine_meta = {{"kernel", "gaussian"},
                     {"bandwidth_rule", "sd * n^(-1/5)"},
                     {"sweeps", rr.sweeps},
                     {"grid", grid}};
    }
  }

  json config = {{"command", "fit"}, {"data", data},         {"kinds", kinds},
                 {"k", k},           {"omega", omega_str},   {"penalty", penalty},
                 {"restarts", restarts}, {"seed", seed},     {"refine", refine}};
  config.update(bins.to_json());
  if (!out.empty()) {
    json doc = {{"version", kVersion},
                {"config", config},
                {"fit", fit_to_json(fit)},
                {"scheme", scheme_to_json(scheme)}};
    if (!refine_meta.is_null()) doc["refine"] = refine_meta;
    write_json(doc, out);
  }
  if (!densities_out.empty()) {
    write_json({{"version", kVersion}, {"config", config}, {"densities", densities}},
               densities_out);
  }
  if (!partition_out.empty()) save_labels_csv(labels, partition_out);
  if (!scheme_out.empty()) {
    json doc = scheme_to_json(scheme);
    doc["version"] = kVersion;  // extra keys; scheme loading reads mode/vars only
    write_json(doc, scheme_out);
  }
  return 0;
}

int cmd_evaluate(const std::string& partition, const std::string& truth,
                 const std::string& omega_str, const std::string& omega_true_str, int J,
                 const std::string& out) {
  const std::vector<int> a = load_labels_csv(partition);
  const std::vector<int> b = load_labels_csv(truth);
  const double score = ari(a, b);
  json doc = {{"version", kVersion},
              {"config", {{"command", "evaluate"}, {"partition", partition}, {"truth", truth}}},
              {"ari", score}};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "ARI = %.6f\n", score);
  std::fputs(buf, stdout);
  if (!omega_str.empty() && !omega_true_str.empty()) {
    const auto omega_hat = parse_int_list(omega_str);
    const auto omega_true = parse_int_list(omega_true_str);
    const double sen = sensitivity(omega_hat, omega_true);
    doc["sen"] = sen;
    std::snprintf(buf, sizeof(buf), "Sen = %.6f\n", sen);
    std::fputs(buf, stdout);
    if (J > static_cast<int>(omega_true.size())) {
      const double spe = specificity(omega_hat, omega_true, J);
      doc["spe"] = spe;
      std::snprintf(buf, sizeof(buf), "Spe = %.6f\n", spe);
      std::fputs(buf, stdout);
    }
  }
  if (!out.empty()) write_json(doc, out);
  return 0;
}

int cmd_bench(const std::string& design, const std::string& noise, int n, int J, double error,
              double tau, int replicates, std::uint64_t seed, int kmax,
              const std::string& penalty, int restarts, double tol, int max_iter,
              const std::string& mode, int fixed_k, const BinsFlags& bins,
              const std::string& out_dir, const std::string& report_out, int jobs) {
  BenchConfig c;
  c.design = design;
  if (design == "shift") c.noise = parse_noise(noise);
  c.n = n;
  c.J = J;
  c.error_target = error;
  if (tau > 0.0) c.tau = tau;
  c.replicates = replicates;
  c.seed = seed;
  c.kmax = kmax;
  c.rule = parse_penalty(penalty);
  c.bins = bins.resolve();
  c.restarts = restarts;
  c.tol = tol;
  c.max_iter = max_iter;
  if (mode == "full")
    c.mode = BenchMode::Full;
  else if (mode == "k-only")
    c.mode = BenchMode::KOnly;
  else if (mode == "fixed-k")
    c.mode = BenchMode::FixedK;
  else
    throw CLI::ValidationError("--mode", "expected full|k-only|fixed-k");
  c.fixed_k = fixed_k;
  c.out_dir = out_dir;
  c.jobs = jobs;

  const BenchReport report = run_bench(c);
  std::cout << report.text();
  if (!report_out.empty()) write_json(report.to_json(), report_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model selection for non-parametric mixtures via quantile binning"};
  app.set_version_flag("--version", binclust::kVersion);
  app.require_subcommand(1);

  // common option storage
  std::string design = "shift", noise = "gaussian", data, kinds, out, truth_out, penalty = "bic";
  std::string omega_str, omega_true_str, scheme_in, scheme_out, partition_out, densities_out;
  std::string mode = "full", out_dir, report_out, partition_file, truth_file;
  std::string init = "random-resp";
  int n = 500, J = 20, kmax = 4, restarts = 20, jobs = 0, k = 3, grid = 512, sweeps = 50;
  int eval_J = 0, replicates = 50, fixed_k = 3;
  double error = 0.05, tau = 0.0, tol = 1e-6;
  int max_iter = 500;
  std::uint64_t seed = 1;
  bool fixed_omega = false, refine = false;
  BinsFlags sim_bins, sel_bins, fit_bins, bench_bins;

  auto* sim = app.add_subcommand("simulate", "generate a benchmark design as CSV");
  sim->add_option("--design", design, "shift|kasahara")->capture_default_str();
  sim->add_option("--noise", noise, "gaussian|student|laplace")->capture_default_str();
  sim->add_option("--n", n, "sample size")->required();
  sim->add_option("--J", J, "variable count (shift design)")->capture_default_str();
  sim->add_option("--error", error, "target misclassification rate")->capture_default_str();
  sim->add_option("--tau", tau, "explicit shift size (overrides --error)");
  sim->add_option("--seed", seed, "RNG seed")->capture_default_str();
  sim->add_option("--out", out, "output data CSV")->required();
  sim->add_option("--truth", truth_out, "output truth-label CSV");

  auto* sel = app.add_subcommand("select", "full model search over K and omega");
  sel->add_option("--data", data, "input CSV")->required();
  sel->add_option("--kinds", kinds, "per-column kinds, e.g. c,c,k2");
  sel->add_option("--kmax", kmax, "largest component count")->capture_default_str();
  sel->add_option("--penalty", penalty, "bic|aic|c=<float>")->capture_default_str();
  sel->add_option("--restarts", restarts, "EM restarts per K")->capture_default_str();
  sel->add_option("--seed", seed, "master seed")->capture_default_str();
  sel->add_flag("--fixed-omega", fixed_omega, "pin omega to all variables");
  sel->add_option("--init", init, "random-resp|random-rows")->capture_default_str();
  sel->add_option("--tol", tol, "EM stop on |criterion change| below this")->capture_default_str();
  sel->add_option("--max-iter", max_iter, "EM iteration cap")->capture_default_str();
  sel_bins.attach(sel);
  sel->add_option("--out", out, "selection result JSON");
  sel->add_option("--save-scheme", scheme_out, "binning scheme JSON");
  sel->add_option("--partition-out", partition_out, "partition CSV for the best model");
  sel->add_option("--jobs", jobs, "worker threads (0 = auto)");

  auto* fit = app.add_subcommand("fit", "fit a fixed component count");
  fit->add_option("--data", data, "input CSV")->required();
  fit->add_option("--kinds", kinds, "per-column kinds");
  fit->add_option("--k", k, "component count")->required();
  fit->add_option("--omega", omega_str, "pin omega to these 0-based columns, e.g. 0,1,2");
  fit->add_option("--penalty", penalty, "bic|aic|c=<float>")->capture_default_str();
  fit->add_option("--restarts", restarts, "EM restarts")->capture_default_str();
  fit->add_option("--seed", seed, "master seed")->capture_default_str();
  fit->add_option("--init", init, "random-resp|random-rows")->capture_default_str();
  fit->add_option("--tol", tol, "EM stop on |criterion change| below this")->capture_default_str();
  fit->add_option("--max-iter", max_iter, "EM iteration cap")->capture_default_str();
  fit_bins.attach(fit);
  fit->add_option("--scheme", scheme_in, "reuse a saved binning scheme JSON");
  fit->add_flag("--refine,!--no-refine", refine, "kernel-smooth the selected model");
  fit->add_option("--grid", grid, "density grid size")->capture_default_str();
  fit->add_option("--sweeps", sweeps, "refinement sweeps")->capture_default_str();
  fit->add_option("--out", out, "fit JSON");
  fit->add_option("--partition-out", partition_out, "partition CSV");
  fit->add_option("--densities-out", densities_out, "densities JSON");
  fit->add_option("--save-scheme", scheme_out, "binning scheme JSON");

  auto* ev = app.add_subcommand("evaluate", "compare a partition against ground truth");
  ev->add_option("--partition", partition_file, "partition CSV")->required();
  ev->add_option("--truth", truth_file, "truth CSV")->required();
  ev->add_option("--omega", omega_str, "estimated relevant columns (0-based)");
  ev->add_option("--omega-true", omega_true_str, "true relevant columns (0-based)");
  ev->add_option("--J", eval_J, "total variable count (for specificity)");
  ev->add_option("--out", out, "evaluation JSON");

  auto* bench = app.add_subcommand("bench", "replicate study of a simulation design");
  bench->add_option("--design", design, "shift|kasahara")->capture_default_str();
  bench->add_option("--noise", noise, "gaussian|student|laplace")->capture_default_str();
  bench->add_option("--n", n, "sample size")->required();
  bench->add_option("--J", J, "variable count (shift design)")->capture_default_str();
  bench->add_option("--error", error, "target misclassification rate")->capture_default_str();
  bench->add_option("--tau", tau, "explicit shift size (overrides --error)");
  bench->add_option("--replicates", replicates, "replicate count")->capture_default_str();
  bench->add_option("--seed", seed, "master seed")->capture_default_str();
  bench->add_option("--kmax", kmax, "largest component count")->capture_default_str();
  bench->add_option("--penalty", penalty, "bic|aic|c=<float>")->capture_default_str();
  bench->add_option("--restarts", restarts, "EM restarts")->capture_default_str();
  bench->add_option("--tol", tol, "EM stop on |criterion change| below this")->capture_default_str();
  bench->add_option("--max-iter", max_iter, "EM iteration cap")->capture_default_str();
  bench->add_option("--mode", mode, "full|k-only|fixed-k")->capture_default_str();
  bench->add_option("--k", fixed_k, "component count for fixed-k mode")->capture_default_str();
  bench_bins.attach(bench);
  bench->add_option("--out-dir", out_dir, "cache directory (resumable)");
  bench->add_option("--report", report_out, "aggregate report JSON");
  bench->add_option("--jobs", jobs, "worker threads (0 = auto)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(design, noise, n, J, error, tau, seed, out, truth_out);
    if (sel->parsed())
      return cmd_select(data, kinds, kmax, penalty, restarts, seed, fixed_omega, sel_bins, init,
                        tol, max_iter, out, scheme_out, partition_out, jobs);
    if (fit->parsed())
      return cmd_fit(data, kinds, k, omega_str, penalty, restarts, seed, fit_bins, init, tol,
                     max_iter, scheme_in, refine, grid, sweeps, out, partition_out,
                     densities_out, scheme_out);
    if (ev->parsed())
      return cmd_evaluate(partition_file, truth_file, omega_str, omega_true_str, eval_J, out);
    if (bench->parsed())
      return cmd_bench(design, noise, n, J, error, tau, replicates, seed, kmax, penalty,
                       restarts, tol, max_iter, mode, fixed_k, bench_bins, out_dir, report_out,
                       jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
