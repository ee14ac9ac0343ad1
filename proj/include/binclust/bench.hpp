#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "binclust/json_io.hpp"
#include "binclust/metrics.hpp"
#include "binclust/parallel.hpp"
#include "binclust/postfit.hpp"
#include "binclust/selection.hpp"
#include "binclust/simulate.hpp"

namespace binclust {

enum class BenchMode { Full, KOnly, FixedK };

inline std::string bench_mode_name(BenchMode m) {
  switch (m) {
    case BenchMode::Full: return "full";
    case BenchMode::KOnly: return "k-only";
    default: return "fixed-k";
  }
}

struct BenchConfig {
  std::string design = "shift";  // shift | kasahara
  Noise noise = Noise::Gaussian;
  int n = 500;
  int J = 20;
  double error_target = 0.05;
  std::optional<double> tau;  // explicit value overrides error_target
  int replicates = 50;
  std::uint64_t seed = 1;
  int kmax = 4;
  PenaltyRule rule = PenaltyRule::bic();
  BinsConfig bins;
  int restarts = 20;
  double tol = 1e-6;
  int max_iter = 500;
  BenchMode mode = BenchMode::Full;
  int fixed_k = 3;

  // execution knobs, deliberately absent from serialized reports
  std::string out_dir;
  int jobs = 0;
};

/// Statistical part of the configuration only: two runs that differ in
/// out_dir or jobs must produce byte-identical reports.
inline json bench_config_to_json(const BenchConfig& c) {
  json j = {{"design", c.design},
            {"n", c.n},
            {"J", c.design == "kasahara" ? KasaharaDesign::J : c.J},
            {"replicates", c.replicates},
            {"seed", c.seed},
            {"mode", bench_mode_name(c.mode)},
            {"kmax", c.kmax},
            {"penalty", c.rule.name()},
            {"restarts", c.restarts},
            {"tol", c.tol},
            {"max_iter", c.max_iter},
            {"bins_mode", c.bins.mode == BinningMode::Quantile ? "quantile" : "equal-width"}};
  if (c.bins.fixed_bins)
    j["bins"] = *c.bins.fixed_bins;
  else
    j["bins_rate"] = c.bins.rate_denominator;
  if (c.design == "shift") {
    j["noise"] = noise_name(c.noise);
    if (c.tau)
      j["tau"] = *c.tau;
    else
      j["error_target"] = c.error_target;
  }
  if (c.mode == BenchMode::FixedK) j["k"] = c.fixed_k;
  return j;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

struct ReplicateRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  int k_hat = 0;
  std::vector<int> omega_hat;
  double criterion = 0.0;
  double ari_value = 0.0;
  std::optional<double> sen, spe;
};

inline json replicate_to_json(const ReplicateRecord& r) {
  json j = {{"replicate", r.index}, {"seed", r.seed}, {"failed", r.failed}};
  if (r.failed) {
    j["error"] = r.error;
    return j;
  }
  j["k_hat"] = r.k_hat;
  j["omega"] = r.omega_hat;
  j["criterion"] = r.criterion;
  j["ari"] = r.ari_value;
  if (r.sen) j["sen"] = *r.sen;
  if (r.spe) j["spe"] = *r.spe;
  return j;
}

inline ReplicateRecord replicate_from_json(const json& j) {
  ReplicateRecord r;
  r.index = j.at("replicate").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.failed = j.at("failed").get<bool>();
  if (r.failed) {
    r.error = j.value("error", "");
    return r;
  }
  r.k_hat = j.at("k_hat").get<int>();
  r.omega_hat = j.at("omega").get<std::vector<int>>();
  r.criterion = j.at("criterion").get<double>();
  r.ari_value = j.at("ari").get<double>();
  if (j.contains("sen")) r.sen = j.at("sen").get<double>();
  if (j.contains("spe")) r.spe = j.at("spe").get<double>();
  return r;
}

struct BenchReport {
  BenchConfig config;
  std::vector<ReplicateRecord> records;
  SelectionTable table;
  double mean_ari = 0.0;
  std::optional<double> mean_sen, mean_spe;
  int failures = 0;
  json to_json() const;
  std::string text() const;
};

namespace detail {

inline ReplicateRecord run_replicate(const BenchConfig& c, double tau, int index) {
  ReplicateRecord rec;
  rec.index = index;
  rec.seed = Rng(c.seed).child(static_cast<std::uint64_t>(index)).seed();
  try {
    SimOutput sim;
    if (c.design == "kasahara") {
      sim = generate(KasaharaDesign{c.n}, rec.seed);
    } else if (c.design == "shift") {
      sim = generate(ShiftDesign{c.n, c.J, c.noise, tau}, rec.seed);
    } else {
      throw std::invalid_argument("unknown design '" + c.design + "'");
    }

    const FitResult* best = nullptr;
    SelectionResult sel;
    KFit kfit;
    if (c.mode == BenchMode::FixedK) {
      const int B = c.bins.resolve(sim.data.n());
      const BinningScheme scheme =
          build_scheme(sim.data, std::vector<int>(sim.data.cols(), B), c.bins.mode);
      const DiscretizedData dd = discretize(sim.data, scheme);
      EmOptions base;
      base.tol = c.tol;
      base.max_iter = c.max_iter;
      kfit = best_restart_fit(c.fixed_k, dd, c.rule.c_n(sim.data.n()), c.restarts, rec.seed,
                              std::nullopt, 1, base);
      if (kfit.failed) throw std::runtime_error(kfit.error);
      rec.k_hat = c.fixed_k;
      best = &kfit.fit;
    } else {
      SelectionSettings s;
      s.kmax = c.kmax;
      s.rule = c.rule;
      s.bins = c.bins;
      s.restarts = c.restarts;
      s.seed = rec.seed;
      s.tol = c.tol;
      s.max_iter = c.max_iter;
      s.jobs = 1;  // parallelism lives at the replicate level
      sel = c.mode == BenchMode::KOnly ? select_k_only(sim.data, s) : select_full(sim.data, s);
      rec.k_hat = sel.per_k[sel.best_index].K;
      best = &sel.best();
    }

    rec.omega_hat = best->params.omega;
    rec.criterion = best->criterion;
    rec.ari_value = ari(hard_partition(best->posterior), sim.truth.labels);
    const int J = sim.data.cols();
    if (!sim.omega_true.empty()) rec.sen = sensitivity(rec.omega_hat, sim.omega_true);
    if (J > static_cast<int>(sim.omega_true.size()))
      rec.spe = specificity(rec.omega_hat, sim.omega_true, J);
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace detail

/// Generate replicates, run the configured selection mode on each, aggregate
/// selection frequencies and quality metrics. Replicates are distributed over
/// a worker pool; each one is cached as a JSON file so interrupted runs
/// resume, and the aggregation is order-independent.
inline BenchReport run_bench(const BenchConfig& c) {
  if (c.replicates < 1) throw std::invalid_argument("need at least one replicate");
  const double tau = c.design == "shift"
                         ? (c.tau ? *c.tau : tau_for_error(c.noise, c.error_target))
                         : 0.0;

  const std::string config_dump = bench_config_to_json(c).dump();
  const std::uint64_t hash = fnv1a64(config_dump);
  std::filesystem::path cache_dir;
  if (!c.out_dir.empty()) {
    char sub[32];
    std::snprintf(sub, sizeof(sub), "%016llx", static_cast<unsigned long long>(hash));
    cache_dir = std::filesystem::path(c.out_dir) / sub;
    std::filesystem::create_directories(cache_dir);
  }
  auto rep_path = [&](int i) {
    char name[32];
    std::snprintf(name, sizeof(name), "rep_%05d.json", i);
    return cache_dir / name;
  };

  BenchReport report;
  report.config = c;
  report.records.resize(c.replicates);
  parallel_for(c.replicates, resolve_jobs(c.jobs), [&](int i) {
    if (!cache_dir.empty() && std::filesystem::exists(rep_path(i))) {
      try {
        const json doc = read_json(rep_path(i).string());
        if (doc.at("config_hash").get<std::uint64_t>() == hash) {
          report.records[i] = replicate_from_json(doc.at("record"));
          return;
        }
      } catch (const std::exception&) {
        // unreadable cache entry: recompute
      }
    }
    report.records[i] = detail::run_replicate(c, tau, i);
    if (!cache_dir.empty()) {
      write_json({{"config_hash", hash}, {"record", replicate_to_json(report.records[i])}},
                 rep_path(i).string());
    }
  });

  std::vector<int> k_hats;
  double ari_sum = 0.0, sen_sum = 0.0, spe_sum = 0.0;
  int sen_count = 0, spe_count = 0;
  for (const auto& r : report.records) {
    if (r.failed) {
      ++report.failures;
      continue;
    }
    k_hats.push_back(r.k_hat);
    ari_sum += r.ari_value;
    if (r.sen) {
      sen_sum += *r.sen;
      ++sen_count;
    }
    if (r.spe) {
      spe_sum += *r.spe;
      ++spe_count;
    }
  }
  if (k_hats.empty()) throw std::runtime_error("every replicate failed");
  const int k_true = 3;  // both shipped designs have three components
  report.table = selection_table(k_hats, c.kmax, k_true);
  report.mean_ari = ari_sum / k_hats.size();
  if (sen_count > 0) report.mean_sen = sen_sum / sen_count;
  if (spe_count > 0) report.mean_spe = spe_sum / spe_count;

  if (!cache_dir.empty()) write_json(report.to_json(), (cache_dir / "report.json").string());
  return report;
}

inline json BenchReport::to_json() const {
  json reps = json::array();
  for (const auto& r : records) reps.push_back(replicate_to_json(r));
  json j = {{"version", kVersion},
            {"config", bench_config_to_json(config)},
            {"failures", failures},
            {"selection", {{"prob", table.prob},
                           {"truth_rate", table.truth_rate},
                           {"over_rate", table.over_rate}}},
            {"mean_ari", mean_ari}};
  if (mean_sen) j["mean_sen"] = *mean_sen;
  if (mean_spe) j["mean_spe"] = *mean_spe;
  j["replicates"] = reps;
  return j;
}

inline std::string BenchReport::text() const {
  std::ostringstream os;
  char buf[64];
  os << "design=" << config.design;
  if (config.design == "shift") os << " noise=" << noise_name(config.noise);
  os << " n=" << config.n << " mode=" << bench_mode_name(config.mode)
     << " penalty=" << config.rule.name() << " replicates=" << records.size() << "\n";
  if (config.mode != BenchMode::FixedK) {
    for (std::size_t k = 0; k < table.prob.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "  P(K=%zu) = %.3f\n", k + 1, table.prob[k]);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), "  Tr. = %.3f  Ov. = %.3f\n", table.truth_rate,
                  table.over_rate);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "  mean ARI = %.3f\n", mean_ari);
  os << buf;
  if (mean_sen) {
    std::snprintf(buf, sizeof(buf), "  mean Sen = %.3f\n", *mean_sen);
    os << buf;
  }
  if (mean_spe) {
    std::snprintf(buf, sizeof(buf), "  mean Spe = %.3f\n", *mean_spe);
    os << buf;
  }
  if (failures > 0) os << "  failed replicates: " << failures << "\n";
  return os.str();
}

}  // namespace binclust
