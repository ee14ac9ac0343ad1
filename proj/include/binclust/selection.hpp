#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "binclust/binning.hpp"
#include "binclust/lcm.hpp"
#include "binclust/parallel.hpp"
#include "binclust/rng.hpp"

namespace binclust {

/// Penalty unit c_n: BIC uses ln(n)/2, AIC uses 1. Custom admits c_n = 0 as a
/// no-penalty sanity mode.
struct PenaltyRule {
  enum class Kind { Bic, Aic, Custom };
  Kind kind = Kind::Bic;
  double custom_cn = 0.0;

  static PenaltyRule bic() { return {Kind::Bic, 0.0}; }
  static PenaltyRule aic() { return {Kind::Aic, 0.0}; }
  static PenaltyRule custom(double cn) {
    if (cn < 0.0) throw std::invalid_argument("penalty unit must be >= 0");
    return {Kind::Custom, cn};
  }

  double c_n(int n) const {
    switch (kind) {
      case Kind::Bic: return 0.5 * std::log(static_cast<double>(n));
      case Kind::Aic: return 1.0;
      default: return custom_cn;
    }
  }

  std::string name() const {
    switch (kind) {
      case Kind::Bic: return "bic";
      case Kind::Aic: return "aic";
      default: return "c=" + std::to_string(custom_cn);
    }
  }
};

/// a = nu * c_n for model (K, omega) on the given scheme.
inline double penalty_value(const PenaltyRule& rule, int n, int K,
                            const std::vector<int>& omega, const BinningScheme& scheme) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  std::vector<int> sorted_omega = omega;
  std::sort(sorted_omega.begin(), sorted_omega.end());
  return model_complexity(K, sorted_omega, scheme) * rule.c_n(n);
}

struct BinsConfig {
  std::optional<int> fixed_bins;  // overrides the rate rule
  int rate_denominator = 6;       // B = round(n^(1/s))
  BinningMode mode = BinningMode::Quantile;

  int resolve(int n) const {
    return fixed_bins ? *fixed_bins : default_bin_count(n, rate_denominator);
  }
};

struct SelectionSettings {
  int kmax = 1;
  PenaltyRule rule;
  BinsConfig bins;
  int restarts = 20;
  std::uint64_t seed = 0;
  bool fixed_omega = false;  // omega pinned to all variables
  EmInit init = EmInit::RandomResponsibilities;
  double tol = 1e-6;
  int max_iter = 500;
  int jobs = 1;

  EmOptions em_options() const {
    EmOptions opt;
    opt.init = init;
    opt.tol = tol;
    opt.max_iter = max_iter;
    return opt;
  }
};

struct KFit {
  int K = 1;
  bool failed = false;
  std::string error;
  FitResult fit;
};

struct SelectionResult {
  std::vector<KFit> per_k;   // index k-1 holds the best restart for K = k
  int best_index = -1;       // into per_k
  BinningScheme scheme;
  SelectionSettings settings;
  std::vector<std::string> warnings;

  const FitResult& best() const {
    if (best_index < 0) throw std::logic_error("no successful fit");
    return per_k[best_index].fit;
  }
};

namespace detail {

// restart tie-break: strictly larger W wins, equal W prefers the smaller omega
inline bool fit_improves(const FitResult& cand, const FitResult& best) {
  if (cand.criterion != best.criterion) return cand.criterion > best.criterion;
  return cand.params.omega < best.params.omega;
}

}  // namespace detail

/// Best-of-R seeded EM restarts for one component count. Restart r always
/// receives stream child(child(seed, K), r), so enlarging R keeps the earlier
/// seeds and the best W can only improve.
inline KFit best_restart_fit(int K, const DiscretizedData& dd, double c_n, int restarts,
                             std::uint64_t seed,
                             const std::optional<std::vector<int>>& pinned_omega,
                             int jobs = 1, const EmOptions& base = {}) {
  if (K == 1) restarts = 1;  // K = 1 is deterministic
  const Rng k_stream = Rng(seed).child(static_cast<std::uint64_t>(K));

  std::vector<std::optional<FitResult>> fits(restarts);
  parallel_for(restarts, jobs, [&](int r) {
    EmOptions opt = base;
    opt.seed = k_stream.child(static_cast<std::uint64_t>(r)).seed();
    opt.pinned_omega = pinned_omega;
    try {
      fits[r] = penalized_em(K, dd, c_n, opt);
    } catch (const DegenerateComponent&) {
    }
  });

  KFit out;
  out.K = K;
  bool any = false;
  for (int r = 0; r < restarts; ++r) {
    if (!fits[r]) continue;
    if (!any || detail::fit_improves(*fits[r], out.fit)) out.fit = std::move(*fits[r]);
    any = true;
  }
  if (!any) {
    out.failed = true;
    out.error = "all restarts degenerate";
  }
  return out;
}

namespace detail {

inline SelectionResult select_impl(const Dataset& ds, SelectionSettings s, bool pin_all) {
  if (s.kmax < 1) throw std::invalid_argument("kmax must be >= 1");
  if (s.kmax >= 2 && ds.cols() < 3)
    throw std::invalid_argument("selection with kmax >= 2 needs at least three variables");
  if (s.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  ds.validate();

  SelectionResult res;
  s.fixed_omega = pin_all;
  res.settings = s;
  res.scheme = build_scheme(ds, std::vector<int>(ds.cols(), s.bins.resolve(ds.n())), s.bins.mode);
  for (int j = 0; j < res.scheme.cols(); ++j) {
    const auto& vb = res.scheme.vars[j];
    if (vb.merged && vb.bins < 2)
      res.warnings.push_back("column " + ds.names[j] +
                             ": ties merged the quantile bins down to " +
                             std::to_string(vb.bins));
  }
  const DiscretizedData dd = discretize(ds, res.scheme);
  const double c_n = s.rule.c_n(ds.n());

  std::optional<std::vector<int>> pinned;
  if (pin_all) {
    std::vector<int> all(ds.cols());
    std::iota(all.begin(), all.end(), 0);
    pinned = std::move(all);
  }

  // the (K, restart) grid is embarrassingly parallel; flatten it so small
  // kmax still saturates the workers
  const int jobs = resolve_jobs(s.jobs);
  res.per_k.resize(s.kmax);
  if (jobs > 1 && s.kmax > 1) {
    struct Task {
      int K;
      int restart;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<std::optional<FitResult>>> grid(s.kmax + 1);
    for (int K = 1; K <= s.kmax; ++K) {
      const int restarts = K == 1 ? 1 : s.restarts;
      grid[K].resize(restarts);
      for (int r = 0; r < restarts; ++r) tasks.push_back({K, r});
    }
    const Rng master(s.seed);
    parallel_for(static_cast<int>(tasks.size()), jobs, [&](int ti) {
      const auto [K, r] = tasks[ti];
      EmOptions opt = s.em_options();
      opt.seed = master.child(K).child(r).seed();
      opt.pinned_omega = pinned;
      try {
        grid[K][r] = penalized_em(K, dd, c_n, opt);
      } catch (const DegenerateComponent&) {
      }
    });
    for (int K = 1; K <= s.kmax; ++K) {
      KFit kf;
      kf.K = K;
      bool any = false;
      for (auto& f : grid[K]) {
        if (!f) continue;
        if (!any || fit_improves(*f, kf.fit)) kf.fit = std::move(*f);
        any = true;
      }
      kf.failed = !any;
      if (!any) kf.error = "all restarts degenerate";
      res.per_k[K - 1] = std::move(kf);
    }
  } else {
    for (int K = 1; K <= s.kmax; ++K)
      res.per_k[K - 1] =
          best_restart_fit(K, dd, c_n, s.restarts, s.seed, pinned, 1, s.em_options());
  }

  for (int K = 1; K <= s.kmax; ++K) {
    const KFit& kf = res.per_k[K - 1];
    if (kf.failed) {
      res.warnings.push_back("K=" + std::to_string(K) + " excluded: " + kf.error);
      continue;
    }
    // ascending K, strict improvement required: W ties resolve to smaller K
    if (res.best_index < 0) {
      res.best_index = K - 1;
    } else {
      const FitResult& best = res.per_k[res.best_index].fit;
      if (kf.fit.criterion > best.criterion) res.best_index = K - 1;
    }
  }
  if (res.best_index < 0) throw std::runtime_error("every component count failed to fit");
  return res;
}

}  // namespace detail

/// Full model search: one shared binning scheme, K = 1..kmax with
/// omega-selecting EM restarts, argmax of W with ties toward smaller K.
inline SelectionResult select_full(const Dataset& ds, const SelectionSettings& s) {
  return detail::select_impl(ds, s, false);
}

/// Same search with omega pinned to all variables (pure component-count
/// selection).
inline SelectionResult select_k_only(const Dataset& ds, const SelectionSettings& s) {
  return detail::select_impl(ds, s, true);
}

}  // namespace binclust
