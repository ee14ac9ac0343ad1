#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "binclust/binning.hpp"
#include "binclust/rng.hpp"

namespace binclust {

/// A component lost all posterior mass; the caller treats the restart as failed.
struct DegenerateComponent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Latent-class mixture parameters over discretized data: mixing proportions
/// pi and per-variable bin probabilities alpha (K rows of length B_j, stored
/// k*B_j+b). Variables outside omega carry K identical rows. All simplex
/// entries are kept at or above the floor epsilon.
struct LcmParams {
  int K = 1;
  std::vector<double> pi;
  std::vector<std::vector<double>> alpha;
  std::vector<int> omega;  // sorted relevant variable indices
  double epsilon = 1e-6;

  double alpha_at(int j, int k, int b) const {
    return alpha[j][static_cast<std::size_t>(k) * binsize(j) + b];
  }
  int binsize(int j) const { return static_cast<int>(alpha[j].size()) / K; }
  bool is_relevant(int j) const {
    return std::binary_search(omega.begin(), omega.end(), j);
  }
};

struct Posterior {
  int n = 0;
  int K = 1;
  std::vector<double> t;  // row-major n x K

  double at(int i, int k) const { return t[static_cast<std::size_t>(i) * K + k]; }
};

struct FitResult {
  LcmParams params;
  double loglik = 0.0;    // maximized T, width factors included
  double penalty = 0.0;   // a = nu * c_n
  double criterion = 0.0; // W = loglik - penalty
  int nu = 0;
  double c_n = 0.0;
  Posterior posterior;
  int iterations = 0;
  bool converged = false;
  std::uint64_t restart_seed = 0;
};

/// Free-parameter count (K-1) + sum_{j in omega} K(B_j-1) + sum_{j notin omega} (B_j-1).
inline int model_complexity(int K, const std::vector<int>& omega,
                            const BinningScheme& scheme) {
  int nu = K - 1;
  std::size_t oi = 0;
  for (int j = 0; j < scheme.cols(); ++j) {
    const int bm1 = scheme.vars[j].bins - 1;
    const bool rel = oi < omega.size() && omega[oi] == j;
    if (rel) ++oi;
    nu += rel ? K * bm1 : bm1;
  }
  return nu;
}

/// Floor used for all simplexes: small enough to never bind on healthy fits,
/// positive so held-out bins keep finite log-densities.
inline double default_epsilon(int n, int max_bins) {
  return std::min(1e-6, 1.0 / (static_cast<double>(n) * std::max(1, max_bins)));
}

namespace detail {

// Clamp entries of a probability vector up to eps and rescale the rest so the
// sum stays 1; repeats until no entry sits below eps.
inline void floor_simplex(double* v, int m, double eps) {
  if (m <= 1) {
    if (m == 1) v[0] = 1.0;
    return;
  }
  if (eps * m >= 1.0) {
    std::fill(v, v + m, 1.0 / m);
    return;
  }
  for (int pass = 0; pass < m; ++pass) {
    double low_mass = 0.0, free_mass = 0.0;
    int nlow = 0;
    for (int i = 0; i < m; ++i) {
      if (v[i] < eps) {
        ++nlow;
        low_mass += eps;
      } else {
        free_mass += v[i];
      }
    }
    if (nlow == 0) break;
    const double scale = (1.0 - low_mass) / free_mass;
    bool rescaled_below = false;
    for (int i = 0; i < m; ++i) {
      if (v[i] < eps) {
        v[i] = eps;
      } else {
        v[i] *= scale;
        if (v[i] < eps) rescaled_below = true;
      }
    }
    if (!rescaled_below) break;
  }
  double s = std::accumulate(v, v + m, 0.0);
  for (int i = 0; i < m; ++i) v[i] /= s;
}

// Data-derived tables shared by every EM iteration: bin indices, empirical
// bin frequencies and the (model-independent) width constant of the
// log-likelihood. Zero-width point-mass bins contribute no width term.
struct LcmCache {
  int n = 0;
  int J = 0;
  std::vector<int> B;
  const std::uint32_t* idx = nullptr;
  std::vector<std::vector<double>> counts;  // n_jb
  std::vector<std::vector<double>> bar;     // counts / n
  double width_const = 0.0;                 // -sum_{i,j} ln l_{j, b_ij}

  static LcmCache build(const DiscretizedData& dd) {
    LcmCache c;
    c.n = dd.n;
    c.J = dd.J;
    c.idx = dd.idx.data();
    c.B.resize(dd.J);
    c.counts.resize(dd.J);
    for (int j = 0; j < dd.J; ++j) {
      c.B[j] = dd.scheme.vars[j].bins;
      c.counts[j].assign(c.B[j], 0.0);
    }
    for (int i = 0; i < dd.n; ++i)
      for (int j = 0; j < dd.J; ++j) c.counts[j][dd.at(i, j)] += 1.0;
    c.bar = c.counts;
    for (int j = 0; j < dd.J; ++j)
      for (double& v : c.bar[j]) v /= dd.n;
    for (int j = 0; j < dd.J; ++j) {
      const auto& widths = dd.scheme.vars[j].widths;
      for (int b = 0; b < c.B[j]; ++b)
        if (widths[b] > 0.0) c.width_const -= c.counts[j][b] * std::log(widths[b]);
    }
    return c;
  }
};

// ln alpha tables transposed to b*K+k for contiguous access in the row loops
inline std::vector<std::vector<double>> log_alpha_tables(const LcmParams& p) {
  std::vector<std::vector<double>> la(p.alpha.size());
  for (std::size_t j = 0; j < p.alpha.size(); ++j) {
    const int B = p.binsize(static_cast<int>(j));
    la[j].resize(p.alpha[j].size());
    for (int k = 0; k < p.K; ++k)
      for (int b = 0; b < B; ++b)
        la[j][static_cast<std::size_t>(b) * p.K + k] =
            std::log(p.alpha[j][static_cast<std::size_t>(k) * B + b]);
  }
  return la;
}

// One E-step. Also returns the width-free log-likelihood of `p` (the widths
// are a model-independent constant added only when reporting), so the EM loop
// gets the objective of the previous M-step for free.
inline double e_step_impl(const LcmParams& p, const LcmCache& c, Posterior& out) {
  const int n = c.n, J = c.J, K = p.K;
  out.n = n;
  out.K = K;
  out.t.resize(static_cast<std::size_t>(n) * K);

  const auto la = log_alpha_tables(p);
  std::vector<double> logpi(K);
  for (int k = 0; k < K; ++k) logpi[k] = std::log(p.pi[k]);

  std::vector<char> rel(J, 0);
  for (int j : p.omega) rel[j] = 1;

  double loglik_shape = 0.0;
  std::vector<double> acc(K);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t* row = c.idx + static_cast<std::size_t>(i) * J;
    for (int k = 0; k < K; ++k) acc[k] = logpi[k];
    double indep = 0.0;
    for (int j = 0; j < J; ++j) {
      const double* lj = la[j].data() + static_cast<std::size_t>(row[j]) * K;
      if (rel[j]) {
        for (int k = 0; k < K; ++k) acc[k] += lj[k];
      } else {
        indep += lj[0];
      }
    }
    double mx = acc[0];
    for (int k = 1; k < K; ++k) mx = std::max(mx, acc[k]);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      acc[k] = std::exp(acc[k] - mx);
      sum += acc[k];
    }
    const double lse = mx + std::log(sum);
    double* ti = out.t.data() + static_cast<std::size_t>(i) * K;
    for (int k = 0; k < K; ++k) ti[k] = acc[k] / sum;
    loglik_shape += indep + lse;
  }
  return loglik_shape;
}

struct MStepPolicy {
  double c_n = 0.0;
  bool select = true;            // compute Delta_j and pick omega
  bool force_min_three = true;   // pad omega to three variables when K >= 2
  std::vector<int> pinned_omega; // used when !select
};

struct MStepResult {
  LcmParams params;
  std::vector<double> delta;  // per-variable Delta_j (empty when pinned)
};

inline MStepResult m_step_impl(const Posterior& post, const LcmCache& c,
                               const MStepPolicy& pol, double epsilon) {
  const int n = c.n, J = c.J, K = post.K;

  std::vector<double> nk(K, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* ti = post.t.data() + static_cast<std::size_t>(i) * K;
    for (int k = 0; k < K; ++k) nk[k] += ti[k];
  }
  for (int k = 0; k < K; ++k)
    if (!(nk[k] >= K * std::numeric_limits<double>::epsilon()))
      throw DegenerateComponent("component " + std::to_string(k) + " lost all mass");

  // weighted bin totals w_jbk = sum_i t_ik sigma_jb(x_ij)
  std::vector<std::vector<double>> w(J);
  for (int j = 0; j < J; ++j) w[j].assign(static_cast<std::size_t>(c.B[j]) * K, 0.0);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t* row = c.idx + static_cast<std::size_t>(i) * J;
    const double* ti = post.t.data() + static_cast<std::size_t>(i) * K;
    for (int j = 0; j < J; ++j) {
      double* wj = w[j].data() + static_cast<std::size_t>(row[j]) * K;
      for (int k = 0; k < K; ++k) wj[k] += ti[k];
    }
  }

  MStepResult res;
  LcmParams& p = res.params;
  p.K = K;
  p.epsilon = epsilon;
  p.pi.resize(K);
  for (int k = 0; k < K; ++k) p.pi[k] = nk[k] / n;

  if (pol.select) {
    // Delta_j: gain in expected penalized complete-data log-likelihood from
    // declaring j relevant, with the 0*ln(0) = 0 convention
    res.delta.assign(J, 0.0);
    for (int j = 0; j < J; ++j) {
      double gain = 0.0;
      for (int b = 0; b < c.B[j]; ++b) {
        const double barv = c.bar[j][b];
        const double* wj = w[j].data() + static_cast<std::size_t>(b) * K;
        for (int k = 0; k < K; ++k) {
          if (wj[k] > 0.0) gain += wj[k] * std::log(wj[k] / (nk[k] * barv));
        }
      }
      res.delta[j] = gain - (K - 1) * (c.B[j] - 1) * pol.c_n;
    }
    if (K == 1) {
      p.omega.clear();  // independence model
    } else {
      for (int j = 0; j < J; ++j)
        if (res.delta[j] > 0.0) p.omega.push_back(j);
      if (static_cast<int>(p.omega.size()) < 3 && pol.force_min_three) {
        if (J < 3)
          throw std::invalid_argument("variable selection with K >= 2 needs J >= 3");
        std::vector<int> order(J);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return res.delta[a] > res.delta[b]; });
        p.omega.assign(order.begin(), order.begin() + 3);
        std::sort(p.omega.begin(), p.omega.end());
      }
    }
  } else {
    p.omega = pol.pinned_omega;
  }

  std::vector<char> rel(J, 0);
  for (int j : p.omega) rel[j] = 1;
  p.alpha.resize(J);
  for (int j = 0; j < J; ++j) {
    const int B = c.B[j];
    p.alpha[j].resize(static_cast<std::size_t>(K) * B);
    for (int k = 0; k < K; ++k) {
      double* row = p.alpha[j].data() + static_cast<std::size_t>(k) * B;
      if (rel[j]) {
        for (int b = 0; b < B; ++b) row[b] = w[j][static_cast<std::size_t>(b) * K + k] / nk[k];
      } else {
        std::copy(c.bar[j].begin(), c.bar[j].end(), row);
      }
      floor_simplex(row, B, epsilon);
    }
  }
  floor_simplex(p.pi.data(), K, epsilon);
  return res;
}

}  // namespace detail

/// ln f(x_i) under the discretized mixture: independence terms for the
/// irrelevant variables plus a log-sum-exp mixture over the relevant ones.
/// Width divisors are applied wherever the bin has positive width.
inline double log_density(const LcmParams& p, const BinningScheme& scheme,
                          const std::vector<std::uint32_t>& row) {
  const int J = scheme.cols();
  if (static_cast<int>(row.size()) != J)
    throw std::invalid_argument("row length does not match scheme");
  double indep = 0.0, widths = 0.0;
  std::vector<double> acc(p.K);
  for (int k = 0; k < p.K; ++k) acc[k] = std::log(p.pi[k]);
  for (int j = 0; j < J; ++j) {
    const int b = static_cast<int>(row[j]);
    const double l = scheme.vars[j].widths[b];
    if (l > 0.0) widths -= std::log(l);
    if (p.is_relevant(j)) {
      for (int k = 0; k < p.K; ++k) acc[k] += std::log(p.alpha_at(j, k, b));
    } else {
      indep += std::log(p.alpha_at(j, 0, b));
    }
  }
  double mx = *std::max_element(acc.begin(), acc.end());
  double sum = 0.0;
  for (double a : acc) sum += std::exp(a - mx);
  return indep + widths + mx + std::log(sum);
}

inline double loglik(const LcmParams& p, const BinningScheme& scheme,
                     const DiscretizedData& dd) {
  double total = 0.0;
  std::vector<std::uint32_t> row(dd.J);
  for (int i = 0; i < dd.n; ++i) {
    for (int j = 0; j < dd.J; ++j) row[j] = dd.at(i, j);
    total += log_density(p, scheme, row);
  }
  return total;
}

/// Responsibilities t_ik from the current parameters; bin widths cancel and
/// are omitted.
inline Posterior e_step(const LcmParams& p, const DiscretizedData& dd) {
  auto cache = detail::LcmCache::build(dd);
  Posterior post;
  detail::e_step_impl(p, cache, post);
  return post;
}

struct MStepOptions {
  double c_n = 0.0;
  bool force_min_three = true;
  std::optional<std::vector<int>> pinned_omega;
  double epsilon = 1e-6;
};

struct MStepOutput {
  std::vector<int> omega;
  LcmParams params;
  std::vector<double> delta;
};

/// Joint maximization of the expected penalized complete-data log-likelihood
/// over (theta, omega): closed-form multinomial updates plus the per-variable
/// Delta_j test, padding omega up to three variables when K >= 2 and fewer
/// than three gains are positive.
inline MStepOutput m_step(const Posterior& post, const DiscretizedData& dd,
                          const MStepOptions& opt) {
  auto cache = detail::LcmCache::build(dd);
  detail::MStepPolicy pol;
  pol.c_n = opt.c_n;
  pol.force_min_three = opt.force_min_three;
  if (opt.pinned_omega) {
    pol.select = false;
    pol.pinned_omega = *opt.pinned_omega;
    std::sort(pol.pinned_omega.begin(), pol.pinned_omega.end());
  }
  auto r = detail::m_step_impl(post, cache, pol, opt.epsilon);
  return {r.params.omega, std::move(r.params), std::move(r.delta)};
}

enum class EmInit { RandomResponsibilities, RandomRows };

struct EmOptions {
  std::uint64_t seed = 0;
  int max_iter = 500;
  double tol = 1e-6;
  EmInit init = EmInit::RandomResponsibilities;
  bool force_min_three = true;
  std::optional<std::vector<int>> pinned_omega;  // fixes omega, disables selection
  std::optional<double> epsilon;                 // default: min(1e-6, 1/(n*B))
  std::vector<double>* w_trace = nullptr;        // per-iteration penalized objective
  bool validate = false;                         // assert simplex invariants per iteration
};

/// Penalized EM for a fixed component count: alternates the E-step with the
/// omega-selecting M-step until the criterion W = T - nu*c_n moves by less
/// than tol. Deterministic given the seed.
inline FitResult penalized_em(int K, const DiscretizedData& dd, double c_n,
                              const EmOptions& opt = {}) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (dd.n < 1) throw std::invalid_argument("empty data");
  const bool selecting = !opt.pinned_omega.has_value();
  if (selecting && K >= 2 && dd.J < 3 && opt.force_min_three)
    throw std::invalid_argument("variable selection with K >= 2 needs J >= 3");

  auto cache = detail::LcmCache::build(dd);
  const double eps = opt.epsilon ? *opt.epsilon : default_epsilon(dd.n, dd.scheme.max_bins());

  detail::MStepPolicy pol;
  pol.c_n = c_n;
  pol.select = selecting;
  pol.force_min_three = opt.force_min_three;
  if (!selecting) {
    pol.pinned_omega = *opt.pinned_omega;
    std::sort(pol.pinned_omega.begin(), pol.pinned_omega.end());
  }

  Rng rng(opt.seed);
  Posterior post;
  post.n = dd.n;
  post.K = K;
  post.t.resize(static_cast<std::size_t>(dd.n) * K);

  LcmParams params;
  if (opt.init == EmInit::RandomResponsibilities) {
    for (int i = 0; i < dd.n; ++i)
      rng.dirichlet1(K, post.t.data() + static_cast<std::size_t>(i) * K);
    // seed the parameters with a full M-step over all variables
    detail::MStepPolicy init_pol = pol;
    init_pol.select = false;
    if (selecting) {
      init_pol.pinned_omega.resize(dd.J);
      std::iota(init_pol.pinned_omega.begin(), init_pol.pinned_omega.end(), 0);
    }
    params = detail::m_step_impl(post, cache, init_pol, eps).params;
  } else {
    // seed each component from a random row: empirical frequencies blended
    // with a one-hot bump at the row's bin pattern
    params.K = K;
    params.epsilon = eps;
    params.pi.assign(K, 1.0 / K);
    if (selecting) {
      params.omega.resize(dd.J);
      std::iota(params.omega.begin(), params.omega.end(), 0);
    } else {
      params.omega = pol.pinned_omega;
    }
    params.alpha.resize(dd.J);
    std::vector<int> seed_rows(K);
    for (int k = 0; k < K; ++k) seed_rows[k] = rng.next_index(dd.n);
    for (int j = 0; j < dd.J; ++j) {
      const int B = cache.B[j];
      params.alpha[j].resize(static_cast<std::size_t>(K) * B);
      for (int k = 0; k < K; ++k) {
        double* row = params.alpha[j].data() + static_cast<std::size_t>(k) * B;
        for (int b = 0; b < B; ++b) row[b] = 0.75 * cache.bar[j][b];
        row[dd.at(seed_rows[k], j)] += 0.25;
        detail::floor_simplex(row, B, eps);
      }
    }
  }

  const auto check = [&](const LcmParams& p, const Posterior& t) {
    if (!opt.validate) return;
    for (int i = 0; i < t.n; ++i) {
      double s = 0.0;
      for (int k = 0; k < t.K; ++k) s += t.at(i, k);
      if (std::abs(s - 1.0) > 1e-12) throw std::logic_error("posterior row not normalized");
    }
    double s = std::accumulate(p.pi.begin(), p.pi.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-12) throw std::logic_error("pi not normalized");
    for (double v : p.pi)
      if (v < p.epsilon * (1.0 - 1e-9)) throw std::logic_error("pi below epsilon");
    for (int j = 0; j < static_cast<int>(p.alpha.size()); ++j) {
      const int B = p.binsize(j);
      for (int k = 0; k < p.K; ++k) {
        double rs = 0.0;
        for (int b = 0; b < B; ++b) {
          const double v = p.alpha_at(j, k, b);
          if (v < p.epsilon * (1.0 - 1e-9)) throw std::logic_error("alpha below epsilon");
          rs += v;
        }
        if (std::abs(rs - 1.0) > 1e-12) throw std::logic_error("alpha row not normalized");
      }
    }
  };

  double prev_w = -std::numeric_limits<double>::infinity();
  double w_shape = 0.0;
  int iterations = 0;
  bool converged = false;
  for (int r = 0; r < opt.max_iter + 1; ++r) {
    const double t_shape = detail::e_step_impl(params, cache, post);
    check(params, post);
    w_shape = t_shape - model_complexity(K, params.omega, dd.scheme) * c_n;
    if (opt.w_trace) opt.w_trace->push_back(w_shape + cache.width_const);
    if (std::abs(w_shape - prev_w) < opt.tol) {
      converged = true;
      break;
    }
    prev_w = w_shape;
    if (r == opt.max_iter) break;  // posterior/objective already refreshed
    params = detail::m_step_impl(post, cache, pol, eps).params;
    ++iterations;
  }

  FitResult fit;
  fit.params = std::move(params);
  fit.nu = model_complexity(K, fit.params.omega, dd.scheme);
  fit.c_n = c_n;
  fit.loglik = w_shape + fit.nu * c_n + cache.width_const;
  fit.penalty = fit.nu * c_n;
  fit.criterion = fit.loglik - fit.penalty;
  fit.posterior = std::move(post);
  fit.iterations = iterations;
  fit.converged = converged;
  fit.restart_seed = opt.seed;
  return fit;
}

}  // namespace binclust
