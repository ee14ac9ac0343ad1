#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "binclust/data.hpp"
#include "binclust/lcm.hpp"

namespace binclust {

/// MAP component per row, ties to the smallest index.
inline std::vector<int> hard_partition(const Posterior& post) {
  std::vector<int> labels(post.n);
  for (int i = 0; i < post.n; ++i) {
    int best = 0;
    double best_v = post.at(i, 0);
    for (int k = 1; k < post.K; ++k) {
      if (post.at(i, k) > best_v) {
        best_v = post.at(i, k);
        best = k;
      }
    }
    labels[i] = best;
  }
  return labels;
}

/// Piecewise-constant density alpha/width per (component, variable) bin.
/// Categorical variables report the probability vector itself; zero-width
/// point-mass bins likewise report the mass.
struct BinDensity {
  int variable = 0;
  int component = 0;
  bool categorical = false;
  std::vector<double> lo, hi;      // bin edges (level index twice for categorical)
  std::vector<double> mass;        // alpha
  std::vector<double> density;    // alpha/width, or mass where width is not positive
};

inline std::vector<BinDensity> bin_densities(const FitResult& fit, const BinningScheme& scheme) {
  std::vector<BinDensity> out;
  const LcmParams& p = fit.params;
  for (int j = 0; j < scheme.cols(); ++j) {
    const VariableBinning& vb = scheme.vars[j];
    for (int k = 0; k < p.K; ++k) {
      BinDensity d;
      d.variable = j;
      d.component = k;
      d.categorical = vb.categorical;
      double lo = vb.support_min;
      for (int b = 0; b < vb.bins; ++b) {
        const double hi = vb.categorical ? static_cast<double>(b)
                          : (b + 1 < vb.bins ? vb.breakpoints[b] : vb.support_max);
        d.lo.push_back(vb.categorical ? static_cast<double>(b) : lo);
        d.hi.push_back(hi);
        const double mass = p.alpha_at(j, k, b);
        d.mass.push_back(mass);
        const double w = vb.widths[b];
        d.density.push_back(w > 0.0 ? mass / w : mass);
        lo = hi;
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

/// Weighted Gaussian KDE tabulated on a uniform grid.
struct KernelDensity {
  int variable = 0;
  int component = 0;  // -1: shared across components (irrelevant variable)
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
};

struct RefineResult {
  std::vector<KernelDensity> densities;       // continuous variables
  std::vector<BinDensity> categorical;        // categorical masses, refined
  Posterior posterior;
  std::vector<double> pi;
  int sweeps = 0;
  bool aborted = false;  // a component died; binned results returned instead
};

namespace detail {

inline double gauss_kernel(double u, double h) {
  const double z = u / h;
  return std::exp(-0.5 * z * z) / (h * 2.5066282746310002);
}

// f_kj(u) = sum_i t_ik phi_h(u - x_ij) / sum_i t_ik
inline double weighted_kde(const std::vector<double>& x, const std::vector<double>& t,
                           int K, int k, double weight_sum, double h, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += t[i * K + k] * gauss_kernel(u - x[i], h);
  return acc / weight_sum;
}

}  // namespace detail

/// npEM-style smoothing pass over a fitted model: alternate weighted kernel
/// density estimates per (component, variable) with responsibility updates,
/// then tabulate the final densities on a padded uniform grid. This is a
/// light refinement stage for reporting, not a full smoothed-likelihood
/// maximizer.
inline RefineResult kernel_refine(const FitResult& fit, const Dataset& ds, int grid_size = 512,
                                  int sweeps = 50, double tol = 1e-6) {
  ds.validate();
  const int n = ds.n();
  const int J = ds.cols();
  const int K = fit.params.K;
  if (fit.posterior.n != n) throw std::invalid_argument("posterior/dataset size mismatch");

  RefineResult out;
  out.posterior = fit.posterior;
  out.pi = fit.params.pi;

  std::vector<double> h(J, 0.0);
  for (int j = 0; j < J; ++j)
    if (ds.kinds[j].is_continuous()) h[j] = column_sd(ds, j) * std::pow(n, -0.2);

  const std::vector<int>& omega = fit.params.omega;
  std::vector<char> rel(J, 0);
  for (int j : omega) rel[j] = 1;

  // categorical level masses per (j, k), recomputed from the running posterior
  auto categorical_masses = [&](int j) {
    const int L = ds.kinds[j].levels;
    std::vector<double> m(static_cast<std::size_t>(K) * L, 0.0);
    std::vector<double> wk(K, 0.0);
    for (int i = 0; i < n; ++i) {
      const int lev = static_cast<int>(ds.columns[j][i]);
      for (int k = 0; k < K; ++k) {
        const double t = out.posterior.at(i, k);
        m[static_cast<std::size_t>(k) * L + lev] += t;
        wk[k] += t;
      }
    }
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < L; ++l) m[static_cast<std::size_t>(k) * L + l] /= wk[k];
    return m;
  };

  std::vector<double> wk(K, 0.0);
  auto refresh_weights = [&]() {
    std::fill(wk.begin(), wk.end(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) wk[k] += out.posterior.at(i, k);
    for (int k = 0; k < K; ++k)
      if (wk[k] <= n * 1e-12) return false;
    return true;
  };
  if (!refresh_weights()) {
    out.aborted = true;
    return out;
  }

  std::vector<double> next_t(static_cast<std::size_t>(n) * K);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    // responsibilities from the current kernel densities over the relevant set
    double max_change = 0.0;
    std::vector<std::vector<double>> cat_mass(J);
    for (int j : omega)
      if (ds.kinds[j].is_categorical()) cat_mass[j] = categorical_masses(j);
    for (int i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (int k = 0; k < K; ++k) {
        double v = out.pi[k];
        for (int j : omega) {
          if (ds.kinds[j].is_continuous()) {
            v *= detail::weighted_kde(ds.columns[j], out.posterior.t, K, k, wk[k], h[j],
                                      ds.columns[j][i]);
          } else {
            const int L = ds.kinds[j].levels;
            v *= cat_mass[j][static_cast<std::size_t>(k) * L +
                             static_cast<int>(ds.columns[j][i])];
          }
        }
        next_t[static_cast<std::size_t>(i) * K + k] = v;
        row_sum += v;
      }
      if (row_sum <= 0.0) {
        out.aborted = true;
        return out;
      }
      for (int k = 0; k < K; ++k) {
        double& v = next_t[static_cast<std::size_t>(i) * K + k];
        v /= row_sum;
        max_change = std::max(max_change, std::abs(v - out.posterior.at(i, k)));
      }
    }
    out.posterior.t = next_t;
    for (int k = 0; k < K; ++k) out.pi[k] = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < K; ++k) out.pi[k] += out.posterior.at(i, k) / n;
    if (!refresh_weights()) {
      out.aborted = true;
      out.posterior = fit.posterior;
      out.pi = fit.params.pi;
      return out;
    }
    out.sweeps = sweep + 1;
    if (max_change < tol) break;
  }

  // tabulate on a grid padded by three bandwidths
  for (int j = 0; j < J; ++j) {
    if (ds.kinds[j].is_categorical()) {
      const auto m = categorical_masses(j);
      const int L = ds.kinds[j].levels;
      for (int k = 0; k < K; ++k) {
        BinDensity d;
        d.variable = j;
        d.component = k;
        d.categorical = true;
        for (int l = 0; l < L; ++l) {
          d.lo.push_back(l);
          d.hi.push_back(l);
          d.mass.push_back(m[static_cast<std::size_t>(k) * L + l]);
          d.density.push_back(m[static_cast<std::size_t>(k) * L + l]);
        }
        out.categorical.push_back(std::move(d));
      }
      continue;
    }
    const auto [mn, mx] = std::minmax_element(ds.columns[j].begin(), ds.columns[j].end());
    const double lo = *mn - 3.0 * h[j];
    const double hi = *mx + 3.0 * h[j];
    std::vector<int> comps;
    if (rel[j]) {
      for (int k = 0; k < K; ++k) comps.push_back(k);
    } else {
      comps.push_back(-1);  // one shared density
    }
    for (int k : comps) {
      KernelDensity kd;
      kd.variable = j;
      kd.component = k;
      kd.bandwidth = h[j];
      kd.grid.resize(grid_size);
      kd.density.resize(grid_size);
      const double step = (hi - lo) / (grid_size - 1);
      for (int g = 0; g < grid_size; ++g) {
        const double u = lo + step * g;
        kd.grid[g] = u;
        if (k >= 0) {
          kd.density[g] = detail::weighted_kde(ds.columns[j], out.posterior.t, K, k, wk[k],
                                               h[j], u);
        } else {
          double acc = 0.0;
          for (double x : ds.columns[j]) acc += detail::gauss_kernel(u - x, h[j]);
          kd.density[g] = acc / n;
        }
      }
      out.densities.push_back(std::move(kd));
    }
  }
  return out;
}

}  // namespace binclust
