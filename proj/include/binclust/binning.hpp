#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "binclust/data.hpp"

namespace binclust {

enum class BinningMode { Quantile, EqualWidth };

/// One variable's binning: ascending interior cut points over the observed
/// support. Bin b covers (breakpoints[b-1], breakpoints[b]], the first bin is
/// closed at the left support edge. Categorical variables map levels to bins
/// one-to-one with unit widths. When ties collapse quantile cut points onto
/// the support minimum, the first bin degenerates to the point {min}; its
/// width is stored as 0 and it is treated as a point mass downstream.
struct VariableBinning {
  bool categorical = false;
  int bins = 0;
  std::vector<double> breakpoints;  // size bins-1; empty for categorical
  double support_min = 0.0;
  double support_max = 0.0;
  std::vector<double> widths;  // size bins; all 1 for categorical
  bool merged = false;         // ties reduced the requested bin count

  int bin_of(double x) const {
    if (categorical) {
      int b = static_cast<int>(x);
      return std::clamp(b, 0, bins - 1);
    }
    // index = number of breakpoints strictly below x; values at a cut point
    // fall in the lower bin, out-of-support values clamp to the edge bins
    auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x);
    return static_cast<int>(it - breakpoints.begin());
  }
};

struct BinningScheme {
  BinningMode mode = BinningMode::Quantile;
  std::vector<VariableBinning> vars;

  int cols() const { return static_cast<int>(vars.size()); }
  int max_bins() const {
    int m = 0;
    for (const auto& v : vars) m = std::max(m, v.bins);
    return m;
  }
};

/// Bin-index matrix (row-major n x J) plus the scheme that produced it.
struct DiscretizedData {
  int n = 0;
  int J = 0;
  std::vector<std::uint32_t> idx;
  BinningScheme scheme;

  std::uint32_t at(int i, int j) const { return idx[static_cast<std::size_t>(i) * J + j]; }
};

/// B = round-half-up(n^(1/s)), clamped below at 2.
inline int default_bin_count(int n, int rate_denominator) {
  if (n < 2) throw std::invalid_argument("default_bin_count requires n >= 2");
  if (rate_denominator < 1) throw std::invalid_argument("rate denominator must be >= 1");
  double b = std::floor(std::pow(static_cast<double>(n), 1.0 / rate_denominator) + 0.5);
  return std::max(2, static_cast<int>(b));
}

namespace detail {

// order-statistic quantile q_p = x_(ceil(n*p)) on the sorted column
inline double order_stat_quantile(const std::vector<double>& sorted, std::int64_t num,
                                  std::int64_t den) {
  const std::int64_t n = static_cast<std::int64_t>(sorted.size());
  std::int64_t r = (n * num + den - 1) / den;  // ceil(n*num/den)
  r = std::clamp<std::int64_t>(r, 1, n);
  return sorted[static_cast<std::size_t>(r - 1)];
}

inline VariableBinning bin_continuous_quantile(const std::vector<double>& column, int B,
                                               const std::string& name) {
  VariableBinning vb;
  auto [mn, mx] = std::minmax_element(column.begin(), column.end());
  vb.support_min = *mn;
  vb.support_max = *mx;
  if (vb.support_min == vb.support_max)
    throw std::invalid_argument("constant continuous column '" + name + "' cannot be binned");

  std::vector<double> sorted(column);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  for (int b = 1; b < B; ++b) cuts.push_back(order_stat_quantile(sorted, b, B));
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  // a cut at the support max would leave an empty last bin; one at the min is
  // kept and yields a point-mass first bin for data tied at the minimum
  while (!cuts.empty() && cuts.back() >= vb.support_max) cuts.pop_back();

  vb.breakpoints = std::move(cuts);
  vb.bins = static_cast<int>(vb.breakpoints.size()) + 1;
  vb.merged = vb.bins < B;
  vb.widths.resize(vb.bins);
  double lo = vb.support_min;
  for (int b = 0; b < vb.bins; ++b) {
    double hi = (b + 1 < vb.bins) ? vb.breakpoints[b] : vb.support_max;
    vb.widths[b] = hi - lo;
    lo = hi;
  }
  return vb;
}

inline VariableBinning bin_continuous_equal_width(const std::vector<double>& column, int B,
                                                  const std::string& name) {
  VariableBinning vb;
  auto [mn, mx] = std::minmax_element(column.begin(), column.end());
  vb.support_min = *mn;
  vb.support_max = *mx;
  if (vb.support_min == vb.support_max)
    throw std::invalid_argument("constant continuous column '" + name + "' cannot be binned");
  vb.bins = B;
  const double w = (vb.support_max - vb.support_min) / B;
  for (int b = 1; b < B; ++b) vb.breakpoints.push_back(vb.support_min + w * b);
  vb.widths.assign(B, w);
  return vb;
}

}  // namespace detail

/// Build a per-variable scheme with the given bin counts. Continuous
/// variables get quantile (or equal-width) bins, categorical variables keep
/// their levels untouched.
inline BinningScheme build_scheme(const Dataset& ds, const std::vector<int>& bins_per_var,
                                  BinningMode mode = BinningMode::Quantile) {
  if (static_cast<int>(bins_per_var.size()) != ds.cols())
    throw std::invalid_argument("bins_per_var size mismatch");
  BinningScheme scheme;
  scheme.mode = mode;
  for (int j = 0; j < ds.cols(); ++j) {
    if (ds.kinds[j].is_categorical()) {
      VariableBinning vb;
      vb.categorical = true;
      vb.bins = ds.kinds[j].levels;
      vb.support_min = 0.0;
      vb.support_max = ds.kinds[j].levels - 1;
      vb.widths.assign(vb.bins, 1.0);
      scheme.vars.push_back(std::move(vb));
      continue;
    }
    const int B = bins_per_var[j];
    if (B < 2) throw std::invalid_argument("bin count must be >= 2");
    scheme.vars.push_back(mode == BinningMode::Quantile
                              ? detail::bin_continuous_quantile(ds.columns[j], B, ds.names[j])
                              : detail::bin_continuous_equal_width(ds.columns[j], B, ds.names[j]));
  }
  return scheme;
}

inline BinningScheme build_quantile_scheme(const Dataset& ds, int B) {
  return build_scheme(ds, std::vector<int>(ds.cols(), B), BinningMode::Quantile);
}

inline BinningScheme build_equal_width_scheme(const Dataset& ds, int B) {
  return build_scheme(ds, std::vector<int>(ds.cols(), B), BinningMode::EqualWidth);
}

/// One-hot bin assignment per entry. Values outside a variable's recorded
/// support clamp to the nearest edge bin, so a fitted scheme can be applied
/// to held-out data.
inline DiscretizedData discretize(const Dataset& ds, const BinningScheme& scheme) {
  if (scheme.cols() != ds.cols())
    throw std::invalid_argument("scheme/dataset column count mismatch");
  for (int j = 0; j < ds.cols(); ++j) {
    if (scheme.vars[j].categorical != ds.kinds[j].is_categorical())
      throw std::invalid_argument("scheme/dataset kind mismatch at column " + ds.names[j]);
  }
  DiscretizedData dd;
  dd.n = ds.n();
  dd.J = ds.cols();
  dd.scheme = scheme;
  dd.idx.resize(static_cast<std::size_t>(dd.n) * dd.J);
  for (int j = 0; j < dd.J; ++j) {
    const VariableBinning& vb = scheme.vars[j];
    const auto& col = ds.columns[j];
    for (int i = 0; i < dd.n; ++i)
      dd.idx[static_cast<std::size_t>(i) * dd.J + j] = static_cast<std::uint32_t>(vb.bin_of(col[i]));
  }
  return dd;
}

}  // namespace binclust
