#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace binclust {

/// Hubert-Arabie adjusted Rand index between two partitions. Symmetric and
/// label-permutation invariant; 1 when both partitions are the single-cluster
/// partition (degenerate denominator).
inline double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ari: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("ari: need n >= 2");

  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, colsums;
  for (std::size_t i = 0; i < n; ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    colsums[b[i]] += 1.0;
  }
  auto choose2 = [](double m) { return 0.5 * m * (m - 1.0); };
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, v] : cells) sum_cells += choose2(v);
  for (const auto& [key, v] : rows) sum_rows += choose2(v);
  for (const auto& [key, v] : colsums) sum_cols += choose2(v);
  const double total = choose2(static_cast<double>(n));
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;
  return (sum_cells - expected) / (maximum - expected);
}

/// |omega_hat intersect omega_true| / |omega_true|
inline double sensitivity(const std::vector<int>& omega_hat,
                          const std::vector<int>& omega_true) {
  if (omega_true.empty()) throw std::invalid_argument("sensitivity: empty truth");
  std::set<int> hat(omega_hat.begin(), omega_hat.end());
  int both = 0;
  for (int j : omega_true) both += hat.count(j) ? 1 : 0;
  return static_cast<double>(both) / static_cast<double>(omega_true.size());
}

/// |complement(omega_hat) intersect complement(omega_true)| / (J - |omega_true|)
inline double specificity(const std::vector<int>& omega_hat,
                          const std::vector<int>& omega_true, int J) {
  std::set<int> truth(omega_true.begin(), omega_true.end());
  if (J <= static_cast<int>(truth.size()))
    throw std::invalid_argument("specificity: no irrelevant variables");
  std::set<int> hat(omega_hat.begin(), omega_hat.end());
  int both = 0;
  for (int j = 0; j < J; ++j)
    if (!truth.count(j) && !hat.count(j)) ++both;
  return static_cast<double>(both) / static_cast<double>(J - truth.size());
}

/// Empirical selection frequencies over replicates: P(K_hat = k) for each
/// k = 1..kmax (dense, zeros emitted) plus the true-recovery and
/// overestimation aggregates.
struct SelectionTable {
  std::vector<double> prob;  // index k-1
  double truth_rate = 0.0;   // P(K_hat = k_true)
  double over_rate = 0.0;    // P(K_hat > k_true)
};

inline SelectionTable selection_table(const std::vector<int>& k_hat, int kmax, int k_true) {
  if (k_hat.empty()) throw std::invalid_argument("selection_table: no replicates");
  SelectionTable tab;
  tab.prob.assign(kmax, 0.0);
  for (int k : k_hat) {
    if (k >= 1 && k <= kmax) tab.prob[k - 1] += 1.0;
    if (k == k_true) tab.truth_rate += 1.0;
    if (k > k_true) tab.over_rate += 1.0;
  }
  const double m = static_cast<double>(k_hat.size());
  for (double& p : tab.prob) p /= m;
  tab.truth_rate /= m;
  tab.over_rate /= m;
  return tab;
}

}  // namespace binclust
