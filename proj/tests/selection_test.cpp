#include "binclust/selection.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "binclust/simulate.hpp"

using namespace binclust;

namespace {

TEST(PenaltyValue, MatchesDirectFormula) {
  // K=3, |omega|=6, J=6, all B_j=4: nu = 2 + 6*3*3 = 56
  Dataset ds;
  for (int j = 0; j < 6; ++j) {
    ds.names.push_back("x" + std::to_string(j));
    ds.kinds.push_back(VariableKind::continuous());
    std::vector<double> col;
    for (int i = 0; i < 16; ++i) col.push_back(i + 0.25 * j);
    ds.columns.push_back(std::move(col));
  }
  const BinningScheme scheme = build_quantile_scheme(ds, 4);
  const std::vector<int> omega{0, 1, 2, 3, 4, 5};
  EXPECT_EQ(model_complexity(3, omega, scheme), 56);
  EXPECT_NEAR(penalty_value(PenaltyRule::bic(), 100, 3, omega, scheme),
              56.0 * std::log(100.0) / 2.0, 1e-9);

  // K=1 with empty omega: nu = sum_j (B_j - 1)
  EXPECT_EQ(model_complexity(1, {}, scheme), 6 * 3);
  // AIC: a = nu
  EXPECT_NEAR(penalty_value(PenaltyRule::aic(), 100, 1, {}, scheme), 18.0, 1e-12);
}

TEST(PenaltyValue, MixedBinCounts) {
  Dataset ds;
  ds.names = {"a", "b"};
  ds.kinds = {VariableKind::continuous(), VariableKind::categorical(5)};
  ds.columns = {{1, 2, 3, 4, 5, 6}, {0, 1, 2, 3, 4, 0}};
  const BinningScheme scheme = build_quantile_scheme(ds, 3);  // B_0 = 3, B_1 = 5
  EXPECT_EQ(model_complexity(2, {0}, scheme), 1 + 2 * 2 + 4);
  EXPECT_EQ(model_complexity(2, {1}, scheme), 1 + 2 * 4 + 2);
}

SelectionSettings base_settings(int kmax, int restarts, std::uint64_t seed) {
  SelectionSettings s;
  s.kmax = kmax;
  s.restarts = restarts;
  s.seed = seed;
  s.rule = PenaltyRule::bic();
  s.bins.rate_denominator = 6;
  return s;
}

TEST(SelectFull, SingleCandidateReturnsIndependenceFit) {
  const SimOutput sim = generate(ShiftDesign{120, 6, Noise::Gaussian, 2.0}, 5);
  const SelectionResult res = select_full(sim.data, base_settings(1, 3, 9));
  EXPECT_EQ(res.best_index, 0);
  EXPECT_TRUE(res.best().params.omega.empty());
  EXPECT_TRUE(res.best().converged);
}

TEST(SelectFull, RequiresThreeVariablesForClustering) {
  Dataset ds;
  for (int j = 0; j < 2; ++j) {
    ds.names.push_back("x" + std::to_string(j));
    ds.kinds.push_back(VariableKind::continuous());
    ds.columns.push_back({0.1, 0.9, 0.4, 0.6, 0.2, 0.8});
  }
  ds.columns[1][0] = 0.15;
  EXPECT_THROW(select_full(ds, base_settings(2, 2, 1)), std::invalid_argument);
  EXPECT_NO_THROW(select_full(ds, base_settings(1, 2, 1)));
}

TEST(SelectFull, IndependentDataPrefersOneComponent) {
  // i.i.d. product density at n=1000: K_hat = 1 in at least 18 of 20 replicates
  Rng rng(41);
  int ones = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Dataset ds;
    for (int j = 0; j < 4; ++j) {
      ds.names.push_back("x" + std::to_string(j));
      ds.kinds.push_back(VariableKind::continuous());
      std::vector<double> col(1000);
      for (double& v : col) v = j % 2 == 0 ? rng.normal() : rng.laplace();
      ds.columns.push_back(std::move(col));
    }
    const SelectionResult res = select_full(ds, base_settings(3, 5, 100 + rep));
    if (res.per_k[res.best_index].K == 1) ++ones;
  }
  EXPECT_GE(ones, 18);
}

TEST(SelectFull, CollapsedBinsSurfaceWarning) {
  Dataset ds;
  for (int j = 0; j < 3; ++j) {
    ds.names.push_back("x" + std::to_string(j));
    ds.kinds.push_back(VariableKind::continuous());
  }
  // first column: ties everywhere except one low value, so every quantile cut
  // lands on the support maximum and merging collapses to a single bin
  ds.columns = {{3, 7, 7, 7, 7, 7, 7, 7},
                {1, 2, 3, 4, 5, 6, 7, 8},
                {8, 7, 6, 5, 4, 3, 2, 1}};
  SelectionSettings s = base_settings(1, 1, 2);
  s.bins.fixed_bins = 2;
  const SelectionResult res = select_full(ds, s);
  EXPECT_EQ(res.scheme.vars[0].bins, 1);
  ASSERT_FALSE(res.warnings.empty());
  EXPECT_NE(res.warnings[0].find("x0"), std::string::npos);
}

TEST(SelectFull, BestCriterionConsistent) {
  const SimOutput sim = generate(ShiftDesign{200, 6, Noise::Gaussian, 2.5}, 77);
  const SelectionResult res = select_full(sim.data, base_settings(3, 4, 13));
  double best_w = -1e300;
  for (const auto& kf : res.per_k)
    if (!kf.failed) best_w = std::max(best_w, kf.fit.criterion);
  EXPECT_DOUBLE_EQ(res.best().criterion, best_w);
  const DiscretizedData dd = discretize(sim.data, res.scheme);
  const FitResult& best = res.best();
  EXPECT_NEAR(best.criterion,
              loglik(best.params, res.scheme, dd) -
                  penalty_value(res.settings.rule, 200, best.params.K, best.params.omega,
                                res.scheme),
              1e-9);
}

TEST(SelectFull, MoreRestartsNeverWorse) {
  const SimOutput sim = generate(ShiftDesign{150, 6, Noise::Laplace, 2.5}, 3);
  SelectionSettings small = base_settings(3, 3, 21);
  SelectionSettings large = base_settings(3, 8, 21);
  const SelectionResult a = select_full(sim.data, small);
  const SelectionResult b = select_full(sim.data, large);
  for (int k = 0; k < 3; ++k) {
    if (a.per_k[k].failed) continue;
    EXPECT_GE(b.per_k[k].fit.criterion, a.per_k[k].fit.criterion - 1e-12) << "K=" << k + 1;
  }
}

TEST(SelectFull, ZeroPenaltyOverfitsToKmax) {
  const SimOutput sim = generate(ShiftDesign{150, 6, Noise::Gaussian, 2.0}, 8);
  SelectionSettings s = base_settings(3, 4, 15);
  s.rule = PenaltyRule::custom(0.0);
  const SelectionResult res = select_full(sim.data, s);
  EXPECT_EQ(res.per_k[res.best_index].K, 3);
  // with c_n = 0, W reduces to T
  EXPECT_DOUBLE_EQ(res.best().criterion, res.best().loglik);
}

TEST(SelectFull, DeterministicAcrossJobCounts) {
  const SimOutput sim = generate(ShiftDesign{150, 6, Noise::Gaussian, 2.2}, 4);
  SelectionSettings serial = base_settings(3, 4, 33);
  serial.jobs = 1;
  SelectionSettings parallel = base_settings(3, 4, 33);
  parallel.jobs = 4;
  const SelectionResult a = select_full(sim.data, serial);
  const SelectionResult b = select_full(sim.data, parallel);
  ASSERT_EQ(a.best_index, b.best_index);
  EXPECT_EQ(a.best().criterion, b.best().criterion);
  EXPECT_EQ(a.best().params.omega, b.best().params.omega);
  EXPECT_EQ(a.best().posterior.t, b.best().posterior.t);
}

TEST(SelectKOnly, PinsOmegaToAllVariables) {
  const SimOutput sim = generate(KasaharaDesign{300}, 6);
  SelectionSettings s = base_settings(3, 4, 19);
  s.bins.rate_denominator = 5;
  const SelectionResult res = select_k_only(sim.data, s);
  for (const auto& kf : res.per_k) {
    if (kf.failed) continue;
    EXPECT_EQ(kf.fit.params.omega.size(), 8u);
  }
  EXPECT_TRUE(res.settings.fixed_omega);
}

TEST(SelectFull, MixedTypeDataRuns) {
  // two shifted continuous variables plus one informative categorical level
  Rng rng(63);
  Dataset ds;
  ds.names = {"a", "b", "g"};
  ds.kinds = {VariableKind::continuous(), VariableKind::continuous(),
              VariableKind::categorical(3)};
  std::vector<double> a, b, g;
  for (int i = 0; i < 300; ++i) {
    const int z = rng.next_index(2);
    a.push_back(3.0 * z + rng.normal());
    b.push_back(-3.0 * z + rng.normal());
    g.push_back(rng.next_double() < (z ? 0.85 : 0.15) ? 2.0 : rng.next_index(2));
  }
  ds.columns = {a, b, g};

  SelectionSettings s = base_settings(3, 6, 29);
  const SelectionResult res = select_full(ds, s);
  EXPECT_EQ(res.per_k[res.best_index].K, 2);
  EXPECT_EQ(res.scheme.vars[2].bins, 3);  // categorical keeps its levels
  EXPECT_TRUE(res.scheme.vars[2].categorical);
  const DiscretizedData dd = discretize(ds, res.scheme);
  EXPECT_NEAR(res.best().criterion,
              loglik(res.best().params, res.scheme, dd) - res.best().penalty, 1e-9);
}

TEST(SelectKOnly, MonotoneTransformLeavesChoiceUnchanged) {
  const SimOutput sim = generate(ShiftDesign{200, 6, Noise::Gaussian, 2.3}, 25);
  SelectionSettings s = base_settings(3, 4, 11);
  const SelectionResult base = select_k_only(sim.data, s);

  Dataset mapped = sim.data;
  for (double& v : mapped.columns[2]) v = std::exp(v);
  const SelectionResult transformed = select_k_only(mapped, s);
  EXPECT_EQ(base.per_k[base.best_index].K, transformed.per_k[transformed.best_index].K);
  EXPECT_EQ(base.best().posterior.t, transformed.best().posterior.t);
}

}  // namespace
