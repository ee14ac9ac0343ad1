#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "binclust/binning.hpp"
#include "binclust/lcm.hpp"
#include "binclust/postfit.hpp"
#include "binclust/selection.hpp"
#include "binclust/version.hpp"

namespace binclust {

using json = nlohmann::ordered_json;

inline json scheme_to_json(const BinningScheme& scheme) {
  json vars = json::array();
  for (const auto& v : scheme.vars) {
    vars.push_back({{"categorical", v.categorical},
                    {"bins", v.bins},
                    {"breakpoints", v.breakpoints},
                    {"support", {v.support_min, v.support_max}},
                    {"widths", v.widths},
                    {"merged", v.merged}});
  }
  return {{"mode", scheme.mode == BinningMode::Quantile ? "quantile" : "equal-width"},
          {"vars", vars}};
}

inline BinningScheme scheme_from_json(const json& j) {
  BinningScheme scheme;
  scheme.mode = j.at("mode").get<std::string>() == "equal-width" ? BinningMode::EqualWidth
                                                                 : BinningMode::Quantile;
  for (const auto& v : j.at("vars")) {
    VariableBinning vb;
    vb.categorical = v.at("categorical").get<bool>();
    vb.bins = v.at("bins").get<int>();
    vb.breakpoints = v.at("breakpoints").get<std::vector<double>>();
    vb.support_min = v.at("support")[0].get<double>();
    vb.support_max = v.at("support")[1].get<double>();
    vb.widths = v.at("widths").get<std::vector<double>>();
    vb.merged = v.value("merged", false);
    scheme.vars.push_back(std::move(vb));
  }
  return scheme;
}

inline json fit_to_json(const FitResult& fit) {
  json alpha = json::array();
  for (std::size_t j = 0; j < fit.params.alpha.size(); ++j) {
    const int B = fit.params.binsize(static_cast<int>(j));
    json rows = json::array();
    for (int k = 0; k < fit.params.K; ++k) {
      json row = json::array();
      for (int b = 0; b < B; ++b) row.push_back(fit.params.alpha_at(static_cast<int>(j), k, b));
      rows.push_back(std::move(row));
    }
    alpha.push_back(std::move(rows));
  }
  return {{"K", fit.params.K},
          {"omega", fit.params.omega},
          {"pi", fit.params.pi},
          {"alpha", alpha},
          {"loglik", fit.loglik},
          {"nu", fit.nu},
          {"penalty", fit.penalty},
          {"criterion", fit.criterion},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"seed", fit.restart_seed}};
}

inline json selection_to_json(const SelectionResult& res) {
  json per_k = json::array();
  for (const auto& kf : res.per_k) {
    json entry = {{"K", kf.K}, {"failed", kf.failed}};
    if (kf.failed)
      entry["error"] = kf.error;
    else
      entry["fit"] = fit_to_json(kf.fit);
    per_k.push_back(std::move(entry));
  }
  const auto& s = res.settings;
  json settings = {{"kmax", s.kmax},
                   {"penalty", s.rule.name()},
                   {"restarts", s.restarts},
                   {"seed", s.seed},
                   {"fixed_omega", s.fixed_omega},
                   {"bins_mode", s.bins.mode == BinningMode::Quantile ? "quantile" : "equal-width"}};
  if (s.bins.fixed_bins)
    settings["bins"] = *s.bins.fixed_bins;
  else
    settings["bins_rate"] = s.bins.rate_denominator;
  return {{"version", kVersion},
          {"settings", settings},
          {"best_k", res.best_index + 1},
          {"best", fit_to_json(res.best())},
          {"per_k", per_k},
          {"scheme", scheme_to_json(res.scheme)},
          {"warnings", res.warnings}};
}

inline json bin_density_to_json(const BinDensity& d) {
  return {{"variable", d.variable}, {"component", d.component},
          {"categorical", d.categorical}, {"lo", d.lo},
          {"hi", d.hi},               {"mass", d.mass},
          {"density", d.density}};
}

inline json kernel_density_to_json(const KernelDensity& d) {
  return {{"variable", d.variable},
          {"component", d.component},
          {"bandwidth", d.bandwidth},
          {"grid", d.grid},
          {"density", d.density}};
}

inline void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return json::parse(in);
}

}  // namespace binclust
