#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "nedpca/configuration.hpp"
#include "nedpca/exact_solver.hpp"
#include "nedpca/montecarlo.hpp"
#include "nedpca/stationary_table.hpp"

namespace nedpca {

using Json = nlohmann::ordered_json;

/// Shortest round-trippable rendering is not guaranteed by iostreams; all
/// numeric text output uses 17 significant digits.
inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

inline Json to_json(const StationaryTable<double>& table) {
  Json probs = Json::array();
  for (double p : table.probs) probs.push_back(p);
  return Json{{"n", table.params.n},     {"m", table.params.m},
              {"p1", table.params.p1},   {"p2", table.params.p2},
              {"source", to_string(table.source)}, {"probs", std::move(probs)}};
}

inline Json to_json(const BalanceAudit& audit, int n) {
  Json out{{"verdict", audit.reversible() ? "reversible" : "irreversible"},
           {"max_violation", audit.max_violation},
           {"witness", {Configuration(n, audit.witness_from).to_string(),
                        Configuration(n, audit.witness_to).to_string()}},
           {"one_way_pairs", audit.one_way_pairs}};
  if (audit.one_way_witness)
    out["one_way_witness"] = {Configuration(n, audit.one_way_witness->first).to_string(),
                              Configuration(n, audit.one_way_witness->second).to_string()};
  else
    out["one_way_witness"] = nullptr;
  return out;
}

/// Deterministic fields only; throughput is reported separately.
inline Json to_json(const EmpiricalSummary& summary, const SimulationPlan& plan) {
  Json out{{"n", plan.params.n},
           {"m", plan.params.m},
           {"p1", plan.params.p1},
           {"p2", plan.params.p2},
           {"seed", plan.seed},
           {"chains", plan.chains},
           {"burn_in", plan.burn_in},
           {"samples", plan.samples},
           {"thin", plan.thin},
           {"samples_total", summary.samples_total}};
  out["density_mean"] = summary.samples_total ? Json(summary.density_mean) : Json(nullptr);
  out["density_stderr"] = summary.stderr_defined ? Json(summary.density_stderr) : Json(nullptr);
  out["stderr_defined"] = summary.stderr_defined;
  out["pattern_means"] = summary.pattern_means;
  if (summary.histogram.empty())
    out["histogram"] = nullptr;
  else
    out["histogram"] = summary.histogram;
  return out;
}

}  // namespace nedpca
