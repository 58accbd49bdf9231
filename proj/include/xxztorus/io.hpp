#pragma once

// JSON forms of the result types.

#include <string>
#include <vector>

#include "json.hpp"
#include "xxztorus/bae.hpp"
#include "xxztorus/eigensolver.hpp"
#include "xxztorus/experiments.hpp"
#include "xxztorus/integrability.hpp"

namespace xxz {

using json = nlohmann::json;

inline json to_json(const ModelParams& p) { return {{"n_sites", p.n_sites()}, {"eta", p.eta()}}; }

inline json to_json(const SpectrumResult& s) {
  return {{"params", to_json(s.params)},
          {"energies", s.energies},
          {"count", s.count()},
          {"method", to_string(s.method)},
          {"tolerance", s.tolerance},
          {"residuals", s.residuals},
          {"restarts", s.restarts},
          {"matvecs", s.matvecs}};
}

inline json to_json(const ClusterReport& c) {
  return {{"size", c.size},
          {"span", c.span},
          {"separating_gap", c.separating_gap},
          {"threshold", c.threshold}};
}

inline json to_json(const SolveOptions& o) {
  return {{"tol", o.tol},
          {"max_iter", o.max_iter},
          {"max_halvings", o.max_halvings},
          {"jacobian", to_string(o.jacobian)},
          {"fd_step", o.fd_step},
          {"min_separation", o.min_separation}};
}

inline json to_json(const SolveReport& r) {
  json roots = json::array();
  const auto us = r.root_set.roots();
  for (std::size_t j = 0; j < us.size(); ++j) {
    roots.push_back({{"re", us[j].real()},
                     {"im", us[j].imag()},
                     {"residual_abs", j < r.root_residuals.size() ? r.root_residuals[j] : 0.0}});
  }
  json out = {{"params", to_json(r.root_set.params())},
              {"label", to_string(r.root_set.label())},
              {"seed_kind", to_string(r.root_set.seed_kind())},
              {"status", to_string(r.status)},
              {"converged", r.converged()},
              {"iterations", r.iterations},
              {"final_residual", r.final_residual},
              {"jacobian_condition_estimate", r.jacobian_condition_estimate},
              {"conjugation_defect", r.conjugation_defect},
              {"min_root_separation", r.min_root_separation},
              {"roots", roots},
              {"config", to_json(r.options)}};
  return out;
}

inline json to_json(const VerificationRecord& v) {
  return {{"check", v.check},
          {"params", {{"n_sites", v.n_sites}, {"eta", v.eta}}},
          {"residual", v.residual},
          {"tolerance", v.tolerance},
          {"pass", v.pass}};
}

inline json to_json(const FitResult& f) {
  return {{"amplitude", f.amplitude},
          {"rate", f.rate},
          {"window", {f.n_min, f.n_max}},
          {"points", f.points},
          {"rms_log_residual", f.rms_log_residual}};
}

inline json to_json(const TableSummary& s) {
  return {{"table", s.table},
          {"cells_checked", s.cells_checked},
          {"cells_passed", s.cells_passed},
          {"max_abs_diff", s.max_abs_diff},
          {"errors", s.errors}};
}

}  // namespace xxz
