#pragma once

#include <string>

#include "json.hpp"
#include "lts/bounds.hpp"
#include "lts/harness.hpp"
#include "lts/matrix.hpp"
#include "lts/schedule.hpp"
#include "lts/systems.hpp"

namespace lts {

using nlohmann::json;

/// {dim, entries: row-major [re, im] pairs}
inline json matrix_to_json(const CMatrix& a) {
  require_square_finite(a, "matrix_to_json");
  json entries = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      entries.push_back({a(r, c).real(), a(r, c).imag()});
  return json{{"dim", a.rows()}, {"entries", std::move(entries)}};
}

inline CMatrix matrix_from_json(const json& j) {
  const auto dim = j.at("dim").get<Eigen::Index>();
  const auto& entries = j.at("entries");
  if (dim < 1 || entries.size() != static_cast<std::size_t>(dim * dim))
    throw std::invalid_argument("matrix_from_json: entries must hold dim*dim pairs");
  CMatrix a(dim, dim);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c, ++i)
      a(r, c) = Complex(entries[i].at(0).get<double>(), entries[i].at(1).get<double>());
  require_square_finite(a, "matrix_from_json");
  return a;
}

/// {m, k, factors: [{j, v, q}, ...]} in first-applied-first order.
inline json schedule_to_json(const Schedule& s) {
  json factors = json::array();
  for (const ExpFactor& f : s.factors)
    factors.push_back({{"j", f.term_index}, {"v", f.offset}, {"q", f.weight}});
  return json{{"m", s.m}, {"k", s.k}, {"factors", std::move(factors)}};
}

inline Schedule schedule_from_json(const json& j) {
  Schedule s;
  s.m = j.at("m").get<int>();
  s.k = j.at("k").get<int>();
  for (const auto& f : j.at("factors"))
    s.factors.push_back(
        {f.at("j").get<int>(), f.at("v").get<double>(), f.at("q").get<double>()});
  return s;
}

inline json plan_to_json(const DecompositionPlan& p) {
  return json{{"m", p.m},
              {"k", p.k},
              {"r", p.r},
              {"n_exponentials", p.n_exponentials},
              {"n_budget_bound", p.n_budget_bound},
              {"lambda", p.lambda},
              {"dt", p.dt},
              {"epsilon", p.epsilon},
              {"single_step_bound_per_segment", p.single_step_bound_per_segment},
              {"conditions",
               {{"theorem3_condition", p.theorem3_condition},
                {"segment_count_condition", p.segment_count_condition},
                {"theorem1_epsilon_condition", p.theorem1_epsilon_condition},
                {"norm_condition_assumed", p.norm_condition_assumed}}}};
}

inline json order_study_to_json(const ConvergenceReport& rep) {
  json samples = json::array();
  for (const SamplePoint& pt : rep.samples)
    samples.push_back({{"dt", pt.dt},
                       {"error", pt.error},
                       {"zeta", pt.zeta},
                       {"excluded", pt.excluded}});
  return json{{"system", rep.system},
              {"k", rep.k},
              {"mu", rep.mu},
              {"oracle_tol", rep.oracle_tol},
              {"samples", std::move(samples)},
              {"fitted_slope", rep.fitted_slope},
              {"fit_range", {rep.fit_dt_min, rep.fit_dt_max}}};
}

inline json bound_sweep_to_json(const BoundSweepReport& rep) {
  json rows = json::array();
  for (const BoundSweepRow& r : rep.rows)
    rows.push_back({{"seed", r.seed},
                    {"dt", r.dt},
                    {"lambda", r.lambda},
                    {"error", r.error},
                    {"bound", r.bound},
                    {"valid", r.valid},
                    {"margin", r.margin},
                    {"excluded", r.excluded},
                    {"violation", r.violation}});
  return json{{"k", rep.k}, {"rows", std::move(rows)}, {"violations", rep.violations}};
}

inline json appendix_b_to_json(const AppendixBReport& rep) {
  return json{{"delta", rep.delta},
              {"dt", rep.dt},
              {"computed", matrix_to_json(rep.computed)},
              {"expected", matrix_to_json(rep.expected)},
              {"max_entry_diff", rep.max_entry_diff},
              {"growth_ratio", rep.growth_ratio},
              {"expected_growth_ratio", rep.expected_growth_ratio},
              {"pass", rep.pass}};
}

/// Custom system spec: {dim, terms: [{kind: "scalar-profile",
/// profile: <catalog id>, matrix: {dim, entries}}]}. Only cataloged profiles
/// are accepted; there is no expression parser.
inline TermSet system_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  std::vector<OperatorTerm> terms;
  for (const auto& tj : j.at("terms")) {
    const std::string kind = tj.at("kind").get<std::string>();
    if (kind != "scalar-profile")
      throw std::invalid_argument("system_from_json: unknown term kind: " + kind);
    const ScalarProfile& profile = profile_by_id(tj.at("profile").get<std::string>());
    const CMatrix m = matrix_from_json(tj.at("matrix"));
    if (m.rows() != dim)
      throw std::invalid_argument("system_from_json: term dimension mismatch");
    terms.push_back(scalar_profile_term(profile, m));
  }
  return TermSet(std::move(terms));
}

}  // namespace lts
