#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lts/operator_model.hpp"
#include "lts/schedule.hpp"

namespace lts {

inline double pow5(int k_minus_1) { return std::pow(5.0, k_minus_1); }

inline long long pow5i(int k_minus_1) {
  long long p = 1;
  for (int i = 0; i < k_minus_1; ++i) p *= 5;
  return p;
}

struct QkBounds {
  double lower;
  double upper;
};

/// Closed-form bracket 1.5/3^k <= Q_k <= 2k/3^k.
inline QkBounds qk_bounds(int k) {
  if (k < 1) throw std::invalid_argument("qk_bounds: k must be >= 1");
  const double p3 = std::pow(3.0, k);
  return {1.5 / p3, 2.0 * k / p3};
}

struct SingleStepBound {
  double bound;
  bool valid;  // 2*sqrt(2)*5^(k-1)*Q_k*Lambda*dt <= 1/2
};

/// Single-step error bound 2 (3 5^(k-1) Q_k Lambda dt)^(2k+1), with Q_k taken
/// from the generated schedule rather than its closed-form upper bound.
inline SingleStepBound single_step_bound(int k, double lambda, double dt) {
  if (k < 1 || lambda <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("single_step_bound: inputs must be positive");
  const double qk = q_max_for_order(k);
  const double core = pow5(k - 1) * qk * lambda * dt;
  SingleStepBound out;
  out.bound = 2.0 * std::pow(3.0 * core, 2 * k + 1);
  out.valid = 2.0 * std::sqrt(2.0) * core <= 0.5;
  return out;
}

struct SegmentCount {
  long long r;
  bool valid;  // epsilon <= 3 Q_k 5^(k-1) Lambda dt
};

/// Minimum integer r strictly above 2 (3 Q_k 5^(k-1) Lambda dt)^(1+1/2k) / eps^(1/2k).
inline SegmentCount segment_count(int k, double lambda, double dt, double epsilon) {
  if (k < 1 || lambda <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("segment_count: inputs must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("segment_count: epsilon must be in (0, 1]");
  const double qk = q_max_for_order(k);
  const double core = 3.0 * qk * pow5(k - 1) * lambda * dt;
  const double expr =
      2.0 * std::pow(core, 1.0 + 1.0 / (2.0 * k)) / std::pow(epsilon, 1.0 / (2.0 * k));
  SegmentCount out;
  out.r = static_cast<long long>(std::floor(expr)) + 1;
  out.valid = epsilon <= core;
  return out;
}

namespace detail {

// ceil with a one-sided nudge so values that are integers up to rounding do
// not spill into the next integer.
inline double ceil_nudged(double x) { return std::ceil(x - 1e-9); }

}  // namespace detail

struct ExponentialBudget {
  long long n;
  bool valid;  // epsilon <= (9/10) (5/3)^k Lambda dt
};

/// N <= 2m 5^(k-1) ceil(5k Lambda dt (5/3)^k (Lambda dt / eps)^(1/2k)).
inline ExponentialBudget exponential_budget(int m, int k, double lambda, double dt,
                                            double epsilon) {
  if (m < 1 || k < 1 || lambda <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("exponential_budget: inputs must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("exponential_budget: epsilon must be in (0, 1]");
  const double ld = lambda * dt;
  const double inner =
      5.0 * k * ld * std::pow(5.0 / 3.0, k) * std::pow(ld / epsilon, 1.0 / (2.0 * k));
  ExponentialBudget out;
  out.n = 2LL * m * pow5i(k - 1) * static_cast<long long>(detail::ceil_nudged(inner));
  out.valid = epsilon <= 0.9 * std::pow(5.0 / 3.0, k) * ld;
  return out;
}

/// Order selection k0 = min{P, ceil(sqrt(0.5 log_{25/3}(Lambda dt / eps)))},
/// floored at 1; Lambda dt <= eps yields 1.
inline int choose_order(double lambda, double dt, double epsilon,
                        int P = kUnboundedDerivatives) {
  if (lambda <= 0.0 || dt <= 0.0 || epsilon <= 0.0)
    throw std::invalid_argument("choose_order: inputs must be positive");
  if (P < 1) throw std::invalid_argument("choose_order: P must be >= 1");
  const double ratio = lambda * dt / epsilon;
  if (ratio <= 1.0) return 1;
  const double inner_log = 0.5 * std::log(ratio) / std::log(25.0 / 3.0);
  const int inner = static_cast<int>(detail::ceil_nudged(std::sqrt(inner_log)));
  return std::max(1, std::min(P, inner));
}

struct XConstants {
  std::vector<double> x;  // X_0 .. X_{2k}
  double gamma = 0.0;     // max_p X_p^(1/(p+1))
};

/// X_p = sum_c ||H_{j_c}^(p)(mu)|| v_c^p |q_c| for p < 2k; the p = 2k entry
/// takes each term's max over a 65-point grid (inflated 1.1 for grid misses).
inline XConstants x_constants(const Schedule& s, const TermSet& ts, double mu, double dt) {
  if (s.m != ts.m())
    throw std::invalid_argument("x_constants: schedule and term set disagree on m");
  if (dt <= 0.0) throw std::invalid_argument("x_constants: dt must be > 0");
  const int k = s.k;
  const int pmax = 2 * k;
  if (ts.min_max_derivative() < pmax)
    throw std::invalid_argument(
        "x_constants: derivatives to order 2k exceed the declared smoothness class");

  std::vector<std::vector<double>> norm_at_mu(static_cast<std::size_t>(ts.m()));
  std::vector<double> top_max(static_cast<std::size_t>(ts.m()), 0.0);
  const int grid = 65;
  for (int j = 0; j < ts.m(); ++j) {
    auto& row = norm_at_mu[static_cast<std::size_t>(j)];
    row.resize(static_cast<std::size_t>(pmax));
    for (int p = 0; p < pmax; ++p) row[static_cast<std::size_t>(p)] =
        spectral_norm(ts.term(j).eval(mu, p));
    double mx = 0.0;
    for (int i = 0; i < grid; ++i) {
      const double tau = mu + dt * static_cast<double>(i) / (grid - 1);
      mx = std::max(mx, spectral_norm(ts.term(j).eval(tau, pmax)));
    }
    top_max[static_cast<std::size_t>(j)] = 1.1 * mx;
  }

  XConstants out;
  out.x.assign(static_cast<std::size_t>(pmax) + 1, 0.0);
  for (const ExpFactor& f : s.factors) {
    const std::size_t j = static_cast<std::size_t>(f.term_index - 1);
    const double aq = std::abs(f.weight);
    double vp = 1.0;
    for (int p = 0; p < pmax; ++p) {
      out.x[static_cast<std::size_t>(p)] += norm_at_mu[j][static_cast<std::size_t>(p)] * vp * aq;
      vp *= f.offset;
    }
    out.x[static_cast<std::size_t>(pmax)] += top_max[j] * vp * aq;
  }
  for (int p = 0; p <= pmax; ++p)
    out.gamma = std::max(out.gamma, std::pow(out.x[static_cast<std::size_t>(p)],
                                             1.0 / (p + 1)));
  return out;
}

struct DecompositionPlan {
  int m = 0;
  int k = 0;
  long long r = 0;               // segment count actually used
  long long n_exponentials = 0;  // 2m 5^(k-1) r
  long long n_budget_bound = 0;
  double lambda = 0.0;
  double dt = 0.0;
  double epsilon = 0.0;
  double single_step_bound_per_segment = 0.0;
  bool theorem3_condition = false;
  bool segment_count_condition = false;
  bool theorem1_epsilon_condition = false;
  bool norm_condition_assumed = true;  // max ||U(x,y)|| <= 1 is assumed, not derived
};

/// Assembles order, segment count and exponential budget for a target accuracy.
/// Invalid hypotheses flip flags but the formula values are still reported.
inline DecompositionPlan make_plan(int m, double lambda, double dt, double epsilon,
                                   int P = kUnboundedDerivatives) {
  if (m < 1) throw std::invalid_argument("make_plan: m must be >= 1");
  DecompositionPlan plan;
  plan.m = m;
  plan.lambda = lambda;
  plan.dt = dt;
  plan.epsilon = epsilon;
  plan.k = choose_order(lambda, dt, epsilon, P);
  const SegmentCount sc = segment_count(plan.k, lambda, dt, epsilon);
  plan.r = sc.r;
  plan.segment_count_condition = sc.valid;
  plan.n_exponentials = 2LL * m * pow5i(plan.k - 1) * plan.r;
  const ExponentialBudget budget = exponential_budget(m, plan.k, lambda, dt, epsilon);
  plan.n_budget_bound = budget.n;
  plan.theorem1_epsilon_condition = budget.valid;
  const SingleStepBound ssb =
      single_step_bound(plan.k, lambda, dt / static_cast<double>(plan.r));
  plan.single_step_bound_per_segment = ssb.bound;
  plan.theorem3_condition = ssb.valid;
  return plan;
}

}  // namespace lts
