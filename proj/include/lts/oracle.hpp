#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "lts/matrix.hpp"
#include "lts/operator_model.hpp"

namespace lts {

struct OracleResult {
  CMatrix U;
  double est_error = 0.0;     // accumulated local-error estimates
  long steps_taken = 0;       // accepted steps
  int min_step_hits = 0;      // forced steps at the minimum step size
  double first_min_step_lambda = std::numeric_limits<double>::quiet_NaN();
};

namespace rkf78 {

// Fehlberg 7(8) embedded pair, 13 stages.
inline constexpr int kStages = 13;

inline constexpr double kC[kStages] = {
    0.0,        2.0 / 27.0, 1.0 / 9.0, 1.0 / 6.0, 5.0 / 12.0, 0.5, 5.0 / 6.0,
    1.0 / 6.0,  2.0 / 3.0,  1.0 / 3.0, 1.0,       0.0,        1.0};

inline constexpr double kA[kStages][kStages - 1] = {
    {},
    {2.0 / 27.0},
    {1.0 / 36.0, 1.0 / 12.0},
    {1.0 / 24.0, 0.0, 1.0 / 8.0},
    {5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0},
    {1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0},
    {-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0},
    {31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0},
    {2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0},
    {-91.0 / 108.0, 0.0, 0.0, 23.0 / 108.0, -976.0 / 135.0, 311.0 / 54.0, -19.0 / 60.0,
     17.0 / 6.0, -1.0 / 12.0},
    {2383.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -301.0 / 82.0,
     2133.0 / 4100.0, 45.0 / 82.0, 45.0 / 164.0, 18.0 / 41.0},
    {3.0 / 205.0, 0.0, 0.0, 0.0, 0.0, -6.0 / 41.0, -3.0 / 205.0, -3.0 / 41.0, 3.0 / 41.0,
     6.0 / 41.0, 0.0},
    {-1777.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -289.0 / 82.0,
     2193.0 / 4100.0, 51.0 / 82.0, 33.0 / 164.0, 12.0 / 41.0, 0.0, 1.0}};

// 8th-order propagation weights; the 7th-order result differs only through
// stages 1, 11, 12, 13, which is what the error estimate uses.
inline constexpr double kB8[kStages] = {
    0.0,         0.0, 0.0, 0.0, 0.0, 34.0 / 105.0, 9.0 / 35.0,
    9.0 / 35.0,  9.0 / 280.0, 9.0 / 280.0, 0.0, 41.0 / 840.0, 41.0 / 840.0};

inline constexpr double kErrWeight = 41.0 / 840.0;

}  // namespace rkf78

/// High-accuracy ground truth for the ordered exponential: integrates
/// dU/du = H(u) U from mu to mu+dt with an embedded Fehlberg 7(8) pair under
/// PI step control. The local-error budget is tol per unit of |dt| so the
/// accumulated estimate stays below tol. dt may be negative.
inline OracleResult ordered_exp(const TermSet& ts, double mu, double dt, double tol) {
  const double eps = std::numeric_limits<double>::epsilon();
  if (!(tol >= 100.0 * eps))
    throw std::invalid_argument("ordered_exp: tol must be at least 100*eps");
  const int dim = ts.dim();
  OracleResult res;
  res.U = identity(dim);
  if (dt == 0.0) return res;

  const double span = std::abs(dt);
  const double sign = dt > 0.0 ? 1.0 : -1.0;
  const double h_min = 1e-12 * span;
  const double target = mu + dt;

  double t = mu;
  double h = sign * span / 16.0;
  double prev_ratio = 1.0;
  long rejected = 0;

  std::array<CMatrix, rkf78::kStages> k;
  while (sign * (target - t) > 0.0) {
    if (std::abs(h) < h_min) h = sign * h_min;
    if (std::abs(h) > std::abs(target - t)) h = target - t;  // final sliver wins

    for (int i = 0; i < rkf78::kStages; ++i) {
      CMatrix y = res.U;
      for (int j = 0; j < i; ++j)
        if (rkf78::kA[i][j] != 0.0) y += (h * rkf78::kA[i][j]) * k[j];
      k[i] = ts.sum_at(t + rkf78::kC[i] * h) * y;
      if (!k[i].allFinite())
        throw std::runtime_error("ordered_exp: non-finite evaluation near lambda = " +
                                 std::to_string(t + rkf78::kC[i] * h));
    }

    const CMatrix err_mat =
        (h * rkf78::kErrWeight) * (k[0] + k[10] - k[11] - k[12]);
    const double err = err_mat.norm();
    const double allowed = tol * std::abs(h) / span;
    const double ratio = err > 0.0 ? err / allowed : 1e-8;
    const bool at_min = std::abs(h) <= h_min * (1.0 + 1e-9);

    if (ratio <= 1.0 || at_min) {
      CMatrix y = res.U;
      for (int i = 0; i < rkf78::kStages; ++i)
        if (rkf78::kB8[i] != 0.0) y += (h * rkf78::kB8[i]) * k[i];
      res.U = std::move(y);
      res.est_error += err;
      ++res.steps_taken;
      if (ratio > 1.0 && at_min) {
        if (res.min_step_hits == 0) res.first_min_step_lambda = t;
        ++res.min_step_hits;
      }
      t += h;
      const double fac =
          0.9 * std::pow(ratio, -0.7 / 8.0) * std::pow(prev_ratio, 0.4 / 8.0);
      h *= std::clamp(fac, 0.2, 5.0);
      prev_ratio = std::max(ratio, 1e-4);
    } else {
      ++rejected;
      h *= std::max(0.1, 0.9 * std::pow(ratio, -1.0 / 8.0));
    }
    if (res.steps_taken + rejected > 20'000'000)
      throw std::runtime_error("ordered_exp: step budget exhausted (stiffness or "
                               "singularity near lambda = " + std::to_string(t) + ")");
  }
  return res;
}

/// T_p as integer-weighted words over {H^(0), H^(1), ...}; a word [d0, d1, ...]
/// denotes the product H^(d0) H^(d1) ... in written order.
struct TaylorPolynomial {
  std::map<std::vector<int>, long long> words;
};

/// Symbolic T_0..T_P from the recursion T_{p+1} = T_p H + dT_p/du.
inline std::vector<TaylorPolynomial> taylor_words(int P) {
  if (P < 0 || P > 20) throw std::invalid_argument("taylor_words: P out of range");
  std::vector<TaylorPolynomial> out(static_cast<std::size_t>(P) + 1);
  out[0].words[{}] = 1;
  long long factorial = 1;
  for (int p = 0; p < P; ++p) {
    TaylorPolynomial next;
    for (const auto& [w, coeff] : out[p].words) {
      std::vector<int> appended = w;
      appended.push_back(0);
      next.words[appended] += coeff;
      for (std::size_t i = 0; i < w.size(); ++i) {
        std::vector<int> derived = w;
        derived[i] += 1;
        next.words[derived] += coeff;
      }
    }
    factorial *= (p + 1);
    long long multiplicity = 0;
    for (const auto& [w, coeff] : next.words) multiplicity += std::llabs(coeff);
    if (multiplicity > factorial)
      throw std::logic_error("taylor_words: term multiplicity exceeds p!");
    out[p + 1] = std::move(next);
  }
  return out;
}

namespace detail {

inline CMatrix eval_taylor_polynomial(const TaylorPolynomial& poly,
                                      const std::vector<CMatrix>& h_derivs, int dim) {
  CMatrix acc = CMatrix::Zero(dim, dim);
  for (const auto& [word, coeff] : poly.words) {
    CMatrix prod = identity(dim);
    for (int d : word) prod = prod * h_derivs.at(static_cast<std::size_t>(d));
    acc += static_cast<double>(coeff) * prod;
  }
  return acc;
}

inline std::vector<CMatrix> sum_derivatives(const TermSet& ts, double u, int up_to) {
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(up_to) + 1);
  for (int d = 0; d <= up_to; ++d) {
    CMatrix acc = ts.term(0).eval(u, d);
    for (int j = 1; j < ts.m(); ++j) acc += ts.term(j).eval(u, d);
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace detail

/// [T_0(mu), ..., T_P(mu)] evaluated; needs derivatives of H up to order P-1.
inline std::vector<CMatrix> taylor_terms(const TermSet& ts, double mu, int P) {
  if (P < 0) throw std::invalid_argument("taylor_terms: P must be >= 0");
  if (P >= 1 && ts.min_max_derivative() < P - 1)
    throw std::invalid_argument(
        "taylor_terms: derivatives beyond the declared smoothness class are required");
  const auto polys = taylor_words(P);
  const auto hd = P >= 1 ? detail::sum_derivatives(ts, mu, P - 1) : std::vector<CMatrix>{};
  std::vector<CMatrix> out;
  out.reserve(polys.size());
  for (const TaylorPolynomial& poly : polys)
    out.push_back(detail::eval_taylor_polynomial(poly, hd, ts.dim()));
  return out;
}

struct TruncationCheck {
  double lhs = 0.0;  // || U - sum_{p<=P} dt^p T_p / p! ||
  double rhs = 0.0;  // grid max of ||T_{P+1}(u) U(u,mu)|| dt^{P+1}/(P+1)!, inflated 1.1
};

/// Both sides of the Taylor-remainder inequality for the ordered exponential.
inline TruncationCheck truncation_bound_check(const TermSet& ts, double mu, double dt,
                                              int P, double oracle_tol = 1e-13) {
  if (dt <= 0.0) throw std::invalid_argument("truncation_bound_check: dt must be > 0");
  if (ts.min_max_derivative() < P)
    throw std::invalid_argument(
        "truncation_bound_check: T_{P+1} requires derivatives beyond the declared "
        "smoothness class");
  const int dim = ts.dim();

  const CMatrix u_full = ordered_exp(ts, mu, dt, oracle_tol).U;
  const auto tp = taylor_terms(ts, mu, P);
  CMatrix partial = CMatrix::Zero(dim, dim);
  double factorial = 1.0;
  for (int p = 0; p <= P; ++p) {
    if (p > 0) factorial *= p;
    partial += (std::pow(dt, p) / factorial) * tp[static_cast<std::size_t>(p)];
  }
  TruncationCheck out;
  out.lhs = spectral_norm(u_full - partial);

  const int grid = 65;
  const auto polys = taylor_words(P + 1);
  const auto& top = polys.back();
  CMatrix u_accum = identity(dim);
  double max_val = 0.0;
  double u_prev = mu;
  for (int i = 0; i < grid; ++i) {
    const double u = mu + dt * static_cast<double>(i) / (grid - 1);
    if (i > 0) u_accum = ordered_exp(ts, u_prev, u - u_prev, oracle_tol).U * u_accum;
    u_prev = u;
    const auto hd = detail::sum_derivatives(ts, u, P);
    const CMatrix t_next = detail::eval_taylor_polynomial(top, hd, dim);
    max_val = std::max(max_val, spectral_norm(t_next * u_accum));
  }
  double fact_p1 = 1.0;
  for (int p = 2; p <= P + 1; ++p) fact_p1 *= p;
  out.rhs = 1.1 * max_val * std::pow(dt, P + 1) / fact_p1;
  return out;
}

struct ConstantSegment {
  CMatrix h;
  double width;
};

/// Exact evolution for a piecewise-constant generator: product of ordinary
/// exponentials, later segments leftmost.
inline CMatrix piecewise_constant_exact(const std::vector<ConstantSegment>& segments) {
  if (segments.empty())
    throw std::invalid_argument("piecewise_constant_exact: no segments");
  CMatrix u = identity(segments.front().h.rows());
  for (const ConstantSegment& seg : segments) {
    if (!std::isfinite(seg.width))
      throw std::invalid_argument("piecewise_constant_exact: width must be finite");
    u = mat_exp(seg.h * seg.width) * u;
  }
  return u;
}

}  // namespace lts
