#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lts/matrix.hpp"
#include "lts/operator_model.hpp"
#include "lts/schedule.hpp"

namespace lts {

/// Applies the schedule to the term set over [mu, mu+dt]: the product of
/// mat_exp(H_{j_c}(mu + v_c dt) q_c dt), first factor rightmost. Accumulation
/// is strictly sequential in schedule order so runs reproduce bit-for-bit.
/// dt may be negative: that evaluates the schedule over the reversed interval.
inline CMatrix apply_schedule(const Schedule& s, const TermSet& ts, double mu, double dt) {
  if (s.m != ts.m())
    throw std::invalid_argument("apply_schedule: schedule and term set disagree on m");
  if (dt == 0.0 || !std::isfinite(dt) || !std::isfinite(mu))
    throw std::invalid_argument("apply_schedule: mu and dt must be finite, dt nonzero");
  CMatrix u = identity(ts.dim());
  for (const ExpFactor& f : s.factors) {
    const CMatrix h = ts.term(f.term_index - 1).eval(mu + f.offset * dt, 0);
    u = mat_exp(h * (f.weight * dt)) * u;
  }
  return u;
}

/// r consecutive single-segment applications over sub-intervals of width dt/r,
/// later segments acting on the left.
inline CMatrix segmented_apply(const Schedule& s, const TermSet& ts, double mu, double dt,
                               long long r) {
  if (r < 1) throw std::invalid_argument("segmented_apply: r must be >= 1");
  const double h = dt / static_cast<double>(r);
  CMatrix u = identity(ts.dim());
  for (long long q = 0; q < r; ++q)
    u = apply_schedule(s, ts, mu + static_cast<double>(q) * h, h) * u;
  return u;
}

struct NormalizationSpec {
  std::function<double(double)> kappa;
  double quadrature_tol = 1e-12;
  std::vector<double> breakpoints;  // declared discontinuities of kappa
};

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double fa, double b, double fb, double fm, double whole,
                                   double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth > 60)
    throw std::runtime_error("adaptive_simpson: failed to reach the requested tolerance");
  return adaptive_simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth + 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature honoring declared breakpoints.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, const std::vector<double>& breakpoints = {}) {
  if (a == b) return 0.0;
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> cuts = {lo};
  for (double x : breakpoints)
    if (x > lo && x < hi) cuts.push_back(x);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double x0 = cuts[i], x1 = cuts[i + 1];
    const double piece_tol = tol * std::max((x1 - x0) / (hi - lo), 1e-3);
    const double f0 = f(x0), f1 = f(x1), fm = f(0.5 * (x0 + x1));
    const double whole = detail::simpson(x0, f0, x1, f1, fm);
    total += detail::adaptive_simpson_rec(f, x0, f0, x1, f1, fm, whole, piece_tol, 0);
  }
  return sign * total;
}

struct NormalizedResult {
  CMatrix U;                       // product with the shifted terms H_j - (kappa/m) I
  double K = 1.0;                  // normalization correction
  double kappa_integral = 0.0;     // int_mu^{mu+dt} kappa
  double max_shifted_real_eig = 0; // spectrum diagnostic over a sample grid
  bool spectrum_ok = true;
};

/// Applies the schedule to the kappa-shifted terms H'_j = H_j - (kappa/m) I
/// over r segments and returns the product together with the correction
/// K = exp(int kappa - (1/m) sum_i kappa(lambda_i) dlambda_i); the unshifted
/// approximation is K times the unshifted product. The shifted spectrum is
/// only verified on a sample grid and reported, never fixed up.
inline NormalizedResult normalized_apply(const Schedule& s, const TermSet& ts,
                                         const NormalizationSpec& norm, double mu, double dt,
                                         long long r) {
  if (s.m != ts.m())
    throw std::invalid_argument("normalized_apply: schedule and term set disagree on m");
  if (r < 1) throw std::invalid_argument("normalized_apply: r must be >= 1");
  const int m = ts.m();
  const int dim = ts.dim();
  const auto& kappa = norm.kappa;
  if (!kappa) throw std::invalid_argument("normalized_apply: kappa is required");

  NormalizedResult out;
  out.U = identity(dim);
  const double h = dt / static_cast<double>(r);
  double factor_sum = 0.0;  // sum_i kappa(lambda_i) dlambda_i over all factors
  for (long long q = 0; q < r; ++q) {
    const double seg_mu = mu + static_cast<double>(q) * h;
    for (const ExpFactor& f : s.factors) {
      const double u = seg_mu + f.offset * h;
      const double w = f.weight * h;
      const CMatrix shifted =
          ts.term(f.term_index - 1).eval(u, 0) - (kappa(u) / m) * identity(dim);
      out.U = mat_exp(shifted * w) * out.U;
      factor_sum += kappa(u) * w;
    }
  }
  out.kappa_integral =
      adaptive_simpson(kappa, mu, mu + dt, norm.quadrature_tol, norm.breakpoints);
  out.K = std::exp(out.kappa_integral - factor_sum / m);

  const int grid = 33;
  double max_re = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double u = mu + dt * static_cast<double>(i) / (grid - 1);
    const CMatrix shifted_sum = ts.sum_at(u) - kappa(u) * identity(dim);
    Eigen::ComplexEigenSolver<CMatrix> es(shifted_sum, false);
    max_re = std::max(max_re, es.eigenvalues().real().maxCoeff());
  }
  out.max_shifted_real_eig = max_re;
  out.spectrum_ok = max_re <= 1e-9;
  return out;
}

/// || U~(mu+dt, mu) * U~(mu, mu+dt) - I ||, the operational test of a
/// symmetric decomposition. The reversed factor goes through the same code
/// path with negative dt.
inline double symmetry_defect(const Schedule& s, const TermSet& ts, double mu, double dt) {
  const CMatrix forward = apply_schedule(s, ts, mu, dt);
  const CMatrix reversed = apply_schedule(s, ts, mu + dt, -dt);
  return spectral_norm(forward * reversed - identity(ts.dim()));
}

}  // namespace lts
