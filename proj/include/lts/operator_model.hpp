#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lts/matrix.hpp"

namespace lts {

inline constexpr int kUnboundedDerivatives = std::numeric_limits<int>::max();

enum class DerivativeMode { Analytic, FiniteDifference };

/// Finite-difference weights (Fornberg) for the d-th derivative at x = 0
/// given stencil nodes xs. Returns one weight per node.
inline std::vector<double> fd_weights(int d, const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  if (d < 0 || n < d + 1) throw std::invalid_argument("fd_weights: stencil too small");
  std::vector<std::vector<double>> c(n, std::vector<double>(d + 1, 0.0));
  double c1 = 1.0;
  double c4 = xs[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, d);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s)
          c[i][s] = c1 * (s * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int s = mn; s >= 1; --s) c[j][s] = (c4 * c[j][s] - s * c[j][s - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][d];
  return w;
}

/// A lambda-dependent matrix-valued term H_j(u) with derivative access up to a
/// declared order (its smoothness class).
class OperatorTerm {
 public:
  using AnalyticFn = std::function<CMatrix(double, int)>;  // (u, p) -> H^(p)(u)
  using ValueFn = std::function<CMatrix(double)>;          // u -> H(u)

  static OperatorTerm analytic(int dim, AnalyticFn fn,
                               int max_derivative = kUnboundedDerivatives) {
    OperatorTerm t;
    t.dim_ = dim;
    t.max_derivative_ = max_derivative;
    t.mode_ = DerivativeMode::Analytic;
    t.analytic_ = std::move(fn);
    t.check_dim();
    return t;
  }

  /// Value-only term; derivatives come from order-8 central stencils.
  static OperatorTerm sampled(int dim, ValueFn fn,
                              int max_derivative = kUnboundedDerivatives) {
    OperatorTerm t;
    t.dim_ = dim;
    t.max_derivative_ = max_derivative;
    t.mode_ = DerivativeMode::FiniteDifference;
    t.value_ = std::move(fn);
    t.check_dim();
    return t;
  }

  int dim() const { return dim_; }
  int max_derivative() const { return max_derivative_; }
  DerivativeMode derivative_mode() const { return mode_; }

  CMatrix eval(double u, int p = 0) const {
    if (p < 0) throw std::invalid_argument("OperatorTerm::eval: p must be >= 0");
    if (p > max_derivative_)
      throw std::invalid_argument(
          "OperatorTerm::eval: derivative order exceeds the declared smoothness class");
    CMatrix out;
    if (mode_ == DerivativeMode::Analytic) {
      out = analytic_(u, p);
    } else if (p == 0) {
      out = value_(u);
    } else {
      out = finite_difference(u, p);
    }
    if (out.rows() != dim_ || out.cols() != dim_)
      throw std::runtime_error("OperatorTerm::eval: wrong evaluation dimension");
    return out;
  }

 private:
  OperatorTerm() = default;

  void check_dim() const {
    if (dim_ < 1) throw std::invalid_argument("OperatorTerm: dim must be >= 1");
  }

  CMatrix finite_difference(double u, int p) const {
    // Central stencil with accuracy order >= 8; step balances truncation
    // against cancellation for the p-th derivative. Scaling by the local u
    // magnitude keeps the stencil inside the benign zone of profiles whose
    // derivatives blow up polynomially toward u = 0.
    const int npts = 2 * ((p + 8) / 2) + 1;
    const int half = (npts - 1) / 2;
    const double eps = std::numeric_limits<double>::epsilon();
    const double scale = std::clamp(std::abs(u), 0.01, 1.0);
    const double h = std::pow(eps, 1.0 / (p + 8)) * scale;
    std::vector<double> xs(npts);
    for (int i = 0; i < npts; ++i) xs[i] = (i - half) * h;
    const std::vector<double> w = fd_weights(p, xs);
    CMatrix acc = CMatrix::Zero(dim_, dim_);
    for (int i = 0; i < npts; ++i) acc += w[i] * value_(u + xs[i]);
    return acc;
  }

  int dim_ = 0;
  int max_derivative_ = 0;
  DerivativeMode mode_ = DerivativeMode::Analytic;
  AnalyticFn analytic_;
  ValueFn value_;
};

inline CMatrix evaluate_term(const OperatorTerm& term, double u, int p) {
  return term.eval(u, p);
}

/// The split H(u) = sum_j H_j(u); all terms share one dimension.
class TermSet {
 public:
  explicit TermSet(std::vector<OperatorTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("TermSet: m must be >= 1");
    for (const OperatorTerm& t : terms_)
      if (t.dim() != terms_.front().dim())
        throw std::invalid_argument("TermSet: all terms must share one dimension");
  }

  int m() const { return static_cast<int>(terms_.size()); }
  int dim() const { return terms_.front().dim(); }
  const OperatorTerm& term(int i) const { return terms_.at(static_cast<std::size_t>(i)); }

  int min_max_derivative() const {
    int p = kUnboundedDerivatives;
    for (const OperatorTerm& t : terms_) p = std::min(p, t.max_derivative());
    return p;
  }

  CMatrix sum_at(double u) const {
    CMatrix h = terms_.front().eval(u, 0);
    for (std::size_t j = 1; j < terms_.size(); ++j) h += terms_[j].eval(u, 0);
    return h;
  }

 private:
  std::vector<OperatorTerm> terms_;
};

/// sum_j ||H_j^(p)(u)||.
inline double sum_derivative_norms(const TermSet& ts, double u, int p) {
  double acc = 0.0;
  for (int j = 0; j < ts.m(); ++j) acc += spectral_norm(ts.term(j).eval(u, p));
  return acc;
}

struct SmoothnessEstimate {
  int P = 0;
  double lambda = 0.0;
  int grid_points = 0;
  double safety_factor = 1.0;
};

namespace detail {

/// Golden-section polish of a 1D maximum around a bracketing interval.
inline double polish_max(const std::function<double(double)>& f, double lo, double hi,
                         double seed_value) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  double best = std::max({seed_value, f1, f2});
  for (int it = 0; it < 60 && (b - a) > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

}  // namespace detail

/// Grid estimate of the smallest Lambda making {H_j} Lambda-P-smooth on
/// [mu, mu+dt]: max over p <= P and a sampled grid (with a local polish around
/// the best grid point) of (sum_j ||H_j^(p)(u)||)^(1/(p+1)), times a safety
/// factor. Heuristic: a sampled sup can undershoot the true one.
inline SmoothnessEstimate estimate_lambda(const TermSet& ts, double mu, double dt, int P,
                                          int grid_points = 257, double safety_factor = 1.05) {
  if (dt <= 0.0) throw std::invalid_argument("estimate_lambda: dt must be > 0");
  if (grid_points < 2) throw std::invalid_argument("estimate_lambda: grid too small");
  if (P < 0 || P > ts.min_max_derivative())
    throw std::invalid_argument(
        "estimate_lambda: P exceeds the declared smoothness of the term set");
  double lambda = 0.0;
  for (int p = 0; p <= P; ++p) {
    auto g = [&](double u) { return sum_derivative_norms(ts, u, p); };
    double best = 0.0;
    int best_i = 0;
    for (int i = 0; i < grid_points; ++i) {
      const double u = mu + dt * static_cast<double>(i) / (grid_points - 1);
      const double v = g(u);
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    const double h = dt / (grid_points - 1);
    const double lo = std::max(mu, mu + best_i * h - h);
    const double hi = std::min(mu + dt, mu + best_i * h + h);
    best = detail::polish_max(g, lo, hi, best);
    lambda = std::max(lambda, std::pow(best, 1.0 / (p + 1)));
  }
  SmoothnessEstimate est;
  est.P = P;
  est.lambda = safety_factor * lambda;
  est.grid_points = grid_points;
  est.safety_factor = safety_factor;
  return est;
}

}  // namespace lts
