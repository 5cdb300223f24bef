#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lts/bounds.hpp"
#include "lts/evaluator.hpp"
#include "lts/matrix.hpp"
#include "lts/oracle.hpp"
#include "lts/schedule.hpp"
#include "lts/systems.hpp"

namespace lts {

/// Ordinary least-squares slope of log y against log x.
inline double fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_slope: at least 3 points are required");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw std::invalid_argument("fit_slope: points must be positive");
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (sxx <= 1e-24) throw std::invalid_argument("fit_slope: degenerate x-range");
  return sxy / sxx;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 2 || lo <= 0.0 || hi <= lo)
    throw std::invalid_argument("log_grid: need n >= 2 and 0 < lo < hi");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double la = std::log10(lo), lb = std::log10(hi);
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        std::pow(10.0, la + (lb - la) * static_cast<double>(i) / (n - 1));
  return out;
}

/// Errors at or below this level are rounding, not decomposition error.
inline double noise_floor(int dim) {
  return 1e3 * std::numeric_limits<double>::epsilon() * dim;
}

struct SamplePoint {
  double dt = 0.0;
  double error = 0.0;
  double zeta = 0.0;  // error / dt^(2k+1)
  bool excluded = false;
};

struct ConvergenceReport {
  std::string system;
  int k = 0;
  double mu = 0.0;
  double oracle_tol = 0.0;
  std::vector<SamplePoint> samples;  // sorted by dt
  double fitted_slope = 0.0;
  double fitted_slope_stderr = 0.0;
  double fit_dt_min = 0.0;  // range actually used in the fit
  double fit_dt_max = 0.0;
};

/// Standard error of the OLS slope in log-log coordinates.
inline double fit_slope_stderr(const std::vector<std::pair<double, double>>& points,
                               double slope) {
  if (points.size() < 3) return 0.0;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, ssr = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    const double resid = (std::log(y) - my) - slope * dx;
    sxx += dx * dx;
    ssr += resid * resid;
  }
  return std::sqrt(ssr / (static_cast<double>(points.size()) - 2.0) / sxx);
}

/// Decomposition error against the oracle across a dt grid, with the fitted
/// empirical order. Grid points run concurrently; the report is assembled in
/// dt order so output is deterministic. A nonnegative floor_override replaces
/// the default rounding floor.
inline ConvergenceReport order_study(const std::string& system_name, const TermSet& ts,
                                     int k, double mu, std::vector<double> dt_grid,
                                     double oracle_tol, double floor_override = -1.0) {
  if (dt_grid.size() < 8)
    throw std::invalid_argument("order_study: need at least 8 grid points");
  std::sort(dt_grid.begin(), dt_grid.end());
  const Schedule sched = lts_schedule(ts.m(), k);
  const double floor_level = floor_override >= 0.0 ? floor_override : noise_floor(ts.dim());

  std::vector<std::future<double>> jobs;
  jobs.reserve(dt_grid.size());
  for (double dt : dt_grid)
    jobs.push_back(std::async(std::launch::async, [&, dt]() {
      const CMatrix approx = apply_schedule(sched, ts, mu, dt);
      const CMatrix exact = ordered_exp(ts, mu, dt, oracle_tol).U;
      return spectral_norm(approx - exact);
    }));

  ConvergenceReport rep;
  rep.system = system_name;
  rep.k = k;
  rep.mu = mu;
  rep.oracle_tol = oracle_tol;
  rep.samples.reserve(dt_grid.size());
  for (std::size_t i = 0; i < dt_grid.size(); ++i) {
    SamplePoint pt;
    pt.dt = dt_grid[i];
    pt.error = jobs[i].get();
    pt.zeta = pt.error / std::pow(pt.dt, 2 * k + 1);
    pt.excluded = !(pt.error > floor_level);
    rep.samples.push_back(pt);
  }

  std::vector<std::pair<double, double>> used;
  for (const SamplePoint& pt : rep.samples)
    if (!pt.excluded) used.emplace_back(pt.dt, pt.error);
  if (used.size() < 3)
    throw std::runtime_error(
        "order_study: all but " + std::to_string(used.size()) +
        " samples sit at the rounding floor; raise the dt grid");
  rep.fitted_slope = fit_slope(used);
  rep.fitted_slope_stderr = fit_slope_stderr(used, rep.fitted_slope);
  rep.fit_dt_min = used.front().first;
  rep.fit_dt_max = used.back().first;
  return rep;
}

struct BoundSweepRow {
  std::uint64_t seed = 0;
  double dt = 0.0;
  double lambda = 0.0;
  double error = 0.0;
  double bound = 0.0;
  bool valid = false;
  double margin = 0.0;  // bound / error
  bool excluded = false;
  bool violation = false;
};

struct BoundSweepReport {
  int k = 0;
  std::vector<BoundSweepRow> rows;
  int violations = 0;
};

/// One system's sweep: measured single-step error against the a-priori bound,
/// with Lambda re-estimated on each row's own interval.
inline BoundSweepReport bound_sweep_terms(const TermSet& ts, int k, double mu,
                                          const std::vector<double>& dt_grid,
                                          std::uint64_t seed_label = 0,
                                          double oracle_tol = 2.5e-14) {
  BoundSweepReport rep;
  rep.k = k;
  const Schedule sched = lts_schedule(ts.m(), k);
  const double floor_level = noise_floor(ts.dim());
  std::vector<std::future<BoundSweepRow>> jobs;
  for (double dt : dt_grid)
    jobs.push_back(std::async(std::launch::async, [&, dt]() {
      BoundSweepRow row;
      row.seed = seed_label;
      row.dt = dt;
      row.lambda = estimate_lambda(ts, mu, dt, 2 * k).lambda;
      const SingleStepBound b = single_step_bound(k, row.lambda, dt);
      row.bound = b.bound;
      row.valid = b.valid;
      const CMatrix approx = apply_schedule(sched, ts, mu, dt);
      const CMatrix exact = ordered_exp(ts, mu, dt, oracle_tol).U;
      row.error = spectral_norm(approx - exact);
      row.margin = row.error > 0.0 ? row.bound / row.error
                                   : std::numeric_limits<double>::infinity();
      row.excluded = !(row.error > floor_level);
      row.violation = row.valid && row.error > row.bound;
      return row;
    }));
  for (auto& job : jobs) {
    rep.rows.push_back(job.get());
    if (rep.rows.back().violation) ++rep.violations;
  }
  return rep;
}

/// Sweep over seeded contractive systems. Rows with valid hypotheses assert
/// error <= bound; any violation is fatal for the study.
inline BoundSweepReport bound_sweep(const std::string& system_key, int k, double mu,
                                    const std::vector<double>& dt_grid,
                                    const std::vector<std::uint64_t>& seeds, int dim = 4,
                                    int m = 2, double oracle_tol = 2.5e-14) {
  BoundSweepReport rep;
  rep.k = k;
  for (std::uint64_t seed : seeds) {
    const TermSet ts = make_system(system_key, seed, dim, m);
    const BoundSweepReport one = bound_sweep_terms(ts, k, mu, dt_grid, seed, oracle_tol);
    rep.rows.insert(rep.rows.end(), one.rows.begin(), one.rows.end());
    rep.violations += one.violations;
  }
  return rep;
}

struct AppendixBReport {
  double delta = 0.0;
  double dt = 0.0;
  CMatrix computed;
  CMatrix expected;
  double max_entry_diff = 0.0;
  double growth_ratio = 0.0;           // dominant entry, dt doubled vs dt
  double expected_growth_ratio = 0.0;  // e^dt
  bool pass = false;
};

/// The sign-flip example: evolve by sigma_z for dt/2, inject the error
/// exp(i delta sigma_y), evolve by -sigma_z for dt/2. The exact product has a
/// matrix element growing like e^dt even though the unperturbed evolution is
/// the identity.
inline AppendixBReport appendix_b_demo(double delta, double dt) {
  if (!(delta >= 0.0 && delta < M_PI_2))
    throw std::invalid_argument("appendix_b_demo: delta must lie in [0, pi/2)");
  if (!(dt > 0.0)) throw std::invalid_argument("appendix_b_demo: dt must be > 0");
  const CMatrix sz = pauli_z();
  const CMatrix err = mat_exp(Complex(0.0, delta) * pauli_y());

  auto product_for = [&](double width) {
    const CMatrix first = piecewise_constant_exact({{sz, width / 2.0}});
    const CMatrix second = piecewise_constant_exact({{CMatrix(-sz), width / 2.0}});
    return CMatrix(second * err * first);
  };

  AppendixBReport rep;
  rep.delta = delta;
  rep.dt = dt;
  rep.computed = product_for(dt);
  rep.expected = CMatrix(2, 2);
  rep.expected << std::cos(delta), std::exp(-dt) * std::sin(delta),
      -std::exp(dt) * std::sin(delta), std::cos(delta);
  rep.max_entry_diff = (rep.computed - rep.expected).cwiseAbs().maxCoeff();
  const CMatrix doubled = product_for(2.0 * dt);
  const double lower_left = std::abs(rep.computed(1, 0));
  rep.growth_ratio =
      lower_left > 0.0 ? std::abs(doubled(1, 0)) / lower_left
                       : std::numeric_limits<double>::quiet_NaN();
  rep.expected_growth_ratio = std::exp(dt);
  rep.pass = rep.max_entry_diff <= 1e-12;
  return rep;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// CSV schema: dt,error,zeta,excluded rows followed by `# slope=`, `# k=`,
/// `# system=` comment lines.
inline void write_order_study_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "dt,error,zeta,excluded\n";
  for (const SamplePoint& pt : rep.samples)
    os << detail::fmt_double(pt.dt) << ',' << detail::fmt_double(pt.error) << ','
       << detail::fmt_double(pt.zeta) << ',' << (pt.excluded ? 1 : 0) << '\n';
  os << "# slope=" << detail::fmt_double(rep.fitted_slope) << '\n';
  os << "# k=" << rep.k << '\n';
  os << "# system=" << rep.system << '\n';
}

inline void write_bound_sweep_csv(std::ostream& os, const BoundSweepReport& rep) {
  os << "seed,dt,lambda,error,bound,valid,margin,excluded,violation\n";
  for (const BoundSweepRow& r : rep.rows)
    os << r.seed << ',' << detail::fmt_double(r.dt) << ',' << detail::fmt_double(r.lambda)
       << ',' << detail::fmt_double(r.error) << ',' << detail::fmt_double(r.bound) << ','
       << (r.valid ? 1 : 0) << ',' << detail::fmt_double(r.margin) << ','
       << (r.excluded ? 1 : 0) << ',' << (r.violation ? 1 : 0) << '\n';
  os << "# k=" << rep.k << '\n';
  os << "# violations=" << rep.violations << '\n';
}

}  // namespace lts
