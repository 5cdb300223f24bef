// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lts/evaluator.hpp"
#include "lts/harness.hpp"
#include "lts/json_io.hpp"
#include "lts/oracle.hpp"

using namespace lts;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<void()>& body) {
  try {
    body();
    std::printf("[PASS] criterion %2d: %s\n", number, label.c_str());
  } catch (const std::exception& e) {
    std::printf("[FAIL] criterion %2d: %s -- %s\n", number, label.c_str(), e.what());
    ++g_failures;
  }
  std::fflush(stdout);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double timed_slope(const std::string& system, int k, const std::vector<double>& grid,
                   double* seconds) {
  const TermSet ts = make_system(system);
  const auto t0 = std::chrono::steady_clock::now();
  const ConvergenceReport rep = order_study(system, ts, k, 0.0, grid, 1e-13);
  *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep.fitted_slope;
}

const std::vector<double> kFig1Grid = log_grid(std::pow(10.0, -2.5), std::pow(10.0, -0.5), 12);

}  // namespace

int main() {
  criterion(1, "fig1b order study at k=2 has slope 5.0 +- 0.3 in under 30 s", [] {
    double secs = 0.0;
    const double slope = timed_slope("fig1b", 2, kFig1Grid, &secs);
    require(std::abs(slope - 5.0) <= 0.3, "slope " + fmt(slope) + " outside 5.0 +- 0.3");
    require(secs < 30.0, "runtime " + fmt(secs) + " s exceeds 30 s");
  });

  criterion(2, "fig1a order study at k=2 degrades to slope 4.0 +- 0.3 in under 60 s", [] {
    double secs = 0.0;
    const double slope = timed_slope("fig1a", 2, kFig1Grid, &secs);
    require(std::abs(slope - 4.0) <= 0.3, "slope " + fmt(slope) + " outside 4.0 +- 0.3");
    require(secs < 60.0, "runtime " + fmt(secs) + " s exceeds 60 s");
  });

  criterion(3, "fig1b slopes follow the 2k+1 ladder: 3, 5, 7 each +- 0.3", [] {
    double secs = 0.0;
    const double s1 = timed_slope("fig1b", 1, kFig1Grid, &secs);
    const double s2 = timed_slope("fig1b", 2, kFig1Grid, &secs);
    const double s3 = timed_slope(
        "fig1b", 3, log_grid(std::pow(10.0, -1.4), std::pow(10.0, -0.5), 10), &secs);
    require(std::abs(s1 - 3.0) <= 0.3, "k=1 slope " + fmt(s1) + " outside 3.0 +- 0.3");
    require(std::abs(s2 - 5.0) <= 0.3, "k=2 slope " + fmt(s2) + " outside 5.0 +- 0.3");
    require(std::abs(s3 - 7.0) <= 0.3, "k=3 slope " + fmt(s3) + " outside 7.0 +- 0.3");
    require(s1 < s2 && s2 < s3, "slopes are not increasing with k");
  });

  criterion(4, "Q_k lies in [1.5/3^k, 2k/3^k] for k = 1..10 and Q_1 = 1/2", [] {
    for (int k = 1; k <= 10; ++k) {
      const double q = q_max_for_order(k);
      const auto [lower, upper] = qk_bounds(k);
      require(q >= lower && q <= upper,
              "k=" + std::to_string(k) + ": Q_k=" + fmt(q) + " outside [" + fmt(lower) +
                  ", " + fmt(upper) + "]");
    }
    require(std::abs(q_max_for_order(1) - 0.5) <= 1e-15, "Q_1 != 1/2");
  });

  criterion(5, "factor count 2m 5^(k-1), per-term weight sums 1 (m <= 4, k <= 5)", [] {
    for (int m = 1; m <= 4; ++m)
      for (int k = 1; k <= 5; ++k) {
        const Schedule s = lts_schedule(m, k);
        require(static_cast<std::int64_t>(s.factors.size()) == expected_factor_count(m, k),
                "factor count mismatch at m=" + std::to_string(m) +
                    " k=" + std::to_string(k));
        std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
        for (const ExpFactor& f : s.factors)
          sums[static_cast<std::size_t>(f.term_index - 1)] += f.weight;
        for (double sum : sums)
          require(std::abs(sum - 1.0) <= 1e-12,
                  "weight sum " + fmt(sum) + " at m=" + std::to_string(m) +
                      " k=" + std::to_string(k));
      }
  });

  criterion(6, "symmetry defect <= 1e-10 for all built-ins, k <= 3, dt = 0.3", [] {
    for (const char* key :
         {"fig1a", "fig1b", "pauli-flip", "random-hermitian", "random-antihermitian"}) {
      const TermSet ts = make_system(key, 1, 4, 2);
      for (int k = 1; k <= 3; ++k) {
        const double d = symmetry_defect(lts_schedule(ts.m(), k), ts, 0.0, 0.3);
        require(d <= 1e-10, std::string(key) + " k=" + std::to_string(k) +
                                ": defect " + fmt(d));
      }
    }
  });

  criterion(7, "single-step error within the a-priori bound on 10 seeds, k = 1, 2 (zero violations)", [] {
    int valid_rows = 0;
    for (int k : {1, 2}) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const TermSet ts = make_system("random-antihermitian", seed, 4, 2);
        const double lam0 = estimate_lambda(ts, 0.0, 0.5, 2 * k).lambda;
        const double dt_max =
            0.5 / (2.0 * std::sqrt(2.0) * pow5(k - 1) * q_max_for_order(k) * lam0);
        const auto rep =
            bound_sweep_terms(ts, k, 0.0, log_grid(dt_max / 100.0, dt_max, 9), seed);
        for (const BoundSweepRow& row : rep.rows) {
          if (!row.valid) continue;
          ++valid_rows;
          require(row.error <= row.bound,
                  "seed " + std::to_string(seed) + " k=" + std::to_string(k) +
                      " dt=" + fmt(row.dt) + ": error " + fmt(row.error) + " > bound " +
                      fmt(row.bound));
        }
      }
    }
    require(valid_rows >= 150, "too few valid rows: " + std::to_string(valid_rows));
  });

  criterion(8, "segmented error within epsilon at the planned segment count (zero violations)", [] {
    for (int k : {1, 2}) {
      for (double eps : {1e-3, 1e-5}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
          const TermSet ts = make_system("random-antihermitian", seed, 4, 2);
          const double lambda = estimate_lambda(ts, 0.0, 1.0, 2 * k).lambda;
          const SegmentCount sc = segment_count(k, lambda, 1.0, eps);
          require(sc.valid, "hypothesis unexpectedly invalid");
          const CMatrix approx = segmented_apply(lts_schedule(2, k), ts, 0.0, 1.0, sc.r);
          const CMatrix exact = ordered_exp(ts, 0.0, 1.0, 1e-13).U;
          const double err = spectral_norm(approx - exact);
          require(err <= eps, "seed " + std::to_string(seed) + " k=" + std::to_string(k) +
                                  " eps=" + fmt(eps) + ": error " + fmt(err) + " with r=" +
                                  std::to_string(sc.r));
        }
      }
    }
  });

  criterion(9, "200 perturbed unitary products stay within 2 delta", [] {
    Rng rng(987);
    for (int trial = 0; trial < 200; ++trial) {
      const int P = 1 + static_cast<int>(rng.uniform() * 64);
      const double delta = 0.5 * std::max(rng.uniform(), 1e-3);
      const int dim = 2 + static_cast<int>(rng.uniform() * 5);
      CMatrix prod_a = identity(dim);
      CMatrix prod_b = identity(dim);
      for (int p = 0; p < P; ++p) {
        CMatrix gauss(dim, dim);
        for (int r = 0; r < dim; ++r)
          for (int c = 0; c < dim; ++c) gauss(r, c) = rng.cnormal();
        const CMatrix a = Eigen::HouseholderQR<CMatrix>(gauss).householderQ();
        CMatrix c(dim, dim);
        for (int r = 0; r < dim; ++r)
          for (int cc = 0; cc < dim; ++cc) c(r, cc) = rng.cnormal();
        c /= spectral_norm(c);
        prod_a = a * prod_a;
        prod_b = (a + (delta / P) * c) * prod_b;
      }
      const double dev = spectral_norm(prod_a - prod_b);
      require(dev <= 2.0 * delta,
              "trial " + std::to_string(trial) + ": deviation " + fmt(dev) + " > 2 delta " +
                  fmt(2.0 * delta));
    }
  });

  criterion(10, "Taylor remainder lhs <= rhs at P = 1, 2 and dt in {0.05, 0.1, 0.2}", [] {
    for (const char* key : {"fig1b", "random-hermitian", "random-antihermitian"}) {
      const TermSet ts = make_system(key, 1, 4, 2);
      for (int P : {1, 2})
        for (double dt : {0.05, 0.1, 0.2}) {
          const TruncationCheck chk = truncation_bound_check(ts, 0.0, dt, P);
          require(chk.lhs <= chk.rhs, std::string(key) + " P=" + std::to_string(P) +
                                          " dt=" + fmt(dt) + ": lhs " + fmt(chk.lhs) +
                                          " > rhs " + fmt(chk.rhs));
        }
    }
    // fig1a only admits P=1; the declared smoothness rejects P=2.
    const TermSet rough = make_system("fig1a");
    for (double dt : {0.05, 0.1, 0.2}) {
      const TruncationCheck chk = truncation_bound_check(rough, 0.0, dt, 1);
      require(chk.lhs <= chk.rhs, "fig1a P=1 dt=" + fmt(dt) + ": lhs " + fmt(chk.lhs) +
                                      " > rhs " + fmt(chk.rhs));
    }
    bool rejected = false;
    try {
      truncation_bound_check(rough, 0.0, 0.1, 2);
    } catch (const std::invalid_argument&) {
      rejected = true;
    }
    require(rejected, "fig1a at P=2 was not rejected");
    rejected = false;
    try {
      truncation_bound_check(make_system("pauli-flip"), 0.0, 0.1, 1);
    } catch (const std::invalid_argument&) {
      rejected = true;
    }
    require(rejected, "pauli-flip at P=1 was not rejected");
  });

  criterion(11, "planner arithmetic: N = 54, r = 37, order selection, budget vs k", [] {
    const ExponentialBudget eb = exponential_budget(1, 1, 1.0, 1.0, 0.1);
    require(eb.n == 54, "exponential_budget(1,1,1,1,0.1) = " + std::to_string(eb.n));
    require(eb.valid, "budget hypothesis flag");
    const SegmentCount sc = segment_count(1, 1.0, 1.0, 0.01);
    require(sc.r == 37, "segment_count(1,1,1,0.01) = " + std::to_string(sc.r));
    require(sc.valid, "segment hypothesis flag");

    const double base = 25.0 / 3.0;
    for (int P : {1, 3, kUnboundedDerivatives}) {
      const int k_small = choose_order(1.0, base * base, 1.0, P);
      require(k_small == std::min(P, 1), "choose_order at (25/3)^2 with P");
      const int k_large = choose_order(1.0, std::pow(base, 8), 1.0, P);
      require(k_large == std::min(P, 2), "choose_order at (25/3)^8 with P");
    }

    // at Lambda dt / eps = (25/3)^8 stepping k from 1 to the selected order
    // lowers the per-unit exponential budget
    const double dt = std::pow(base, 8);
    const int k0 = choose_order(1.0, dt, 1.0);
    require(k0 == 2, "selected order at (25/3)^8");
    const long long n1 = exponential_budget(1, 1, 1.0, dt, 1.0).n;
    const long long nk = exponential_budget(1, k0, 1.0, dt, 1.0).n;
    require(nk < n1, "budget did not decrease from k=1 to k=k0");
  });

  criterion(12, "sign-flip demo closed form to 1e-12 and the kappa-shift round trip", [] {
    const AppendixBReport rep = appendix_b_demo(0.01, 2.0);
    require(rep.max_entry_diff <= 1e-12,
            "entrywise mismatch " + fmt(rep.max_entry_diff));
    require(std::abs(rep.growth_ratio - std::exp(2.0)) <= 0.01 * std::exp(2.0),
            "growth ratio " + fmt(rep.growth_ratio));

    // constant kappa: K = 1 and exp(int kappa) * (shifted product) rebuilds
    // the plain segmented product
    struct Case {
      const char* key;
      int m;
      int k;
    };
    for (const Case c : {Case{"fig1b", 1, 1}, Case{"random-hermitian", 2, 2}}) {
      const TermSet ts = make_system(c.key, 1, 4, c.m);
      const Schedule s = lts_schedule(ts.m(), c.k);
      NormalizationSpec norm;
      norm.kappa = [](double) { return 0.7; };
      const NormalizedResult res = normalized_apply(s, ts, norm, 0.0, 0.8, 3);
      require(std::abs(res.K - 1.0) <= 1e-12,
              std::string(c.key) + ": K = " + fmt(res.K));
      const CMatrix plain = segmented_apply(s, ts, 0.0, 0.8, 3);
      const double diff =
          spectral_norm(std::exp(res.kappa_integral) * res.U - res.K * plain);
      require(diff <= 1e-12, std::string(c.key) + ": round trip differs by " + fmt(diff));
    }
  });

  if (g_failures == 0) {
    std::printf("acceptance: all 12 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
