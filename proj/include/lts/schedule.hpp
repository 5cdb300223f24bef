#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace lts {

/// One factor exp(H_j(mu + v*dt) * q*dt) of a product formula.
struct ExpFactor {
  int term_index;  // j, 1-based
  double offset;   // v in [0, 1]
  double weight;   // q; negative inside time-reversed blocks
};

/// Product formula in first-applied-first order: factors[0] is the rightmost
/// factor of the operator product.
struct Schedule {
  int m = 0;
  int k = 0;
  std::vector<ExpFactor> factors;
};

/// Suzuki recursion coefficient s_p = (4 - 4^(1/(2p+1)))^-1, in (1/3, 1/2].
inline double s_coefficient(int p) {
  if (p < 1) throw std::invalid_argument("s_coefficient: p must be >= 1");
  return 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * p + 1.0)));
}

/// Symmetric splitting with 2m factors, all evaluated at the midpoint with
/// half weight; applied order is j = 1..m then j = m..1.
inline Schedule base_schedule(int m) {
  if (m < 1) throw std::invalid_argument("base_schedule: m must be >= 1");
  Schedule s;
  s.m = m;
  s.k = 1;
  s.factors.reserve(2 * static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j) s.factors.push_back({j, 0.5, 0.5});
  for (int j = m; j >= 1; --j) s.factors.push_back({j, 0.5, 0.5});
  return s;
}

/// One application of Suzuki's recursive method: five affinely rescaled copies
/// over [0,s], [s,2s], [2s,1-2s], [1-2s,1-s], [1-s,1] with s = s_coefficient(k).
/// The middle copy has signed width 1-4s < 0 (time-reversed block).
inline Schedule recurse(const Schedule& s) {
  if (s.m < 1 || s.k < 1 || s.factors.empty())
    throw std::invalid_argument("recurse: not a valid schedule");
  const double sp = s_coefficient(s.k);
  const double a[5] = {0.0, sp, 2.0 * sp, 1.0 - 2.0 * sp, 1.0 - sp};
  const double w[5] = {sp, sp, 1.0 - 4.0 * sp, sp, sp};
  Schedule out;
  out.m = s.m;
  out.k = s.k + 1;
  out.factors.reserve(s.factors.size() * 5);
  for (int b = 0; b < 5; ++b)
    for (const ExpFactor& f : s.factors)
      out.factors.push_back({f.term_index, a[b] + f.offset * w[b], f.weight * w[b]});
  return out;
}

inline std::int64_t expected_factor_count(int m, int k) {
  std::int64_t n = 2LL * m;
  for (int i = 1; i < k; ++i) n *= 5;
  return n;
}

/// k-th order product formula: base_schedule(m) with recurse applied k-1 times;
/// 2m*5^(k-1) factors.
inline Schedule lts_schedule(int m, int k) {
  if (m < 1) throw std::invalid_argument("lts_schedule: m must be >= 1");
  if (k < 1) throw std::invalid_argument("lts_schedule: k must be >= 1");
  if (k > 12)
    throw std::invalid_argument("lts_schedule: k > 12 overflows the practical factor budget");
  Schedule s = base_schedule(m);
  for (int p = 1; p < k; ++p) s = recurse(s);
  return s;
}

/// Q_k: largest |weight| over the schedule's factors.
inline double q_max(const Schedule& s) {
  double q = 0.0;
  for (const ExpFactor& f : s.factors) q = std::max(q, std::abs(f.weight));
  return q;
}

/// Q_k of the order-k formula (independent of m); generated once and cached.
inline double q_max_for_order(int k) {
  static std::mutex mtx;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  const double q = q_max(lts_schedule(1, k));
  cache.emplace(k, q);
  return q;
}

}  // namespace lts
