#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lts/matrix.hpp"
#include "lts/operator_model.hpp"

namespace lts {

/// Deterministic random source: mt19937_64 with explicit uniform and
/// Box-Muller transforms, so streams do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Complex cnormal() { return Complex(normal(), normal()); }

 private:
  std::mt19937_64 gen_;
};

inline CMatrix random_hermitian(Rng& rng, int dim, double norm_target) {
  CMatrix g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = rng.cnormal();
  CMatrix h = 0.5 * (g + g.adjoint());
  const double n = spectral_norm(h);
  if (n > 0.0) h *= norm_target / n;
  return h;
}

inline CMatrix random_antihermitian(Rng& rng, int dim, double norm_target) {
  return Complex(0.0, 1.0) * random_hermitian(rng, dim, norm_target);
}

namespace profiles {

inline double cos_cycle(double x, int p) {
  switch (p & 3) {
    case 0: return std::cos(x);
    case 1: return -std::sin(x);
    case 2: return -std::cos(x);
    default: return std::sin(x);
  }
}

inline double sin_cycle(double x, int p) {
  switch (p & 3) {
    case 0: return std::sin(x);
    case 1: return std::cos(x);
    case 2: return -std::sin(x);
    default: return -std::cos(x);
  }
}

// u^3 sin(1/u), continued by 0 at u = 0. Once differentiable there; the second
// derivative is unbounded near 0.
inline double u3sin1u(double u) { return u == 0.0 ? 0.0 : u * u * u * std::sin(1.0 / u); }

inline double u3sin1u_d1(double u) {
  if (u == 0.0) return 0.0;
  return 3.0 * u * u * std::sin(1.0 / u) - u * std::cos(1.0 / u);
}

}  // namespace profiles

/// Scalar lambda-profile with derivative access, identified by a catalog id.
struct ScalarProfile {
  std::string id;
  int max_derivative;
  double (*deriv)(double, int);  // (u, p) -> phi^(p)(u)
};

namespace profiles {

inline double p_const(double, int p) { return p == 0 ? 1.0 : 0.0; }
inline double p_linear(double u, int p) { return p == 0 ? u : (p == 1 ? 1.0 : 0.0); }
inline double p_cos(double u, int p) { return cos_cycle(u, p); }
inline double p_sin(double u, int p) { return sin_cycle(u, p); }
inline double p_sin2u(double u, int p) { return std::pow(2.0, p) * sin_cycle(2.0 * u, p); }
inline double p_u3sin1u(double u, int p) { return p == 0 ? u3sin1u(u) : u3sin1u_d1(u); }

}  // namespace profiles

inline const std::vector<ScalarProfile>& profile_catalog() {
  static const std::vector<ScalarProfile> catalog = {
      {"const", kUnboundedDerivatives, profiles::p_const},
      {"linear", kUnboundedDerivatives, profiles::p_linear},
      {"cos", kUnboundedDerivatives, profiles::p_cos},
      {"sin", kUnboundedDerivatives, profiles::p_sin},
      {"sin2u", kUnboundedDerivatives, profiles::p_sin2u},
      {"u3sin1u", 1, profiles::p_u3sin1u},
  };
  return catalog;
}

inline const ScalarProfile& profile_by_id(const std::string& id) {
  for (const ScalarProfile& p : profile_catalog())
    if (p.id == id) return p;
  throw std::invalid_argument("unknown scalar profile: " + id);
}

/// Term phi(u) * M for a cataloged profile and a fixed matrix.
inline OperatorTerm scalar_profile_term(const ScalarProfile& profile, const CMatrix& matrix) {
  require_square_finite(matrix, "scalar_profile_term");
  const int dim = static_cast<int>(matrix.rows());
  auto deriv = profile.deriv;
  return OperatorTerm::analytic(
      dim, [deriv, matrix](double u, int p) -> CMatrix { return deriv(u, p) * matrix; },
      profile.max_derivative);
}

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

namespace detail {

/// Trigonometric-polynomial term C0 + A1 cos u + B1 sin u + A2 cos 2u + B2 sin 2u
/// with coefficient matrices drawn Hermitian or anti-Hermitian.
inline OperatorTerm trig_poly_term(Rng& rng, int dim, bool antihermitian) {
  auto draw = [&](double target) {
    return antihermitian ? random_antihermitian(rng, dim, target)
                         : random_hermitian(rng, dim, target);
  };
  const CMatrix c0 = draw(0.3);
  const CMatrix a1 = draw(0.3);
  const CMatrix b1 = draw(0.3);
  const CMatrix a2 = draw(0.075);
  const CMatrix b2 = draw(0.075);
  return OperatorTerm::analytic(dim, [c0, a1, b1, a2, b2](double u, int p) -> CMatrix {
    CMatrix out = profiles::cos_cycle(u, p) * a1 + profiles::sin_cycle(u, p) * b1 +
                  std::pow(2.0, p) * profiles::cos_cycle(2.0 * u, p) * a2 +
                  std::pow(2.0, p) * profiles::sin_cycle(2.0 * u, p) * b2;
    if (p == 0) out += c0;
    return out;
  });
}

}  // namespace detail

/// Terms H_j - (scale * kappa(u) / m) I; the shift's own derivatives ride on
/// the cataloged profile, so the shifted set keeps derivative access.
inline TermSet kappa_shifted_terms(const TermSet& ts, const ScalarProfile& kappa,
                                   double scale = 1.0) {
  const int m = ts.m();
  const int dim = ts.dim();
  std::vector<OperatorTerm> shifted;
  shifted.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const OperatorTerm term = ts.term(j);
    const int max_d = std::min(term.max_derivative(), kappa.max_derivative);
    auto deriv = kappa.deriv;
    shifted.push_back(OperatorTerm::analytic(
        dim,
        [term, deriv, scale, m, dim](double u, int p) -> CMatrix {
          return term.eval(u, p) - (scale * deriv(u, p) / m) * identity(dim);
        },
        max_d));
  }
  return TermSet(std::move(shifted));
}

/// Built-in system registry. `fig1a` and `fig1b` are the dim-2
/// identity-proportional operators u^3 sin(1/u) and cos(u); `pauli-flip`
/// switches sigma_z to -sigma_z at u = 1/2; the `random-*` families are
/// seeded trigonometric-polynomial splits (the antihermitian one is
/// contractive and suits bound validation).
inline TermSet make_system(const std::string& key, std::uint64_t seed = 1, int dim = 4,
                           int m = 2) {
  if (key == "fig1a") {
    return TermSet({scalar_profile_term(profile_by_id("u3sin1u"), identity(2))});
  }
  if (key == "fig1b") {
    return TermSet({scalar_profile_term(profile_by_id("cos"), identity(2))});
  }
  if (key == "pauli-flip") {
    const CMatrix sz = pauli_z();
    return TermSet({OperatorTerm::sampled(
        2, [sz](double u) -> CMatrix { return u < 0.5 ? sz : CMatrix(-sz); },
        /*max_derivative=*/0)});
  }
  if (key == "random-hermitian" || key == "random-antihermitian") {
    if (dim < 1 || m < 1)
      throw std::invalid_argument("make_system: dim and m must be >= 1");
    Rng rng(seed);
    const bool anti = (key == "random-antihermitian");
    std::vector<OperatorTerm> terms;
    terms.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) terms.push_back(detail::trig_poly_term(rng, dim, anti));
    return TermSet(std::move(terms));
  }
  throw std::invalid_argument("unknown system key: " + key);
}

}  // namespace lts
