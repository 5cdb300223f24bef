#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace lts {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline void require_square_finite(const CMatrix& a, const char* who) {
  if (a.rows() < 1 || a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square with dim >= 1");
  if (!a.allFinite())
    throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
}

inline CMatrix identity(Eigen::Index dim) { return CMatrix::Identity(dim, dim); }

/// e^A via scaling-and-squaring with a Pade kernel.
inline CMatrix mat_exp(const CMatrix& a) {
  require_square_finite(a, "mat_exp");
  return a.exp();
}

/// Largest singular value (2-norm), from the dominant eigenvalue of A^dagger A.
inline double spectral_norm(const CMatrix& a) {
  require_square_finite(a, "spectral_norm");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
  const double lam = es.eigenvalues().maxCoeff();
  return lam > 0.0 ? std::sqrt(lam) : 0.0;
}

}  // namespace lts
