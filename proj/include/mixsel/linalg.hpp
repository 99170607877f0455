#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "mixsel/errors.hpp"

// Deterministic primitives for symmetric PSD matrices. Decompositions go
// through Eigen's self-adjoint solver, which is deterministic for fixed
// input bits.

namespace mixsel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kNegativeDustTol = 1e-8;
inline constexpr double kDefaultEigClamp = 1e-12;

struct EigenDecomposition {
  Vector eigenvalues;   // sorted descending
  Matrix eigenvectors;  // columns, orthonormal, aligned with eigenvalues
};

inline bool is_symmetric(const Matrix& m, double tol = kSymmetryTol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

inline void require_symmetric(const Matrix& m, double tol = kSymmetryTol) {
  if (m.rows() != m.cols())
    throw InvalidMatrix("matrix is not square: " + std::to_string(m.rows()) +
                        "x" + std::to_string(m.cols()));
  if (!is_symmetric(m, tol))
    throw InvalidMatrix("matrix is not symmetric within tolerance");
}

// Spectral decomposition with eigenvalues sorted descending.
inline EigenDecomposition sym_eig(const Matrix& m) {
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw InvalidMatrix("eigendecomposition failed to converge");
  const auto n = m.rows();
  EigenDecomposition out;
  out.eigenvalues = Vector(n);
  out.eigenvectors = Matrix(n, n);
  // Eigen returns ascending order; flip.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

enum class PsdFn { Sqrt, InvSqrt, Log };

// V f(max(lambda, clamp)) V^T for f in {sqrt, 1/sqrt, log}. Negative
// round-off dust above -1e-8 is flattened to zero before applying f;
// anything more negative means the input was not PSD and is rejected.
inline Matrix psd_fn(const Matrix& m, PsdFn fn,
                     double clamp = kDefaultEigClamp) {
  EigenDecomposition ed = sym_eig(m);
  Vector lam = ed.eigenvalues;
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < -kNegativeDustTol * scale)
      throw InvalidMatrix("matrix has a significantly negative eigenvalue: " +
                          std::to_string(lam(i)));
    if (lam(i) < 0.0) lam(i) = 0.0;
  }
  Vector flam(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    double x = std::max(lam(i), clamp);
    switch (fn) {
      case PsdFn::Sqrt:
        flam(i) = std::sqrt(x);
        break;
      case PsdFn::InvSqrt:
        if (x <= 0.0)
          throw SingularMatrix("inv_sqrt of a singular matrix with clamp=0");
        flam(i) = 1.0 / std::sqrt(x);
        break;
      case PsdFn::Log:
        if (x <= 0.0)
          throw SingularMatrix("log of a singular matrix with clamp=0");
        flam(i) = std::log(x);
        break;
    }
  }
  return ed.eigenvectors * flam.asDiagonal() * ed.eigenvectors.transpose();
}

// Sum of absolute eigenvalues.
inline double trace_norm(const Matrix& m) {
  return sym_eig(m).eigenvalues.cwiseAbs().sum();
}

// Projection onto the PSD cone: negative eigenvalues clamped to zero.
// Output is bitwise symmetric.
inline Matrix psd_project(const Matrix& m) {
  EigenDecomposition ed = sym_eig(m);
  Vector lam = ed.eigenvalues.cwiseMax(0.0);
  Matrix p = ed.eigenvectors * lam.asDiagonal() * ed.eigenvectors.transpose();
  return 0.5 * (p + p.transpose());
}

// Symmetrize away round-off: (m + m^T) / 2.
inline Matrix symmetrize(const Matrix& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace mixsel
