#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mixsel/errors.hpp"
#include "mixsel/kernels.hpp"
#include "mixsel/linalg.hpp"

// Batch evaluation scores over finished sample sets. These are the reporting
// metrics; the bandit-side streaming estimators live in objectives.hpp.

namespace mixsel {

struct GaussianMoments {
  Vector mean;
  Matrix cov;

  Eigen::Index dim() const { return mean.size(); }
};

// Empirical mean and covariance with 1/n normalization. The 1/n convention
// (not 1/(n-1)) is what makes the exact mixture identities hold.
inline GaussianMoments moments_of(const std::vector<Vector>& samples) {
  if (samples.empty()) throw EmptyInput("moments_of: no samples");
  const auto n = static_cast<double>(samples.size());
  const auto d = samples.front().size();
  Vector mean = Vector::Zero(d);
  Matrix second = Matrix::Zero(d, d);
  for (const Vector& x : samples) {
    if (x.size() != d) throw DimMismatch("moments_of: ragged sample dims");
    mean += x;
    second.noalias() += x * x.transpose();
  }
  mean /= n;
  second /= n;
  GaussianMoments out;
  out.mean = mean;
  out.cov = symmetrize(second - mean * mean.transpose());
  return out;
}

// Gaussian moment-matching distance:
//   ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2}).
inline double frechet_distance(const GaussianMoments& a,
                               const GaussianMoments& b) {
  if (a.dim() != b.dim())
    throw DimMismatch("frechet_distance: dimension mismatch");
  const Matrix sqrt_a = psd_fn(a.cov, PsdFn::Sqrt, 0.0);
  const Matrix inner = symmetrize(sqrt_a * b.cov * sqrt_a);
  const Matrix cross = psd_fn(inner, PsdFn::Sqrt, 0.0);
  const double fd = (a.mean - b.mean).squaredNorm() + a.cov.trace() +
                    b.cov.trace() - 2.0 * cross.trace();
  return std::max(fd, 0.0);
}

// Squared MMD, V-statistic plug-in (pairs including i == j), so that
// KD(P, P) == 0 exactly on identical sample multisets.
inline double kernel_distance(const KernelSpec& spec,
                              const std::vector<Vector>& xs,
                              const std::vector<Vector>& ys) {
  if (xs.empty() || ys.empty()) throw EmptyInput("kernel_distance: empty set");
  const auto nx = xs.size(), ny = ys.size();
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nx; ++j) kxx += kernel_eval(spec, xs[i], xs[j]);
  for (std::size_t i = 0; i < ny; ++i)
    for (std::size_t j = 0; j < ny; ++j) kyy += kernel_eval(spec, ys[i], ys[j]);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) kxy += kernel_eval(spec, xs[i], ys[j]);
  return kxx / double(nx * nx) + kyy / double(ny * ny) -
         2.0 * kxy / double(nx * ny);
}

inline void require_unit_diagonal(const Matrix& k, double tol = 1e-8) {
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    if (std::abs(k(i, i) - 1.0) > tol)
      throw NotNormalized("Gram matrix diagonal entry differs from 1");
}

// Von Neumann entropy of a unit-trace PSD matrix, 0 log 0 := 0.
inline double von_neumann_entropy(const Matrix& rho,
                                  double clamp = kDefaultEigClamp) {
  const EigenDecomposition ed = sym_eig(rho);
  double h = 0.0;
  for (Eigen::Index i = 0; i < ed.eigenvalues.size(); ++i) {
    const double lam = ed.eigenvalues(i);
    if (lam > clamp) h -= lam * std::log(lam);
  }
  return h;
}

// Exponential of the VNE of K/n. Ranges over [1, n].
inline double vendi_score(const Matrix& k, Eigen::Index n) {
  if (k.rows() != n || k.cols() != n)
    throw DimMismatch("vendi_score: Gram matrix is not n x n");
  require_unit_diagonal(k);
  return std::exp(von_neumann_entropy(k / static_cast<double>(n)));
}

// Empirical mode counts: inv_rke = ||K||_F^2 / n^2, rke = n^2 / ||K||_F^2.
inline double inv_rke(const Matrix& k, Eigen::Index n) {
  if (k.rows() != n || k.cols() != n)
    throw DimMismatch("inv_rke: Gram matrix is not n x n");
  return k.squaredNorm() / (static_cast<double>(n) * static_cast<double>(n));
}

inline double rke(const Matrix& k, Eigen::Index n) {
  return 1.0 / inv_rke(k, n);
}

}  // namespace mixsel
