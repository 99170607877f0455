#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsel/errors.hpp"
#include "mixsel/kernels.hpp"
#include "mixsel/linalg.hpp"
#include "mixsel/metrics.hpp"

// Empirical mixture losses and their gradients, evaluated from streaming
// per-arm statistics. Three families: Frechet distance via Gaussian moment
// matching, negative log-Vendi (kernel and feature forms), and convex
// quadratics with an optional bounded linear term.

namespace mixsel {

inline constexpr double kQMinClamp = 1e-12;

// -------------------------------------------------------------------------
// Mixture weights: a point on the m-simplex.

struct MixtureWeights {
  Vector v;

  explicit MixtureWeights(Vector w) : v(std::move(w)) { validate(); }

  static MixtureWeights uniform(int m) {
    return MixtureWeights(Vector::Constant(m, 1.0 / m));
  }
  static MixtureWeights vertex(int m, int i) {
    Vector w = Vector::Zero(m);
    w(i) = 1.0;
    return MixtureWeights(std::move(w));
  }
  // For internal construction of points already known to lie on the simplex.
  static MixtureWeights unchecked(Vector w) {
    MixtureWeights out;
    out.v = std::move(w);
    return out;
  }

  int size() const { return static_cast<int>(v.size()); }

  void validate() const {
    if (v.size() < 1) throw ConfigError("mixture weights: empty vector");
    if (v.minCoeff() < -1e-12)
      throw ConfigError("mixture weights: negative entry");
    if (std::abs(v.sum() - 1.0) > 1e-12)
      throw ConfigError("mixture weights: entries do not sum to 1");
  }

 private:
  MixtureWeights() = default;
};

// -------------------------------------------------------------------------
// Per-arm streaming moments.

struct ArmMomentStats {
  long count = 0;
  Vector mean;           // empirical mean
  Matrix second_moment;  // uncentered: (1/n) sum x x^T

  static ArmMomentStats zero(int dim) {
    ArmMomentStats s;
    s.mean = Vector::Zero(dim);
    s.second_moment = Matrix::Zero(dim, dim);
    return s;
  }

  void add_sample(const Vector& x) {
    ++count;
    const double w = 1.0 / static_cast<double>(count);
    mean += w * (x - mean);
    second_moment += w * (x * x.transpose() - second_moment);
  }
};

// mu(alpha) = sum_i alpha_i mu_i, Sigma(alpha) = sum_i alpha_i S_i - mu mu^T.
// Exact identities for the moments of the alpha-weighted pooled measure.
inline GaussianMoments mixture_moments(const MixtureWeights& alpha,
                                       const std::vector<ArmMomentStats>& stats) {
  if (static_cast<int>(stats.size()) != alpha.size())
    throw DimMismatch("mixture_moments: arm count mismatch");
  for (std::size_t i = 0; i < stats.size(); ++i)
    if (stats[i].count < 1)
      throw MissingWarmStart("mixture_moments: arm " + std::to_string(i) +
                             " has no samples");
  const auto d = stats.front().mean.size();
  Vector mu = Vector::Zero(d);
  Matrix s = Matrix::Zero(d, d);
  for (int i = 0; i < alpha.size(); ++i) {
    mu += alpha.v(i) * stats[i].mean;
    s += alpha.v(i) * stats[i].second_moment;
  }
  GaussianMoments out;
  out.mean = mu;
  out.cov = symmetrize(s - mu * mu.transpose());
  return out;
}

// -------------------------------------------------------------------------
// Frechet-distance family.

// Reference moments are computed once and frozen; the PSD square root of the
// reference covariance is cached because every loss and gradient needs it.
struct FdReference {
  GaussianMoments data;
  Matrix sqrt_cov;
  double min_eigenvalue = 0.0;

  static FdReference create(const GaussianMoments& data,
                            double lambda0 = 1e-10) {
    FdReference ref;
    ref.data = data;
    const EigenDecomposition ed = sym_eig(data.cov);
    ref.min_eigenvalue = ed.eigenvalues(ed.eigenvalues.size() - 1);
    if (ref.min_eigenvalue < lambda0)
      throw DegenerateReference(
          "reference covariance is not positive definite (min eigenvalue " +
          std::to_string(ref.min_eigenvalue) + ")");
    ref.sqrt_cov = psd_fn(data.cov, PsdFn::Sqrt, 0.0);
    return ref;
  }
};

inline double fd_loss(const MixtureWeights& alpha,
                      const std::vector<ArmMomentStats>& stats,
                      const FdReference& ref) {
  return frechet_distance(mixture_moments(alpha, stats), ref.data);
}

inline double fd_loss(const MixtureWeights& alpha,
                      const std::vector<ArmMomentStats>& stats,
                      const GaussianMoments& data) {
  return fd_loss(alpha, stats, FdReference::create(data));
}

// Gradient of the covariance part of the Frechet functional:
//   G(Sigma) = I - S0^{1/2} (S0^{1/2} Sigma S0^{1/2})^{-1/2} S0^{1/2}.
inline Matrix fd_sigma_gradient(const Matrix& sigma, const FdReference& ref,
                                double clamp = kDefaultEigClamp) {
  const Matrix inner = symmetrize(ref.sqrt_cov * sigma * ref.sqrt_cov);
  const Matrix inv_sqrt = psd_fn(inner, PsdFn::InvSqrt, clamp);
  const auto d = sigma.rows();
  return Matrix::Identity(d, d) - ref.sqrt_cov * inv_sqrt * ref.sqrt_cov;
}

// d/d alpha_i of the FD loss by the chain rule:
//   2 (mu - mu0)' mu_i + < G(Sigma), S_i - mu_i mu' - mu mu_i' >.
inline Vector fd_gradient(const MixtureWeights& alpha,
                          const std::vector<ArmMomentStats>& stats,
                          const FdReference& ref,
                          double clamp = kDefaultEigClamp) {
  const GaussianMoments mix = mixture_moments(alpha, stats);
  const Matrix g = fd_sigma_gradient(mix.cov, ref, clamp);
  const int m = alpha.size();
  Vector grad(m);
  for (int i = 0; i < m; ++i) {
    const Vector& mu_i = stats[i].mean;
    const Matrix dsigma = stats[i].second_moment -
                          mu_i * mix.mean.transpose() -
                          mix.mean * mu_i.transpose();
    grad(i) = 2.0 * (mix.mean - ref.data.mean).dot(mu_i) +
              (g.transpose() * dsigma).trace();
  }
  return grad;
}

inline Vector fd_gradient(const MixtureWeights& alpha,
                          const std::vector<ArmMomentStats>& stats,
                          const GaussianMoments& data) {
  return fd_gradient(alpha, stats, FdReference::create(data));
}

// -------------------------------------------------------------------------
// Pooled samples with arm provenance, optionally carrying the Gram matrix.

class PooledKernelState {
 public:
  PooledKernelState(int num_arms, KernelSpec spec, bool keep_gram)
      : spec_(spec), counts_(num_arms, 0), keep_gram_(keep_gram) {}

  void add(const Vector& x, int arm) {
    if (arm < 0 || arm >= static_cast<int>(counts_.size()))
      throw InconsistentState("pooled state: arm index out of range");
    if (keep_gram_) {
      const auto n = static_cast<Eigen::Index>(samples_.size());
      gram_.conservativeResize(n + 1, n + 1);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double v = kernel_eval(spec_, x, samples_[j]);
        gram_(n, j) = v;
        gram_(j, n) = v;
      }
      gram_(n, n) = kernel_eval(spec_, x, x);
    }
    samples_.push_back(x);
    arm_of_.push_back(arm);
    ++counts_[arm];
  }

  const std::vector<Vector>& samples() const { return samples_; }
  const std::vector<int>& arm_of() const { return arm_of_; }
  const std::vector<long>& counts() const { return counts_; }
  const KernelSpec& spec() const { return spec_; }
  int num_arms() const { return static_cast<int>(counts_.size()); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(samples_.size()); }

  const Matrix& gram() const {
    if (!keep_gram_)
      throw InconsistentState("pooled state was built without a Gram matrix");
    return gram_;
  }

 private:
  KernelSpec spec_;
  std::vector<Vector> samples_;
  std::vector<int> arm_of_;
  std::vector<long> counts_;
  bool keep_gram_;
  Matrix gram_;
};

// Per-sample weights q_j = alpha_{I_j} / n_{I_j}; nonnegative, sum to 1.
inline Vector nlv_weights(const MixtureWeights& alpha,
                          const PooledKernelState& pooled) {
  if (pooled.num_arms() != alpha.size())
    throw DimMismatch("nlv_weights: arm count mismatch");
  const auto n = pooled.size();
  Vector q(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int arm = pooled.arm_of()[j];
    const long cnt = pooled.counts()[arm];
    if (cnt < 1)
      throw InconsistentState("nlv_weights: pooled arm has zero count");
    q(j) = alpha.v(arm) / static_cast<double>(cnt);
  }
  return q;
}

inline Matrix nlv_density(const Vector& q, const Matrix& gram) {
  const Vector sq = q.cwiseMax(0.0).cwiseSqrt();
  return symmetrize(sq.asDiagonal() * gram * sq.asDiagonal());
}

// Tr(rho log rho) with rho = diag(q)^{1/2} K diag(q)^{1/2}; equals the
// negative log of the alpha-weighted Vendi score of the pool.
inline double nlv_loss_kernel(const MixtureWeights& alpha,
                              const PooledKernelState& pooled,
                              double clamp = kDefaultEigClamp) {
  const Vector q = nlv_weights(alpha, pooled);
  return -von_neumann_entropy(nlv_density(q, pooled.gram()), clamp);
}

// Gradient component i = sum_{j: I_j = i} (1/n_i) <log rho + I, d rho/d q_j>,
// which collapses to (K D L)_{jj} / sqrt(q_j) with D = diag(q)^{1/2} and
// L = log rho + I. q is clamped below at kQMinClamp: the derivative carries
// a 1/sqrt(q_j) factor that is singular at the simplex boundary.
inline Vector nlv_gradient_kernel(const MixtureWeights& alpha,
                                  const PooledKernelState& pooled,
                                  double clamp = kDefaultEigClamp) {
  const Vector q = nlv_weights(alpha, pooled).cwiseMax(kQMinClamp);
  const Matrix& k = pooled.gram();
  const Vector sq = q.cwiseSqrt();
  const Matrix rho = symmetrize(sq.asDiagonal() * k * sq.asDiagonal());
  const auto n = pooled.size();
  Matrix l = psd_fn(rho, PsdFn::Log, clamp);
  l.diagonal().array() += 1.0;
  const Matrix kdl = k * sq.asDiagonal() * l;
  Vector grad = Vector::Zero(alpha.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const int arm = pooled.arm_of()[j];
    grad(arm) += kdl(j, j) / sq(j) / static_cast<double>(pooled.counts()[arm]);
  }
  return grad;
}

// Feature-space covariance C(q) = sum_j q_j phi_j phi_j^T. Shares its
// nonzero spectrum with rho, so Tr(C log C) equals the kernel-form loss.
inline Matrix nlv_feature_covariance(const Vector& q,
                                     const std::vector<Vector>& embeddings) {
  const auto d = embeddings.front().size();
  Matrix c = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < embeddings.size(); ++j)
    c.noalias() += q(static_cast<Eigen::Index>(j)) * embeddings[j] *
                   embeddings[j].transpose();
  return symmetrize(c);
}

inline double nlv_loss_features(const MixtureWeights& alpha,
                                const PooledKernelState& pooled,
                                double clamp = kDefaultEigClamp) {
  const Vector q = nlv_weights(alpha, pooled);
  return -von_neumann_entropy(nlv_feature_covariance(q, pooled.samples()),
                              clamp);
}

inline Vector nlv_gradient_features(const MixtureWeights& alpha,
                                    const PooledKernelState& pooled,
                                    double clamp = kDefaultEigClamp) {
  const Vector q = nlv_weights(alpha, pooled);
  Matrix l = psd_fn(nlv_feature_covariance(q, pooled.samples()), PsdFn::Log,
                    clamp);
  l.diagonal().array() += 1.0;
  Vector grad = Vector::Zero(alpha.size());
  for (Eigen::Index j = 0; j < pooled.size(); ++j) {
    const int arm = pooled.arm_of()[j];
    const Vector& phi = pooled.samples()[j];
    grad(arm) += phi.dot(l * phi) / static_cast<double>(pooled.counts()[arm]);
  }
  return grad;
}

// Arm-statistics form of the feature path. C(alpha) = sum_i alpha_i S_i is
// algebraically identical to C(q(alpha)), so the loss and gradient can be
// evaluated from the per-arm second moments alone. This is the form the
// online loop uses: it avoids touching the pool at every EG step.
inline Matrix nlv_mixture_covariance(const MixtureWeights& alpha,
                                     const std::vector<ArmMomentStats>& stats) {
  const auto d = stats.front().second_moment.rows();
  Matrix c = Matrix::Zero(d, d);
  for (int i = 0; i < alpha.size(); ++i)
    c += alpha.v(i) * stats[i].second_moment;
  return symmetrize(c);
}

inline double nlv_loss_from_stats(const MixtureWeights& alpha,
                                  const std::vector<ArmMomentStats>& stats,
                                  double clamp = kDefaultEigClamp) {
  return -von_neumann_entropy(nlv_mixture_covariance(alpha, stats), clamp);
}

inline Vector nlv_gradient_from_stats(const MixtureWeights& alpha,
                                      const std::vector<ArmMomentStats>& stats,
                                      double clamp = kDefaultEigClamp) {
  Matrix l = psd_fn(nlv_mixture_covariance(alpha, stats), PsdFn::Log, clamp);
  l.diagonal().array() += 1.0;
  Vector grad(alpha.size());
  for (int i = 0; i < alpha.size(); ++i)
    grad(i) = (l.transpose() * stats[i].second_moment).trace();
  return grad;
}

// -------------------------------------------------------------------------
// Quadratic family: running pairwise-kernel averages.

enum class QuadMode { Kd, InvRke };

// Streaming estimate of the m x m pair-mean matrix K-hat, the KD cross term
// b-hat, and the fidelity averages theta-hat. Diagonal blocks are
// U-statistics (self-pairs excluded) so K-hat_ii estimates E[k(X, X')] for
// independent X, X'; off-diagonal blocks average all cross pairs.
class QuadEstimate {
 public:
  QuadEstimate(int num_arms, KernelSpec spec, QuadMode mode,
               std::vector<Vector> real_set = {}, double fidelity_tau = 0.0)
      : spec_(spec),
        mode_(mode),
        real_set_(std::move(real_set)),
        fidelity_tau_(fidelity_tau),
        samples_(num_arms),
        pair_sum_(Matrix::Zero(num_arms, num_arms)),
        pair_count_(Matrix::Zero(num_arms, num_arms)),
        cross_sum_(Vector::Zero(num_arms)),
        theta_sum_(Vector::Zero(num_arms)),
        counts_(num_arms, 0) {
    if (mode == QuadMode::Kd && real_set_.empty())
      throw ConfigError("kd mode requires a real reference set");
    if (fidelity_tau_ > 0.0 && real_set_.empty())
      throw ConfigError("fidelity term requires a real reference set");
  }

  void add(const Vector& x, int arm) {
    const int m = num_arms();
    if (arm < 0 || arm >= m)
      throw InconsistentState("quad estimate: arm index out of range");
    for (int b = 0; b < m; ++b) {
      for (const Vector& y : samples_[b]) {
        const double kv = kernel_eval(spec_, x, y);
        const double v = mode_ == QuadMode::InvRke ? kv * kv : kv;
        pair_sum_(arm, b) += v;
        pair_count_(arm, b) += 1.0;
        if (b != arm) {
          pair_sum_(b, arm) += v;
          pair_count_(b, arm) += 1.0;
        }
      }
    }
    if (!real_set_.empty()) {
      if (mode_ == QuadMode::Kd) {
        double s = 0.0;
        for (const Vector& y : real_set_) s += kernel_eval(spec_, x, y);
        cross_sum_(arm) += s / static_cast<double>(real_set_.size());
      }
      if (fidelity_tau_ > 0.0) {
        double dmin = std::numeric_limits<double>::infinity();
        for (const Vector& y : real_set_) dmin = std::min(dmin, (x - y).norm());
        theta_sum_(arm) += dmin <= fidelity_tau_ ? 1.0 : 0.0;
      }
    }
    samples_[arm].push_back(x);
    ++counts_[arm];
  }

  bool populated() const { return pair_count_.minCoeff() >= 1.0; }

  // Raw pair means; throws until every (i, j) cell has at least one pair.
  Matrix khat() const {
    require_populated();
    return symmetrize(pair_sum_.cwiseQuotient(pair_count_));
  }

  // Pair means projected onto the PSD cone. The U-statistic diagonal can
  // leave K-hat slightly indefinite; projection restores the convexity
  // precondition of the quadratic program.
  Matrix khat_psd() const { return psd_project(khat()); }

  // Mode-intrinsic linear term: the -2 E[k(X, Y)] cross term for KD,
  // zero for inverse-RKE.
  Vector bhat() const {
    require_populated();
    Vector b = Vector::Zero(num_arms());
    if (mode_ == QuadMode::Kd)
      for (int i = 0; i < num_arms(); ++i)
        b(i) = -2.0 * cross_sum_(i) / static_cast<double>(counts_[i]);
    return b;
  }

  // Mean of the fidelity indicator psi per arm.
  Vector theta_hat() const {
    require_populated();
    Vector t = Vector::Zero(num_arms());
    if (fidelity_tau_ > 0.0)
      for (int i = 0; i < num_arms(); ++i)
        t(i) = theta_sum_(i) / static_cast<double>(counts_[i]);
    return t;
  }

  const Matrix& pair_counts() const { return pair_count_; }
  const std::vector<long>& counts() const { return counts_; }
  int num_arms() const { return static_cast<int>(samples_.size()); }
  QuadMode mode() const { return mode_; }
  double fidelity_tau() const { return fidelity_tau_; }

 private:
  void require_populated() const {
    if (!populated())
      throw MissingWarmStart(
          "quad estimate has unpopulated pair cells; diagonal cells need at "
          "least two samples per arm");
  }

  KernelSpec spec_;
  QuadMode mode_;
  std::vector<Vector> real_set_;
  double fidelity_tau_;
  std::vector<std::vector<Vector>> samples_;
  Matrix pair_sum_;
  Matrix pair_count_;
  Vector cross_sum_;
  Vector theta_sum_;
  std::vector<long> counts_;
};

inline double quad_loss(const MixtureWeights& alpha, const Matrix& khat,
                        const Vector& bhat, double w) {
  return alpha.v.dot(khat * alpha.v) + w * alpha.v.dot(bhat);
}

inline Vector quad_gradient(const MixtureWeights& alpha, const Matrix& khat,
                            const Vector& bhat, double w) {
  return 2.0 * khat * alpha.v + w * bhat;
}

inline double quad_loss(const MixtureWeights& alpha, const QuadEstimate& est,
                        double w) {
  return quad_loss(alpha, est.khat_psd(), est.bhat(), w);
}

inline Vector quad_gradient(const MixtureWeights& alpha,
                            const QuadEstimate& est, double w) {
  return quad_gradient(alpha, est.khat_psd(), est.bhat(), w);
}

}  // namespace mixsel
