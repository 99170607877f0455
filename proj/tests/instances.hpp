#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mixsel/bandit.hpp"
#include "mixsel/diagnostics.hpp"
#include "mixsel/objectives.hpp"
#include "mixsel/rng.hpp"

// Constructed bandit instances with exact or plug-in population oracles.
// Population quantities never touch the runner's RNG streams, so adding a
// population oracle does not perturb a trace.

namespace mixsel::testing {

// -------------------------------------------------------------------------
// FD: two arms at +/- mu with shared covariance and an off-center reference.
// The population optimum is an interior mixture that beats both arms.

struct FdInstance2 {
  BanditConfig cfg;
  PopulationOracle pop;
  std::vector<ArmMomentStats> population_stats;  // exact S_i = Sigma_i + mu mu'
  FdReference reference;                          // frozen real-set moments

  FdInstance2(const FdInstance2&) = delete;
  FdInstance2(FdInstance2&&) = default;
  FdInstance2() = default;
};

inline FdInstance2 make_fd_two_arm(std::uint64_t seed, long horizon,
                                   int n_real = 500) {
  FdInstance2 inst;
  const int d = 2;
  Vector mu(d);
  mu << 1.5, 0.0;
  const Matrix cov = 0.25 * Matrix::Identity(d, d);

  inst.cfg.arms = {ArmSpec::gaussian(mu, cov), ArmSpec::gaussian(-mu, cov)};
  inst.cfg.objective.family = ObjectiveFamily::Fd;
  inst.cfg.horizon = horizon;
  inst.cfg.warm_start = 5;
  inst.cfg.seed = seed;

  // Reference: centered between the arms but vertically offset, with a
  // covariance no single arm can match.
  Vector mu0(d);
  mu0 << 0.0, 0.8;
  Matrix cov0 = Matrix::Zero(d, d);
  cov0.diagonal() << 2.0, 0.35;
  const Matrix cov0_sqrt = psd_fn(cov0, PsdFn::Sqrt, 0.0);
  RngStream real_rng(seed, "real");
  for (int i = 0; i < n_real; ++i)
    inst.cfg.real_set.push_back(mu0 + cov0_sqrt * real_rng.normal_vector(d));

  inst.reference = FdReference::create(moments_of(inst.cfg.real_set));

  // Exact per-arm population moments.
  for (int i = 0; i < 2; ++i) {
    ArmMomentStats s = ArmMomentStats::zero(d);
    s.count = 1;
    s.mean = i == 0 ? mu : Vector(-mu);
    s.second_moment = cov + s.mean * s.mean.transpose();
    inst.population_stats.push_back(std::move(s));
  }

  const FdReference ref = inst.reference;
  const auto stats = inst.population_stats;
  inst.pop.loss = [stats, ref](const MixtureWeights& a) {
    return fd_loss(a, stats, ref);
  };
  const GradFn grad = [stats, ref](const MixtureWeights& a) {
    return fd_gradient(a, stats, ref);
  };
  const OracleResult opt = mixture_oracle(inst.pop.loss, grad, 2);
  inst.pop.alpha_star = opt.alpha.v;
  inst.pop.optimum = opt.value;
  return inst;
}

// -------------------------------------------------------------------------
// NLV: arms emitting unit-norm vectors concentrated near distinct basis
// directions, which realizes the population-innovation structure.

struct NlvInstance {
  BanditConfig cfg;
  PopulationOracle pop;
  std::vector<ArmMomentStats> population_stats;  // plug-in S_i
  NLVStructure structure;

  NlvInstance(const NlvInstance&) = delete;
  NlvInstance(NlvInstance&&) = default;
  NlvInstance() = default;
};

inline NlvInstance make_nlv_orthogonal(std::uint64_t seed, long horizon,
                                       int m = 3, int d = 4,
                                       long plugin_samples = 100000) {
  NlvInstance inst;
  const double center = 1.2;
  const double spread = 0.15;
  for (int i = 0; i < m; ++i) {
    Vector mean = Vector::Zero(d);
    mean(i) = center;
    inst.cfg.arms.push_back(ArmSpec::gaussian(
        mean, spread * spread * Matrix::Identity(d, d), PostMap::UnitNorm));
  }
  inst.cfg.objective.family = ObjectiveFamily::NlvFeature;
  inst.cfg.horizon = horizon;
  inst.cfg.warm_start = 5;
  inst.cfg.seed = seed;

  // Plug-in population second moments from dedicated streams.
  std::vector<Matrix> pop_moments;
  for (int i = 0; i < m; ++i) {
    RngStream rng(seed, "pop/" + std::to_string(i));
    Matrix s = Matrix::Zero(d, d);
    Vector mean = Vector::Zero(d);
    mean(i) = center;
    for (long r = 0; r < plugin_samples; ++r) {
      Vector x = mean + spread * rng.normal_vector(d);
      x /= x.norm();
      s.noalias() += x * x.transpose();
    }
    s /= static_cast<double>(plugin_samples);
    pop_moments.push_back(symmetrize(s));

    ArmMomentStats st = ArmMomentStats::zero(d);
    st.count = plugin_samples;
    st.second_moment = pop_moments.back();
    inst.population_stats.push_back(std::move(st));
  }
  inst.cfg.population_second_moments = pop_moments;
  inst.structure = estimate_innovation(pop_moments);

  const auto stats = inst.population_stats;
  inst.pop.loss = [stats](const MixtureWeights& a) {
    return nlv_loss_from_stats(a, stats);
  };
  const GradFn grad = [stats](const MixtureWeights& a) {
    return nlv_gradient_from_stats(a, stats);
  };
  const OracleResult opt = mixture_oracle(inst.pop.loss, grad, m);
  inst.pop.alpha_star = opt.alpha.v;
  inst.pop.optimum = opt.value;
  return inst;
}

// -------------------------------------------------------------------------
// Quadratic KD: three cluster arms against a real mixture with unequal
// weights, so the optimum is interior and unequal.

struct QuadInstance {
  BanditConfig cfg;
  PopulationOracle pop;
  Matrix population_k;
  Vector population_b;
  double population_const = 0.0;

  QuadInstance(const QuadInstance&) = delete;
  QuadInstance(QuadInstance&&) = default;
  QuadInstance() = default;
};

// E[k(X, Y)] for X ~ N(cx, sx^2 I), Y ~ N(cy, sy^2 I) under the Gaussian
// kernel with bandwidth sigma, in closed form.
inline double gaussian_pair_kernel_mean(const Vector& cx, double sx,
                                        const Vector& cy, double sy,
                                        double sigma) {
  const double d = static_cast<double>(cx.size());
  const double denom = sigma * sigma + sx * sx + sy * sy;
  return std::pow(sigma * sigma / denom, d / 2.0) *
         std::exp(-(cx - cy).squaredNorm() / (2.0 * denom));
}

inline QuadInstance make_quad_kd_three_arm(std::uint64_t seed, long horizon,
                                           int n_real = 400) {
  QuadInstance inst;
  const int d = 2;
  const int m = 3;
  const double spread = 0.3;
  const double sigma = 1.5;
  std::vector<Vector> centers;
  {
    Vector c0(d), c1(d), c2(d);
    c0 << 0.0, 0.0;
    c1 << 3.0, 0.0;
    c2 << 0.0, 3.0;
    centers = {c0, c1, c2};
  }
  const Vector real_weights = (Vector(3) << 0.5, 0.3, 0.2).finished();

  for (int i = 0; i < m; ++i)
    inst.cfg.arms.push_back(ArmSpec::gaussian(
        centers[i], spread * spread * Matrix::Identity(d, d)));
  inst.cfg.objective.family = ObjectiveFamily::QuadKd;
  inst.cfg.objective.kernel = KernelSpec::gaussian(sigma);
  inst.cfg.horizon = horizon;
  inst.cfg.warm_start = 5;
  inst.cfg.seed = seed;

  // Frozen real set drawn from the weighted cluster mixture.
  RngStream real_rng(seed, "real");
  for (int i = 0; i < n_real; ++i) {
    const int c = real_rng.categorical(real_weights);
    inst.cfg.real_set.push_back(centers[c] +
                                spread * real_rng.normal_vector(d));
  }

  // Population quadratic against the frozen real set: K in closed form over
  // arm pairs, b by averaging the closed-form E k(X_i, y) over real points.
  inst.population_k = Matrix(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      inst.population_k(i, j) = gaussian_pair_kernel_mean(
          centers[i], spread, centers[j], spread, sigma);
  inst.population_b = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (const Vector& y : inst.cfg.real_set)
      acc += gaussian_pair_kernel_mean(centers[i], spread, y, 0.0, sigma);
    inst.population_b(i) = -2.0 * acc / static_cast<double>(n_real);
  }
  {
    double acc = 0.0;
    for (const Vector& y : inst.cfg.real_set)
      for (const Vector& z : inst.cfg.real_set)
        acc += std::exp(-(y - z).squaredNorm() / (2.0 * sigma * sigma));
    inst.population_const =
        acc / (static_cast<double>(n_real) * static_cast<double>(n_real));
  }

  const Matrix k = inst.population_k;
  const Vector b = inst.population_b;
  const double c0 = inst.population_const;
  inst.pop.loss = [k, b, c0](const MixtureWeights& a) {
    return quad_loss(a, k, b, 1.0) + c0;
  };
  const GradFn grad = [k, b](const MixtureWeights& a) {
    return quad_gradient(a, k, b, 1.0);
  };
  const OracleResult opt = mixture_oracle(inst.pop.loss, grad, m);
  inst.pop.alpha_star = opt.alpha.v;
  inst.pop.optimum = opt.value;
  return inst;
}

}  // namespace mixsel::testing
