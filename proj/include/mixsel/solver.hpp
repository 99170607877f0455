#pragma once

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "mixsel/errors.hpp"
#include "mixsel/objectives.hpp"

// Exponentiated-gradient descent over the simplex, plus a brute-force grid
// minimizer used as a verification oracle.

namespace mixsel {

enum class EgWarmStart { PreviousIterate, Uniform };

// Defaults chosen so that the solver-vs-grid equivalence holds on all three
// objective families at desk scale; empirical FD objectives develop growing
// oscillations for stepsizes much beyond 0.2.
struct EGConfig {
  double stepsize = 0.1;
  int steps = 300;
  EgWarmStart warm_start = EgWarmStart::PreviousIterate;
  // Optional eta_s = eta / sqrt(s + 1) schedule; off by default to match the
  // fixed-stepsize update.
  bool diminishing = false;

  void validate() const {
    if (!(stepsize > 0.0) || !std::isfinite(stepsize))
      throw ConfigError("EG stepsize must be finite and positive");
    if (steps < 1) throw ConfigError("EG steps must be >= 1");
  }
};

using LossFn = std::function<double(const MixtureWeights&)>;
using GradFn = std::function<Vector(const MixtureWeights&)>;

// One multiplicative-weights step: alpha_i' ~ alpha_i exp(-eta g_i).
// Accumulation happens after subtracting max(-eta g), which guards exp
// overflow and makes the update invariant to shifting g by a constant.
inline MixtureWeights eg_step(const MixtureWeights& alpha, const Vector& g,
                              double eta) {
  if (g.size() != alpha.v.size())
    throw DimMismatch("eg_step: gradient dimension mismatch");
  const Vector exponent = -eta * g;
  const double shift = exponent.maxCoeff();
  Vector w(alpha.size());
  for (int i = 0; i < alpha.size(); ++i)
    w(i) = alpha.v(i) * std::exp(exponent(i) - shift);
  return MixtureWeights::unchecked(w / w.sum());
}

// Runs cfg.steps EG iterations from alpha0 and returns the final iterate.
inline MixtureWeights solve_simplex(const GradFn& grad,
                                    const MixtureWeights& alpha0,
                                    const EGConfig& cfg) {
  cfg.validate();
  MixtureWeights alpha = alpha0;
  for (int s = 0; s < cfg.steps; ++s) {
    const double eta =
        cfg.diminishing ? cfg.stepsize / std::sqrt(s + 1.0) : cfg.stepsize;
    alpha = eg_step(alpha, grad(alpha), eta);
  }
  return alpha;
}

// Minimizer over the lattice {k/r : k integer} simplex grid, m <= 4 arms.
// Ties break to the lexicographically smallest point; the enumeration below
// visits points in lexicographic order of (k_0, ..., k_{m-1}), so keeping
// strict improvements only realizes that tie-break.
inline MixtureWeights brute_force_simplex(const LossFn& loss, int m, int r) {
  if (m < 1) throw ConfigError("brute_force_simplex: need at least one arm");
  if (m > 4)
    throw TooManyArms("brute_force_simplex supports at most 4 arms, got " +
                      std::to_string(m));
  if (r < 1) throw ConfigError("brute_force_simplex: resolution must be >= 1");

  Vector best;
  double best_loss = std::numeric_limits<double>::infinity();
  Vector point(m);
  const double inv_r = 1.0 / static_cast<double>(r);

  auto consider = [&](const Vector& p) {
    const double val = loss(MixtureWeights::unchecked(p));
    if (val < best_loss) {
      best_loss = val;
      best = p;
    }
  };

  if (m == 1) {
    point(0) = 1.0;
    consider(point);
  } else if (m == 2) {
    for (int k0 = 0; k0 <= r; ++k0) {
      point(0) = k0 * inv_r;
      point(1) = (r - k0) * inv_r;
      consider(point);
    }
  } else if (m == 3) {
    for (int k0 = 0; k0 <= r; ++k0)
      for (int k1 = 0; k1 <= r - k0; ++k1) {
        point(0) = k0 * inv_r;
        point(1) = k1 * inv_r;
        point(2) = (r - k0 - k1) * inv_r;
        consider(point);
      }
  } else {
    for (int k0 = 0; k0 <= r; ++k0)
      for (int k1 = 0; k1 <= r - k0; ++k1)
        for (int k2 = 0; k2 <= r - k0 - k1; ++k2) {
          point(0) = k0 * inv_r;
          point(1) = k1 * inv_r;
          point(2) = k2 * inv_r;
          point(3) = (r - k0 - k1 - k2) * inv_r;
          consider(point);
        }
  }
  return MixtureWeights::unchecked(best);
}

}  // namespace mixsel
