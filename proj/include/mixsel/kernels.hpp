#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mixsel/errors.hpp"
#include "mixsel/linalg.hpp"
#include "mixsel/rng.hpp"

namespace mixsel {

enum class KernelKind { Gaussian, Cosine };

struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double bandwidth = 1.0;  // sigma for the Gaussian kernel
  bool normalize = true;

  static KernelSpec gaussian(double sigma, bool normalize = true) {
    if (sigma <= 0.0) throw ConfigError("gaussian bandwidth must be positive");
    return KernelSpec{KernelKind::Gaussian, sigma, normalize};
  }
  static KernelSpec cosine() { return KernelSpec{KernelKind::Cosine, 1.0, true}; }
};

inline double kernel_eval(const KernelSpec& spec, const Vector& x,
                          const Vector& y) {
  if (x.size() != y.size())
    throw DimMismatch("kernel_eval: vectors of unequal dimension");
  switch (spec.kind) {
    case KernelKind::Gaussian: {
      const double s2 = spec.bandwidth * spec.bandwidth;
      return std::exp(-(x - y).squaredNorm() / (2.0 * s2));
    }
    case KernelKind::Cosine: {
      const double nx = x.norm(), ny = y.norm();
      if (nx == 0.0 || ny == 0.0)
        throw ZeroVector("cosine kernel is undefined for the zero vector");
      return x.dot(y) / (nx * ny);
    }
  }
  return 0.0;  // unreachable
}

// Gram matrix K_ij = k(x_i, x_j). Unit diagonal is exact for both shipped
// kernels, but the diagonal is pinned to k(x_i, x_i) anyway.
inline Matrix gram(const KernelSpec& spec, const std::vector<Vector>& samples) {
  if (samples.empty()) throw EmptyInput("gram: no samples");
  const auto n = static_cast<Eigen::Index>(samples.size());
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = kernel_eval(spec, samples[i], samples[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = kernel_eval(spec, samples[i], samples[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

// Random Fourier features for the Gaussian kernel, paired cos/sin form.
// The pairing makes every embedded vector unit-norm exactly (cos^2 + sin^2),
// not just in expectation.
struct RFFMap {
  int dim_in = 0;
  int num_pairs = 0;      // output dimension is 2 * num_pairs
  Matrix frequencies;     // num_pairs x dim_in, rows ~ N(0, sigma^-2 I)
  std::uint64_t seed = 0;

  static RFFMap create(int dim_in, int num_pairs, double sigma,
                       std::uint64_t master_seed,
                       std::string_view stream_name = "rff") {
    if (dim_in < 1 || num_pairs < 1)
      throw ConfigError("RFFMap: dimensions must be positive");
    if (sigma <= 0.0) throw ConfigError("RFFMap: bandwidth must be positive");
    RFFMap map;
    map.dim_in = dim_in;
    map.num_pairs = num_pairs;
    map.seed = master_seed;
    map.frequencies = Matrix(num_pairs, dim_in);
    RngStream rng(master_seed, stream_name);
    for (int r = 0; r < num_pairs; ++r)
      for (int c = 0; c < dim_in; ++c)
        map.frequencies(r, c) = rng.normal() / sigma;
    return map;
  }
};

// phi(x) = (1/sqrt(D)) (cos w_1.x, sin w_1.x, ..., cos w_D.x, sin w_D.x).
inline Vector rff_embed(const RFFMap& map, const Vector& x) {
  if (x.size() != map.dim_in)
    throw DimMismatch("rff_embed: input dimension mismatch");
  const Vector proj = map.frequencies * x;
  Vector phi(2 * map.num_pairs);
  const double scale = 1.0 / std::sqrt(static_cast<double>(map.num_pairs));
  for (int r = 0; r < map.num_pairs; ++r) {
    phi(2 * r) = scale * std::cos(proj(r));
    phi(2 * r + 1) = scale * std::sin(proj(r));
  }
  return phi;
}

}  // namespace mixsel
