#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mixsel/errors.hpp"

namespace mixsel {

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// One independent random stream. A master seed plus a stream name determine
// the stream completely, so adding or removing one consumer of randomness
// never perturbs the others.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view name) {
    std::uint64_t s = master_seed ^ detail::fnv1a(name);
    std::seed_seq seq{detail::splitmix64(s), detail::splitmix64(s),
                      detail::splitmix64(s), detail::splitmix64(s)};
    gen_.seed(seq);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1], safe to pass through log().
  double uniform01_open0() {
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller. Hand-rolled so traces are reproducible regardless of the
  // standard library's normal_distribution implementation.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open0();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Eigen::VectorXd normal_vector(int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = normal();
    return v;
  }

  // Index i with probability proportional to probs(i). Inverse-CDF walk;
  // the final index absorbs any rounding slack.
  int categorical(const Eigen::VectorXd& probs) {
    const double u = uniform01() * probs.sum();
    double acc = 0.0;
    for (int i = 0; i + 1 < probs.size(); ++i) {
      acc += probs(i);
      if (u < acc) return i;
    }
    return static_cast<int>(probs.size()) - 1;
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Fisher-Yates.
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mixsel
