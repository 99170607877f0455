#include "mixsel/kernels.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "mixsel/errors.hpp"
#include "mixsel/linalg.hpp"
#include "test_util.hpp"

namespace mixsel {
namespace {

TEST(KernelEval, GaussianSelfIsOne) {
  const KernelSpec spec = KernelSpec::gaussian(2.0);
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  EXPECT_DOUBLE_EQ(kernel_eval(spec, x, x), 1.0);
}

TEST(KernelEval, GaussianClosedForm) {
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  Vector x(2), y(2);
  x << 0.0, 0.0;
  y << 1.0, 1.0;  // squared distance 2
  EXPECT_NEAR(kernel_eval(spec, x, y), std::exp(-1.0), 1e-12);
}

TEST(KernelEval, CosineOrthogonalAndZeroVector) {
  const KernelSpec spec = KernelSpec::cosine();
  Vector x(2), y(2);
  x << 1.0, 0.0;
  y << 0.0, 3.0;
  EXPECT_DOUBLE_EQ(kernel_eval(spec, x, y), 0.0);
  EXPECT_THROW(kernel_eval(spec, Vector::Zero(2), y), ZeroVector);
}

TEST(KernelEval, DimMismatchRejected) {
  EXPECT_THROW(
      kernel_eval(KernelSpec::gaussian(1.0), Vector::Zero(2), Vector::Zero(3)),
      DimMismatch);
}

TEST(Gram, IdenticalSamplesGiveAllOnes) {
  Vector x(2);
  x << 0.3, -0.7;
  const std::vector<Vector> samples(4, x);
  const Matrix k = gram(KernelSpec::gaussian(1.0), samples);
  EXPECT_LE((k - Matrix::Ones(4, 4)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gram, TwoSampleHandValue) {
  // Choose a pair with k(x1, x2) = 0.5: squared distance = 2 ln 2.
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  Vector a(1), b(1);
  a << 0.0;
  b << std::sqrt(2.0 * std::log(2.0));
  const Matrix k = gram(spec, {a, b});
  EXPECT_NEAR(k(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(k(0, 1), 0.5, 1e-12);
  EXPECT_NEAR(k(1, 0), 0.5, 1e-12);
}

TEST(Gram, RandomGramIsPsdWithUnitDiagonal) {
  RngStream rng(23, "kernels");
  const auto samples = testing::random_samples(rng, 5, 3);
  const Matrix k = gram(KernelSpec::gaussian(0.8), samples);
  const auto ed = sym_eig(k);
  EXPECT_GE(ed.eigenvalues.minCoeff(), -1e-10);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(k(i, i), 1.0);
  EXPECT_THROW(gram(KernelSpec::gaussian(1.0), {}), EmptyInput);
}

TEST(Rff, UnitNormExactAndSelfInnerProduct) {
  RngStream rng(29, "kernels");
  const RFFMap map = RFFMap::create(3, 16, 1.0, 42);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = testing::random_vector(rng, 3);
    const Vector phi = rff_embed(map, x);
    EXPECT_EQ(phi.size(), 32);
    EXPECT_NEAR(phi.norm(), 1.0, 1e-14);
    EXPECT_NEAR(phi.dot(rff_embed(map, x)), 1.0, 1e-14);
  }
}

TEST(Rff, ApproximatesGaussianKernel) {
  RngStream rng(31, "kernels");
  const RFFMap map = RFFMap::create(4, 4096, 1.0, 7);
  const KernelSpec spec = KernelSpec::gaussian(1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = testing::random_vector(rng, 4);
    const Vector y = testing::random_vector(rng, 4);
    const double approx = rff_embed(map, x).dot(rff_embed(map, y));
    EXPECT_NEAR(approx, kernel_eval(spec, x, y), 0.05);
  }
}

TEST(Rff, MeanAbsoluteErrorConcentrates) {
  RngStream rng(37, "kernels");
  const int pairs = 1024;
  const RFFMap map = RFFMap::create(3, pairs, 1.5, 99);
  const KernelSpec spec = KernelSpec::gaussian(1.5);
  double total = 0.0;
  const int n = 100;
  for (int trial = 0; trial < n; ++trial) {
    const Vector x = testing::random_vector(rng, 3);
    const Vector y = testing::random_vector(rng, 3);
    total += std::abs(rff_embed(map, x).dot(rff_embed(map, y)) -
                      kernel_eval(spec, x, y));
  }
  EXPECT_LE(total / n, 3.0 / std::sqrt(static_cast<double>(pairs)));
}

TEST(Rff, EmbeddingGramMatchesInnerProductGram) {
  RngStream rng(41, "kernels");
  const RFFMap map = RFFMap::create(3, 32, 1.0, 5);
  std::vector<Vector> embedded;
  for (const Vector& x : testing::random_samples(rng, 6, 3))
    embedded.push_back(rff_embed(map, x));
  // Cosine Gram of exactly unit-norm embeddings is the inner-product Gram.
  const Matrix k = gram(KernelSpec::cosine(), embedded);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      EXPECT_NEAR(k(i, j), embedded[i].dot(embedded[j]), 1e-12);
}

TEST(Rff, DeterministicForFixedSeed) {
  const RFFMap a = RFFMap::create(3, 8, 1.0, 123);
  const RFFMap b = RFFMap::create(3, 8, 1.0, 123);
  EXPECT_EQ(a.frequencies, b.frequencies);
  const RFFMap c = RFFMap::create(3, 8, 1.0, 124);
  EXPECT_NE(a.frequencies, c.frequencies);
}

}  // namespace
}  // namespace mixsel
