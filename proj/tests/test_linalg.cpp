#include "mixsel/linalg.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "mixsel/errors.hpp"
#include "mixsel/rng.hpp"
#include "test_util.hpp"

namespace mixsel {
namespace {

using testing::random_psd;
using testing::random_symmetric;

TEST(SymEig, IdentityHasUnitSpectrum) {
  const auto ed = sym_eig(Matrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(ed.eigenvalues(i), 1.0);
}

TEST(SymEig, DiagonalSortedDescending) {
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 2.0, 0.0, -1.0;
  const auto ed = sym_eig(m);
  EXPECT_DOUBLE_EQ(ed.eigenvalues(0), 2.0);
  EXPECT_DOUBLE_EQ(ed.eigenvalues(1), 0.0);
  EXPECT_DOUBLE_EQ(ed.eigenvalues(2), -1.0);
}

TEST(SymEig, ReconstructionAndOrthonormality) {
  RngStream rng(7, "linalg");
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_symmetric(rng, 4);
    const auto ed = sym_eig(m);
    const Matrix rebuilt = ed.eigenvectors * ed.eigenvalues.asDiagonal() *
                           ed.eigenvectors.transpose();
    EXPECT_LE((rebuilt - m).norm(), 1e-8 * std::max(1.0, m.norm()));
    EXPECT_LE((ed.eigenvectors.transpose() * ed.eigenvectors -
               Matrix::Identity(4, 4))
                  .norm(),
              1e-8);
  }
}

TEST(SymEig, RejectsNonSquareAndAsymmetric) {
  EXPECT_THROW(sym_eig(Matrix::Zero(2, 3)), InvalidMatrix);
  Matrix m(2, 2);
  m << 1.0, 0.5, -0.5, 1.0;
  EXPECT_THROW(sym_eig(m), InvalidMatrix);
}

TEST(SymEig, DeterministicForFixedInput) {
  RngStream rng(3, "linalg");
  const Matrix m = random_symmetric(rng, 5);
  const auto a = sym_eig(m);
  const auto b = sym_eig(m);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
}

TEST(PsdFn, SqrtOfIdentity) {
  EXPECT_LE((psd_fn(Matrix::Identity(2, 2), PsdFn::Sqrt, 0.0) -
             Matrix::Identity(2, 2))
                .norm(),
            1e-14);
}

TEST(PsdFn, SqrtOfDiagonal) {
  Matrix m = Matrix::Zero(2, 2);
  m.diagonal() << 4.0, 9.0;
  const Matrix s = psd_fn(m, PsdFn::Sqrt, 0.0);
  EXPECT_NEAR(s(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(s(1, 1), 3.0, 1e-12);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-12);
}

TEST(PsdFn, LogOfDiagonal) {
  Matrix m = Matrix::Zero(2, 2);
  m.diagonal() << M_E, M_E * M_E;
  const Matrix l = psd_fn(m, PsdFn::Log, 1e-12);
  EXPECT_NEAR(l(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(l(1, 1), 2.0, 1e-12);
}

TEST(PsdFn, SingularLogWithZeroClampThrows) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  EXPECT_THROW(psd_fn(m, PsdFn::Log, 0.0), SingularMatrix);
  EXPECT_THROW(psd_fn(m, PsdFn::InvSqrt, 0.0), SingularMatrix);
}

TEST(PsdFn, NegativeDustClampedLargerNegativityRejected) {
  Matrix dust = Matrix::Identity(2, 2);
  dust(1, 1) = -1e-9;
  EXPECT_NO_THROW(psd_fn(dust, PsdFn::Sqrt, 0.0));
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1e-3;
  EXPECT_THROW(psd_fn(bad, PsdFn::Sqrt, 0.0), InvalidMatrix);
}

TEST(PsdFn, SqrtTwiceRecoversMatrix) {
  RngStream rng(11, "linalg");
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = random_psd(rng, 5);
    const Matrix root = psd_fn(psd_fn(m, PsdFn::Sqrt, 0.0), PsdFn::Sqrt, 0.0);
    const Matrix back = (root * root) * (root * root);
    EXPECT_LE((back - m).norm(), 1e-6 * std::max(1.0, m.norm()));
  }
}

TEST(PsdFn, SqrtTimesInvSqrtIsIdentityOnRange) {
  RngStream rng(13, "linalg");
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = random_psd(rng, 4, /*ridge=*/0.5);
    const Matrix prod =
        psd_fn(m, PsdFn::Sqrt, 0.0) * psd_fn(m, PsdFn::InvSqrt, 1e-12);
    EXPECT_LE((prod - Matrix::Identity(4, 4)).norm(), 1e-6);
  }
}

TEST(TraceNorm, HandValues) {
  Matrix m = Matrix::Zero(2, 2);
  m.diagonal() << 1.0, -2.0;
  EXPECT_NEAR(trace_norm(m), 3.0, 1e-12);
  EXPECT_NEAR(trace_norm(Matrix::Zero(3, 3)), 0.0, 1e-12);
}

TEST(TraceNorm, RankOneEqualsSquaredLength) {
  Vector v(3);
  v << 2.0, 0.0, 0.0;
  EXPECT_NEAR(trace_norm(v * v.transpose()), 4.0, 1e-12);
  RngStream rng(5, "linalg");
  Vector w = testing::random_vector(rng, 4);
  w *= 2.0 / w.norm();
  EXPECT_NEAR(trace_norm(w * w.transpose()), 4.0, 1e-10);
}

TEST(NormInequalities, TraceFrobeniusOperatorChain) {
  RngStream rng(17, "linalg");
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(5));
    const Matrix m = random_symmetric(rng, d);
    const double tn = trace_norm(m);
    const double fro = m.norm();
    const double op = sym_eig(m).eigenvalues.cwiseAbs().maxCoeff();
    EXPECT_GE(tn + 1e-10, fro);
    EXPECT_GE(fro + 1e-10, op);
    EXPECT_LE(tn, std::sqrt(static_cast<double>(d)) * fro + 1e-10);
  }
}

}  // namespace
}  // namespace mixsel
