#include "mixsel/diagnostics.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "instances.hpp"
#include "mixsel/errors.hpp"
#include "test_util.hpp"

namespace mixsel {
namespace {

TEST(HoeffdingRadius, LimitsAndArithmetic) {
  // delta -> 1 kills the log term; M -> infinity kills everything.
  EXPECT_NEAR(hoeffding_radius(4, 1, 0, 1.0 - 1e-12), 1.0, 1e-5);
  EXPECT_LE(hoeffding_radius(100000000, 3, 100, 0.05), 2e-3);
  EXPECT_GE(hoeffding_radius(100, 3, 100, 0.05),
            10.0 * hoeffding_radius(10000, 3, 100, 0.05) - 1e-12);

  // M=100, m=5, T=1000, delta=0.05: 0.2 (1 + sqrt(2 ln 100100)).
  const double expected = 0.2 * (1.0 + std::sqrt(2.0 * std::log(100100.0)));
  EXPECT_NEAR(hoeffding_radius(100, 5, 1000, 0.05), expected, 1e-12);
  EXPECT_NEAR(expected, 1.160, 1e-3);

  EXPECT_THROW(hoeffding_radius(10, 2, 10, 0.0), InvalidConfidence);
  EXPECT_THROW(hoeffding_radius(10, 2, 10, 1.0), InvalidConfidence);
}

TEST(GammaMin, ArithmeticOracles) {
  NLVStructure s;
  s.dim = 3;
  s.num_arms = 2;
  s.nu0 = 1.0;
  s.eps0 = 0.01;

  // eta = 0, w = 0: exp(-1 - (3/e + ln 2)) - 0.01.
  const double base = 3.0 / M_E + std::log(2.0);
  EXPECT_NEAR(gamma_min_nlv(s, 0.0, 0.0), std::exp(-1.0 - base) - 0.01, 1e-12);
  EXPECT_NEAR(gamma_min_nlv(s, 0.0, 0.0), 0.0511, 5e-4);

  // w = 1 drops the -1 and adds w in the exponent.
  EXPECT_NEAR(gamma_min_nlv(s, 0.0, 1.0), std::exp(-(base + 1.0)) - 0.01,
              1e-12);

  // eps0 must stay below nu0 / 8.
  NLVStructure tight = s;
  tight.eps0 = 0.13;
  EXPECT_THROW(tight.validate(), ConfigError);
  EXPECT_DOUBLE_EQ(gamma_min_nlv(s, 0.24, 0.0), 0.0);  // eps_eff ~ 0.25

  EXPECT_THROW(gamma_min_nlv(s, 0.3, 0.0), WarmStartTooSmall);
}

TEST(GammaMin, Monotonicity) {
  NLVStructure s;
  s.dim = 4;
  s.num_arms = 3;
  s.nu0 = 0.9;
  s.eps0 = 0.01;
  double prev = 1.0;
  for (double eta : {0.0, 0.05, 0.1, 0.15, 0.2}) {
    const double g = gamma_min_nlv(s, eta);
    EXPECT_LE(g, prev + 1e-15);
    prev = g;
  }
  prev = 0.0;
  for (double nu : {0.4, 0.6, 0.8, 1.0}) {
    NLVStructure t = s;
    t.nu0 = nu;
    const double g = gamma_min_nlv(t, 0.05);
    EXPECT_GE(g, prev - 1e-15);
    prev = g;
  }
}

TEST(MinWarmStart, SmallestSatisfyingM) {
  NLVStructure s;
  s.dim = 3;
  s.num_arms = 2;
  s.nu0 = 0.9;
  s.eps0 = 0.001;
  const long m_min = min_warm_start_nlv(s, 100, 0.1);
  ASSERT_GT(m_min, 1);
  const double eta = hoeffding_radius(m_min, 2, 100, 0.1);
  EXPECT_LE(eta, s.nu0 / 4.0);
  EXPECT_GT(gamma_min_nlv(s, eta), 0.0);
  const double eta_prev = hoeffding_radius(m_min - 1, 2, 100, 0.1);
  EXPECT_TRUE(eta_prev > s.nu0 / 4.0 ||
              gamma_min_nlv(s, eta_prev) == 0.0);
}

TEST(FannesAudenaert, HandValuesAndDomain) {
  EXPECT_DOUBLE_EQ(fannes_audenaert(0.0, 5), 0.0);
  EXPECT_NEAR(fannes_audenaert(0.5, 2), std::log(2.0), 1e-12);
  EXPECT_THROW(fannes_audenaert(-0.1, 3), OutOfDomain);
  EXPECT_THROW(fannes_audenaert(0.95, 2), OutOfDomain);
  EXPECT_THROW(fannes_audenaert(0.1, 1), OutOfDomain);
}

TEST(FannesAudenaert, SimplifiedRegimeUpperBound) {
  // For T <= 1/e: h(T) <= T log(1/T) + T, so the full bound is at most
  // T (log(d-1) + log(1/T) + 1).
  for (int d : {2, 4, 16}) {
    for (double t : {1e-4, 0.01, 0.1, 1.0 / M_E}) {
      const double simplified =
          t * (std::log(static_cast<double>(d - 1)) + std::log(1.0 / t) + 1.0);
      EXPECT_LE(fannes_audenaert(t, d), simplified + 1e-12);
    }
  }
}

TEST(FannesAudenaert, MonotoneOnLowerHalfForLargerD) {
  for (int d : {3, 5, 9}) {
    double prev = -1.0;
    for (double t = 0.0; t <= 0.5 + 1e-9; t += 0.01) {
      const double v = fannes_audenaert(t, d);
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
  }
  // d = 2 reduces to the binary entropy.
  for (double t : {0.1, 0.3, 0.5}) {
    const double h = -t * std::log(t) - (1 - t) * std::log(1 - t);
    EXPECT_NEAR(fannes_audenaert(t, 2), h, 1e-12);
  }
}

TEST(EntropyContinuity, FannesBoundsRandomDensityPairs) {
  RngStream rng(3, "diag");
  const int d = 4;
  const double eps_max = 2.0 / (M_E * std::sqrt(static_cast<double>(d)));
  for (int trial = 0; trial < 20; ++trial) {
    Matrix s = testing::random_psd(rng, d, /*ridge=*/0.6);
    s /= s.trace();
    // Symmetric traceless perturbation of Frobenius norm eps.
    Matrix delta = testing::random_symmetric(rng, d);
    delta.diagonal().array() -= delta.trace() / d;
    const double eps = std::min(eps_max, 0.5 * rng.uniform01() * eps_max);
    delta *= eps / delta.norm();
    const Matrix s2 = s + delta;
    if (sym_eig(s2).eigenvalues.minCoeff() < 1e-6) continue;

    const double diff = std::abs(von_neumann_entropy(s) -
                                 von_neumann_entropy(s2));
    const double t_bound = 0.5 * std::sqrt(static_cast<double>(d)) * eps;
    EXPECT_LE(diff, fannes_audenaert(t_bound, d) + 1e-10);
  }
}

TEST(CountFloor, SingleArmAlwaysPasses) {
  auto inst = testing::make_nlv_orthogonal(5, 50, /*m=*/1, /*d=*/3, 1000);
  const BanditTrace trace = run_bandit(inst.cfg);
  const CountFloorReport report = count_floor(trace, 1.0, 0.05);
  EXPECT_TRUE(report.pass);
  EXPECT_GE(report.worst_margin, 0.0);
}

TEST(CountFloor, StarvedArmFailsAtFirstViolation) {
  // Adversarial trace that never pulls arm 1.
  BanditTrace trace;
  trace.num_arms = 2;
  trace.warm_start = 3;
  const long horizon = 200;
  for (long t = 1; t <= horizon; ++t) {
    TraceRow row;
    row.t = t;
    row.arm = 0;
    row.alpha = (Vector(2) << 1.0, 0.0).finished();
    trace.rows.push_back(row);
  }
  const double gamma = 0.3;
  const double delta = 0.05;
  const CountFloorReport report = count_floor(trace, gamma, delta);
  EXPECT_FALSE(report.pass);

  // Direct scan oracle for the first round where 3 + 0.3 t - slack > 3.
  long expected = -1;
  for (long t = 1; t <= horizon; ++t) {
    const double slack =
        std::sqrt(2.0 * t * std::log(2.0 * horizon / delta));
    if (3.0 < 3.0 + gamma * t - slack) {
      expected = t;
      break;
    }
  }
  ASSERT_GT(expected, 0);
  EXPECT_EQ(report.first_violation_round, expected);
  EXPECT_EQ(report.violating_arm, 1);
}

TEST(CountFloor, GreedyNlvRunsPassAtGammaMin) {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    auto inst = testing::make_nlv_orthogonal(seed, 300, 3, 4, 20000);
    const BanditTrace trace = run_bandit(inst.cfg, &inst.pop);
    const double delta = 0.05;
    const double eta = hoeffding_radius(inst.cfg.warm_start, 3, 300, delta);
    double gamma = 0.0;
    if (eta <= inst.structure.nu0 / 4.0)
      gamma = gamma_min_nlv(inst.structure, eta);
    EXPECT_TRUE(count_floor(trace, gamma, delta).pass);
  }
}

TEST(DeviationProbe, PointMassArmHasZeroDeviation) {
  Vector x(3);
  x << 1.0, 0.0, 0.0;
  BanditConfig cfg;
  cfg.arms = {ArmSpec::gaussian(x, Matrix::Zero(3, 3))};
  cfg.objective.family = ObjectiveFamily::NlvFeature;
  cfg.horizon = 20;
  cfg.warm_start = 2;
  cfg.seed = 7;
  cfg.population_second_moments = {x * x.transpose()};
  const BanditTrace trace = run_bandit(cfg);
  const DeviationReport report = deviation_probe(trace, 20, 0.05);
  ASSERT_FALSE(report.cells.empty());
  for (const DeviationCell& cell : report.cells) {
    EXPECT_NEAR(cell.deviation, 0.0, 1e-12);
    EXPECT_GT(cell.bound, 0.0);
  }
  EXPECT_EQ(report.violations, 0);
}

TEST(DeviationProbe, SingleSampleDeviationAtMostTwo) {
  auto inst = testing::make_nlv_orthogonal(17, 30, 3, 4, 20000);
  const BanditTrace trace = run_bandit(inst.cfg, &inst.pop);
  for (const DeviationRecord& rec : trace.deviations)
    if (rec.n == 1) EXPECT_LE(rec.frob, 2.0 + 1e-12);
}

TEST(DeviationProbe, BoundHoldsOnNlvRuns) {
  long cells = 0, violations = 0;
  for (std::uint64_t seed : {21ull, 22ull, 23ull, 24ull}) {
    auto inst = testing::make_nlv_orthogonal(seed, 200, 3, 4, 50000);
    const BanditTrace trace = run_bandit(inst.cfg, &inst.pop);
    const DeviationReport report = deviation_probe(trace, 200, 0.05);
    cells += static_cast<long>(report.cells.size());
    violations += report.violations;
  }
  ASSERT_GT(cells, 0);
  EXPECT_LE(static_cast<double>(violations) / cells, 0.05);
}

TEST(FdStructureType, ValidationRules) {
  FDStructure s;
  s.embedding_bound = 2.0;
  s.reference_floor = 0.3;
  s.arm_floor = 0.2;
  s.gamma0 = 0.25;
  s.margin = 0.5;
  s.num_arms = 3;
  EXPECT_NO_THROW(s.validate());
  FDStructure bad = s;
  bad.gamma0 = 0.5;  // exceeds 1/m
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = s;
  bad.margin = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(EstimateInnovation, OrthogonalInstanceCertificate) {
  auto inst = testing::make_nlv_orthogonal(31, 10, 3, 4, 50000);
  inst.structure.validate();
  EXPECT_GT(inst.structure.nu0, 0.5);
  EXPECT_LT(inst.structure.eps0, inst.structure.nu0 / 8.0);
  for (const Vector& v : inst.structure.innovation_directions)
    EXPECT_NEAR(v.norm(), 1.0, 1e-10);
}

}  // namespace
}  // namespace mixsel
