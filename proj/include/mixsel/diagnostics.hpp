#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsel/bandit.hpp"
#include "mixsel/errors.hpp"
#include "mixsel/linalg.hpp"

// Computable quantities from the concentration and interiority analysis:
// Hoeffding radii, interiority floors, the Fannes-Audenaert entropy modulus,
// and empirical checkers that replay finished traces. These are read-only
// over traces and never feed back into the algorithms.

namespace mixsel {

// Structural constants of a negative-log-Vendi instance: every arm has a
// unit direction where its own second moment is at least nu0 while all other
// arms' total at most eps0.
struct NLVStructure {
  int dim = 0;
  int num_arms = 0;
  double nu0 = 1.0;
  double eps0 = 0.0;
  std::vector<Vector> innovation_directions;  // optional, for verification

  void validate() const {
    if (dim < 1 || num_arms < 1)
      throw ConfigError("NLV structure: dimensions must be positive");
    if (!(nu0 > 0.0 && nu0 <= 1.0))
      throw ConfigError("NLV structure: nu0 must lie in (0, 1]");
    if (!(eps0 >= 0.0 && eps0 < nu0 / 8.0))
      throw ConfigError("NLV structure: eps0 must lie in [0, nu0/8)");
  }
};

// Structural constants of a Frechet-distance instance.
struct FDStructure {
  double embedding_bound = 0.0;   // B
  double reference_floor = 0.0;   // lambda0
  double arm_floor = 0.0;         // nu
  double gamma0 = 0.0;
  double margin = 0.0;            // Delta0
  int num_arms = 0;

  void validate() const {
    if (embedding_bound <= 0 || reference_floor <= 0 || arm_floor <= 0 ||
        gamma0 <= 0 || margin <= 0)
      throw ConfigError("FD structure: all constants must be positive");
    if (num_arms >= 1 && gamma0 > 1.0 / num_arms)
      throw ConfigError("FD structure: gamma0 must be at most 1/m");
  }
};

// eta = (2 / sqrt(M)) (1 + sqrt(2 log(m (T+1) / delta))): the simultaneous
// Frobenius radius for all per-arm second moments after an M-sample warm
// start.
inline double hoeffding_radius(long warm_start, int num_arms, long horizon,
                               double delta) {
  if (warm_start < 1) throw ConfigError("hoeffding_radius: M must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidConfidence("hoeffding_radius: delta must lie in (0, 1)");
  const double log_term =
      std::log(static_cast<double>(num_arms) *
               static_cast<double>(horizon + 1) / delta);
  return 2.0 / std::sqrt(static_cast<double>(warm_start)) *
         (1.0 + std::sqrt(2.0 * std::max(log_term, 0.0)));
}

// Interiority floor for empirical NLV minimizers. The w = 0 form carries the
// extra -1 in the exponent; the w > 0 form is the tight variant without it.
inline double gamma_min_nlv(const NLVStructure& s, double eta, double w = 0.0) {
  s.validate();
  if (eta > s.nu0 / 4.0)
    throw WarmStartTooSmall(
        "gamma_min_nlv: radius eta exceeds nu0/4; increase the warm start");
  const double nu_eff = s.nu0 - eta;
  const double eps_eff = s.eps0 + (s.num_arms - 1) * eta;
  const double base = s.dim / M_E + std::log(static_cast<double>(s.num_arms));
  double exponent;
  if (w == 0.0)
    exponent = -1.0 - base / nu_eff;
  else
    exponent = -(base + w) / nu_eff;
  return std::max(0.0, std::exp(exponent) - eps_eff);
}

// Smallest warm start M for which eta(M) <= nu0/4 and gamma_min > 0, or -1
// if no M up to the cap works.
inline long min_warm_start_nlv(const NLVStructure& s, long horizon,
                               double delta, double w = 0.0,
                               long cap = 1L << 40) {
  s.validate();
  long lo = 1, hi = cap;
  auto ok = [&](long m_ws) {
    const double eta = hoeffding_radius(m_ws, s.num_arms, horizon, delta);
    if (eta > s.nu0 / 4.0) return false;
    return gamma_min_nlv(s, eta, w) > 0.0;
  };
  if (!ok(hi)) return -1;
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (ok(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

// Fannes-Audenaert entropy continuity: T log(d-1) + h(T) for the trace
// half-distance T, with h the binary entropy and h(0) := 0.
inline double fannes_audenaert(double t, int dim) {
  if (dim < 2) throw OutOfDomain("fannes_audenaert: dimension must be >= 2");
  const double upper = 1.0 - 1.0 / dim;
  if (t < 0.0 || t > upper + 1e-15)
    throw OutOfDomain("fannes_audenaert: T outside [0, 1 - 1/d]");
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  const double h = -xlogx(t) - xlogx(1.0 - t);
  return t * std::log(static_cast<double>(dim - 1)) + h;
}

// -------------------------------------------------------------------------
// Trace checkers.

struct CountFloorReport {
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  long first_violation_round = -1;
  int violating_arm = -1;
};

// Checks n_i(t) >= M + gamma t - sqrt(2 t log(m T / delta)) for every arm
// and round of a finished trace.
inline CountFloorReport count_floor(const BanditTrace& trace, double gamma,
                                    double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidConfidence("count_floor: delta must lie in (0, 1)");
  const int m = trace.num_arms;
  const long total_rounds = static_cast<long>(trace.rows.size());
  CountFloorReport report;
  std::vector<long> counts(m, trace.warm_start);
  for (const TraceRow& row : trace.rows) {
    ++counts[row.arm];
    const double t = static_cast<double>(row.t);
    const double slack = std::sqrt(
        2.0 * t *
        std::log(static_cast<double>(m) * static_cast<double>(total_rounds) /
                 delta));
    const double floor = trace.warm_start + gamma * t - slack;
    for (int i = 0; i < m; ++i) {
      const double margin = static_cast<double>(counts[i]) - floor;
      if (margin < report.worst_margin) report.worst_margin = margin;
      if (margin < 0.0 && report.first_violation_round < 0) {
        report.first_violation_round = row.t;
        report.violating_arm = i;
      }
    }
  }
  report.pass = report.worst_margin >= 0.0;
  return report;
}

struct DeviationCell {
  int arm = 0;
  long n = 0;
  double deviation = 0.0;
  double bound = 0.0;
};

struct DeviationReport {
  std::vector<DeviationCell> cells;
  long violations = 0;
  double violation_rate = 0.0;
};

// Pairs each recorded ||S_i(n) - S_i||_F against the simultaneous Hoeffding
// bound (2/sqrt(n)) (1 + sqrt(2 log(m (T+1) / delta))).
inline DeviationReport deviation_probe(const BanditTrace& trace, long horizon,
                                       double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidConfidence("deviation_probe: delta must lie in (0, 1)");
  DeviationReport report;
  const double log_term = std::log(
      static_cast<double>(trace.num_arms) * static_cast<double>(horizon + 1) /
      delta);
  const double factor = 1.0 + std::sqrt(2.0 * std::max(log_term, 0.0));
  report.cells.reserve(trace.deviations.size());
  for (const DeviationRecord& rec : trace.deviations) {
    DeviationCell cell;
    cell.arm = rec.arm;
    cell.n = rec.n;
    cell.deviation = rec.frob;
    cell.bound = 2.0 / std::sqrt(static_cast<double>(rec.n)) * factor;
    if (cell.deviation > cell.bound) ++report.violations;
    report.cells.push_back(cell);
  }
  report.violation_rate =
      report.cells.empty()
          ? 0.0
          : static_cast<double>(report.violations) / report.cells.size();
  return report;
}

// Heuristic search for innovation directions among the eigenvectors of each
// population second moment. The analysis only asserts existence; this
// verifier reports the best certificate it can find.
inline NLVStructure estimate_innovation(const std::vector<Matrix>& moments) {
  if (moments.empty()) throw EmptyInput("estimate_innovation: no moments");
  const int m = static_cast<int>(moments.size());
  const int d = static_cast<int>(moments.front().rows());
  NLVStructure s;
  s.dim = d;
  s.num_arms = m;
  s.nu0 = 1.0;
  s.eps0 = 0.0;
  s.innovation_directions.resize(m);
  for (int i = 0; i < m; ++i) {
    const EigenDecomposition ed = sym_eig(moments[i]);
    double best_score = -std::numeric_limits<double>::infinity();
    double best_nu = 0.0, best_eps = 0.0;
    Vector best_v;
    for (int c = 0; c < d; ++c) {
      const Vector v = ed.eigenvectors.col(c);
      const double nu = v.dot(moments[i] * v);
      double eps = 0.0;
      for (int j = 0; j < m; ++j)
        if (j != i) eps += v.dot(moments[j] * v);
      const double score = nu - 8.0 * eps;
      if (score > best_score) {
        best_score = score;
        best_nu = nu;
        best_eps = eps;
        best_v = v;
      }
    }
    s.nu0 = std::min(s.nu0, best_nu);
    s.eps0 = std::max(s.eps0, best_eps);
    s.innovation_directions[i] = best_v;
  }
  return s;
}

}  // namespace mixsel
