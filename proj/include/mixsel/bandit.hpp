#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsel/errors.hpp"
#include "mixsel/kernels.hpp"
#include "mixsel/log.hpp"
#include "mixsel/metrics.hpp"
#include "mixsel/objectives.hpp"
#include "mixsel/rng.hpp"
#include "mixsel/solver.hpp"

// Online selection protocols: Mixture-Greedy, the Mixture-UCB baseline,
// one-arm baselines, oracles, and regret accounting.

namespace mixsel {

// -------------------------------------------------------------------------
// Arms.

enum class PostMap { Raw, Rff, UnitNorm };

struct ArmSpec {
  enum class Kind { SyntheticGaussian, FileBacked };
  Kind kind = Kind::SyntheticGaussian;

  // Synthetic Gaussian: x = mean + cov^{1/2} z, then the post-map.
  Vector mean;
  Matrix cov;
  PostMap post_map = PostMap::Raw;
  int rff_pairs = 0;  // pairs of the shared map when post_map == Rff

  // File-backed: a pool of embeddings consumed in shuffled order without
  // replacement.
  std::vector<Vector> pool;

  static ArmSpec gaussian(Vector mean, Matrix cov,
                          PostMap post_map = PostMap::Raw, int rff_pairs = 0) {
    ArmSpec s;
    s.kind = Kind::SyntheticGaussian;
    s.mean = std::move(mean);
    s.cov = std::move(cov);
    s.post_map = post_map;
    s.rff_pairs = rff_pairs;
    return s;
  }
  static ArmSpec file_backed(std::vector<Vector> pool) {
    ArmSpec s;
    s.kind = Kind::FileBacked;
    s.pool = std::move(pool);
    return s;
  }

  int sample_dim() const {
    return kind == Kind::SyntheticGaussian ? static_cast<int>(mean.size())
                                           : static_cast<int>(pool.front().size());
  }
};

// Runtime sampler for one arm, bound to its own named RNG streams.
class ArmSampler {
 public:
  ArmSampler(const ArmSpec& spec, std::uint64_t master_seed, int index,
             const RFFMap* rff)
      : spec_(&spec),
        index_(index),
        rng_(master_seed, "arm/" + std::to_string(index)),
        rff_(rff) {
    if (spec.kind == ArmSpec::Kind::SyntheticGaussian) {
      if (spec.post_map == PostMap::Rff && rff == nullptr)
        throw ConfigError("arm uses an rff post-map but no map was provided");
      cov_sqrt_ = psd_fn(spec.cov, PsdFn::Sqrt, 0.0);
    } else {
      if (spec.pool.empty()) throw EmptyInput("file-backed arm: empty pool");
      RngStream shuffle(master_seed, "shuffle/" + std::to_string(index));
      order_ = shuffle.permutation(spec.pool.size());
    }
  }

  // One embedded sample. round_index is only used to label pool exhaustion.
  Vector draw(long round_index) {
    if (spec_->kind == ArmSpec::Kind::FileBacked) {
      if (cursor_ >= order_.size())
        throw PoolExhausted("arm " + std::to_string(index_) +
                            " pool exhausted at round " +
                            std::to_string(round_index));
      return spec_->pool[order_[cursor_++]];
    }
    Vector x = spec_->mean + cov_sqrt_ * rng_.normal_vector(
                                              static_cast<int>(spec_->mean.size()));
    switch (spec_->post_map) {
      case PostMap::Raw:
        return x;
      case PostMap::Rff:
        return rff_embed(*rff_, x);
      case PostMap::UnitNorm: {
        const double n = x.norm();
        if (n == 0.0) throw ZeroVector("unit-norm post-map hit a zero draw");
        return x / n;
      }
    }
    return x;  // unreachable
  }

 private:
  const ArmSpec* spec_;
  int index_;
  RngStream rng_;
  Matrix cov_sqrt_;
  const RFFMap* rff_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// -------------------------------------------------------------------------
// Objective specification and online state.

enum class ObjectiveFamily { Fd, NlvKernel, NlvFeature, QuadKd, QuadInvRke };

struct ObjectiveSpec {
  ObjectiveFamily family = ObjectiveFamily::Fd;
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  // NlvFeature: > 0 embeds raw samples through an RFF map of this many
  // cos/sin pairs; 0 means samples already are the features.
  int rff_pairs = 0;
  double fidelity_weight = 0.0;  // w for the quadratic linear term
  double fidelity_tau = 0.0;     // psi(x) = 1{min dist to real set <= tau}
  double eig_clamp = kDefaultEigClamp;

  bool is_quadratic() const {
    return family == ObjectiveFamily::QuadKd ||
           family == ObjectiveFamily::QuadInvRke;
  }
};

struct RoundOracle {
  LossFn loss;
  GradFn grad;
};

class OnlineObjective {
 public:
  virtual ~OnlineObjective() = default;
  virtual void add(const Vector& sample, int arm) = 0;
  virtual double loss(const MixtureWeights& alpha) const = 0;
  virtual Vector gradient(const MixtureWeights& alpha) const = 0;
  // Standalone empirical score of a single arm, for the one-arm baselines.
  virtual double arm_score(int i) const = 0;
  virtual int num_arms() const = 0;
  // Snapshot closures for one solve; subclasses may freeze derived state.
  virtual RoundOracle oracle() const {
    return RoundOracle{
        [this](const MixtureWeights& a) { return loss(a); },
        [this](const MixtureWeights& a) { return gradient(a); }};
  }
  // Per-arm feature moments, when the objective maintains them.
  virtual const std::vector<ArmMomentStats>* stats() const { return nullptr; }
};

class FdOnline : public OnlineObjective {
 public:
  FdOnline(int m, FdReference ref, double clamp)
      : ref_(std::move(ref)), clamp_(clamp) {
    const auto d = ref_.data.mean.size();
    stats_.assign(m, ArmMomentStats::zero(static_cast<int>(d)));
  }

  void add(const Vector& x, int arm) override { stats_[arm].add_sample(x); }
  double loss(const MixtureWeights& a) const override {
    return fd_loss(a, stats_, ref_);
  }
  Vector gradient(const MixtureWeights& a) const override {
    return fd_gradient(a, stats_, ref_, clamp_);
  }
  double arm_score(int i) const override {
    GaussianMoments gm;
    gm.mean = stats_[i].mean;
    gm.cov = symmetrize(stats_[i].second_moment -
                        stats_[i].mean * stats_[i].mean.transpose());
    return frechet_distance(gm, ref_.data);
  }
  int num_arms() const override { return static_cast<int>(stats_.size()); }
  const std::vector<ArmMomentStats>* stats() const override { return &stats_; }
  const FdReference& reference() const { return ref_; }

 private:
  FdReference ref_;
  double clamp_;
  std::vector<ArmMomentStats> stats_;
};

// Negative log-Vendi over a pooled Gram matrix (exact kernel form).
class NlvKernelOnline : public OnlineObjective {
 public:
  NlvKernelOnline(int m, KernelSpec spec, double clamp)
      : pooled_(m, spec, /*keep_gram=*/true), clamp_(clamp) {}

  void add(const Vector& x, int arm) override { pooled_.add(x, arm); }
  double loss(const MixtureWeights& a) const override {
    return nlv_loss_kernel(a, pooled_, clamp_);
  }
  Vector gradient(const MixtureWeights& a) const override {
    return nlv_gradient_kernel(a, pooled_, clamp_);
  }
  double arm_score(int i) const override {
    // Negative log-Vendi of the arm's own samples.
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < pooled_.size(); ++j)
      if (pooled_.arm_of()[j] == i) idx.push_back(j);
    if (idx.empty()) throw MissingWarmStart("one-arm score with empty arm");
    Matrix sub(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b)
        sub(a, b) = pooled_.gram()(idx[a], idx[b]);
    return -von_neumann_entropy(sub / static_cast<double>(idx.size()), clamp_);
  }
  int num_arms() const override { return pooled_.num_arms(); }
  const PooledKernelState& pooled() const { return pooled_; }

 private:
  PooledKernelState pooled_;
  double clamp_;
};

// Negative log-Vendi in feature space. Evaluates through the d x d mixture
// covariance when the feature dimension is small, and through the pooled
// embedding Gram (identical nonzero spectrum) when the feature dimension
// would exceed the final pool size. The embedding Gram is the cosine Gram:
// RFF features are exactly unit-norm, so cosine equals the inner product.
class NlvFeatureOnline : public OnlineObjective {
 public:
  NlvFeatureOnline(int m, std::shared_ptr<const RFFMap> rff, double clamp,
                   bool prefer_pooled_gram)
      : rff_(std::move(rff)), clamp_(clamp) {
    stats_.assign(m, ArmMomentStats());
    if (prefer_pooled_gram)
      pooled_ = std::make_unique<PooledKernelState>(m, KernelSpec::cosine(),
                                                    /*keep_gram=*/true);
  }

  void add(const Vector& sample, int arm) override {
    const Vector phi = rff_ ? rff_embed(*rff_, sample) : sample;
    if (stats_[arm].count == 0 && stats_[arm].mean.size() == 0)
      stats_[arm] = ArmMomentStats::zero(static_cast<int>(phi.size()));
    if (pooled_) pooled_->add(phi, arm);
    stats_[arm].add_sample(phi);
  }

  double loss(const MixtureWeights& a) const override {
    if (pooled_) return nlv_loss_kernel(a, *pooled_, clamp_);
    return nlv_loss_from_stats(a, stats_, clamp_);
  }
  Vector gradient(const MixtureWeights& a) const override {
    if (pooled_) return nlv_gradient_kernel(a, *pooled_, clamp_);
    return nlv_gradient_from_stats(a, stats_, clamp_);
  }
  double arm_score(int i) const override {
    if (stats_[i].count < 1)
      throw MissingWarmStart("one-arm score with empty arm");
    return -von_neumann_entropy(stats_[i].second_moment, clamp_);
  }
  int num_arms() const override { return static_cast<int>(stats_.size()); }
  const std::vector<ArmMomentStats>* stats() const override { return &stats_; }

 private:
  std::shared_ptr<const RFFMap> rff_;
  double clamp_;
  std::unique_ptr<PooledKernelState> pooled_;
  std::vector<ArmMomentStats> stats_;
};

// Quadratic family (KD or inverse-RKE), optionally with the linear fidelity
// term. The KD constant E[k(Y, Y')] over the real set is added back so that
// reported values sit on the same scale as the population KD.
class QuadOnline : public OnlineObjective {
 public:
  QuadOnline(int m, const ObjectiveSpec& spec, std::vector<Vector> real_set)
      : mode_(spec.family == ObjectiveFamily::QuadKd ? QuadMode::Kd
                                                     : QuadMode::InvRke),
        fidelity_weight_(spec.fidelity_weight),
        est_(m, spec.kernel, mode_, real_set, spec.fidelity_tau) {
    if (mode_ == QuadMode::Kd) {
      double s = 0.0;
      for (const Vector& a : real_set)
        for (const Vector& b : real_set) s += kernel_eval(spec.kernel, a, b);
      constant_ = s / (static_cast<double>(real_set.size()) *
                       static_cast<double>(real_set.size()));
    }
  }

  void add(const Vector& x, int arm) override { est_.add(x, arm); }

  // Effective linear term: the KD cross term plus the weighted fidelity
  // averages.
  Vector linear_term() const {
    Vector b = est_.bhat();
    if (fidelity_weight_ != 0.0 && est_.fidelity_tau() > 0.0)
      b += fidelity_weight_ * est_.theta_hat();
    return b;
  }

  double loss(const MixtureWeights& a) const override {
    return quad_loss(a, est_.khat_psd(), linear_term(), 1.0) + constant_;
  }
  Vector gradient(const MixtureWeights& a) const override {
    return quad_gradient(a, est_.khat_psd(), linear_term(), 1.0);
  }
  double arm_score(int i) const override {
    const Matrix k = est_.khat_psd();
    const Vector b = linear_term();
    return k(i, i) + b(i) + constant_;
  }
  int num_arms() const override { return est_.num_arms(); }

  RoundOracle oracle() const override {
    auto k = std::make_shared<Matrix>(est_.khat_psd());
    auto b = std::make_shared<Vector>(linear_term());
    const double c = constant_;
    return RoundOracle{
        [k, b, c](const MixtureWeights& a) {
          return quad_loss(a, *k, *b, 1.0) + c;
        },
        [k, b](const MixtureWeights& a) {
          return quad_gradient(a, *k, *b, 1.0);
        }};
  }

  const QuadEstimate& estimate() const { return est_; }
  double constant() const { return constant_; }

 private:
  QuadMode mode_;
  double fidelity_weight_;
  QuadEstimate est_;
  double constant_ = 0.0;
};

// -------------------------------------------------------------------------
// Protocol configuration and traces.

enum class Algorithm {
  MixtureGreedy,
  MixtureUcb,
  OneArmGreedy,
  EpsilonGreedy,
  MixtureOracle,
  OneArmOracle,
};

struct UcbParams {
  double delta_l = 0.05;
  double c = 1.0;
};

struct BanditConfig {
  std::vector<ArmSpec> arms;
  ObjectiveSpec objective;
  std::vector<Vector> real_set;  // reference embeddings (FD, KD, fidelity)
  long horizon = 100;            // T
  int warm_start = 5;            // M, samples per arm before the loop
  Algorithm algorithm = Algorithm::MixtureGreedy;
  UcbParams ucb;
  double epsilon = 0.1;
  EGConfig eg;
  std::uint64_t seed = 1;

  // Oracle baselines play these instead of optimizing.
  std::optional<Vector> oracle_alpha;
  std::optional<int> oracle_best_arm;

  // Diagnostics: per-update Frobenius deviations of feature second moments
  // against known population values.
  std::vector<Matrix> population_second_moments;

  void validate() const {
    if (arms.empty()) throw ConfigError("bandit config: no arms");
    if (horizon < 1) throw ConfigError("bandit config: horizon must be >= 1");
    if (warm_start < 1)
      throw ConfigError("bandit config: warm start must be >= 1");
  }
};

struct TraceRow {
  long t = 0;
  int arm = 0;
  Vector alpha;
  double emp_loss = std::numeric_limits<double>::quiet_NaN();
  double pop_loss = std::numeric_limits<double>::quiet_NaN();
  double cum_regret = std::numeric_limits<double>::quiet_NaN();
};

struct DeviationRecord {
  int arm = 0;
  long n = 0;        // arm count after the update
  double frob = 0.0; // ||S_i(n) - S_i||_F
};

struct BanditTrace {
  std::vector<TraceRow> rows;
  std::vector<long> final_counts;
  int num_arms = 0;
  int warm_start = 0;
  std::vector<DeviationRecord> deviations;
};

// Population counterpart of the empirical objective, for regret accounting.
struct PopulationOracle {
  LossFn loss;
  double optimum = std::numeric_limits<double>::quiet_NaN();
  Vector alpha_star;
};

// -------------------------------------------------------------------------
// Runner.

namespace detail {

inline std::unique_ptr<OnlineObjective> make_objective(
    const BanditConfig& cfg, std::shared_ptr<const RFFMap> rff) {
  const int m = static_cast<int>(cfg.arms.size());
  const ObjectiveSpec& spec = cfg.objective;
  switch (spec.family) {
    case ObjectiveFamily::Fd: {
      if (cfg.real_set.empty())
        throw ConfigError("FD objective requires a real reference set");
      return std::make_unique<FdOnline>(
          m, FdReference::create(moments_of(cfg.real_set)), spec.eig_clamp);
    }
    case ObjectiveFamily::NlvKernel:
      return std::make_unique<NlvKernelOnline>(m, spec.kernel, spec.eig_clamp);
    case ObjectiveFamily::NlvFeature: {
      // Evaluate through the pooled embedding Gram when the feature
      // dimension would exceed the final pool size.
      const long pool_size =
          cfg.horizon + static_cast<long>(m) * cfg.warm_start;
      const bool pooled =
          spec.rff_pairs > 0 && 2L * spec.rff_pairs > pool_size;
      return std::make_unique<NlvFeatureOnline>(m, rff, spec.eig_clamp,
                                                pooled);
    }
    case ObjectiveFamily::QuadKd:
      if (cfg.real_set.empty())
        throw ConfigError("KD objective requires a real reference set");
      return std::make_unique<QuadOnline>(m, spec, cfg.real_set);
    case ObjectiveFamily::QuadInvRke:
      return std::make_unique<QuadOnline>(m, spec, cfg.real_set);
  }
  throw ConfigError("unknown objective family");
}

}  // namespace detail

class BanditRunner {
 public:
  explicit BanditRunner(const BanditConfig& cfg,
                        const PopulationOracle* pop = nullptr)
      : cfg_(cfg), pop_(pop) {
    cfg.validate();
    const int m = static_cast<int>(cfg.arms.size());

    if (cfg.algorithm == Algorithm::MixtureUcb && !cfg.objective.is_quadratic())
      throw UnsupportedObjective(
          "mixture_ucb is defined for the quadratic family only");
    if (cfg.algorithm == Algorithm::MixtureOracle && !cfg.oracle_alpha)
      throw ConfigError("mixture_oracle algorithm needs oracle_alpha");
    if (cfg.algorithm == Algorithm::OneArmOracle && !cfg.oracle_best_arm)
      throw ConfigError("one_arm_oracle algorithm needs oracle_best_arm");

    // One shared RFF map per run, fed from its own named stream. Either the
    // objective embeds raw samples, or arms embed at draw time; not both.
    if (cfg_.objective.rff_pairs > 0) {
      for (const ArmSpec& a : cfg_.arms)
        if (a.kind == ArmSpec::Kind::SyntheticGaussian &&
            a.post_map == PostMap::Rff)
          throw ConfigError(
              "objective-level RFF requires raw arm samples; drop the arm "
              "post-map");
      rff_ = std::make_shared<const RFFMap>(RFFMap::create(
          cfg_.arms.front().sample_dim(), cfg_.objective.rff_pairs,
          cfg_.objective.kernel.bandwidth, cfg_.seed));
    } else {
      for (const ArmSpec& a : cfg_.arms)
        if (a.kind == ArmSpec::Kind::SyntheticGaussian &&
            a.post_map == PostMap::Rff) {
          if (a.rff_pairs < 1)
            throw ConfigError("rff post-map needs arm rff_pairs >= 1");
          rff_ = std::make_shared<const RFFMap>(
              RFFMap::create(static_cast<int>(a.mean.size()), a.rff_pairs,
                             cfg_.objective.kernel.bandwidth, cfg_.seed));
          break;
        }
    }

    arms_.reserve(m);
    for (int i = 0; i < m; ++i)
      arms_.emplace_back(cfg_.arms[i], cfg_.seed, i, rff_.get());
    objective_ = detail::make_objective(cfg_, rff_);
  }

  BanditTrace run() {
    const int m = static_cast<int>(cfg_.arms.size());
    RngStream index_rng(cfg_.seed, "index");

    BanditTrace trace;
    trace.num_arms = m;
    trace.warm_start = cfg_.warm_start;
    trace.final_counts.assign(m, 0);
    trace.rows.reserve(cfg_.horizon);

    // Warm start: M samples per arm, in arm order.
    for (int i = 0; i < m; ++i)
      for (int r = 0; r < cfg_.warm_start; ++r) ingest(arms_[i].draw(0), i, trace);

    MixtureWeights alpha = MixtureWeights::uniform(m);
    double cum_regret = 0.0;

    for (long t = 1; t <= cfg_.horizon; ++t) {
      alpha = select_weights(alpha, index_rng);

      int pull;
      switch (cfg_.algorithm) {
        case Algorithm::OneArmGreedy:
        case Algorithm::EpsilonGreedy:
        case Algorithm::OneArmOracle:
          // alpha is a vertex; the pull is already decided.
          pull = vertex_index(alpha);
          break;
        default:
          pull = index_rng.categorical(alpha.v);
          break;
      }

      TraceRow row;
      row.t = t;
      row.arm = pull;
      row.alpha = alpha.v;
      row.emp_loss = objective_->loss(alpha);
      if (pop_ != nullptr) {
        row.pop_loss = pop_->loss(alpha);
        cum_regret += row.pop_loss - pop_->optimum;
        row.cum_regret = cum_regret;
      }
      ingest(arms_[pull].draw(t), pull, trace);
      trace.rows.push_back(std::move(row));
    }
    return trace;
  }

  const OnlineObjective& objective() const { return *objective_; }

 private:
  void ingest(const Vector& x, int arm, BanditTrace& trace) {
    objective_->add(x, arm);
    ++trace.final_counts[arm];
    if (!cfg_.population_second_moments.empty()) {
      const auto* st = objective_->stats();
      if (st != nullptr) {
        DeviationRecord rec;
        rec.arm = arm;
        rec.n = (*st)[arm].count;
        rec.frob = ((*st)[arm].second_moment -
                    cfg_.population_second_moments[arm])
                       .norm();
        trace.deviations.push_back(rec);
      }
    }
  }

  static int vertex_index(const MixtureWeights& alpha) {
    int best = 0;
    for (int i = 1; i < alpha.size(); ++i)
      if (alpha.v(i) > alpha.v(best)) best = i;
    return best;
  }

  int greedy_arm() const {
    int best = 0;
    double best_score = objective_->arm_score(0);
    for (int i = 1; i < objective_->num_arms(); ++i) {
      const double s = objective_->arm_score(i);
      if (s < best_score) {
        best_score = s;
        best = i;
      }
    }
    return best;
  }

  MixtureWeights select_weights(const MixtureWeights& prev,
                                RngStream& index_rng) {
    const int m = static_cast<int>(cfg_.arms.size());
    switch (cfg_.algorithm) {
      case Algorithm::MixtureGreedy: {
        const RoundOracle oracle = objective_->oracle();
        const MixtureWeights start =
            cfg_.eg.warm_start == EgWarmStart::PreviousIterate
                ? prev
                : MixtureWeights::uniform(m);
        return solve_simplex(oracle.grad, start, cfg_.eg);
      }
      case Algorithm::MixtureUcb:
        return ucb_weights(prev);
      case Algorithm::OneArmGreedy:
        return MixtureWeights::vertex(m, greedy_arm());
      case Algorithm::EpsilonGreedy: {
        const double u = index_rng.uniform01();
        if (u < cfg_.epsilon)
          return MixtureWeights::vertex(
              m, static_cast<int>(index_rng.below(m)));
        return MixtureWeights::vertex(m, greedy_arm());
      }
      case Algorithm::MixtureOracle:
        return MixtureWeights::unchecked(*cfg_.oracle_alpha);
      case Algorithm::OneArmOracle:
        return MixtureWeights::vertex(m, *cfg_.oracle_best_arm);
    }
    throw ConfigError("unknown algorithm");
  }

  // Optimistic surrogate: quadratic pair means minus per-entry bonuses
  // scaled by delta_l. The surrogate is symmetrized but deliberately not
  // PSD-projected, so optimism may leave the convex cone; EG runs anyway.
  MixtureWeights ucb_weights(const MixtureWeights& prev) {
    const auto* quad = dynamic_cast<const QuadOnline*>(objective_.get());
    if (quad == nullptr)
      throw UnsupportedObjective("mixture_ucb needs the quadratic objective");
    const QuadEstimate& est = quad->estimate();
    const int m = est.num_arms();
    const double scale = cfg_.ucb.c * cfg_.ucb.delta_l;

    Matrix surrogate_k = quad->estimate().khat_psd();
    Vector surrogate_b = quad->linear_term();
    if (scale != 0.0) {
      Matrix bonus(m, m);
      Vector linear_bonus(m);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j)
          bonus(i, j) = scale * std::sqrt(2.0 / est.pair_counts()(i, j));
        linear_bonus(i) =
            scale * std::sqrt(2.0 / static_cast<double>(est.counts()[i]));
      }
      surrogate_k = symmetrize(surrogate_k - bonus);
      surrogate_b -= linear_bonus;
      if (log_level() >= 2 &&
          sym_eig(surrogate_k).eigenvalues.minCoeff() < 0.0)
        log_debug("ucb surrogate left the PSD cone; EG continues");
    }
    auto k = std::make_shared<Matrix>(std::move(surrogate_k));
    auto b = std::make_shared<Vector>(std::move(surrogate_b));
    const GradFn grad = [k, b](const MixtureWeights& a) {
      return quad_gradient(a, *k, *b, 1.0);
    };
    const MixtureWeights start =
        cfg_.eg.warm_start == EgWarmStart::PreviousIterate
            ? prev
            : MixtureWeights::uniform(m);
    return solve_simplex(grad, start, cfg_.eg);
  }

  BanditConfig cfg_;
  const PopulationOracle* pop_;
  std::shared_ptr<const RFFMap> rff_;
  std::vector<ArmSampler> arms_;
  std::unique_ptr<OnlineObjective> objective_;
};

inline BanditTrace run_bandit(const BanditConfig& cfg,
                              const PopulationOracle* pop = nullptr) {
  return BanditRunner(cfg, pop).run();
}

// -------------------------------------------------------------------------
// Population-level oracle and regret accounting.

struct OracleResult {
  MixtureWeights alpha;
  double value;
};

// Minimizes the population objective with EG, cross-checked against the
// brute-force grid when the arm count permits; the better point wins.
inline OracleResult mixture_oracle(const LossFn& loss, const GradFn& grad,
                                   int m, EGConfig cfg = EGConfig{},
                                   int grid_resolution = 200) {
  cfg.steps = std::max(cfg.steps, 2000);
  MixtureWeights eg = solve_simplex(grad, MixtureWeights::uniform(m), cfg);
  double eg_val = loss(eg);
  if (m <= 4) {
    const MixtureWeights grid = brute_force_simplex(loss, m, grid_resolution);
    const double grid_val = loss(grid);
    if (grid_val < eg_val) {
      // Polish the grid point with EG restarted from it.
      EGConfig polish = cfg;
      polish.steps = 1000;
      MixtureWeights refined = solve_simplex(grad, grid, polish);
      const double refined_val = loss(refined);
      return refined_val < grid_val ? OracleResult{refined, refined_val}
                                    : OracleResult{grid, grid_val};
    }
  }
  return OracleResult{eg, eg_val};
}

// Reg_t = sum_{s <= t} (F(alpha_s) - F*).
inline std::vector<double> regret_curve(const BanditTrace& trace,
                                        const LossFn& pop_loss,
                                        double optimum) {
  std::vector<double> out;
  out.reserve(trace.rows.size());
  double acc = 0.0;
  for (const TraceRow& row : trace.rows) {
    acc += pop_loss(MixtureWeights::unchecked(row.alpha)) - optimum;
    out.push_back(acc);
  }
  return out;
}

}  // namespace mixsel
