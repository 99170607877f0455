#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsel/bandit.hpp"
#include "mixsel/embedding_io.hpp"
#include "mixsel/errors.hpp"

// Experiment configuration: JSON on disk, materialized into runnable bandit
// configs plus an optional population oracle.

namespace mixsel {

using json = nlohmann::json;

struct ArmConfig {
  std::string type = "synthetic_gaussian";  // or "file"
  std::vector<double> mean;
  std::vector<double> cov_diag;                // either diagonal...
  std::vector<std::vector<double>> cov;        // ...or full matrix
  std::string post_map = "raw";                // raw | rff | unit_norm
  int rff_pairs = 0;
  std::string path;                            // file-backed pool
};

struct RealConfig {
  std::string type;  // "" (absent) | "file" | "synthetic_gaussian"
  std::string path;
  std::vector<double> mean;
  std::vector<double> cov_diag;
  long count = 0;

  bool present() const { return !type.empty(); }
};

struct ObjectiveConfig {
  std::string family = "fd";  // fd|nlv_kernel|nlv_feature|quad_kd|quad_inv_rke
  std::string kernel_kind = "gaussian";
  double sigma = 1.0;
  bool normalize = true;
  int rff_pairs = 0;
  double fidelity_weight = 0.0;
  double fidelity_tau = 0.0;
};

struct SweepConfig {
  std::vector<double> delta_l;
  std::vector<double> sigma;
  std::vector<int> rff_pairs;

  bool empty() const {
    return delta_l.empty() && sigma.empty() && rff_pairs.empty();
  }
};

struct FixtureConfig {
  std::string path;
  long count = 0;
  std::vector<double> mean;
  std::vector<double> cov_diag;
  bool unit_norm = false;
};

struct PopulationConfig {
  bool enable = true;
  long plugin_samples = 100000;
};

struct ExperimentConfig {
  std::vector<ArmConfig> arms;
  RealConfig real;
  ObjectiveConfig objective;
  long horizon = 100;
  int warm_start = 5;
  std::vector<std::string> algorithms = {"mixture_greedy"};
  double ucb_delta_l = 0.05;
  double ucb_c = 1.0;
  double epsilon = 0.1;
  EGConfig eg;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "out";
  int jobs = 1;
  PopulationConfig population;
  SweepConfig sweep;
  std::vector<FixtureConfig> fixtures;
};

// -------------------------------------------------------------------------
// JSON round trip.

namespace detail {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline void from_json_into(const json& j, ArmConfig& a) {
  detail::read_if(j, "type", a.type);
  detail::read_if(j, "mean", a.mean);
  detail::read_if(j, "cov_diag", a.cov_diag);
  detail::read_if(j, "cov", a.cov);
  detail::read_if(j, "post_map", a.post_map);
  detail::read_if(j, "rff_pairs", a.rff_pairs);
  detail::read_if(j, "path", a.path);
}

inline json to_json(const ArmConfig& a) {
  json j;
  j["type"] = a.type;
  if (a.type == "file") {
    j["path"] = a.path;
  } else {
    j["mean"] = a.mean;
    if (!a.cov.empty())
      j["cov"] = a.cov;
    else
      j["cov_diag"] = a.cov_diag;
    j["post_map"] = a.post_map;
    if (a.rff_pairs > 0) j["rff_pairs"] = a.rff_pairs;
  }
  return j;
}

inline ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  if (!j.contains("arms") || !j.at("arms").is_array() || j.at("arms").empty())
    throw ConfigError("config: 'arms' must be a non-empty array");
  for (const json& ja : j.at("arms")) {
    ArmConfig a;
    from_json_into(ja, a);
    cfg.arms.push_back(std::move(a));
  }
  if (j.contains("real")) {
    const json& jr = j.at("real");
    detail::read_if(jr, "type", cfg.real.type);
    detail::read_if(jr, "path", cfg.real.path);
    detail::read_if(jr, "mean", cfg.real.mean);
    detail::read_if(jr, "cov_diag", cfg.real.cov_diag);
    detail::read_if(jr, "count", cfg.real.count);
  }
  if (j.contains("objective")) {
    const json& jo = j.at("objective");
    detail::read_if(jo, "family", cfg.objective.family);
    if (jo.contains("kernel")) {
      const json& jk = jo.at("kernel");
      detail::read_if(jk, "kind", cfg.objective.kernel_kind);
      detail::read_if(jk, "sigma", cfg.objective.sigma);
      detail::read_if(jk, "normalize", cfg.objective.normalize);
    }
    detail::read_if(jo, "rff_pairs", cfg.objective.rff_pairs);
    detail::read_if(jo, "fidelity_weight", cfg.objective.fidelity_weight);
    detail::read_if(jo, "fidelity_tau", cfg.objective.fidelity_tau);
  }
  detail::read_if(j, "horizon", cfg.horizon);
  detail::read_if(j, "warm_start", cfg.warm_start);
  if (j.contains("algorithms"))
    cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  else if (j.contains("algorithm"))
    cfg.algorithms = {j.at("algorithm").get<std::string>()};
  if (j.contains("ucb")) {
    detail::read_if(j.at("ucb"), "delta_l", cfg.ucb_delta_l);
    detail::read_if(j.at("ucb"), "c", cfg.ucb_c);
  }
  detail::read_if(j, "epsilon", cfg.epsilon);
  if (j.contains("eg")) {
    const json& je = j.at("eg");
    detail::read_if(je, "stepsize", cfg.eg.stepsize);
    detail::read_if(je, "steps", cfg.eg.steps);
    std::string ws = "previous_iterate";
    detail::read_if(je, "warm_start", ws);
    if (ws == "previous_iterate")
      cfg.eg.warm_start = EgWarmStart::PreviousIterate;
    else if (ws == "uniform")
      cfg.eg.warm_start = EgWarmStart::Uniform;
    else
      throw ConfigError("config: unknown eg warm_start '" + ws + "'");
    detail::read_if(je, "diminishing", cfg.eg.diminishing);
  }
  if (j.contains("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  detail::read_if(j, "out_dir", cfg.out_dir);
  detail::read_if(j, "jobs", cfg.jobs);
  if (j.contains("population")) {
    detail::read_if(j.at("population"), "enable", cfg.population.enable);
    detail::read_if(j.at("population"), "plugin_samples",
                    cfg.population.plugin_samples);
  }
  if (j.contains("sweep")) {
    const json& js = j.at("sweep");
    detail::read_if(js, "delta_l", cfg.sweep.delta_l);
    detail::read_if(js, "sigma", cfg.sweep.sigma);
    detail::read_if(js, "rff_pairs", cfg.sweep.rff_pairs);
  }
  if (j.contains("fixtures")) {
    for (const json& jf : j.at("fixtures")) {
      FixtureConfig f;
      detail::read_if(jf, "path", f.path);
      detail::read_if(jf, "count", f.count);
      detail::read_if(jf, "mean", f.mean);
      detail::read_if(jf, "cov_diag", f.cov_diag);
      detail::read_if(jf, "unit_norm", f.unit_norm);
      cfg.fixtures.push_back(std::move(f));
    }
  }
  if (cfg.seeds.empty()) throw ConfigError("config: 'seeds' must be non-empty");
  return cfg;
}

inline json to_json(const ExperimentConfig& cfg) {
  json j;
  j["arms"] = json::array();
  for (const ArmConfig& a : cfg.arms) j["arms"].push_back(to_json(a));
  if (cfg.real.present()) {
    json jr;
    jr["type"] = cfg.real.type;
    if (cfg.real.type == "file") {
      jr["path"] = cfg.real.path;
    } else {
      jr["mean"] = cfg.real.mean;
      jr["cov_diag"] = cfg.real.cov_diag;
      jr["count"] = cfg.real.count;
    }
    j["real"] = jr;
  }
  j["objective"] = {{"family", cfg.objective.family},
                    {"kernel",
                     {{"kind", cfg.objective.kernel_kind},
                      {"sigma", cfg.objective.sigma},
                      {"normalize", cfg.objective.normalize}}},
                    {"rff_pairs", cfg.objective.rff_pairs},
                    {"fidelity_weight", cfg.objective.fidelity_weight},
                    {"fidelity_tau", cfg.objective.fidelity_tau}};
  j["horizon"] = cfg.horizon;
  j["warm_start"] = cfg.warm_start;
  j["algorithms"] = cfg.algorithms;
  j["ucb"] = {{"delta_l", cfg.ucb_delta_l}, {"c", cfg.ucb_c}};
  j["epsilon"] = cfg.epsilon;
  j["eg"] = {{"stepsize", cfg.eg.stepsize},
             {"steps", cfg.eg.steps},
             {"warm_start", cfg.eg.warm_start == EgWarmStart::Uniform
                                ? "uniform"
                                : "previous_iterate"},
             {"diminishing", cfg.eg.diminishing}};
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  j["jobs"] = cfg.jobs;
  j["population"] = {{"enable", cfg.population.enable},
                     {"plugin_samples", cfg.population.plugin_samples}};
  if (!cfg.sweep.empty()) {
    json js;
    if (!cfg.sweep.delta_l.empty()) js["delta_l"] = cfg.sweep.delta_l;
    if (!cfg.sweep.sigma.empty()) js["sigma"] = cfg.sweep.sigma;
    if (!cfg.sweep.rff_pairs.empty()) js["rff_pairs"] = cfg.sweep.rff_pairs;
    j["sweep"] = js;
  }
  if (!cfg.fixtures.empty()) {
    j["fixtures"] = json::array();
    for (const FixtureConfig& f : cfg.fixtures)
      j["fixtures"].push_back({{"path", f.path},
                               {"count", f.count},
                               {"mean", f.mean},
                               {"cov_diag", f.cov_diag},
                               {"unit_norm", f.unit_norm}});
  }
  return j;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    return parse_experiment_config(j);
  } catch (const json::exception& e) {
    throw ConfigError("config field error in " + path + ": " + e.what());
  }
}

// -------------------------------------------------------------------------
// Materialization.

namespace detail {

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Matrix arm_covariance(const ArmConfig& a) {
  const auto d = static_cast<Eigen::Index>(a.mean.size());
  if (!a.cov.empty()) {
    Matrix m(d, d);
    if (static_cast<Eigen::Index>(a.cov.size()) != d)
      throw ConfigError("arm covariance has wrong row count");
    for (Eigen::Index r = 0; r < d; ++r) {
      if (static_cast<Eigen::Index>(a.cov[r].size()) != d)
        throw ConfigError("arm covariance has wrong column count");
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = a.cov[r][c];
    }
    return m;
  }
  if (a.cov_diag.empty()) throw ConfigError("arm needs cov or cov_diag");
  if (static_cast<Eigen::Index>(a.cov_diag.size()) != d)
    throw ConfigError("arm cov_diag length differs from mean length");
  Matrix m = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) m(i, i) = a.cov_diag[i];
  return m;
}

inline PostMap parse_post_map(const std::string& s) {
  if (s == "raw") return PostMap::Raw;
  if (s == "rff") return PostMap::Rff;
  if (s == "unit_norm") return PostMap::UnitNorm;
  throw ConfigError("unknown post_map '" + s + "'");
}

inline ObjectiveFamily parse_family(const std::string& s) {
  if (s == "fd") return ObjectiveFamily::Fd;
  if (s == "nlv_kernel") return ObjectiveFamily::NlvKernel;
  if (s == "nlv_feature") return ObjectiveFamily::NlvFeature;
  if (s == "quad_kd") return ObjectiveFamily::QuadKd;
  if (s == "quad_inv_rke") return ObjectiveFamily::QuadInvRke;
  throw ConfigError("unknown objective family '" + s + "'");
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "mixture_greedy") return Algorithm::MixtureGreedy;
  if (s == "mixture_ucb") return Algorithm::MixtureUcb;
  if (s == "one_arm_greedy") return Algorithm::OneArmGreedy;
  if (s == "epsilon_greedy") return Algorithm::EpsilonGreedy;
  if (s == "mixture_oracle") return Algorithm::MixtureOracle;
  if (s == "one_arm_oracle") return Algorithm::OneArmOracle;
  throw ConfigError("unknown algorithm '" + s + "'");
}

inline KernelSpec parse_kernel(const ObjectiveConfig& o) {
  if (o.kernel_kind == "gaussian")
    return KernelSpec::gaussian(o.sigma, o.normalize);
  if (o.kernel_kind == "cosine") return KernelSpec::cosine();
  throw ConfigError("unknown kernel kind '" + o.kernel_kind + "'");
}

}  // namespace detail

// Bandit config for one run; everything except algorithm and seed is shared.
inline BanditConfig materialize_bandit_config(const ExperimentConfig& cfg) {
  BanditConfig out;
  for (const ArmConfig& a : cfg.arms) {
    if (a.type == "file") {
      if (a.path.empty()) throw ConfigError("file arm needs 'path'");
      out.arms.push_back(ArmSpec::file_backed(load_embeddings(a.path)));
    } else if (a.type == "synthetic_gaussian") {
      if (a.mean.empty()) throw ConfigError("synthetic arm needs 'mean'");
      out.arms.push_back(ArmSpec::gaussian(
          detail::to_vector(a.mean), detail::arm_covariance(a),
          detail::parse_post_map(a.post_map), a.rff_pairs));
    } else {
      throw ConfigError("unknown arm type '" + a.type + "'");
    }
  }
  out.objective.family = detail::parse_family(cfg.objective.family);
  out.objective.kernel = detail::parse_kernel(cfg.objective);
  out.objective.rff_pairs = cfg.objective.rff_pairs;
  out.objective.fidelity_weight = cfg.objective.fidelity_weight;
  out.objective.fidelity_tau = cfg.objective.fidelity_tau;
  out.horizon = cfg.horizon;
  out.warm_start = cfg.warm_start;
  out.ucb.delta_l = cfg.ucb_delta_l;
  out.ucb.c = cfg.ucb_c;
  out.epsilon = cfg.epsilon;
  out.eg = cfg.eg;

  if (cfg.real.present()) {
    if (cfg.real.type == "file") {
      out.real_set = load_embeddings(cfg.real.path);
    } else if (cfg.real.type == "synthetic_gaussian") {
      if (cfg.real.count < 1)
        throw ConfigError("synthetic real set needs a positive 'count'");
      const Vector mean = detail::to_vector(cfg.real.mean);
      const Vector sd = detail::to_vector(cfg.real.cov_diag).cwiseSqrt();
      RngStream rng(cfg.seeds.front(), "real");
      for (long i = 0; i < cfg.real.count; ++i) {
        Vector x = mean;
        for (Eigen::Index c = 0; c < x.size(); ++c)
          x(c) += sd(c) * rng.normal();
        out.real_set.push_back(std::move(x));
      }
    } else {
      throw ConfigError("unknown real set type '" + cfg.real.type + "'");
    }
  }
  return out;
}

// Population oracle by exact moments where available and plug-in sampling
// otherwise. Plug-in draws come from dedicated "pop/..." streams seeded by
// `seed`, so they never interact with a run's own streams.
inline std::optional<PopulationOracle> build_population_oracle(
    const ExperimentConfig& cfg, const BanditConfig& bandit,
    std::uint64_t seed) {
  if (!cfg.population.enable) return std::nullopt;
  for (const ArmSpec& a : bandit.arms)
    if (a.kind != ArmSpec::Kind::SyntheticGaussian) return std::nullopt;

  const int m = static_cast<int>(bandit.arms.size());
  const long p = std::max<long>(cfg.population.plugin_samples, 100);
  const ObjectiveFamily family = bandit.objective.family;

  std::shared_ptr<const RFFMap> rff;
  const bool objective_rff =
      family == ObjectiveFamily::NlvFeature && bandit.objective.rff_pairs > 0;
  const bool arm_rff = bandit.arms.front().post_map == PostMap::Rff;
  if (objective_rff)
    rff = std::make_shared<const RFFMap>(
        RFFMap::create(bandit.arms.front().sample_dim(),
                       bandit.objective.rff_pairs,
                       bandit.objective.kernel.bandwidth, seed));
  else if (arm_rff)
    rff = std::make_shared<const RFFMap>(RFFMap::create(
        bandit.arms.front().sample_dim(), bandit.arms.front().rff_pairs,
        bandit.objective.kernel.bandwidth, seed));

  auto draw_embedded = [&](const ArmSpec& a, RngStream& rng) {
    Vector x = a.mean + psd_fn(a.cov, PsdFn::Sqrt, 0.0) *
                            rng.normal_vector(static_cast<int>(a.mean.size()));
    if (a.post_map == PostMap::UnitNorm) x /= x.norm();
    if (a.post_map == PostMap::Rff) x = rff_embed(*rff, x);
    if (objective_rff) x = rff_embed(*rff, x);
    return x;
  };

  PopulationOracle oracle;
  GradFn grad;

  switch (family) {
    case ObjectiveFamily::Fd: {
      if (bandit.real_set.empty()) return std::nullopt;
      const auto ref = FdReference::create(moments_of(bandit.real_set));
      std::vector<ArmMomentStats> stats;
      for (int i = 0; i < m; ++i) {
        const ArmSpec& a = bandit.arms[i];
        ArmMomentStats s = ArmMomentStats::zero(a.sample_dim());
        if (a.post_map == PostMap::Raw) {
          s.count = 1;
          s.mean = a.mean;
          s.second_moment = a.cov + a.mean * a.mean.transpose();
        } else {
          RngStream rng(seed, "pop/" + std::to_string(i));
          const Vector first = draw_embedded(a, rng);
          s = ArmMomentStats::zero(static_cast<int>(first.size()));
          s.add_sample(first);
          for (long r = 1; r < p; ++r) s.add_sample(draw_embedded(a, rng));
        }
        stats.push_back(std::move(s));
      }
      oracle.loss = [stats, ref](const MixtureWeights& w) {
        return fd_loss(w, stats, ref);
      };
      grad = [stats, ref](const MixtureWeights& w) {
        return fd_gradient(w, stats, ref);
      };
      break;
    }
    case ObjectiveFamily::NlvFeature:
    case ObjectiveFamily::NlvKernel: {
      // Kernel form: the feature space is explicit only for the cosine
      // kernel (inner products of normalized embeddings).
      const bool cosine = bandit.objective.kernel.kind == KernelKind::Cosine;
      if (family == ObjectiveFamily::NlvKernel && !cosine)
        return std::nullopt;
      std::vector<ArmMomentStats> stats;
      for (int i = 0; i < m; ++i) {
        RngStream rng(seed, "pop/" + std::to_string(i));
        Vector first = draw_embedded(bandit.arms[i], rng);
        if (family == ObjectiveFamily::NlvKernel) first /= first.norm();
        ArmMomentStats s = ArmMomentStats::zero(static_cast<int>(first.size()));
        s.add_sample(first);
        for (long r = 1; r < p; ++r) {
          Vector x = draw_embedded(bandit.arms[i], rng);
          if (family == ObjectiveFamily::NlvKernel) x /= x.norm();
          s.add_sample(x);
        }
        stats.push_back(std::move(s));
      }
      oracle.loss = [stats](const MixtureWeights& w) {
        return nlv_loss_from_stats(w, stats);
      };
      grad = [stats](const MixtureWeights& w) {
        return nlv_gradient_from_stats(w, stats);
      };
      break;
    }
    case ObjectiveFamily::QuadKd:
    case ObjectiveFamily::QuadInvRke: {
      if (family == ObjectiveFamily::QuadKd && bandit.real_set.empty())
        return std::nullopt;
      const KernelSpec spec = bandit.objective.kernel;
      const bool squared = family == ObjectiveFamily::QuadInvRke;
      Matrix k(m, m);
      for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
          RngStream ri(seed, "pop/pair/" + std::to_string(i) + "/" +
                                 std::to_string(j) + "/a");
          RngStream rj(seed, "pop/pair/" + std::to_string(i) + "/" +
                                 std::to_string(j) + "/b");
          double acc = 0.0;
          for (long r = 0; r < p; ++r) {
            const double v = kernel_eval(spec, draw_embedded(bandit.arms[i], ri),
                                         draw_embedded(bandit.arms[j], rj));
            acc += squared ? v * v : v;
          }
          k(i, j) = k(j, i) = acc / static_cast<double>(p);
        }
      }
      Vector b = Vector::Zero(m);
      double constant = 0.0;
      double fidelity_w = bandit.objective.fidelity_weight;
      Vector theta = Vector::Zero(m);
      if (!bandit.real_set.empty()) {
        const auto& real = bandit.real_set;
        const long draws = std::min<long>(p, 20000);
        for (int i = 0; i < m; ++i) {
          RngStream rng(seed, "pop/cross/" + std::to_string(i));
          double acc = 0.0, acc_theta = 0.0;
          for (long r = 0; r < draws; ++r) {
            const Vector x = draw_embedded(bandit.arms[i], rng);
            double s = 0.0;
            for (const Vector& y : real) s += kernel_eval(spec, x, y);
            acc += s / static_cast<double>(real.size());
            if (bandit.objective.fidelity_tau > 0.0) {
              double dmin = std::numeric_limits<double>::infinity();
              for (const Vector& y : real)
                dmin = std::min(dmin, (x - y).norm());
              acc_theta += dmin <= bandit.objective.fidelity_tau ? 1.0 : 0.0;
            }
          }
          if (family == ObjectiveFamily::QuadKd)
            b(i) = -2.0 * acc / static_cast<double>(draws);
          theta(i) = acc_theta / static_cast<double>(draws);
        }
        if (family == ObjectiveFamily::QuadKd) {
          double acc = 0.0;
          for (const Vector& y : real)
            for (const Vector& z : real) acc += kernel_eval(spec, y, z);
          constant = acc / (static_cast<double>(real.size()) *
                            static_cast<double>(real.size()));
        }
      }
      const Vector b_eff = b + fidelity_w * theta;
      oracle.loss = [k, b_eff, constant](const MixtureWeights& w) {
        return quad_loss(w, k, b_eff, 1.0) + constant;
      };
      grad = [k, b_eff](const MixtureWeights& w) {
        return quad_gradient(w, k, b_eff, 1.0);
      };
      break;
    }
  }

  const OracleResult opt = mixture_oracle(oracle.loss, grad, m, bandit.eg);
  oracle.alpha_star = opt.alpha.v;
  oracle.optimum = opt.value;
  return oracle;
}

}  // namespace mixsel
