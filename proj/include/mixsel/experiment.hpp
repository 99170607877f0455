#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mixsel/bandit.hpp"
#include "mixsel/config.hpp"
#include "mixsel/diagnostics.hpp"
#include "mixsel/embedding_io.hpp"
#include "mixsel/errors.hpp"
#include "mixsel/log.hpp"
#include "mixsel/svg.hpp"

// Experiment orchestration: replicate fan-out over (algorithm, seed) pairs,
// trace and summary emission, sweeps, fixture generation, and the
// trace-level diagnostics report.

namespace mixsel {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace detail

// Trace CSV: t, I_t, alpha_0..alpha_{m-1}, emp_loss, pop_loss, cum_regret.
inline void write_trace_csv(const std::string& path, const BanditTrace& trace) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "t,I_t";
  for (int i = 0; i < trace.num_arms; ++i) out << ",alpha_" << i;
  out << ",emp_loss,pop_loss,cum_regret\n";
  for (const TraceRow& row : trace.rows) {
    out << row.t << ',' << row.arm;
    for (int i = 0; i < trace.num_arms; ++i)
      out << ',' << detail::fmt_double(row.alpha(i));
    out << ',' << detail::fmt_double(row.emp_loss) << ','
        << detail::fmt_double(row.pop_loss) << ','
        << detail::fmt_double(row.cum_regret) << '\n';
  }
}

inline BanditTrace read_trace_csv(const std::string& path, int warm_start) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw ConfigError("empty trace file: " + path);
  int num_arms = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ','))
      if (col.rfind("alpha_", 0) == 0) ++num_arms;
  }
  if (num_arms == 0) throw ConfigError("trace header has no alpha columns");

  BanditTrace trace;
  trace.num_arms = num_arms;
  trace.warm_start = warm_start;
  trace.final_counts.assign(num_arms, warm_start);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    TraceRow row;
    std::getline(ss, cell, ',');
    row.t = std::stol(cell);
    std::getline(ss, cell, ',');
    row.arm = std::stoi(cell);
    row.alpha = Vector(num_arms);
    for (int i = 0; i < num_arms; ++i) {
      std::getline(ss, cell, ',');
      row.alpha(i) = std::stod(cell);
    }
    std::getline(ss, cell, ',');
    row.emp_loss = std::stod(cell);
    std::getline(ss, cell, ',');
    row.pop_loss = std::stod(cell);
    std::getline(ss, cell, ',');
    row.cum_regret = std::stod(cell);
    ++trace.final_counts[row.arm];
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

struct RunResult {
  std::string algorithm;
  std::uint64_t seed = 0;
  BanditTrace trace;
  double final_score = std::numeric_limits<double>::quiet_NaN();
  double area_under_regret = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentOutput {
  std::vector<RunResult> runs;
  std::string out_dir;
};

// One (algorithm, seed) run, deterministic in isolation.
inline RunResult execute_single_run(const ExperimentConfig& cfg,
                                    const std::string& algorithm,
                                    std::uint64_t seed) {
  BanditConfig bandit = materialize_bandit_config(cfg);
  bandit.algorithm = detail::parse_algorithm(algorithm);
  bandit.seed = seed;

  std::optional<PopulationOracle> pop =
      build_population_oracle(cfg, bandit, seed);
  if (pop) {
    bandit.oracle_alpha = pop->alpha_star;
    int best = 0;
    for (int i = 1; i < static_cast<int>(bandit.arms.size()); ++i)
      if (pop->loss(MixtureWeights::vertex(
              static_cast<int>(bandit.arms.size()), i)) <
          pop->loss(MixtureWeights::vertex(
              static_cast<int>(bandit.arms.size()), best)))
        best = i;
    bandit.oracle_best_arm = best;
  } else if (bandit.algorithm == Algorithm::MixtureOracle ||
             bandit.algorithm == Algorithm::OneArmOracle) {
    throw ConfigError(
        "oracle algorithms need a computable population (synthetic arms with "
        "population.enable)");
  }

  RunResult result;
  result.algorithm = algorithm;
  result.seed = seed;
  result.trace = run_bandit(bandit, pop ? &*pop : nullptr);

  if (!result.trace.rows.empty()) {
    const TraceRow& last = result.trace.rows.back();
    result.final_score = std::isfinite(last.pop_loss) ? last.pop_loss
                                                      : last.emp_loss;
    if (std::isfinite(last.cum_regret)) {
      double area = 0.0;
      for (const TraceRow& row : result.trace.rows) area += row.cum_regret;
      result.area_under_regret = area;
    }
  }
  return result;
}

inline std::string trace_filename(const std::string& algorithm,
                                  std::uint64_t seed) {
  return "trace_" + algorithm + "_seed" + std::to_string(seed) + ".csv";
}

// Runs every (algorithm, seed) pair, writes per-run traces, a summary CSV
// and an SVG chart. Replicates fan out over a worker pool sized by
// cfg.jobs; each worker owns one run and its trace file, and the summary is
// merged by a single writer afterwards, so outputs are byte-identical
// regardless of the job count.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                       const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  struct Job {
    std::string algorithm;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const std::string& algo : cfg.algorithms)
    for (std::uint64_t seed : cfg.seeds) jobs.push_back(Job{algo, seed});

  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        RunResult r = execute_single_run(cfg, jobs[i].algorithm, jobs[i].seed);
        write_trace_csv(
            (fs::path(out_dir) / trace_filename(r.algorithm, r.seed)).string(),
            r.trace);
        log_info("finished " + jobs[i].algorithm + " seed " +
                 std::to_string(jobs[i].seed));
        results[i] = std::move(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int pool = std::max(1, std::min<int>(cfg.jobs,
                                             static_cast<int>(jobs.size())));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Summary: per-algorithm mean and sd of the final score and of the area
  // under the regret curve.
  std::ofstream summary((fs::path(out_dir) / "summary.csv").string(),
                        std::ios::trunc | std::ios::binary);
  summary << "algorithm,runs,final_score_mean,final_score_sd,"
             "area_under_regret_mean,area_under_regret_sd\n";
  for (const std::string& algo : cfg.algorithms) {
    std::vector<double> scores, areas;
    for (const RunResult& r : results)
      if (r.algorithm == algo) {
        scores.push_back(r.final_score);
        areas.push_back(r.area_under_regret);
      }
    auto mean_sd = [](const std::vector<double>& xs) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      const double sd =
          xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1))
                        : 0.0;
      return std::pair<double, double>(mean, sd);
    };
    const auto [smean, ssd] = mean_sd(scores);
    const auto [amean, asd] = mean_sd(areas);
    summary << algo << ',' << scores.size() << ',' << detail::fmt_double(smean)
            << ',' << detail::fmt_double(ssd) << ','
            << detail::fmt_double(amean) << ',' << detail::fmt_double(asd)
            << '\n';
  }
  summary.close();

  // Chart: per-algorithm mean score per round across seeds.
  std::vector<SvgSeries> series;
  for (const std::string& algo : cfg.algorithms) {
    SvgSeries s;
    s.label = algo;
    long runs = 0;
    for (const RunResult& r : results) {
      if (r.algorithm != algo) continue;
      ++runs;
      if (s.values.size() < r.trace.rows.size())
        s.values.resize(r.trace.rows.size(), 0.0);
      for (std::size_t i = 0; i < r.trace.rows.size(); ++i) {
        const TraceRow& row = r.trace.rows[i];
        s.values[i] += std::isfinite(row.pop_loss) ? row.pop_loss
                                                   : row.emp_loss;
      }
    }
    for (double& v : s.values) v /= static_cast<double>(runs);
    series.push_back(std::move(s));
  }
  write_svg_chart((fs::path(out_dir) / "chart.svg").string(),
                  "score per round", series);

  ExperimentOutput out;
  out.runs = std::move(results);
  out.out_dir = out_dir;
  return out;
}

// Expands sweep axes into labeled configurations (cartesian product over the
// non-empty axes) and runs each into its own subdirectory. Emits one summary
// row per combination and algorithm.
inline void run_sweep(const ExperimentConfig& base, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  struct Combo {
    std::string label;
    ExperimentConfig cfg;
  };
  std::vector<Combo> combos{{"", base}};
  auto expand = [&combos](auto&& apply, const auto& values,
                          const std::string& key) {
    if (values.empty()) return;
    std::vector<Combo> next;
    for (const Combo& c : combos)
      for (const auto& v : values) {
        Combo n = c;
        apply(n.cfg, v);
        std::ostringstream label;
        label << c.label << (c.label.empty() ? "" : "_") << key << '=' << v;
        n.label = label.str();
        next.push_back(std::move(n));
      }
    combos = std::move(next);
  };
  expand([](ExperimentConfig& c, double v) { c.ucb_delta_l = v; },
         base.sweep.delta_l, "delta_l");
  expand([](ExperimentConfig& c, double v) { c.objective.sigma = v; },
         base.sweep.sigma, "sigma");
  expand([](ExperimentConfig& c, int v) { c.objective.rff_pairs = v; },
         base.sweep.rff_pairs, "rff_pairs");

  std::ofstream summary((fs::path(out_dir) / "sweep_summary.csv").string(),
                        std::ios::trunc | std::ios::binary);
  summary << "combo,algorithm,runs,final_score_mean,final_score_sd\n";
  for (const Combo& combo : combos) {
    const std::string sub =
        (fs::path(out_dir) / (combo.label.empty() ? "base" : combo.label))
            .string();
    const ExperimentOutput out = run_experiment(combo.cfg, sub);
    for (const std::string& algo : combo.cfg.algorithms) {
      std::vector<double> scores;
      for (const RunResult& r : out.runs)
        if (r.algorithm == algo) scores.push_back(r.final_score);
      double mean = 0.0;
      for (double s : scores) mean += s;
      mean /= static_cast<double>(scores.size());
      double var = 0.0;
      for (double s : scores) var += (s - mean) * (s - mean);
      const double sd = scores.size() > 1
                            ? std::sqrt(var / (scores.size() - 1.0))
                            : 0.0;
      summary << (combo.label.empty() ? "base" : combo.label) << ',' << algo
              << ',' << scores.size() << ',' << detail::fmt_double(mean) << ','
              << detail::fmt_double(sd) << '\n';
    }
  }
}

// Writes synthetic embedding fixtures from Gaussian specs.
inline void generate_fixtures(const ExperimentConfig& cfg,
                              const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (cfg.fixtures.empty())
    throw ConfigError("gen-synthetic: config has no 'fixtures'");
  fs::create_directories(out_dir);
  for (const FixtureConfig& f : cfg.fixtures) {
    if (f.path.empty() || f.count < 1 || f.mean.empty())
      throw ConfigError("fixture needs path, positive count, and mean");
    const Vector mean = detail::to_vector(f.mean);
    Vector sd = Vector::Ones(mean.size());
    if (!f.cov_diag.empty()) {
      if (f.cov_diag.size() != f.mean.size())
        throw ConfigError("fixture cov_diag length differs from mean");
      sd = detail::to_vector(f.cov_diag).cwiseSqrt();
    }
    RngStream rng(cfg.seeds.front(), "fixture/" + f.path);
    std::vector<Vector> rows;
    rows.reserve(f.count);
    for (long i = 0; i < f.count; ++i) {
      Vector x = mean;
      for (Eigen::Index c = 0; c < x.size(); ++c) x(c) += sd(c) * rng.normal();
      if (f.unit_norm) x /= x.norm();
      rows.push_back(std::move(x));
    }
    const std::string path = (fs::path(out_dir) / f.path).string();
    save_embeddings(path, rows);
    log_info("wrote fixture " + path);
  }
}

// Diagnostics report over existing traces: count conservation, alpha row
// sums, and the count floor at a given gamma.
inline std::string diagnose_traces(const ExperimentConfig& cfg,
                                   const std::string& dir, double gamma,
                                   double delta) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("trace_", 0) == 0 && name.size() > 4 &&
        name.compare(name.size() - 4, 4, ".csv") == 0)
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no trace_*.csv files in " + dir);

  std::ostringstream report;
  report << "diagnostics report\n";
  report << "traces: " << files.size() << "\n";
  report << "gamma: " << gamma << "  delta: " << delta << "\n\n";
  bool all_pass = true;
  for (const std::string& file : files) {
    const BanditTrace trace = read_trace_csv(file, cfg.warm_start);
    long total = 0;
    for (long c : trace.final_counts) total += c;
    const long expected =
        static_cast<long>(trace.rows.size()) +
        static_cast<long>(trace.num_arms) * cfg.warm_start;
    double worst_alpha_dev = 0.0;
    for (const TraceRow& row : trace.rows)
      worst_alpha_dev =
          std::max(worst_alpha_dev, std::abs(row.alpha.sum() - 1.0));
    const CountFloorReport floor = count_floor(trace, gamma, delta);

    const bool pass =
        total == expected && worst_alpha_dev <= 1e-9 && floor.pass;
    all_pass = all_pass && pass;
    report << fs::path(file).filename().string() << "\n";
    report << "  rounds: " << trace.rows.size() << "\n";
    report << "  count_conservation: "
           << (total == expected ? "pass" : "FAIL") << " (" << total << "/"
           << expected << ")\n";
    report << "  alpha_row_sum_max_dev: " << worst_alpha_dev << " "
           << (worst_alpha_dev <= 1e-9 ? "pass" : "FAIL") << "\n";
    report << "  count_floor: " << (floor.pass ? "pass" : "FAIL")
           << " worst_margin=" << floor.worst_margin;
    if (!floor.pass)
      report << " first_violation_round=" << floor.first_violation_round
             << " arm=" << floor.violating_arm;
    report << "\n";
  }
  report << "\noverall: " << (all_pass ? "pass" : "FAIL") << "\n";
  return report.str();
}

}  // namespace mixsel
