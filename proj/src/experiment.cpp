#include "odpo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "odpo/evaluation.hpp"
#include "odpo/io.hpp"

namespace odpo {

namespace {

constexpr std::uint64_t kInstanceStream = 0x1a57;
constexpr std::uint64_t kFeedbackStream = 0xfeed;
constexpr std::uint64_t kUniformStream = 0x0b1f;
constexpr int kMaxInstanceAttempts = 100;

double guarded(auto&& f) {
  try {
    return f();
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

struct Task {
  int replica = 0;
  int dimension = 0;
  std::vector<int> horizons;
};

Instance make_instance(const ExperimentConfig& config, int dimension,
                       std::uint64_t replica_seed) {
  if (config.generator == InstanceGenerator::kFile) return *config.instance;
  const std::uint64_t base =
      config.fixed_instance ? config.master_seed : replica_seed;
  for (int attempt = 0; attempt < kMaxInstanceAttempts; ++attempt) {
    const std::uint64_t seed = derive_seed(
        base, {kInstanceStream, static_cast<std::uint64_t>(dimension),
               static_cast<std::uint64_t>(attempt)});
    Instance inst =
        config.generator == InstanceGenerator::kRandom
            ? make_random_instance(config.num_contexts, config.arms_per_context,
                                   dimension, seed)
            : make_anisotropic_instance(config.num_contexts, dimension, seed);
    if (inst.spans()) return inst;
  }
  throw SpanDeficient(fmt::format(
      "no spanning instance for d = {} after {} draws", dimension,
      kMaxInstanceAttempts));
}

void fill_bounds(RegretRow& row, const ExperimentConfig& config) {
  const int d = row.dimension;
  const double t = row.effective_t;
  const double lambda = config.odpo.estimation_lambda(d);
  row.theorem1_bound = guarded(
      [&] { return theorem1_bound(d, t, config.odpo.epsilon, lambda, config.odpo.delta); });
  row.corollary_hp_bound = guarded([&] { return corollary_hp_bound(d, t, config.odpo.delta); });
  row.corollary_exp_bound = guarded([&] { return corollary_expected_bound(d, t); });
  row.lower_bound = guarded([&] { return hypercube_regret_floor(d, t); });
}

std::vector<RegretRow> run_task(const ExperimentConfig& config, const Task& task) {
  const std::uint64_t replica_seed =
      derive_seed(config.master_seed, {static_cast<std::uint64_t>(task.replica)});
  std::vector<RegretRow> rows;
  auto blank_row = [&](Algorithm algorithm, int horizon) {
    RegretRow row;
    row.replica = task.replica;
    row.seed = replica_seed;
    row.algorithm = algorithm;
    row.dimension = task.dimension;
    row.horizon = horizon;
    return row;
  };

  std::optional<Instance> instance;
  try {
    instance = make_instance(config, task.dimension, replica_seed);
  } catch (const std::exception& e) {
    for (Algorithm alg : config.algorithms) {
      for (int horizon : task.horizons) {
        RegretRow row = blank_row(alg, horizon);
        row.regret = std::numeric_limits<double>::quiet_NaN();
        row.status = fmt::format("error: {}", e.what());
        fill_bounds(row, config);
        rows.push_back(std::move(row));
      }
    }
    return rows;
  }

  const auto& arms = instance->diff_arms();
  const double lambda_est = config.odpo.estimation_lambda(task.dimension);
  std::optional<FrankWolfeResult> design;
  std::string design_error;

  for (Algorithm alg : config.algorithms) {
    for (int horizon : task.horizons) {
      RegretRow row = blank_row(alg, horizon);
      row.num_contexts = instance->num_contexts();
      row.arms_per_context = instance->max_arms();
      const std::uint64_t feedback_seed = derive_seed(
          replica_seed, {kFeedbackStream, static_cast<std::uint64_t>(task.dimension),
                         static_cast<std::uint64_t>(horizon),
                         static_cast<std::uint64_t>(alg)});
      try {
        RunRecordInput record;
        record.algorithm = to_string(alg);
        record.replica = task.replica;
        record.seed = replica_seed;
        record.instance = &*instance;
        record.horizon = horizon;
        record.config = &config.odpo;
        Allocation allocation;
        EstimatorResult estimate_result;
        Prediction prediction;
        if (alg == Algorithm::kOdpo) {
          if (!design && design_error.empty()) {
            try {
              design = frank_wolfe_design(arms, config.odpo.design_options());
            } catch (const std::exception& e) {
              design_error = e.what();
            }
          }
          if (!design) throw Error(design_error);
          OdpoConfig run_config = config.odpo;
          run_config.seed = feedback_seed;
          OdpoRun run = run_odpo(*instance, horizon, run_config, *design);
          if (run.design.span_deficient) row.status = "span_deficient";
          if (!run.design.converged()) row.status = "max_iters";
          allocation = std::move(run.allocation);
          estimate_result = std::move(run.estimate);
          prediction = std::move(run.prediction);
          record.warnings = std::move(run.warnings);
          record.design = &*design;
        } else {
          allocation = alg == Algorithm::kUniform
                           ? baseline_uniform(arms.size(), horizon,
                                              derive_seed(replica_seed,
                                                          {kUniformStream,
                                                           static_cast<std::uint64_t>(task.dimension),
                                                           static_cast<std::uint64_t>(horizon)}))
                           : baseline_greedy_norm(arms, horizon, lambda_est);
          Rng rng(feedback_seed);
          AllocationFit fit = fit_allocation(instance->theta_star(), arms, allocation,
                                             lambda_est, config.odpo.delta, rng);
          estimate_result = std::move(fit.estimate);
          prediction = predict(estimate_result.theta_hat_projected, *instance);
        }
        row.effective_t = allocation.effective_t;
        row.regret = simple_regret(*instance, prediction);
        if (config.keep_records) {
          record.allocation = &allocation;
          record.estimate = &estimate_result;
          record.prediction = &prediction;
          record.regret = row.regret;
          record.status = row.status;
          row.record = run_record_json(record);
        }
      } catch (const std::exception& e) {
        row.regret = std::numeric_limits<double>::quiet_NaN();
        row.status = fmt::format("error: {}", e.what());
      }
      fill_bounds(row, config);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void validate(const ExperimentConfig& config) {
  if (config.algorithms.empty()) throw Error("no algorithms requested");
  if (config.grid.empty()) throw Error("empty (d, T) grid");
  if (config.replicas < 1) throw Error("replicas must be >= 1");
  if (config.jobs < 1) throw Error("jobs must be >= 1");
  if (!(config.odpo.epsilon > 0.0)) throw Error("epsilon must be > 0");
  if (!(config.odpo.delta > 0.0 && config.odpo.delta < 1.0)) {
    throw Error("delta must lie in (0, 1)");
  }
  if (!(config.odpo.lambda_design > 0.0)) throw Error("lambda_design must be > 0");
  if (config.odpo.lambda_est && !(*config.odpo.lambda_est > 0.0)) {
    throw Error("lambda_est must be > 0");
  }
  if (config.generator == InstanceGenerator::kFile && !config.instance) {
    throw Error("file generator needs an instance");
  }
  if (config.generator != InstanceGenerator::kFile) {
    if (config.num_contexts < 1) throw Error("N must be >= 1");
    if (config.generator == InstanceGenerator::kRandom && config.arms_per_context < 2) {
      throw Error("K must be >= 2");
    }
    if (config.generator == InstanceGenerator::kAnisotropic && config.num_contexts < 2) {
      throw Error("anisotropic instances need N >= 2");
    }
  }
  for (const auto& g : config.grid) {
    if (g.dimension < 1) throw Error("grid dimension must be >= 1");
    if (g.horizon < 1) throw Error("grid horizon must be >= 1");
    if (config.generator == InstanceGenerator::kAnisotropic && g.dimension < 2) {
      throw Error("anisotropic instances need d >= 2");
    }
    if (config.instance && g.dimension != config.instance->dimension()) {
      throw Error(fmt::format("grid dimension {} does not match the instance dimension {}",
                              g.dimension, config.instance->dimension()));
    }
  }
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.12g}", x);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(InstanceGenerator generator) {
  switch (generator) {
    case InstanceGenerator::kRandom: return "random";
    case InstanceGenerator::kAnisotropic: return "anisotropic";
    case InstanceGenerator::kFile: return "file";
  }
  return "unknown";
}

InstanceGenerator parse_generator(const std::string& name) {
  if (name == "random") return InstanceGenerator::kRandom;
  if (name == "anisotropic") return InstanceGenerator::kAnisotropic;
  if (name == "file") return InstanceGenerator::kFile;
  throw Error(fmt::format("unknown generator '{}' (expected random, anisotropic or file)",
                          name));
}

bool RegretReport::has_errors() const {
  return std::any_of(rows.begin(), rows.end(), [](const RegretRow& r) { return r.is_error(); });
}

double nearest_rank_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<long long>(std::ceil(q * n));
  rank = std::clamp<long long>(rank, 1, static_cast<long long>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

AggregateRow aggregate(Algorithm algorithm, int dimension, int horizon,
                       const std::vector<RegretRow>& rows) {
  AggregateRow agg;
  agg.algorithm = algorithm;
  agg.dimension = dimension;
  agg.horizon = horizon;
  std::vector<double> values;
  double eff_sum = 0.0;
  for (const auto& r : rows) {
    if (r.algorithm != algorithm || r.dimension != dimension || r.horizon != horizon) continue;
    if (r.is_error()) {
      ++agg.failures;
      continue;
    }
    values.push_back(r.regret);
    eff_sum += r.effective_t;
  }
  agg.count = static_cast<int>(values.size());
  if (values.empty()) {
    agg.mean = agg.std_error = agg.q05 = agg.q50 = agg.q95 = agg.mean_effective_t =
        std::numeric_limits<double>::quiet_NaN();
    return agg;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  agg.mean = sum / agg.count;
  agg.mean_effective_t = eff_sum / agg.count;
  if (agg.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
    agg.std_error = std::sqrt(ss / (agg.count - 1) / agg.count);
  }
  std::sort(values.begin(), values.end());
  agg.q05 = nearest_rank_quantile(values, 0.05);
  agg.q50 = nearest_rank_quantile(values, 0.50);
  agg.q95 = nearest_rank_quantile(values, 0.95);
  return agg;
}

RegretReport run_experiment(const ExperimentConfig& config) {
  validate(config);

  // One task per (replica, d): the instance and its design are shared by
  // every horizon at that dimension.
  std::map<int, std::vector<int>> horizons_by_dim;
  for (const auto& g : config.grid) {
    auto& hs = horizons_by_dim[g.dimension];
    if (std::find(hs.begin(), hs.end(), g.horizon) == hs.end()) hs.push_back(g.horizon);
  }
  std::vector<Task> tasks;
  for (int r = 0; r < config.replicas; ++r) {
    for (const auto& [d, hs] : horizons_by_dim) tasks.push_back({r, d, hs});
  }

  std::vector<std::vector<RegretRow>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      results[i] = run_task(config, tasks[i]);
    }
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), tasks.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RegretReport report;
  for (auto& rs : results) {
    for (auto& r : rs) report.rows.push_back(std::move(r));
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const RegretRow& a, const RegretRow& b) {
    return std::tuple(to_string(a.algorithm), a.seed, a.dimension, a.horizon, a.replica) <
           std::tuple(to_string(b.algorithm), b.seed, b.dimension, b.horizon, b.replica);
  });

  std::vector<std::tuple<std::string, Algorithm, int, int>> groups;
  for (Algorithm alg : config.algorithms) {
    for (const auto& [d, hs] : horizons_by_dim) {
      for (int h : hs) groups.emplace_back(to_string(alg), alg, d, h);
    }
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<2>(a), std::get<3>(a)) <
           std::tie(std::get<0>(b), std::get<2>(b), std::get<3>(b));
  });
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  for (const auto& [name, alg, d, h] : groups) {
    report.aggregates.push_back(aggregate(alg, d, h, report.rows));
  }
  return report;
}

void write_regret_csv(const RegretReport& report, std::ostream& out) {
  out << kRegretCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.replica, r.seed,
                       to_string(r.algorithm), r.dimension, r.horizon, r.effective_t,
                       r.num_contexts, r.arms_per_context, format_number(r.regret),
                       format_number(r.theorem1_bound), format_number(r.corollary_hp_bound),
                       format_number(r.corollary_exp_bound), format_number(r.lower_bound),
                       csv_escape(r.status));
  }
}

void write_aggregate_csv(const RegretReport& report, std::ostream& out) {
  out << "algorithm,d,T,count,failures,mean_regret,std_error,q05,q50,q95,mean_effective_T\n";
  for (const auto& a : report.aggregates) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", to_string(a.algorithm),
                       a.dimension, a.horizon, a.count, a.failures, format_number(a.mean),
                       format_number(a.std_error), format_number(a.q05),
                       format_number(a.q50), format_number(a.q95),
                       format_number(a.mean_effective_t));
  }
}

void write_aggregate_table(const RegretReport& report, std::ostream& out) {
  out << fmt::format("{:<10} {:>4} {:>7} {:>5} {:>5} {:>12} {:>12} {:>12} {:>12}\n",
                     "algorithm", "d", "T", "n", "fail", "mean", "std_err", "median", "q95");
  for (const auto& a : report.aggregates) {
    out << fmt::format("{:<10} {:>4} {:>7} {:>5} {:>5} {:>12.6g} {:>12.6g} {:>12.6g} {:>12.6g}\n",
                       to_string(a.algorithm), a.dimension, a.horizon, a.count, a.failures,
                       a.mean, a.std_error, a.q50, a.q95);
  }
}

}  // namespace odpo
