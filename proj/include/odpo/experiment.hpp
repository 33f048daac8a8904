#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "odpo/instance.hpp"
#include "odpo/pipeline.hpp"

namespace odpo {

enum class InstanceGenerator { kRandom, kAnisotropic, kFile };

std::string to_string(InstanceGenerator generator);
// Throws Error for unknown names.
InstanceGenerator parse_generator(const std::string& name);

struct GridPoint {
  int dimension = 0;
  int horizon = 0;
};

struct ExperimentConfig {
  InstanceGenerator generator = InstanceGenerator::kRandom;
  int num_contexts = 20;
  int arms_per_context = 3;
  // Required for kFile; its dimension must match every grid point.
  std::optional<Instance> instance;
  // Reuse one generated instance for every replica instead of drawing a
  // fresh one per replica.
  bool fixed_instance = false;
  std::vector<Algorithm> algorithms = {Algorithm::kOdpo};
  std::vector<GridPoint> grid;
  int replicas = 10;
  std::uint64_t master_seed = 0;
  // Ridge, epsilon and delta for every algorithm; its seed is ignored.
  OdpoConfig odpo;
  int jobs = 1;
  // Fill RegretRow::record with a one-line JSON run record.
  bool keep_records = false;
};

struct RegretRow {
  int replica = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::kOdpo;
  int dimension = 0;
  int horizon = 0;
  int effective_t = 0;
  int num_contexts = 0;
  int arms_per_context = 0;
  double regret = 0.0;
  double theorem1_bound = 0.0;
  double corollary_hp_bound = 0.0;
  double corollary_exp_bound = 0.0;
  double lower_bound = 0.0;
  // "ok", "max_iters", "span_deficient" or "error: <message>".
  std::string status = "ok";
  std::string record;

  bool is_error() const { return status.rfind("error", 0) == 0; }
};

struct AggregateRow {
  Algorithm algorithm = Algorithm::kOdpo;
  int dimension = 0;
  int horizon = 0;
  int count = 0;     // rows without an error status
  int failures = 0;  // rows with an error status
  double mean = 0.0;
  double std_error = 0.0;  // unbiased sample variance
  double q05 = 0.0;        // nearest-rank quantiles
  double q50 = 0.0;
  double q95 = 0.0;
  double mean_effective_t = 0.0;
};

struct RegretReport {
  // Sorted by (algorithm, seed, d, T).
  std::vector<RegretRow> rows;
  // Sorted by (algorithm, d, T).
  std::vector<AggregateRow> aggregates;

  bool has_errors() const;
};

// Runs every (algorithm, grid point, replica) cell. Replica r draws from
// seed derive_seed(master, {r}); the result does not depend on `jobs`.
// Throws Error for an invalid configuration; failures inside a cell are
// recorded in that row's status.
RegretReport run_experiment(const ExperimentConfig& config);

// Nearest-rank quantile of an ascending-sorted, nonempty sample.
double nearest_rank_quantile(const std::vector<double>& sorted, double q);

AggregateRow aggregate(Algorithm algorithm, int dimension, int horizon,
                       const std::vector<RegretRow>& rows);

inline constexpr const char* kRegretCsvHeader =
    "replica,seed,algorithm,d,T,effective_T,N,K,regret,theorem1_bound,"
    "corollary_hp_bound,corollary_exp_bound,lower_bound,status";

void write_regret_csv(const RegretReport& report, std::ostream& out);
void write_aggregate_csv(const RegretReport& report, std::ostream& out);
// Fixed-width table for terminals.
void write_aggregate_table(const RegretReport& report, std::ostream& out);

}  // namespace odpo
