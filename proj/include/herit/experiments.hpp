#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "herit/estimators.hpp"
#include "herit/simulate.hpp"

namespace herit {

struct ExperimentConfig {
  double eta_star = 0.5;
  double K = 0.1;
  double P = 0.5;
  std::size_t n_loci = 10000;
  std::size_t target_cases = 100;
  std::size_t replications = 200;
  std::uint64_t seed = 1;
  std::vector<EstimatorKind> methods{EstimatorKind::FirstOrder, EstimatorKind::SecondOrder};
  GenotypeKind genotype_kind = GenotypeKind::Binomial;
  double gamma = 0.05;

  StudyConfig study() const;
  /// Throws std::invalid_argument (InvalidDesign for K > P).
  void validate() const;
};

struct MethodOutcome {
  EstimatorKind method = EstimatorKind::FirstOrder;
  /// NaN when the estimator failed; `error` then holds the reason.
  double eta_hat = 0.0;
  bool converged = true;
  std::chrono::duration<double> wall_time{0.0};
  std::string error;
};

struct ReplicationRecord {
  std::size_t rep_index = 0;
  std::uint64_t seed = 0;
  std::size_t population_size = 0;
  std::size_t realized_n = 0;
  std::size_t realized_cases = 0;
  bool en_holds = false;
  std::vector<MethodOutcome> outcomes;
  /// Set when the replicate could not be simulated at all.
  std::string error;
};

/// Seed of replication `rep`; depends only on (base seed, rep).
std::uint64_t replication_seed(std::uint64_t base, std::size_t rep);

/// Simulate one study and run every configured estimator. Estimator wall
/// times include the relationship-matrix build.
ReplicationRecord run_replication(const ExperimentConfig& cfg, std::size_t rep);

struct MethodSummary {
  EstimatorKind method = EstimatorKind::FirstOrder;
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
  double bias = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Pure function of the records; failed outcomes are skipped.
std::vector<MethodSummary> summarize(const std::vector<ReplicationRecord>& records,
                                     const ExperimentConfig& cfg);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ReplicationRecord> records;  ///< sorted by rep_index
  std::vector<MethodSummary> summaries;
};

/// Replications run on `threads` workers (0 = hardware concurrency); each uses
/// its own substream so results do not depend on scheduling. `order`, if
/// given, is the execution order of replication indices (a permutation).
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1,
                                const std::vector<std::size_t>* order = nullptr);

/// Sample quantile with linear interpolation between order statistics.
double quantile_sorted(const std::vector<double>& sorted, double q);

// CSV layout shared by the CLI and the tests.

/// "# key = value" lines describing cfg.
std::string config_echo(const ExperimentConfig& cfg);

/// Long format, one line per (replication, method).
std::string records_csv_header(bool with_times);
std::string records_csv_rows(const ExperimentConfig& cfg, const std::vector<ReplicationRecord>& records,
                             bool with_times);
std::string summary_csv_header();
std::string summary_csv_rows(const ExperimentConfig& cfg, const std::vector<MethodSummary>& summaries);

/// Parses rows produced by records_csv_rows (comment lines skipped) back into
/// records for the grid point (eta_star, K) of `cfg`.
std::vector<ReplicationRecord> parse_records_csv(std::string_view csv, const ExperimentConfig& cfg);

struct TimingRow {
  std::size_t n = 0;
  std::size_t n_loci = 0;
  EstimatorKind method = EstimatorKind::FirstOrder;
  double grm_seconds = 0.0;
  double estimator_seconds = 0.0;
  double seconds = 0.0;  ///< grm + estimator
};

/// Wall-clock cost of one estimate from standardised genotypes.
///
/// For each (n, N) the relationship matrix build and each estimator's pair
/// sweep are timed separately, after a warm-up, as medians of 3. A method's
/// time is the shared matrix-build median plus its own sweep median, so the
/// method comparison is not drowned by noise in the common O(n^2 N) step.
std::vector<TimingRow> run_timing(const std::vector<std::size_t>& n_values,
                                  const std::vector<std::size_t>& n_loci_values,
                                  const std::vector<EstimatorKind>& methods, std::uint64_t seed);

std::string timing_csv(const std::vector<TimingRow>& rows);

struct ConsistencyRow {
  std::size_t n_loci = 0;
  std::size_t target_n = 0;
  std::size_t reps = 0;
  double mean_n = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double offdiag_stat_mean = 0.0;  ///< mean of (1/n) sum_{i != j} G_ij^2
  double offdiag_stat_target = 0.0;  ///< mean realised n / N
  double offdiag_stat_rel_dev = 0.0;
};

/// First-order estimates along n = round(ratio * N), study prevalence P.
std::vector<ConsistencyRow> run_consistency_study(double eta_star, double K, double P, double ratio,
                                                  const std::vector<std::size_t>& n_loci_values,
                                                  std::size_t reps, std::uint64_t seed,
                                                  unsigned threads = 1);

std::string consistency_csv(const std::vector<ConsistencyRow>& rows);

/// Resolve a thread count: explicit value, else HERIT_THREADS, else hardware.
unsigned resolve_threads(std::optional<unsigned> requested);

}  // namespace herit
