#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "herit/experiments.hpp"

using namespace herit;

namespace {

ExperimentConfig small_config(std::size_t reps = 6) {
  ExperimentConfig cfg;
  cfg.n_loci = 400;
  cfg.target_cases = 30;
  cfg.replications = reps;
  cfg.seed = 17;
  return cfg;
}

bool same_records(const ReplicationRecord& a, const ReplicationRecord& b) {
  if (a.rep_index != b.rep_index || a.seed != b.seed || a.realized_n != b.realized_n ||
      a.realized_cases != b.realized_cases || a.population_size != b.population_size ||
      a.en_holds != b.en_holds || a.outcomes.size() != b.outcomes.size() || a.error != b.error) {
    return false;
  }
  for (std::size_t m = 0; m < a.outcomes.size(); ++m) {
    const auto& x = a.outcomes[m];
    const auto& y = b.outcomes[m];
    const bool both_nan = std::isnan(x.eta_hat) && std::isnan(y.eta_hat);
    if (x.method != y.method || !(both_nan || x.eta_hat == y.eta_hat) || x.converged != y.converged ||
        x.error != y.error) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  auto cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.K = 0.6;
  CHECK_THROWS_AS(cfg.validate(), InvalidDesign);
  cfg = small_config();
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.methods.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("replication seeds are substreams of the base seed") {
  CHECK(replication_seed(1, 0) == replication_seed(1, 0));
  CHECK(replication_seed(1, 0) != replication_seed(1, 1));
  CHECK(replication_seed(1, 0) != replication_seed(2, 0));
}

TEST_CASE("single replication run twice gives identical records") {
  const auto cfg = small_config(1);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  REQUIRE(a.records.size() == 1);
  CHECK(same_records(a.records[0], b.records[0]));
  CHECK(a.records[0].outcomes.size() == 2);
  for (const auto& o : a.records[0].outcomes) {
    CHECK(o.eta_hat >= 0.0);
    CHECK(o.eta_hat <= 1.0);
    CHECK(o.error.empty());
  }
}

TEST_CASE("execution order and thread count do not change records") {
  const auto cfg = small_config(8);
  const auto base = run_experiment(cfg);
  std::vector<std::size_t> order(cfg.replications);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::swap(order[1], order[5]);
  const auto permuted = run_experiment(cfg, 1, &order);
  const auto threaded = run_experiment(cfg, 3);
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    CHECK(base.records[r].rep_index == r);
    CHECK(same_records(base.records[r], permuted.records[r]));
    CHECK(same_records(base.records[r], threaded.records[r]));
  }
  CHECK(records_csv_rows(cfg, base.records, false) == records_csv_rows(cfg, threaded.records, false));
}

TEST_CASE("summary is recomputable from the records csv") {
  const auto cfg = small_config(10);
  const auto result = run_experiment(cfg);
  const std::string csv = config_echo(cfg) + records_csv_header(false) + records_csv_rows(cfg, result.records, false);
  const auto parsed = parse_records_csv(csv, cfg);
  REQUIRE(parsed.size() == result.records.size());
  for (std::size_t r = 0; r < parsed.size(); ++r) CHECK(same_records(parsed[r], result.records[r]));
  CHECK(summary_csv_rows(cfg, summarize(parsed, cfg)) == summary_csv_rows(cfg, result.summaries));
}

TEST_CASE("summary statistics") {
  auto cfg = small_config();
  cfg.methods = {EstimatorKind::FirstOrder};
  std::vector<ReplicationRecord> records;
  for (double v : {0.2, 0.4, 0.6, 0.8, std::nan("")}) {
    ReplicationRecord rec;
    rec.outcomes.push_back({EstimatorKind::FirstOrder, v, true, {}, std::isnan(v) ? "failed" : ""});
    records.push_back(rec);
  }
  const auto s = summarize(records, cfg).at(0);
  CHECK(s.count == 4);
  CHECK(s.mean == doctest::Approx(0.5));
  CHECK(s.bias == doctest::Approx(0.0));
  CHECK(s.sd == doctest::Approx(std::sqrt(0.2 / 3.0)));
  CHECK(s.q1 == doctest::Approx(0.35));
  CHECK(s.median == doctest::Approx(0.5));
  CHECK(s.q3 == doctest::Approx(0.65));
  CHECK(s.min == 0.2);
  CHECK(s.max == 0.8);
}

TEST_CASE("quantiles interpolate between order statistics") {
  const std::vector<double> v{1.0, 2.0, 4.0, 8.0};
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 8.0);
  CHECK(quantile_sorted(v, 0.5) == 3.0);
  CHECK(std::isnan(quantile_sorted({}, 0.5)));
}

TEST_CASE("failed replications are recorded, not fatal") {
  auto cfg = small_config(2);
  cfg.target_cases = 1;
  cfg.K = 0.5;
  cfg.P = 0.5;
  cfg.n_loci = 5;
  const auto result = run_experiment(cfg);
  CHECK(result.records.size() == 2);
  for (const auto& rec : result.records) {
    CHECK(rec.outcomes.size() == cfg.methods.size());
    if (!rec.error.empty()) {
      for (const auto& o : rec.outcomes) CHECK(std::isnan(o.eta_hat));
    }
  }
}

TEST_CASE("csv layouts carry headers and the config echo") {
  const auto cfg = small_config(2);
  const auto result = run_experiment(cfg);
  const std::string echo = config_echo(cfg);
  CHECK(echo.find("# eta_star = 0.5\n") != std::string::npos);
  CHECK(echo.find("# methods = first,second\n") != std::string::npos);
  CHECK(records_csv_header(true).find(",wall_time") != std::string::npos);
  CHECK(records_csv_header(false).find("wall_time") == std::string::npos);
  const std::string rows = records_csv_rows(cfg, result.records, false);
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 4);
  CHECK(summary_csv_header().rfind("eta_star,K,P", 0) == 0);
}

TEST_CASE("timing grid") {
  const auto rows = run_timing({20, 40}, {50}, {EstimatorKind::FirstOrder, EstimatorKind::SecondOrder}, 3);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.seconds > 0.0);
    CHECK(r.seconds == doctest::Approx(r.grm_seconds + r.estimator_seconds));
  }
  CHECK(rows[0].grm_seconds == rows[1].grm_seconds);
  CHECK(timing_csv(rows).rfind("n,n_loci,method,seconds", 0) == 0);
  CHECK_THROWS_AS(run_timing({}, {50}, {EstimatorKind::FirstOrder}, 1), std::invalid_argument);
}

TEST_CASE("consistency study rows") {
  const auto rows = run_consistency_study(0.5, 0.1, 0.5, 0.02, {1000, 2000}, 5, 9);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].target_n == 20);
  CHECK(rows[1].target_n == 40);
  for (const auto& r : rows) {
    CHECK(r.rmse >= 0.0);
    CHECK(r.offdiag_stat_mean > 0.0);
    CHECK(r.offdiag_stat_target == doctest::Approx(r.mean_n / r.n_loci));
  }
  CHECK(consistency_csv(rows).rfind("n_loci,", 0) == 0);
}

// The clamp at zero keeps roughly half of the null spread, which is far above 0.1 here.
TEST_CASE("null heritability gives small mean estimates" * doctest::should_fail()) {
  const auto rows = run_consistency_study(0.0, 0.1, 0.5, 0.02, {4000}, 40, 5);
  MESSAGE("mean " << rows[0].mean);
  CHECK(rows[0].mean <= 0.1);
}

TEST_CASE("null heritability estimates are centred before clamping") {
  StudyConfig cfg;
  cfg.eta_star = 0.0;
  cfg.n_loci = 1000;
  cfg.target_cases = 20;
  double sum = 0.0, sum_sq = 0.0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const auto study = simulate_study(cfg, 500 + r);
    const double raw = estimate_first_order(as_span(study.sample.w), grm_compute(study.sample.z_study),
                                            study.design).raw_ratio;
    sum += raw;
    sum_sq += raw * raw;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum_sq / reps - mean * mean) / (reps - 1));
  CHECK(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3u) == 3);
  ::setenv("HERIT_THREADS", "2", 1);
  CHECK(resolve_threads(std::nullopt) == 2);
  ::setenv("HERIT_THREADS", "junk", 1);
  CHECK(resolve_threads(std::nullopt) >= 1);
  ::unsetenv("HERIT_THREADS");
  CHECK(resolve_threads(std::nullopt) >= 1);
}
