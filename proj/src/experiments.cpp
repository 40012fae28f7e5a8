#include "herit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "herit/grm.hpp"
#include "herit/io.hpp"

namespace herit {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s) {
  if (s == "nan") return kNaN;
  return std::stod(std::string(s));
}

std::size_t parse_size(std::string_view s) { return static_cast<std::size_t>(std::stoull(std::string(s))); }

std::string methods_list(const std::vector<EstimatorKind>& methods) {
  std::string out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i) out += ',';
    out += to_string(methods[i]);
  }
  return out;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

template <class Fn>
double median_of_3(Fn&& fn) {
  std::array<double, 3> times{};
  for (auto& t : times) t = fn();
  std::sort(times.begin(), times.end());
  return times[1];
}

}  // namespace

StudyConfig ExperimentConfig::study() const {
  StudyConfig s;
  s.eta_star = eta_star;
  s.K = K;
  s.P = P;
  s.n_loci = n_loci;
  s.target_cases = target_cases;
  s.kind = genotype_kind;
  return s;
}

void ExperimentConfig::validate() const {
  design_from_prevalences(K, P);
  herit::validate(LiabilityParams{eta_star, 1.0});
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (n_loci < 1) throw std::invalid_argument("n_loci must be positive");
  if (target_cases < 1) throw std::invalid_argument("target_cases must be positive");
  if (methods.empty()) throw std::invalid_argument("at least one estimator is required");
  if (!(gamma > 0.0 && gamma < 0.1)) throw std::invalid_argument("gamma must lie in (0, 0.1)");
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t rep) {
  return RandomSource(base, rep).key();
}

ReplicationRecord run_replication(const ExperimentConfig& cfg, std::size_t rep) {
  ReplicationRecord rec;
  rec.rep_index = rep;
  rec.seed = replication_seed(cfg.seed, rep);
  auto fail_all = [&](const std::string& why) {
    rec.error = why;
    for (auto m : cfg.methods) rec.outcomes.push_back({m, kNaN, false, {}, why});
  };

  SimulatedStudy study;
  try {
    study = simulate_study(cfg.study(), rec.seed);
  } catch (const std::exception& e) {
    fail_all(e.what());
    return rec;
  }
  rec.population_size = study.population_size;
  rec.realized_n = study.sample.size();
  rec.realized_cases = study.sample.n_cases;
  if (rec.realized_n < 2) {
    fail_all("fewer than two individuals selected");
    return rec;
  }

  const auto grm_start = Clock::now();
  const GrmView g = grm_compute(study.sample.z_study);
  const std::chrono::duration<double> grm_time = Clock::now() - grm_start;
  rec.en_holds = event_en_check(g, cfg.gamma).holds;

  const auto w = as_span(study.sample.w);
  for (auto method : cfg.methods) {
    MethodOutcome out;
    out.method = method;
    try {
      const EstimateReport r = method == EstimatorKind::FirstOrder
                                   ? estimate_first_order(w, g, study.design)
                                   : estimate_second_order(w, g, study.design);
      out.eta_hat = r.eta_hat;
      out.converged = r.converged;
      out.wall_time = grm_time + r.wall_time;
    } catch (const std::exception& e) {
      out.eta_hat = kNaN;
      out.converged = false;
      out.error = e.what();
    }
    rec.outcomes.push_back(std::move(out));
  }
  return rec;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNaN;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<MethodSummary> summarize(const std::vector<ReplicationRecord>& records,
                                     const ExperimentConfig& cfg) {
  std::vector<MethodSummary> out;
  for (auto method : cfg.methods) {
    std::vector<double> values;
    for (const auto& rec : records) {
      for (const auto& o : rec.outcomes) {
        if (o.method == method && std::isfinite(o.eta_hat)) values.push_back(o.eta_hat);
      }
    }
    MethodSummary s;
    s.method = method;
    s.count = values.size();
    if (values.empty()) {
      s.mean = s.sd = s.bias = s.q1 = s.median = s.q3 = s.min = s.max = kNaN;
      out.push_back(s);
      continue;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    s.bias = s.mean - cfg.eta_star;
    std::sort(values.begin(), values.end());
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    s.min = values.front();
    s.max = values.back();
    out.push_back(s);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads,
                                const std::vector<std::size_t>* order) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.records.resize(cfg.replications);
  std::vector<std::size_t> schedule(cfg.replications);
  for (std::size_t i = 0; i < schedule.size(); ++i) schedule[i] = i;
  if (order) {
    if (order->size() != cfg.replications) throw std::invalid_argument("order must list every replication");
    schedule = *order;
  }
  parallel_for(schedule.size(), threads, [&](std::size_t slot) {
    const std::size_t rep = schedule[slot];
    result.records[rep] = run_replication(cfg, rep);
  });
  result.summaries = summarize(result.records, cfg);
  return result;
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# eta_star = " << format_double(cfg.eta_star) << '\n'
     << "# K = " << format_double(cfg.K) << '\n'
     << "# P = " << format_double(cfg.P) << '\n'
     << "# n_loci = " << cfg.n_loci << '\n'
     << "# target_cases = " << cfg.target_cases << '\n'
     << "# replications = " << cfg.replications << '\n'
     << "# seed = " << cfg.seed << '\n'
     << "# methods = " << methods_list(cfg.methods) << '\n'
     << "# genotype_kind = " << to_string(cfg.genotype_kind) << '\n'
     << "# gamma = " << format_double(cfg.gamma) << '\n';
  return os.str();
}

std::string records_csv_header(bool with_times) {
  std::string h =
      "eta_star,K,P,n_loci,target_cases,rep,seed,population_size,n,n_cases,en_holds,method,eta_hat,"
      "converged,status";
  if (with_times) h += ",wall_time";
  return h + '\n';
}

std::string records_csv_rows(const ExperimentConfig& cfg, const std::vector<ReplicationRecord>& records,
                             bool with_times) {
  std::ostringstream os;
  for (const auto& rec : records) {
    for (const auto& o : rec.outcomes) {
      os << format_double(cfg.eta_star) << ',' << format_double(cfg.K) << ',' << format_double(cfg.P)
         << ',' << cfg.n_loci << ',' << cfg.target_cases << ',' << rec.rep_index << ',' << rec.seed
         << ',' << rec.population_size << ',' << rec.realized_n << ',' << rec.realized_cases << ','
         << (rec.en_holds ? 1 : 0) << ',' << to_string(o.method) << ','
         << (std::isfinite(o.eta_hat) ? format_double(o.eta_hat) : std::string("nan")) << ','
         << (o.converged ? 1 : 0) << ',' << (o.error.empty() ? std::string("ok") : "error: " + csv_safe(o.error));
      if (with_times) os << ',' << format_double(o.wall_time.count());
      os << '\n';
    }
  }
  return os.str();
}

std::string summary_csv_header() {
  return "eta_star,K,P,n_loci,target_cases,replications,method,count,mean,sd,bias,q1,median,q3,min,max\n";
}

std::string summary_csv_rows(const ExperimentConfig& cfg, const std::vector<MethodSummary>& summaries) {
  std::ostringstream os;
  for (const auto& s : summaries) {
    os << format_double(cfg.eta_star) << ',' << format_double(cfg.K) << ',' << format_double(cfg.P) << ','
       << cfg.n_loci << ',' << cfg.target_cases << ',' << cfg.replications << ',' << to_string(s.method)
       << ',' << s.count;
    for (double v : {s.mean, s.sd, s.bias, s.q1, s.median, s.q3, s.min, s.max}) {
      os << ',' << (std::isfinite(v) ? format_double(v) : std::string("nan"));
    }
    os << '\n';
  }
  return os.str();
}

std::vector<ReplicationRecord> parse_records_csv(std::string_view csv, const ExperimentConfig& cfg) {
  const std::string eta = format_double(cfg.eta_star);
  const std::string K = format_double(cfg.K);
  std::map<std::size_t, ReplicationRecord> by_rep;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t end = csv.find('\n', start);
    if (end == std::string_view::npos) end = csv.size();
    const std::string_view line = csv.substr(start, end - start);
    start = end + 1;
    if (line.empty() || line.front() == '#' || line.starts_with("eta_star,")) continue;
    const auto f = split(line, ',');
    if (f.size() < 15) throw std::invalid_argument("records csv: short row");
    if (f[0] != eta || f[1] != K) continue;
    const std::size_t rep = parse_size(f[5]);
    auto& rec = by_rep[rep];
    rec.rep_index = rep;
    rec.seed = std::stoull(std::string(f[6]));
    rec.population_size = parse_size(f[7]);
    rec.realized_n = parse_size(f[8]);
    rec.realized_cases = parse_size(f[9]);
    rec.en_holds = f[10] == "1";
    MethodOutcome o;
    o.method = parse_estimator_kind(f[11]);
    o.eta_hat = parse_double(f[12]);
    o.converged = f[13] == "1";
    if (f[14] != "ok") o.error = std::string(f[14]);
    rec.outcomes.push_back(std::move(o));
  }
  std::vector<ReplicationRecord> out;
  for (auto& [rep, rec] : by_rep) out.push_back(std::move(rec));
  return out;
}

std::vector<TimingRow> run_timing(const std::vector<std::size_t>& n_values,
                                  const std::vector<std::size_t>& n_loci_values,
                                  const std::vector<EstimatorKind>& methods, std::uint64_t seed) {
  if (n_values.empty() || n_loci_values.empty() || methods.empty()) {
    throw std::invalid_argument("run_timing: grids must be nonempty");
  }
  const StudyDesign design = design_from_prevalences(0.1, 0.5);
  std::vector<TimingRow> rows;
  for (std::size_t n : n_values) {
    for (std::size_t loci : n_loci_values) {
      RandomSource rs(seed, counter_hash(0, n, loci));
      const GenotypeSource source(GenotypeDistribution::random_binomial(loci, rs), rs.next_u64());
      const StandardizedGenotypes z = standardize(source.materialize(n));
      Vector w(static_cast<Eigen::Index>(n));
      for (auto& v : w) v = centered_value(rs.uniform() < design.P ? 1 : 0, design.P);

      auto time_grm = [&] {
        const auto t0 = Clock::now();
        const GrmView g = grm_compute(z);
        const std::chrono::duration<double> dt = Clock::now() - t0;
        if (g.size() != n) throw std::logic_error("grm size mismatch");
        return dt.count();
      };
      time_grm();
      const double grm_seconds = median_of_3(time_grm);
      const GrmView g = grm_compute(z);

      for (auto method : methods) {
        auto once = [&] {
          const EstimateReport r = method == EstimatorKind::FirstOrder
                                       ? estimate_first_order(as_span(w), g, design)
                                       : estimate_second_order(as_span(w), g, design);
          return r.eta_hat;
        };
        // Calibrate a batch long enough for the clock to resolve.
        std::size_t batch = 1;
        while (true) {
          const auto t0 = Clock::now();
          for (std::size_t b = 0; b < batch; ++b) once();
          const std::chrono::duration<double> dt = Clock::now() - t0;
          if (dt.count() >= 0.005 || batch >= (1u << 20)) break;
          batch *= 2;
        }
        const double sweep = median_of_3([&] {
          const auto t0 = Clock::now();
          for (std::size_t b = 0; b < batch; ++b) once();
          const std::chrono::duration<double> dt = Clock::now() - t0;
          return dt.count() / static_cast<double>(batch);
        });
        rows.push_back({n, loci, method, grm_seconds, sweep, grm_seconds + sweep});
      }
    }
  }
  return rows;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
  std::ostringstream os;
  os << "n,n_loci,method,seconds,grm_seconds,estimator_seconds\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.n_loci << ',' << to_string(r.method) << ',' << format_double(r.seconds) << ','
       << format_double(r.grm_seconds) << ',' << format_double(r.estimator_seconds) << '\n';
  }
  return os.str();
}

std::vector<ConsistencyRow> run_consistency_study(double eta_star, double K, double P, double ratio,
                                                  const std::vector<std::size_t>& n_loci_values,
                                                  std::size_t reps, std::uint64_t seed, unsigned threads) {
  if (!(ratio > 0.0)) throw std::invalid_argument("ratio n/N must be positive");
  std::vector<ConsistencyRow> rows;
  for (std::size_t loci : n_loci_values) {
    ConsistencyRow row;
    row.n_loci = loci;
    row.target_n = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(loci)));
    row.reps = reps;

    ExperimentConfig cfg;
    cfg.eta_star = eta_star;
    cfg.K = K;
    cfg.P = P;
    cfg.n_loci = loci;
    cfg.target_cases = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(P * static_cast<double>(row.target_n))));
    cfg.replications = reps;
    cfg.seed = RandomSource(seed, loci).key();
    cfg.methods = {EstimatorKind::FirstOrder};
    cfg.validate();

    std::vector<double> estimates(reps, kNaN), stats(reps, kNaN), sizes(reps, kNaN);
    parallel_for(reps, threads, [&](std::size_t rep) {
      const std::uint64_t s = replication_seed(cfg.seed, rep);
      try {
        const SimulatedStudy study = simulate_study(cfg.study(), s);
        if (study.sample.size() < 2) return;
        const GrmView g = grm_compute(study.sample.z_study);
        estimates[rep] = estimate_first_order(as_span(study.sample.w), g, study.design).eta_hat;
        stats[rep] = offdiag_square_mean(g);
        sizes[rep] = static_cast<double>(study.sample.size());
      } catch (const std::exception&) {
      }
    });

    double sum = 0.0, sq = 0.0, stat_sum = 0.0, target_sum = 0.0, n_sum = 0.0;
    std::size_t used = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!std::isfinite(estimates[r])) continue;
      ++used;
      sum += estimates[r];
      sq += (estimates[r] - eta_star) * (estimates[r] - eta_star);
      stat_sum += stats[r];
      target_sum += sizes[r] / static_cast<double>(loci);
      n_sum += sizes[r];
    }
    if (used > 0) {
      const double u = static_cast<double>(used);
      row.mean = sum / u;
      double var = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        if (std::isfinite(estimates[r])) var += (estimates[r] - row.mean) * (estimates[r] - row.mean);
      }
      row.sd = used > 1 ? std::sqrt(var / (u - 1.0)) : 0.0;
      row.rmse = std::sqrt(sq / u);
      row.mean_n = n_sum / u;
      row.offdiag_stat_mean = stat_sum / u;
      row.offdiag_stat_target = target_sum / u;
      row.offdiag_stat_rel_dev = row.offdiag_stat_mean / row.offdiag_stat_target - 1.0;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string consistency_csv(const std::vector<ConsistencyRow>& rows) {
  std::ostringstream os;
  os << "n_loci,target_n,reps,mean_n,mean,sd,rmse,offdiag_stat_mean,offdiag_stat_target,offdiag_stat_rel_dev\n";
  for (const auto& r : rows) {
    os << r.n_loci << ',' << r.target_n << ',' << r.reps << ',' << format_double(r.mean_n) << ','
       << format_double(r.mean) << ',' << format_double(r.sd) << ',' << format_double(r.rmse) << ','
       << format_double(r.offdiag_stat_mean) << ',' << format_double(r.offdiag_stat_target) << ','
       << format_double(r.offdiag_stat_rel_dev) << '\n';
  }
  return os.str();
}

unsigned resolve_threads(std::optional<unsigned> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("HERIT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace herit
