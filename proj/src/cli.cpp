#include "herit/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "herit/estimators.hpp"
#include "herit/experiments.hpp"
#include "herit/grm.hpp"
#include "herit/io.hpp"
#include "herit/moments.hpp"
#include "herit/simulate.hpp"

namespace herit::cli {

namespace {

namespace fs = std::filesystem;

/// Bad flags or values, detected before any computation.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using ConfigLines = std::vector<std::pair<std::string, std::string>>;

template <class T>
std::string join(const std::vector<T>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>) {
      os << format_double(values[i]);
    } else {
      os << values[i];
    }
  }
  return os.str();
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

void print_config(std::ostream& out, const std::string& command, const ConfigLines& lines) {
  out << "[" << command << "]\n";
  for (const auto& [k, v] : lines) out << "  " << k << " = " << v << '\n';
  out.flush();
}

/// Runs `fn`, turning argument errors into usage errors.
template <class Fn>
auto validated(Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
}

std::vector<EstimatorKind> parse_methods(const std::vector<std::string>& names) {
  std::vector<EstimatorKind> out;
  for (const auto& name : names) {
    if (name == "both") {
      out = {EstimatorKind::FirstOrder, EstimatorKind::SecondOrder};
      continue;
    }
    const EstimatorKind k = parse_estimator_kind(name);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  if (out.empty()) throw UsageError("no estimator selected");
  return out;
}

std::string methods_string(const std::vector<EstimatorKind>& methods) {
  std::vector<std::string> names;
  for (auto m : methods) names.emplace_back(to_string(m));
  return join(names);
}

bool has_extension(const fs::path& p, std::string_view ext) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory '" + parent.string() + "'");
}

void write_output(const fs::path& path, std::string_view contents) {
  ensure_parent(path);
  write_file_atomic(path, contents);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Flat "key = value" file; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

template <class T>
T parse_scalar(const std::string& key, const std::string& text) {
  T v{};
  if (!CLI::detail::lexical_cast(text, v)) throw UsageError("config key '" + key + "': bad value '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(parse_scalar<T>(key, t));
  }
  if (out.empty()) throw UsageError("config key '" + key + "' is empty");
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  double K = 0.1;
  double P = 0.5;
  double eta = 0.5;
  std::size_t n_loci = 10000;
  std::size_t target_cases = 100;
  std::uint64_t seed = 1;
  std::string kind = "binomial";
  std::string out;
  std::string csv;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  StudyConfig cfg;
  validated([&] {
    cfg.K = a.K;
    cfg.P = a.P;
    cfg.eta_star = a.eta;
    cfg.n_loci = a.n_loci;
    cfg.target_cases = a.target_cases;
    cfg.kind = parse_genotype_kind(a.kind);
    design_from_prevalences(cfg.K, cfg.P);
    validate(LiabilityParams{cfg.eta_star, 1.0});
    if (cfg.n_loci < 1 || cfg.target_cases < 1) throw UsageError("n-loci and target-cases must be positive");
    return 0;
  });
  print_config(out, "simulate",
               {{"K", num(a.K)}, {"P", num(a.P)}, {"eta", num(a.eta)}, {"n_loci", std::to_string(a.n_loci)},
                {"target_cases", std::to_string(a.target_cases)}, {"seed", std::to_string(a.seed)},
                {"kind", a.kind}, {"out", a.out}, {"csv", a.csv.empty() ? "-" : a.csv}});

  const SimulatedStudy study = simulate_study(cfg, a.seed);
  write_output(a.out, encode_dataset(study));
  if (!a.csv.empty()) {
    if (study.sample.size() > kMaxCsvRows) {
      throw std::runtime_error("sample of " + std::to_string(study.sample.size()) +
                               " individuals is too large for CSV export (limit " +
                               std::to_string(kMaxCsvRows) + ")");
    }
    std::ostringstream os;
    os << "# seed = " << a.seed << "\n# K = " << num(a.K) << "\n# P = " << num(a.P) << "\n# eta = " << num(a.eta)
       << "\n# n_loci = " << a.n_loci << "\n# target_cases = " << a.target_cases << "\n# kind = " << a.kind << '\n';
    os << "index,y,w";
    for (std::size_t k = 0; k < cfg.n_loci; ++k) os << ",g" << k;
    os << '\n';
    for (std::size_t i = 0; i < study.sample.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      os << study.sample.indices[i] << ',' << int(study.sample.y[i]) << ',' << num(study.sample.w[r]);
      for (Eigen::Index k = 0; k < study.raw.values.cols(); ++k) os << ',' << num(study.raw.values(r, k));
      os << '\n';
    }
    write_output(a.csv, os.str());
  }
  out << "population_size = " << study.population_size << "\npopulation_cases = " << study.population_cases
      << "\nn = " << study.sample.size() << "\nn_cases = " << study.sample.n_cases
      << "\nn_controls = " << study.sample.n_controls << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- grm

struct GrmArgs {
  std::string in;
  std::string out;
  bool check_en = false;
  double gamma = kDefaultGamma;
};

int run_grm(const GrmArgs& a, std::ostream& out) {
  if (!(a.gamma > 0.0 && a.gamma < 0.1)) throw UsageError("gamma must lie in (0, 0.1)");
  print_config(out, "grm",
               {{"in", a.in}, {"out", a.out.empty() ? "-" : a.out}, {"check_en", a.check_en ? "true" : "false"},
                {"gamma", num(a.gamma)}, {"format", a.out.empty() ? "-" : has_extension(a.out, ".csv") ? "csv" : "binary"}});

  const SimulatedStudy study = read_dataset(a.in);
  if (study.sample.size() < 2) throw std::runtime_error("'" + a.in + "': dataset has fewer than two individuals");
  const GrmView g = grm_compute(study.sample.z_study);
  if (!a.out.empty()) {
    if (has_extension(a.out, ".csv")) {
      if (g.size() > kMaxCsvRows) {
        throw std::runtime_error("GRM of size " + std::to_string(g.size()) + " is too large for CSV export");
      }
      write_output(a.out, matrix_to_csv(g.g));
    } else {
      write_output(a.out, encode_grm(g));
    }
  }
  out << "n = " << g.size() << "\nn_loci = " << g.n_loci << '\n';
  if (a.check_en) {
    const EventCheck e = event_en_check(g, a.gamma);
    out << "en_holds = " << (e.holds ? "true" : "false") << "\nsup_diag_dev = " << num(e.sup_diag_dev)
        << "\nsup_offdiag = " << num(e.sup_offdiag) << "\neps_n = " << num(e.eps_n) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- moments

struct MomentsArgs {
  std::vector<double> a_i{0.0};
  std::vector<double> a_j{0.0};
  std::vector<double> b{1.0};
  std::vector<double> eta{0.5};
  std::vector<double> K{0.1};
  std::vector<double> P{0.5};
  std::vector<double> n_loci{10000};
  std::string variant = "corrected";
  std::string out;
};

int run_moments(const MomentsArgs& a, std::ostream& out) {
  const SecondOrderVariant variant = validated([&] {
    for (double K : a.K) {
      for (double P : a.P) design_from_prevalences(K, P);
    }
    for (double e : a.eta) validate(LiabilityParams{e, 1.0});
    for (double n : a.n_loci) {
      if (!(n >= 1.0)) throw UsageError("n-loci values must be at least 1");
    }
    if (a.variant == "corrected") return SecondOrderVariant{};
    if (a.variant == "printed") return SecondOrderVariant::printed();
    throw UsageError("variant must be 'corrected' or 'printed'");
  });
  print_config(out, "moments",
               {{"a_i", join(a.a_i)}, {"a_j", join(a.a_j)}, {"b_ij", join(a.b)}, {"eta", join(a.eta)},
                {"K", join(a.K)}, {"P", join(a.P)}, {"n_loci", join(a.n_loci)}, {"variant", a.variant},
                {"out", a.out.empty() ? "-" : a.out}});

  std::ostringstream os;
  os << "a_i,a_j,b_ij,eta,K,P,n_loci,exact,first_order,second_order\n";
  for (double K : a.K) {
    for (double P : a.P) {
      const StudyDesign d = design_from_prevalences(K, P);
      for (double N : a.n_loci) {
        for (double eta : a.eta) {
          for (double ai : a.a_i) {
            for (double aj : a.a_j) {
              for (double b : a.b) {
                const SigmaPair sp{ai, aj, b};
                double exact = std::numeric_limits<double>::quiet_NaN();
                try {
                  exact = exact_pair_expectation(sp, d, eta, N);
                } catch (const NotPositiveDefinite&) {
                }
                const double first = first_order_pair_expectation(b / std::sqrt(N), d, eta);
                const double second = second_order_pair_expectation(sp, d, eta, N, variant);
                os << num(ai) << ',' << num(aj) << ',' << num(b) << ',' << num(eta) << ',' << num(K) << ','
                   << num(P) << ',' << num(N) << ',' << num(exact) << ',' << num(first) << ',' << num(second)
                   << '\n';
              }
            }
          }
        }
      }
    }
  }
  if (a.out.empty()) {
    out << os.str();
  } else {
    write_output(a.out, os.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string in;
  std::string method = "both";
  std::string out;
  bool timing = false;
};

int run_estimate(const EstimateArgs& a, std::ostream& out) {
  const auto methods = validated([&] { return parse_methods({a.method}); });
  const bool as_csv = !a.out.empty() && has_extension(a.out, ".csv");
  print_config(out, "estimate",
               {{"in", a.in}, {"method", a.method}, {"out", a.out.empty() ? "-" : a.out},
                {"format", as_csv ? "csv" : "json"}, {"timing", a.timing ? "true" : "false"}});

  const SimulatedStudy study = read_dataset(a.in);
  if (study.sample.size() < 2) throw std::runtime_error("'" + a.in + "': dataset has fewer than two individuals");
  const auto grm_start = std::chrono::steady_clock::now();
  const GrmView g = grm_compute(study.sample.z_study);
  const std::chrono::duration<double> grm_time = std::chrono::steady_clock::now() - grm_start;

  std::vector<EstimateReport> reports;
  for (auto m : methods) {
    reports.push_back(m == EstimatorKind::FirstOrder
                          ? estimate_first_order(as_span(study.sample.w), g, study.design)
                          : estimate_second_order(as_span(study.sample.w), g, study.design));
  }

  nlohmann::ordered_json j;
  j["input"] = a.in;
  j["n"] = study.sample.size();
  j["n_cases"] = study.sample.n_cases;
  j["n_loci"] = g.n_loci;
  j["K"] = study.design.K;
  j["P"] = study.design.P;
  j["seed"] = study.seed;
  j["grm_wall_time"] = grm_time.count();
  j["estimates"] = nlohmann::ordered_json::array();

  std::ostringstream csv;
  csv << "# input = " << a.in << "\n# n = " << study.sample.size() << "\n# n_loci = " << g.n_loci
      << "\n# K = " << num(study.design.K) << "\n# P = " << num(study.design.P) << "\n# seed = " << study.seed
      << '\n';
  csv << "method,eta_hat,raw_ratio,iterations,converged,used_fallback,objective_value";
  if (a.timing) csv << ",wall_time";
  csv << '\n';
  for (const auto& r : reports) {
    const double wall = grm_time.count() + r.wall_time.count();
    nlohmann::ordered_json e;
    e["method"] = std::string(to_string(r.method));
    e["eta_hat"] = r.eta_hat;
    e["raw_ratio"] = std::isfinite(r.raw_ratio) ? nlohmann::ordered_json(r.raw_ratio) : nullptr;
    e["iterations"] = r.iterations;
    e["converged"] = r.converged;
    e["used_fallback"] = r.used_fallback;
    e["objective_value"] = std::isfinite(r.objective_value) ? nlohmann::ordered_json(r.objective_value) : nullptr;
    e["wall_time"] = wall;
    j["estimates"].push_back(e);
    csv << to_string(r.method) << ',' << num(r.eta_hat) << ',' << num(r.raw_ratio) << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << ',' << (r.used_fallback ? 1 : 0) << ',' << num(r.objective_value);
    if (a.timing) csv << ',' << num(wall);
    csv << '\n';
    out << to_string(r.method) << ": eta_hat = " << num(r.eta_hat) << " (" << num(wall) << " s)\n";
  }
  if (!a.out.empty()) write_output(a.out, as_csv ? csv.str() : j.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string config;
  std::vector<double> eta{0.5};
  std::vector<double> K{0.1};
  double P = 0.5;
  std::size_t n_loci = 10000;
  std::size_t target_cases = 100;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"first", "second"};
  std::string kind = "binomial";
  double gamma = kDefaultGamma;
  unsigned threads = 0;
  std::string out_dir = ".";
  bool record_times = false;
};

struct ExperimentOptions {
  std::map<std::string, CLI::Option*> by_key;
};

void apply_config_file(ExperimentArgs& a, const ExperimentOptions& opts) {
  if (a.config.empty()) return;
  const auto values = read_config_file(a.config);
  for (const auto& [key, text] : values) {
    const auto it = opts.by_key.find(key);
    if (it == opts.by_key.end()) throw UsageError("'" + a.config + "': unknown key '" + key + "'");
    if (it->second->count() > 0) continue;  // flags win
    if (key == "eta_star") a.eta = parse_list<double>(key, text);
    else if (key == "K") a.K = parse_list<double>(key, text);
    else if (key == "P") a.P = parse_scalar<double>(key, text);
    else if (key == "n_loci") a.n_loci = parse_scalar<std::size_t>(key, text);
    else if (key == "target_cases") a.target_cases = parse_scalar<std::size_t>(key, text);
    else if (key == "replications") a.reps = parse_scalar<std::size_t>(key, text);
    else if (key == "seed") a.seed = parse_scalar<std::uint64_t>(key, text);
    else if (key == "methods") a.methods = parse_list<std::string>(key, text);
    else if (key == "genotype_kind") a.kind = text;
    else if (key == "gamma") a.gamma = parse_scalar<double>(key, text);
    else if (key == "threads") a.threads = parse_scalar<unsigned>(key, text);
    else if (key == "out_dir") a.out_dir = text;
  }
}

std::string grid_echo(const ExperimentArgs& a, const ExperimentConfig& base) {
  std::ostringstream os;
  os << "# eta_star = " << join(a.eta) << "\n# K = " << join(a.K) << "\n# P = " << num(base.P)
     << "\n# n_loci = " << base.n_loci << "\n# target_cases = " << base.target_cases
     << "\n# replications = " << base.replications << "\n# seed = " << base.seed
     << "\n# methods = " << methods_string(base.methods) << "\n# genotype_kind = " << to_string(base.genotype_kind)
     << "\n# gamma = " << num(base.gamma) << '\n';
  return os.str();
}

int run_experiment_cmd(ExperimentArgs& a, const ExperimentOptions& opts, std::ostream& out, std::ostream& err,
                       bool verbose) {
  apply_config_file(a, opts);
  ExperimentConfig base;
  std::vector<ExperimentConfig> grid;
  validated([&] {
    base.P = a.P;
    base.n_loci = a.n_loci;
    base.target_cases = a.target_cases;
    base.replications = a.reps;
    base.seed = a.seed;
    base.methods = parse_methods(a.methods);
    base.genotype_kind = parse_genotype_kind(a.kind);
    base.gamma = a.gamma;
    for (double eta : a.eta) {
      for (double K : a.K) {
        ExperimentConfig c = base;
        c.eta_star = eta;
        c.K = K;
        c.validate();
        grid.push_back(c);
      }
    }
    return 0;
  });
  const unsigned threads = resolve_threads(a.threads ? std::optional<unsigned>(a.threads) : std::nullopt);
  print_config(out, "experiment",
               {{"config", a.config.empty() ? "-" : a.config}, {"eta_star", join(a.eta)}, {"K", join(a.K)},
                {"P", num(base.P)}, {"n_loci", std::to_string(base.n_loci)},
                {"target_cases", std::to_string(base.target_cases)},
                {"replications", std::to_string(base.replications)}, {"seed", std::to_string(base.seed)},
                {"methods", methods_string(base.methods)}, {"genotype_kind", std::string(to_string(base.genotype_kind))},
                {"gamma", num(base.gamma)}, {"threads", std::to_string(threads)}, {"out_dir", a.out_dir},
                {"record_times", a.record_times ? "true" : "false"}});

  const std::string echo = grid_echo(a, base);
  std::string records = echo + records_csv_header(a.record_times);
  std::string summary = echo + summary_csv_header();
  for (const auto& cfg : grid) {
    if (verbose) err << "running eta_star = " << num(cfg.eta_star) << ", K = " << num(cfg.K) << '\n';
    const ExperimentResult r = run_experiment(cfg, threads);
    records += records_csv_rows(cfg, r.records, a.record_times);
    summary += summary_csv_rows(cfg, r.summaries);
    for (const auto& s : r.summaries) {
      out << "eta_star = " << num(cfg.eta_star) << ", K = " << num(cfg.K) << ", " << to_string(s.method)
          << ": mean = " << num(s.mean) << ", sd = " << num(s.sd) << ", count = " << s.count << '\n';
    }
  }
  const fs::path dir(a.out_dir);
  write_output(dir / "records.csv", records);
  write_output(dir / "summary.csv", summary);
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::size_t> n{100, 1000};
  std::vector<std::size_t> n_loci{1000, 10000};
  std::vector<std::string> methods{"first", "second"};
  std::uint64_t seed = 1;
  std::string out = "timing.csv";
};

int run_bench(const BenchArgs& a, std::ostream& out) {
  const auto methods = validated([&] {
    for (auto n : a.n) {
      if (n < 2) throw UsageError("n values must be at least 2");
    }
    for (auto N : a.n_loci) {
      if (N < 1) throw UsageError("n-loci values must be positive");
    }
    return parse_methods(a.methods);
  });
  print_config(out, "bench",
               {{"n", join(a.n)}, {"n_loci", join(a.n_loci)}, {"methods", methods_string(methods)},
                {"seed", std::to_string(a.seed)}, {"out", a.out}});
  const auto rows = run_timing(a.n, a.n_loci, methods, a.seed);
  std::ostringstream echo;
  echo << "# n = " << join(a.n) << "\n# n_loci = " << join(a.n_loci) << "\n# methods = " << methods_string(methods)
       << "\n# seed = " << a.seed << '\n';
  write_output(a.out, echo.str() + timing_csv(rows));
  for (const auto& r : rows) {
    out << "n = " << r.n << ", n_loci = " << r.n_loci << ", " << to_string(r.method) << ": " << num(r.seconds)
        << " s\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- consistency

struct ConsistencyArgs {
  double eta = 0.5;
  double K = 0.1;
  double P = 0.5;
  double ratio = 0.02;
  std::vector<std::size_t> n_loci{2000, 4000, 8000};
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = "consistency.csv";
};

int run_consistency(const ConsistencyArgs& a, std::ostream& out) {
  validated([&] {
    design_from_prevalences(a.K, a.P);
    validate(LiabilityParams{a.eta, 1.0});
    if (!(a.ratio > 0.0)) throw UsageError("ratio must be positive");
    if (a.reps < 1) throw UsageError("reps must be at least 1");
    for (auto N : a.n_loci) {
      if (N < 1) throw UsageError("n-loci values must be positive");
    }
    return 0;
  });
  const unsigned threads = resolve_threads(a.threads ? std::optional<unsigned>(a.threads) : std::nullopt);
  print_config(out, "consistency",
               {{"eta_star", num(a.eta)}, {"K", num(a.K)}, {"P", num(a.P)}, {"ratio", num(a.ratio)},
                {"n_loci", join(a.n_loci)}, {"reps", std::to_string(a.reps)}, {"seed", std::to_string(a.seed)},
                {"threads", std::to_string(threads)}, {"out", a.out}});
  const auto rows = run_consistency_study(a.eta, a.K, a.P, a.ratio, a.n_loci, a.reps, a.seed, threads);
  std::ostringstream echo;
  echo << "# eta_star = " << num(a.eta) << "\n# K = " << num(a.K) << "\n# P = " << num(a.P)
       << "\n# ratio = " << num(a.ratio) << "\n# n_loci = " << join(a.n_loci) << "\n# reps = " << a.reps
       << "\n# seed = " << a.seed << '\n';
  write_output(a.out, echo.str() + consistency_csv(rows));
  for (const auto& r : rows) {
    out << "n_loci = " << r.n_loci << ": rmse = " << num(r.rmse) << ", mean = " << num(r.mean) << '\n';
  }
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heritability estimation for ascertained case-control studies", "herit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one ascertained case-control study");
  simulate->add_option("--K", sim.K, "Population prevalence")->capture_default_str();
  simulate->add_option("--P", sim.P, "Study prevalence")->capture_default_str();
  simulate->add_option("--eta", sim.eta, "True heritability")->capture_default_str();
  simulate->add_option("--n-loci", sim.n_loci, "Number of loci")->capture_default_str();
  simulate->add_option("--target-cases", sim.target_cases, "Expected number of cases")->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--kind", sim.kind, "binomial, normal or rademacher")->capture_default_str();
  simulate->add_option("--out", sim.out, "Binary dataset path")->required();
  simulate->add_option("--csv", sim.csv, "Also export the sample as CSV");

  GrmArgs grm;
  auto* grm_cmd = app.add_subcommand("grm", "Relationship matrix of a dataset");
  grm_cmd->add_option("--in", grm.in, "Binary dataset")->required();
  grm_cmd->add_option("--out", grm.out, "Output path (.csv or binary)");
  grm_cmd->add_flag("--check-en", grm.check_en, "Report the concentration event check");
  grm_cmd->add_option("--gamma", grm.gamma)->capture_default_str();

  MomentsArgs mom;
  auto* moments = app.add_subcommand("moments", "Pair expectations on a parameter grid");
  moments->add_option("--a-i", mom.a_i)->delimiter(',')->capture_default_str();
  moments->add_option("--a-j", mom.a_j)->delimiter(',')->capture_default_str();
  moments->add_option("--b", mom.b)->delimiter(',')->capture_default_str();
  moments->add_option("--eta", mom.eta)->delimiter(',')->capture_default_str();
  moments->add_option("--K", mom.K)->delimiter(',')->capture_default_str();
  moments->add_option("--P", mom.P)->delimiter(',')->capture_default_str();
  moments->add_option("--n-loci", mom.n_loci)->delimiter(',')->capture_default_str();
  moments->add_option("--variant", mom.variant, "corrected or printed")->capture_default_str();
  moments->add_option("--out", mom.out, "CSV path (stdout if omitted)");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate heritability from a dataset");
  estimate->add_option("--in", est.in, "Binary dataset")->required();
  estimate->add_option("--method", est.method, "first, second or both")->capture_default_str();
  estimate->add_option("--out", est.out, "Report path (.json or .csv)");
  estimate->add_flag("--timing", est.timing, "Include wall_time in CSV reports");

  ExperimentArgs exp;
  ExperimentOptions exp_opts;
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo replications over an (eta, K) grid");
  experiment->add_option("--config", exp.config, "Flat key = value file; flags win");
  exp_opts.by_key["eta_star"] = experiment->add_option("--eta", exp.eta)->delimiter(',')->capture_default_str();
  exp_opts.by_key["K"] = experiment->add_option("--K", exp.K)->delimiter(',')->capture_default_str();
  exp_opts.by_key["P"] = experiment->add_option("--P", exp.P)->capture_default_str();
  exp_opts.by_key["n_loci"] = experiment->add_option("--n-loci", exp.n_loci)->capture_default_str();
  exp_opts.by_key["target_cases"] = experiment->add_option("--target-cases", exp.target_cases)->capture_default_str();
  exp_opts.by_key["replications"] = experiment->add_option("--reps", exp.reps)->capture_default_str();
  exp_opts.by_key["seed"] = experiment->add_option("--seed", exp.seed)->capture_default_str();
  exp_opts.by_key["methods"] = experiment->add_option("--methods", exp.methods)->delimiter(',')->capture_default_str();
  exp_opts.by_key["genotype_kind"] = experiment->add_option("--kind", exp.kind)->capture_default_str();
  exp_opts.by_key["gamma"] = experiment->add_option("--gamma", exp.gamma)->capture_default_str();
  exp_opts.by_key["threads"] = experiment->add_option("--threads", exp.threads, "Workers (HERIT_THREADS, else all cores)");
  exp_opts.by_key["out_dir"] = experiment->add_option("--out-dir", exp.out_dir)->capture_default_str();
  experiment->add_flag("--record-times", exp.record_times, "Add wall_time to records.csv");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Timing of both estimators on an (n, N) grid");
  bench_cmd->add_option("--n", bench.n)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--N,--n-loci", bench.n_loci)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--out", bench.out)->capture_default_str();

  ConsistencyArgs cons;
  auto* consistency = app.add_subcommand("consistency", "First-order RMSE along n = ratio * N");
  consistency->add_option("--eta", cons.eta)->capture_default_str();
  consistency->add_option("--K", cons.K)->capture_default_str();
  consistency->add_option("--P", cons.P)->capture_default_str();
  consistency->add_option("--ratio", cons.ratio)->capture_default_str();
  consistency->add_option("--n-loci", cons.n_loci)->delimiter(',')->capture_default_str();
  consistency->add_option("--reps", cons.reps)->capture_default_str();
  consistency->add_option("--seed", cons.seed)->capture_default_str();
  consistency->add_option("--threads", cons.threads);
  consistency->add_option("--out", cons.out)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, out);
    if (*grm_cmd) return run_grm(grm, out);
    if (*moments) return run_moments(mom, out);
    if (*estimate) return run_estimate(est, out);
    if (*experiment) return run_experiment_cmd(exp, exp_opts, out, err, verbose);
    if (*bench_cmd) return run_bench(bench, out);
    if (*consistency) return run_consistency(cons, out);
  } catch (const UsageError& e) {
    err << "herit: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "herit: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace herit::cli
