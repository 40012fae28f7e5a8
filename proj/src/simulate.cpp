#include "herit/simulate.hpp"

#include <cmath>
#include <string>

#include "herit/numerics.hpp"

namespace herit {

ZeroVarianceColumn::ZeroVarianceColumn(std::size_t column)
    : std::runtime_error("genotype column " + std::to_string(column) + " has zero empirical variance"),
      column_(column) {}

std::string_view to_string(GenotypeKind kind) {
  switch (kind) {
    case GenotypeKind::Binomial: return "binomial";
    case GenotypeKind::Normal: return "normal";
    case GenotypeKind::Rademacher: return "rademacher";
  }
  return "unknown";
}

GenotypeKind parse_genotype_kind(std::string_view name) {
  if (name == "binomial") return GenotypeKind::Binomial;
  if (name == "normal") return GenotypeKind::Normal;
  if (name == "rademacher") return GenotypeKind::Rademacher;
  throw std::invalid_argument("unknown genotype kind '" + std::string(name) +
                              "' (expected binomial, normal or rademacher)");
}

GenotypeDistribution GenotypeDistribution::binomial(std::vector<double> frequencies) {
  for (double p : frequencies) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("allele frequency must lie in (0, 1)");
  }
  GenotypeDistribution d;
  d.kind = GenotypeKind::Binomial;
  d.loci = frequencies.size();
  d.params = std::move(frequencies);
  return d;
}

GenotypeDistribution GenotypeDistribution::random_binomial(std::size_t n_loci, RandomSource& rs) {
  std::vector<double> freqs(n_loci);
  for (auto& p : freqs) p = 0.05 + 0.9 * rs.uniform();
  return binomial(std::move(freqs));
}

GenotypeDistribution GenotypeDistribution::standard_normal(std::size_t n_loci) {
  GenotypeDistribution d;
  d.kind = GenotypeKind::Normal;
  d.loci = n_loci;
  return d;
}

GenotypeDistribution GenotypeDistribution::rademacher(std::size_t n_loci) {
  GenotypeDistribution d;
  d.kind = GenotypeKind::Rademacher;
  d.loci = n_loci;
  return d;
}

double GenotypeDistribution::draw(std::uint64_t bits, std::size_t locus) const {
  switch (kind) {
    case GenotypeKind::Binomial: {
      const double p = params[locus];
      const double u1 = static_cast<double>(bits & 0xffffffffULL) * 0x1.0p-32;
      const double u2 = static_cast<double>(bits >> 32) * 0x1.0p-32;
      return static_cast<double>((u1 < p) + (u2 < p));
    }
    case GenotypeKind::Normal:
      return std_normal_quantile((static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53);
    case GenotypeKind::Rademacher:
      return (bits >> 63) ? 1.0 : -1.0;
  }
  return 0.0;
}

double GenotypeDistribution::variance(std::size_t locus) const {
  if (kind == GenotypeKind::Binomial) return 2.0 * params[locus] * (1.0 - params[locus]);
  return 1.0;
}

GenotypeMatrix GenotypeSource::materialize(std::size_t n_rows) const {
  GenotypeMatrix a{Matrix(n_rows, dist_.n_loci())};
  for (std::size_t k = 0; k < dist_.n_loci(); ++k) {
    for (std::size_t i = 0; i < n_rows; ++i) a.values(i, k) = value(i, k);
  }
  return a;
}

GenotypeMatrix GenotypeSource::materialize_rows(std::span<const std::size_t> rows) const {
  GenotypeMatrix a{Matrix(rows.size(), dist_.n_loci())};
  for (std::size_t k = 0; k < dist_.n_loci(); ++k) {
    for (std::size_t r = 0; r < rows.size(); ++r) a.values(r, k) = value(rows[r], k);
  }
  return a;
}

ColumnStats column_stats(std::span<const double> column) {
  const double n = static_cast<double>(column.size());
  double sum = 0.0;
  for (double v : column) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : column) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

StandardizedGenotypes standardize(const GenotypeMatrix& a) {
  const Eigen::Index n = a.values.rows();
  const Eigen::Index loci = a.values.cols();
  StandardizedGenotypes out{Matrix(n, loci), Vector(loci), Vector(loci)};
  for (Eigen::Index k = 0; k < loci; ++k) {
    const std::span<const double> col(a.values.col(k).data(), static_cast<std::size_t>(n));
    const ColumnStats stats = column_stats(col);
    if (!(stats.sd > 0.0)) throw ZeroVarianceColumn(static_cast<std::size_t>(k));
    out.col_means[k] = stats.mean;
    out.col_sds[k] = stats.sd;
    for (Eigen::Index i = 0; i < n; ++i) out.z(i, k) = (col[i] - stats.mean) / stats.sd;
  }
  return out;
}

PolymorphicGenotypes standardize_polymorphic(const GenotypeMatrix& a) {
  const Eigen::Index n = a.values.rows();
  PolymorphicGenotypes out;
  std::vector<Eigen::Index> kept;
  std::vector<ColumnStats> stats;
  for (Eigen::Index k = 0; k < a.values.cols(); ++k) {
    const ColumnStats s = column_stats({a.values.col(k).data(), static_cast<std::size_t>(n)});
    if (s.sd > 0.0) {
      kept.push_back(k);
      stats.push_back(s);
    } else {
      out.dropped.push_back(static_cast<std::size_t>(k));
    }
  }
  const auto m = static_cast<Eigen::Index>(kept.size());
  out.z = {Matrix(n, m), Vector(m), Vector(m)};
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto& s = stats[static_cast<std::size_t>(c)];
    out.z.col_means[c] = s.mean;
    out.z.col_sds[c] = s.sd;
    for (Eigen::Index i = 0; i < n; ++i) out.z.z(i, c) = (a.values(i, kept[static_cast<std::size_t>(c)]) - s.mean) / s.sd;
  }
  return out;
}

StudyDesign design_from_prevalences(double K, double P) {
  if (!(K > 0.0 && K < 1.0)) throw InvalidDesign("population prevalence K must lie in (0, 1)");
  if (!(P > 0.0 && P < 1.0)) throw InvalidDesign("study prevalence P must lie in (0, 1)");
  if (K > P) {
    throw InvalidDesign("K > P: control selection probability K(1-P)/(P(1-K)) would exceed 1");
  }
  StudyDesign d;
  d.K = K;
  d.P = P;
  d.t = std_normal_quantile(1.0 - K);
  d.p_case = 1.0;
  d.p_control = K * (1.0 - P) / (P * (1.0 - K));
  return d;
}

void validate(const LiabilityParams& lp) {
  if (!(lp.eta_star >= 0.0 && lp.eta_star <= 1.0)) {
    throw std::invalid_argument("heritability eta must lie in [0, 1]");
  }
  if (lp.sigma_sq != 1.0) throw std::invalid_argument("total liability variance is fixed at 1");
}

std::size_t Population::n_cases() const {
  std::size_t cases = 0;
  for (auto v : y) cases += v;
  return cases;
}

Population simulate_population(const StandardizedGenotypes& z, const LiabilityParams& lp,
                               const StudyDesign& design, RandomSource& rs) {
  validate(lp);
  const Eigen::Index n = z.z.rows();
  const Eigen::Index loci = z.z.cols();
  const double sd_u = std::sqrt(lp.eta_star / static_cast<double>(loci));
  const double sd_e = std::sqrt(1.0 - lp.eta_star);

  Vector u(loci);
  for (Eigen::Index k = 0; k < loci; ++k) u[k] = sd_u * rs.normal();

  Population pop{Vector::Zero(n), std::vector<std::uint8_t>(static_cast<std::size_t>(n))};
  // Column-major accumulation; simulate_study reproduces this order exactly.
  for (Eigen::Index k = 0; k < loci; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) pop.liabilities[i] += z.z(i, k) * u[k];
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    pop.liabilities[i] += sd_e * rs.normal();
    pop.y[static_cast<std::size_t>(i)] = pop.liabilities[i] > design.t ? 1 : 0;
  }
  return pop;
}

double centered_value(std::uint8_t y, double P) {
  return (static_cast<double>(y) - P) / std::sqrt(P * (1.0 - P));
}

AscertainedSample ascertain(std::span<const std::uint8_t> y, const StudyDesign& design,
                            RandomSource& rs) {
  AscertainedSample s;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool keep = y[i] ? true : rs.uniform() < design.p_control;
    if (!keep) continue;
    s.indices.push_back(i);
    s.y.push_back(y[i]);
    if (y[i]) {
      ++s.n_cases;
    } else {
      ++s.n_controls;
    }
  }
  s.w.resize(static_cast<Eigen::Index>(s.indices.size()));
  for (std::size_t r = 0; r < s.y.size(); ++r) {
    s.w[static_cast<Eigen::Index>(r)] = centered_value(s.y[r], design.P);
  }
  return s;
}

std::size_t population_size_for(std::size_t target_cases, double K) {
  if (!(K > 0.0 && K < 1.0)) throw InvalidDesign("population prevalence K must lie in (0, 1)");
  // Guard against 100 / 0.1 = 1000.0000000000001 style round-up.
  const double exact = static_cast<double>(target_cases) / K;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) < 1e-9 * exact) return static_cast<std::size_t>(rounded);
  return static_cast<std::size_t>(std::ceil(exact));
}

StudyStreams::StudyStreams(std::uint64_t seed)
    : frequencies(seed, 0),
      genotype_key(RandomSource(seed, 1).key()),
      liabilities(seed, 2),
      selection(seed, 3) {}

SimulatedStudy simulate_study(const StudyConfig& cfg, std::uint64_t seed) {
  SimulatedStudy out;
  out.seed = seed;
  out.config = cfg;
  out.design = design_from_prevalences(cfg.K, cfg.P);
  out.lp = LiabilityParams{cfg.eta_star, 1.0};
  validate(out.lp);
  if (cfg.n_loci == 0) throw std::invalid_argument("n_loci must be positive");
  if (cfg.target_cases == 0) throw std::invalid_argument("target_cases must be positive");

  StudyStreams streams(seed);
  GenotypeDistribution dist;
  switch (cfg.kind) {
    case GenotypeKind::Binomial:
      dist = GenotypeDistribution::random_binomial(cfg.n_loci, streams.frequencies);
      break;
    case GenotypeKind::Normal: dist = GenotypeDistribution::standard_normal(cfg.n_loci); break;
    case GenotypeKind::Rademacher: dist = GenotypeDistribution::rademacher(cfg.n_loci); break;
  }
  const GenotypeSource source(std::move(dist), streams.genotype_key);

  const std::size_t n_pop = population_size_for(cfg.target_cases, cfg.K);
  if (n_pop < 2) throw std::invalid_argument("population must contain at least two individuals");
  out.population_size = n_pop;

  const double sd_u = std::sqrt(out.lp.eta_star / static_cast<double>(cfg.n_loci));
  const double sd_e = std::sqrt(1.0 - out.lp.eta_star);
  std::vector<double> u(cfg.n_loci);
  for (auto& v : u) v = sd_u * streams.liabilities.normal();

  Vector liabilities = Vector::Zero(static_cast<Eigen::Index>(n_pop));
  std::vector<double> column(n_pop);
  for (std::size_t k = 0; k < cfg.n_loci; ++k) {
    const std::uint64_t ck = source.column_key(k);
    for (std::size_t i = 0; i < n_pop; ++i) column[i] = source.value_in_column(ck, i, k);
    const ColumnStats stats = column_stats(column);
    if (!(stats.sd > 0.0)) throw ZeroVarianceColumn(k);
    for (std::size_t i = 0; i < n_pop; ++i) {
      liabilities[static_cast<Eigen::Index>(i)] += (column[i] - stats.mean) / stats.sd * u[k];
    }
  }
  std::vector<std::uint8_t> y(n_pop);
  for (std::size_t i = 0; i < n_pop; ++i) {
    liabilities[static_cast<Eigen::Index>(i)] += sd_e * streams.liabilities.normal();
    y[i] = liabilities[static_cast<Eigen::Index>(i)] > out.design.t ? 1 : 0;
    out.population_cases += y[i];
  }

  out.sample = ascertain(y, out.design, streams.selection);
  out.raw = source.materialize_rows(out.sample.indices);
  if (out.sample.size() >= 2) {
    PolymorphicGenotypes z = standardize_polymorphic(out.raw);
    out.sample.z_study = std::move(z.z.z);
    out.sample.dropped_loci = std::move(z.dropped);
  }
  return out;
}

}  // namespace herit
