#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "herit/random.hpp"

namespace herit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class InvalidDesign : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ZeroVarianceColumn : public std::runtime_error {
 public:
  explicit ZeroVarianceColumn(std::size_t column);
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Raw allele-count-like matrix A: individuals in rows, loci in columns.
struct GenotypeMatrix {
  Matrix values;

  std::size_t n_individuals() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_loci() const { return static_cast<std::size_t>(values.cols()); }
};

enum class GenotypeKind { Binomial, Normal, Rademacher };

std::string_view to_string(GenotypeKind kind);
GenotypeKind parse_genotype_kind(std::string_view name);

/// Per-locus law of the entries of A. Every kind has bounded, non-degenerate
/// variance and sub-Gaussian tails.
struct GenotypeDistribution {
  GenotypeKind kind = GenotypeKind::Binomial;
  /// Allele frequency per locus for Binomial; unused otherwise.
  std::vector<double> params;
  std::size_t loci = 0;

  static GenotypeDistribution binomial(std::vector<double> frequencies);
  /// Binomial(2, p_k) with p_k ~ U[0.05, 0.95] drawn once from `rs`.
  static GenotypeDistribution random_binomial(std::size_t n_loci, RandomSource& rs);
  static GenotypeDistribution standard_normal(std::size_t n_loci);
  static GenotypeDistribution rademacher(std::size_t n_loci);

  std::size_t n_loci() const { return loci; }
  /// Map 64 random bits to one draw at locus k.
  double draw(std::uint64_t bits, std::size_t locus) const;
  double variance(std::size_t locus) const;
};

/// Random-access genotype generator: cell (i, k) is a pure function of
/// (key, i, k), so any subset of rows can be regenerated on demand.
class GenotypeSource {
 public:
  GenotypeSource(GenotypeDistribution dist, std::uint64_t key) : dist_(std::move(dist)), key_(key) {}

  double value(std::size_t row, std::size_t locus) const {
    return dist_.draw(counter_hash(key_, locus, row), locus);
  }
  /// Same cells as value(); `column_key(locus)` is hoisted out of row loops.
  std::uint64_t column_key(std::size_t locus) const { return mix64(key_ ^ mix64(locus)); }
  double value_in_column(std::uint64_t column_key, std::size_t row, std::size_t locus) const {
    return dist_.draw(mix64(column_key + row), locus);
  }
  /// Rows 0..n-1.
  GenotypeMatrix materialize(std::size_t n_rows) const;
  GenotypeMatrix materialize_rows(std::span<const std::size_t> rows) const;

  const GenotypeDistribution& distribution() const { return dist_; }
  std::uint64_t key() const { return key_; }

 private:
  GenotypeDistribution dist_;
  std::uint64_t key_;
};

/// Column-standardised genotypes Z with the statistics used to build them.
struct StandardizedGenotypes {
  Matrix z;
  Vector col_means;
  Vector col_sds;

  std::size_t n_individuals() const { return static_cast<std::size_t>(z.rows()); }
  std::size_t n_loci() const { return static_cast<std::size_t>(z.cols()); }
};

struct ColumnStats {
  double mean;
  double sd;
};

/// Empirical mean and 1/n-normalised standard deviation, summed in index order.
ColumnStats column_stats(std::span<const double> column);

/// z[i,k] = (a[i,k] - mean_k) / sd_k. Throws ZeroVarianceColumn.
StandardizedGenotypes standardize(const GenotypeMatrix& a);

struct PolymorphicGenotypes {
  StandardizedGenotypes z;            ///< non-constant columns only
  std::vector<std::size_t> dropped;   ///< indices of constant columns
};

/// Like standardize, but constant (monomorphic) columns are left out instead
/// of raising ZeroVarianceColumn.
PolymorphicGenotypes standardize_polymorphic(const GenotypeMatrix& a);

struct StudyDesign {
  double K = 0.0;  ///< population prevalence
  double P = 0.0;  ///< study prevalence
  double t = 0.0;  ///< liability threshold, Phi^{-1}(1 - K)
  double p_case = 1.0;
  double p_control = 1.0;
};

/// Full-ascertainment design. Requires 0 < K <= P < 1, throws InvalidDesign.
StudyDesign design_from_prevalences(double K, double P);

struct LiabilityParams {
  double eta_star = 0.5;
  double sigma_sq = 1.0;
};

void validate(const LiabilityParams& lp);

struct Population {
  Vector liabilities;
  std::vector<std::uint8_t> y;

  std::size_t n_cases() const;
};

/// l = Z u + e with u ~ N(0, eta/N Id), e ~ N(0, (1 - eta) Id); y = 1{l > t}.
/// Draws u first, then e, from `rs`.
Population simulate_population(const StandardizedGenotypes& z, const LiabilityParams& lp,
                               const StudyDesign& design, RandomSource& rs);

/// (y - P) / sqrt(P (1 - P)).
double centered_value(std::uint8_t y, double P);

struct AscertainedSample {
  std::vector<std::size_t> indices;
  std::vector<std::uint8_t> y;
  Vector w;
  /// Standardised genotypes of the selected rows; empty until filled by the caller.
  Matrix z_study;  ///< standardised over the sample; monomorphic loci removed
  std::vector<std::size_t> dropped_loci;
  std::size_t n_cases = 0;
  std::size_t n_controls = 0;

  std::size_t size() const { return indices.size(); }
};

/// Keeps every case and each control with probability p_control (one uniform
/// per control, in index order).
AscertainedSample ascertain(std::span<const std::uint8_t> y, const StudyDesign& design,
                            RandomSource& rs);

struct StudyConfig {
  double eta_star = 0.5;
  double K = 0.1;
  double P = 0.5;
  std::size_t n_loci = 10000;
  std::size_t target_cases = 100;
  GenotypeKind kind = GenotypeKind::Binomial;
};

/// ceil(target_cases / K).
std::size_t population_size_for(std::size_t target_cases, double K);

struct SimulatedStudy {
  std::uint64_t seed = 0;
  StudyConfig config;
  StudyDesign design;
  LiabilityParams lp;
  std::size_t population_size = 0;
  std::size_t population_cases = 0;
  AscertainedSample sample;
  /// Raw genotypes of the selected individuals (rows follow sample.indices).
  GenotypeMatrix raw;
};

/// End-to-end case-control simulation.
///
/// Population genotypes are generated one locus at a time from a counter-based
/// source, standardised over the population and folded into the liabilities,
/// so memory stays O(population + loci). The result is identical to
/// materialising A, calling standardize() and simulate_population(). After
/// ascertainment the selected rows are regenerated and standardised over the
/// study sample, which is the Z that enters the relationship matrix.
SimulatedStudy simulate_study(const StudyConfig& cfg, std::uint64_t seed);

/// Substreams used by simulate_study, exposed so tests can replay the pipeline.
struct StudyStreams {
  RandomSource frequencies;
  std::uint64_t genotype_key;
  RandomSource liabilities;
  RandomSource selection;

  explicit StudyStreams(std::uint64_t seed);
};

}  // namespace herit
