#pragma once

#include <cstddef>
#include <vector>

#include "herit/simulate.hpp"

namespace herit {

/// Empirical relationship matrix G = Z Z' / N over the study individuals.
struct GrmView {
  Matrix g;  ///< symmetric, both triangles materialised
  std::size_t n_loci = 0;

  std::size_t size() const { return static_cast<std::size_t>(g.rows()); }
};

GrmView grm_compute(const Matrix& z);
inline GrmView grm_compute(const StandardizedGenotypes& z) { return grm_compute(z.z); }

/// sqrt(N)-scaled deviations of the pairwise liability covariance from Id:
/// a_i = sqrt(N) (G_ii - 1), b_ij = sqrt(N) G_ij.
struct SigmaPair {
  double a_i = 0.0;
  double a_j = 0.0;
  double b_ij = 0.0;
};

/// Throws std::invalid_argument when i == j.
SigmaPair sigma_pair(const GrmView& g, std::size_t i, std::size_t j);

struct EventCheck {
  bool holds = false;
  double sup_diag_dev = 0.0;
  double sup_offdiag = 0.0;
  double eps_n = 0.0;
};

inline constexpr double kDefaultGamma = 0.05;

/// Uniform smallness event: max_i |G_ii - 1| <= eps and max_{i!=j} |G_ij| <= eps
/// with eps = N^-(1/2 - gamma). Requires 0 < gamma < 1/10.
EventCheck event_en_check(const GrmView& g, double gamma = kDefaultGamma);

/// (1/n) sum_{i != j} G_ij^2, which tends to n/N.
double offdiag_square_mean(const GrmView& g);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo report on the moments of the first rows of a standardised
/// genotype column, plus the exact per-column normalisation identities.
struct ZPropertyReport {
  std::size_t n = 0;
  std::size_t loci = 0;
  std::size_t reps = 0;
  std::size_t skipped_columns = 0;        ///< zero-variance draws left out
  double max_abs_col_sum = 0.0;          ///< max_k |sum_i Z_ik|
  double max_abs_col_sumsq_dev = 0.0;    ///< max_k |sum_i Z_ik^2 - n|
  MomentEstimate cross;                  ///< E[Z1 Z2], exactly -1/(n-1)
  MomentEstimate power2, power4, power6; ///< E[Z1^p]
  MomentEstimate square_square;          ///< E[Z1^2 Z2^2] = 1 + o(1)
  /// Higher cross moments, reported only.
  struct Named {
    const char* name;
    MomentEstimate estimate;
  };
  std::vector<Named> higher;
};

/// Draws `reps` matrices of shape n x N from `dist`, standardises each and
/// pools the N columns of every replicate as independent samples. Constant
/// columns are skipped and counted.
ZPropertyReport z_property_suite(const GenotypeDistribution& dist, std::size_t n, std::size_t reps,
                                 RandomSource& rs);

}  // namespace herit
