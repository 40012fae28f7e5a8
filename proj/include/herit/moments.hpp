#pragma once

#include <cstddef>

#include "herit/grm.hpp"
#include "herit/numerics.hpp"
#include "herit/simulate.hpp"

namespace herit {

/// c = phi(t)^2 P (1 - P) / (K^2 (1 - K)^2).
double constant_c(const StudyDesign& design);

/// Liability covariance of a pair given the relationship deviations:
/// [[1 + eta a_i / sqrt(N), eta b_ij / sqrt(N)], [., 1 + eta a_j / sqrt(N)]].
BivariateCovariance pair_covariance(const SigmaPair& sp, double eta, double n_loci);

/// E[W_i W_j | both selected] from the three joint phenotype probabilities
/// (both cases, both controls, discordant) under full ascertainment.
double pair_expectation_from_probabilities(double p_cases, double p_controls, double p_discordant,
                                           const StudyDesign& design);

/// Exact conditional expectation by bivariate-normal integration.
/// Throws NotPositiveDefinite when the pair covariance is not positive definite.
double exact_pair_expectation(const SigmaPair& sp, const StudyDesign& design, double eta,
                              double n_loci);

/// eta * c * g_ij.
double first_order_pair_expectation(double g_ij, const StudyDesign& design, double eta);

/// Selects between the expansion as printed and the re-derived one.
///
/// `phi_sq_on_diag_product`: the A_i A_j term carries phi(t)^2.
/// `phi_sq_on_offdiag_square`: the (P-K)^2 / (K^2 (1-K)^2) correction inside the
/// B_ij^2 term carries phi(t)^2. Only the default (both true) has an error of
/// order N^-3/2 against exact_pair_expectation.
struct SecondOrderVariant {
  bool phi_sq_on_diag_product = true;
  bool phi_sq_on_offdiag_square = true;

  static constexpr SecondOrderVariant printed() { return {false, false}; }
};

/// The second-order expansion is alpha * eta + beta * eta^2; these are alpha, beta.
struct SecondOrderCoefficients {
  double linear = 0.0;
  double quadratic = 0.0;

  double at(double eta) const { return eta * (linear + eta * quadratic); }
};

/// Per-design constants shared by every pair.
class SecondOrderExpansion {
 public:
  SecondOrderExpansion(const StudyDesign& design, double n_loci, SecondOrderVariant variant = {});

  SecondOrderCoefficients coefficients(const SigmaPair& sp) const {
    return {lead_ * sp.b_ij,
            diag_product_ * sp.a_i * sp.a_j + offdiag_square_ * sp.b_ij * sp.b_ij +
                mixed_ * sp.b_ij * (sp.a_i + sp.a_j)};
  }

 private:
  double lead_ = 0.0;
  double diag_product_ = 0.0;
  double offdiag_square_ = 0.0;
  double mixed_ = 0.0;
};

double second_order_pair_expectation(const SigmaPair& sp, const StudyDesign& design, double eta,
                                     double n_loci, SecondOrderVariant variant = {});

}  // namespace herit
