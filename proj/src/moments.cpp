#include "herit/moments.hpp"

#include <cmath>

namespace herit {

double constant_c(const StudyDesign& d) {
  const double phi = std_normal_pdf(d.t);
  const double kk = d.K * (1.0 - d.K);
  return phi * phi * d.P * (1.0 - d.P) / (kk * kk);
}

BivariateCovariance pair_covariance(const SigmaPair& sp, double eta, double n_loci) {
  const double scale = eta / std::sqrt(n_loci);
  return {1.0 + scale * sp.a_i, 1.0 + scale * sp.a_j, scale * sp.b_ij};
}

double pair_expectation_from_probabilities(double p_cases, double p_controls, double p_discordant,
                                           const StudyDesign& d) {
  const double r = d.K * (1.0 - d.P) / (d.P * (1.0 - d.K));
  const double both_controls_weight = d.K * d.K * (1.0 - d.P) / (d.P * (1.0 - d.K) * (1.0 - d.K));
  const double numerator =
      (1.0 - d.P) / d.P * p_cases - r * p_discordant + both_controls_weight * p_controls;
  const double denominator = p_cases + r * r * p_controls + r * p_discordant;
  return numerator / denominator;
}

double exact_pair_expectation(const SigmaPair& sp, const StudyDesign& d, double eta, double n_loci) {
  const BivariateCovariance cov = pair_covariance(sp, eta, n_loci);
  if (!cov.positive_definite()) {
    throw NotPositiveDefinite("exact_pair_expectation: pair covariance is not positive definite");
  }
  const double p_cases = bvn_rect(d.t, kPosInf, d.t, kPosInf, cov);
  const double p_controls = bvn_rect(kNegInf, d.t, kNegInf, d.t, cov);
  const double p_discordant = 1.0 - p_cases - p_controls;
  return pair_expectation_from_probabilities(p_cases, p_controls, p_discordant, d);
}

double first_order_pair_expectation(double g_ij, const StudyDesign& design, double eta) {
  return eta * constant_c(design) * g_ij;
}

SecondOrderExpansion::SecondOrderExpansion(const StudyDesign& d, double n_loci,
                                           SecondOrderVariant variant) {
  const double t = d.t;
  const double phi = std_normal_pdf(t);
  const double phi2 = phi * phi;
  const double kk = d.K * (1.0 - d.K);
  const double scale = d.P * (1.0 - d.P) / (kk * kk);
  const double skew = (d.P - d.K) / kk;

  lead_ = scale * phi2 / std::sqrt(n_loci);
  diag_product_ = scale * (t * t / 4.0) * (variant.phi_sq_on_diag_product ? phi2 : 1.0) / n_loci;
  const double square_correction = (variant.phi_sq_on_offdiag_square ? phi2 : 1.0) * skew * skew;
  offdiag_square_ = scale * phi2 * (t * t / 2.0 - square_correction) / n_loci;
  mixed_ = scale * phi2 * (t * t - 1.0 - skew * t * phi) / (2.0 * n_loci);
}

double second_order_pair_expectation(const SigmaPair& sp, const StudyDesign& design, double eta,
                                     double n_loci, SecondOrderVariant variant) {
  return SecondOrderExpansion(design, n_loci, variant).coefficients(sp).at(eta);
}

}  // namespace herit
