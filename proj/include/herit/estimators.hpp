#pragma once

#include <array>
#include <chrono>
#include <limits>
#include <span>
#include <stdexcept>
#include <string_view>

#include "herit/grm.hpp"
#include "herit/moments.hpp"

namespace herit {

enum class EstimatorKind { FirstOrder, SecondOrder };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(std::string_view name);

class DegenerateDesign : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EstimateReport {
  EstimatorKind method = EstimatorKind::FirstOrder;
  double eta_hat = 0.0;  ///< always in [0, 1]
  double raw_ratio = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  bool converged = true;
  /// The Newton iterates left the guard interval, or stalled, and the result
  /// came from golden-section search on [0, 1].
  bool used_fallback = false;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  std::chrono::duration<double> wall_time{0.0};
};

/// Ordered-pair sums of the first-order estimator:
/// numerator = sum_{i != j} w_i w_j G_ij, denominator = sum_{i != j} G_ij^2.
struct PairSums {
  double numerator = 0.0;
  double denominator = 0.0;
};

PairSums first_order_pair_sums(std::span<const double> w, const GrmView& g);

/// raw = numerator / (c * denominator), clamped to [0, 1].
/// Throws DegenerateDesign when the denominator is zero.
EstimateReport first_order_from_sums(const PairSums& sums, double c);

EstimateReport estimate_first_order(std::span<const double> w, const GrmView& g,
                                    const StudyDesign& design);

/// g(eta) = sum_{i != j} (w_i w_j - E2_ij(eta))^2, evaluated pair by pair.
double second_order_objective(double eta, std::span<const double> w, const GrmView& g,
                              const StudyDesign& design, SecondOrderVariant variant = {});

/// g(eta) as a quartic, coefficients in increasing degree.
struct QuarticObjective {
  std::array<double, 5> coef{};

  double value(double eta) const;
  double derivative(double eta) const;
  double second_derivative(double eta) const;
};

/// One sweep over the pairs; every Newton step afterwards is O(1).
QuarticObjective accumulate_second_order_objective(std::span<const double> w, const GrmView& g,
                                                   const StudyDesign& design,
                                                   SecondOrderVariant variant = {});

struct NewtonOptions {
  double tolerance = 1e-10;
  std::size_t max_iters = 100;
  double guard_lower = -0.5;
  double guard_upper = 1.5;
};

/// Newton-Raphson on g'(eta) started from the first-order estimate (0.5 when
/// that is degenerate). Falls back to golden-section minimisation on [0, 1]
/// when an iterate leaves the guard interval or the curvature is not positive.
/// Never throws on non-convergence: the report carries converged = false.
EstimateReport estimate_second_order(std::span<const double> w, const GrmView& g,
                                     const StudyDesign& design, SecondOrderVariant variant = {},
                                     const NewtonOptions& options = {});

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace herit
