#pragma once

#include <limits>
#include <stdexcept>

namespace herit {

/// Standard normal density.
double std_normal_pdf(double x);

/// Standard normal distribution function, absolute error below 1e-15.
double std_normal_cdf(double x);

/// Upper tail 1 - Phi(x), computed without cancellation.
double std_normal_sf(double x);

/// Inverse of std_normal_cdf. Throws std::domain_error unless 0 < p < 1.
double std_normal_quantile(double p);

/// Bounds of a rectangle may be infinite; use these sentinels.
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Infinite bounds are clipped at this many standard deviations.
inline constexpr double kTailClip = 8.5;

class NotPositiveDefinite : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Covariance of a centred bivariate normal vector.
struct BivariateCovariance {
  double v11 = 1.0;
  double v22 = 1.0;
  double v12 = 0.0;

  bool positive_definite() const { return v11 > 0.0 && v22 > 0.0 && v12 * v12 < v11 * v22; }
  double correlation() const;
};

/// P(lower_i < X < upper_i, lower_j < Y < upper_j) for (X, Y) ~ N(0, cov).
///
/// The rectangle is reduced to unit variances and integrated as
///   int phi(x) [Phi((u_j - rho x)/s) - Phi((l_j - rho x)/s)] dx,  s = sqrt(1 - rho^2)
/// with adaptive Gauss-Kronrod quadrature at absolute tolerance 1e-10 (well below that in practice).
/// Throws NotPositiveDefinite when cov is not strictly positive definite and
/// std::invalid_argument when a lower bound is not below its upper bound.
double bvn_rect(double lower_i, double upper_i, double lower_j, double upper_j,
                const BivariateCovariance& cov);

/// Adaptive 15-point Gauss-Kronrod integration of f on [a, b].
template <class F>
double integrate_gk15(F&& f, double a, double b, double abs_tol, int max_depth = 40);

}  // namespace herit

#include "herit/detail/quadrature.hpp"
