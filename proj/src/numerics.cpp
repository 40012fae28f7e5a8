#include "herit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace herit {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

// Acklam's rational approximation, relative error about 1e-9; polished below.
double quantile_initial(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Probability that a standard normal falls in (lo, hi), evaluated on the
// tail where the subtraction loses the least precision.
double normal_interval(double lo, double hi) {
  if (lo >= hi) return 0.0;
  if (lo > 0.0) return std_normal_sf(lo) - std_normal_sf(hi);
  return std_normal_cdf(hi) - std_normal_cdf(lo);
}

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("std_normal_quantile: probability must lie in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  // Work in the lower tail so that Phi(x) - p keeps full relative precision.
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  double x = quantile_initial(target);
  for (int iter = 0; iter < 3; ++iter) {
    const double residual = std_normal_cdf(x) - target;
    const double density = std_normal_pdf(x);
    if (density <= 0.0) break;
    const double step = residual / density;
    // Halley correction; the second derivative of Phi is -x phi(x).
    x -= step / (1.0 + 0.5 * x * step);
  }
  return upper ? -x : x;
}

double BivariateCovariance::correlation() const { return v12 / std::sqrt(v11 * v22); }

double bvn_rect(double lower_i, double upper_i, double lower_j, double upper_j,
                const BivariateCovariance& cov) {
  if (!cov.positive_definite()) {
    throw NotPositiveDefinite("bvn_rect: covariance is not positive definite");
  }
  if (!(lower_i < upper_i) || !(lower_j < upper_j)) {
    throw std::invalid_argument("bvn_rect: each lower bound must be below its upper bound");
  }
  const double sd_i = std::sqrt(cov.v11);
  const double sd_j = std::sqrt(cov.v22);
  const double rho = cov.correlation();

  const double lo_i = std::max(lower_i / sd_i, -kTailClip);
  const double hi_i = std::min(upper_i / sd_i, kTailClip);
  if (!(lo_i < hi_i)) return 0.0;
  const double lo_j = lower_j / sd_j;
  const double hi_j = upper_j / sd_j;

  if (rho == 0.0) return normal_interval(lo_i, hi_i) * normal_interval(lo_j, hi_j);

  const double cond_sd = std::sqrt((1.0 - rho) * (1.0 + rho));
  auto integrand = [&](double x) {
    const double shift = rho * x;
    const double lo = std::isinf(lo_j) ? lo_j : (lo_j - shift) / cond_sd;
    const double hi = std::isinf(hi_j) ? hi_j : (hi_j - shift) / cond_sd;
    return std_normal_pdf(x) * normal_interval(lo, hi);
  };

  // Splitting at zero keeps the bulk of the density away from panel edges.
  double total = 0.0;
  if (lo_i < 0.0 && hi_i > 0.0) {
    total = integrate_gk15(integrand, lo_i, 0.0, 5e-13) + integrate_gk15(integrand, 0.0, hi_i, 5e-13);
  } else {
    total = integrate_gk15(integrand, lo_i, hi_i, 1e-12);
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace herit
