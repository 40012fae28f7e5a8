#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "herit/numerics.hpp"

using namespace herit;

namespace {

// Inverts the cdf by plain bisection; independent of the production quantile.
double bisect_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Standard bivariate normal density with correlation r.
double bvn_density(double x, double y, double r) {
  const double q = (x * x - 2.0 * r * x * y + y * y) / (1.0 - r * r);
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(1.0 - r * r));
}

// Plackett: d/dr Phi2(h, k; r) = phi2(h, k; r). Composite Simpson in r.
double plackett_lower_orthant(double h, double k, double rho) {
  const int m = 2000;
  const double step = rho / m;
  double s = bvn_density(h, k, 0.0) + bvn_density(h, k, rho);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * bvn_density(h, k, i * step);
  return std_normal_cdf(h) * std_normal_cdf(k) + s * step / 3.0;
}

}  // namespace

TEST_CASE("normal pdf and cdf basics") {
  CHECK(std_normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(std_normal_cdf(0.0) == 0.5);
  for (double x : {-7.0, -3.3, -1.0, -0.2, 0.4, 1.7, 5.5}) {
    CHECK(std_normal_pdf(x) == std_normal_pdf(-x));
    CHECK(std::abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0) < 1e-15);
    CHECK(std_normal_sf(x) == std_normal_cdf(-x));
  }
}

TEST_CASE("cdf agrees with quadrature of the pdf") {
  const double area = integrate_gk15([](double x) { return std_normal_pdf(x); }, 0.0, 1.2815516, 1e-14);
  CHECK(std::abs(0.5 + area - std_normal_cdf(1.2815516)) < 1e-13);
  CHECK(std::abs(std_normal_cdf(1.2815516) - 0.9) < 1e-7);
}

TEST_CASE("quantile examples") {
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(std_normal_quantile(0.9) - 1.2815516) < 1e-6);
  CHECK(std::abs(std_normal_quantile(0.99) - 2.3263479) < 1e-6);
  for (double p : {1e-12, 1e-6, 0.001, 0.01, 0.1, 0.3, 0.5, 0.77, 0.9, 0.99, 0.999999}) {
    CHECK(std::abs(std_normal_quantile(p) - bisect_quantile(p)) < 1e-10);
  }
}

TEST_CASE("quantile rejects probabilities outside (0, 1)") {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) CHECK_THROWS_AS(std_normal_quantile(p), std::domain_error);
}

TEST_CASE("quantile inverts the cdf on [-6, 6]") {
  for (double x = -6.0; x <= 6.0; x += 0.05) {
    CHECK(std::abs(std_normal_quantile(std_normal_cdf(x)) - x) < 1e-8);
  }
}

TEST_CASE("gk15 integrates smooth functions") {
  CHECK(integrate_gk15([](double x) { return x * x; }, 0.0, 3.0, 1e-13) == doctest::Approx(9.0).epsilon(1e-13));
  CHECK(integrate_gk15([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13) ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate_gk15([](double x) { return 1.0; }, 2.0, 2.0, 1e-13) == 0.0);
}

TEST_CASE("bvn_rect independence gives K^2") {
  for (double K : {0.5, 0.1, 0.01, 0.005}) {
    const double t = std_normal_quantile(1.0 - K);
    CHECK(std::abs(bvn_rect(t, kPosInf, t, kPosInf, {}) - K * K) < 1e-12);
  }
}

TEST_CASE("bvn_rect positive orthant closed form") {
  for (double rho : {-0.9, -0.5, 0.0, 0.3, 0.5, 0.95}) {
    const double expected = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
    CHECK(std::abs(bvn_rect(0.0, kPosInf, 0.0, kPosInf, {1.0, 1.0, rho}) - expected) < 1e-10);
  }
  CHECK(std::abs(bvn_rect(0.0, kPosInf, 0.0, kPosInf, {1.0, 1.0, 0.5}) - 1.0 / 3.0) < 1e-8);
}

TEST_CASE("bvn_rect matches the Plackett integral") {
  for (double rho : {-0.6, 0.2, 0.7}) {
    for (double t : {0.0, 1.2815516, 2.3263479}) {
      // P(X > t, Y > t) = Phi2(-t, -t; rho)
      const double oracle = plackett_lower_orthant(-t, -t, rho);
      CHECK(std::abs(bvn_rect(t, kPosInf, t, kPosInf, {1.0, 1.0, rho}) - oracle) < 1e-10);
    }
  }
}

TEST_CASE("bvn_rect four quadrants partition the plane") {
  const double t = std_normal_quantile(0.9);
  for (const BivariateCovariance cov : {BivariateCovariance{}, BivariateCovariance{1.0, 1.0, 0.5},
                                        BivariateCovariance{1.2, 0.8, -0.3}, BivariateCovariance{1.0, 1.0, 0.999}}) {
    const double total = bvn_rect(t, kPosInf, t, kPosInf, cov) + bvn_rect(kNegInf, t, kNegInf, t, cov) +
                         bvn_rect(t, kPosInf, kNegInf, t, cov) + bvn_rect(kNegInf, t, t, kPosInf, cov);
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("bvn_rect symmetry under swapping axes") {
  const BivariateCovariance cov{1.3, 0.7, 0.4};
  const BivariateCovariance swapped{0.7, 1.3, 0.4};
  CHECK(std::abs(bvn_rect(-0.3, 1.1, 0.5, kPosInf, cov) - bvn_rect(0.5, kPosInf, -0.3, 1.1, swapped)) < 1e-12);
}

TEST_CASE("bvn_rect is monotone in the rectangle") {
  const BivariateCovariance cov{1.0, 1.0, 0.6};
  double prev = 0.0;
  for (double lo = 1.5; lo >= -3.0; lo -= 0.5) {
    const double p = bvn_rect(lo, kPosInf, lo, 2.0, cov);
    CHECK(p >= prev - 1e-15);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("bvn_rect near-perfect correlation limit") {
  const double t = std_normal_quantile(0.9);
  const BivariateCovariance cov{1.0, 1.0, 1.0 - 1e-9};
  CHECK(std::abs(bvn_rect(t, kPosInf, t, kPosInf, cov) - std_normal_sf(t)) < 1e-4);
}

TEST_CASE("bvn_rect validates its inputs") {
  CHECK_THROWS_AS(bvn_rect(0, 1, 0, 1, {1.0, 1.0, 1.0}), NotPositiveDefinite);
  CHECK_THROWS_AS(bvn_rect(0, 1, 0, 1, {-1.0, 1.0, 0.0}), NotPositiveDefinite);
  CHECK_THROWS_AS(bvn_rect(1, 0, 0, 1, {}), std::invalid_argument);
}
