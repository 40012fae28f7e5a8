#include "herit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace herit {

namespace {

using Clock = std::chrono::steady_clock;

void check_sizes(std::span<const double> w, const GrmView& g) {
  if (w.size() != g.size()) {
    throw std::invalid_argument("estimator: w has " + std::to_string(w.size()) +
                                " entries but the GRM is " + std::to_string(g.size()) + " x " +
                                std::to_string(g.size()));
  }
  if (w.size() < 2) throw std::invalid_argument("estimator: need at least two individuals");
}

double golden_section_min(const QuarticObjective& q, double lo, double hi, double tol,
                          std::size_t& iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = q.value(x1), f2 = q.value(x2);
  while (b - a > tol) {
    ++iterations;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = q.value(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = q.value(x2);
    }
  }
  double best = 0.5 * (a + b);
  // The interior search cannot see a minimum sitting on the boundary.
  for (double edge : {lo, hi}) {
    if (q.value(edge) < q.value(best)) best = edge;
  }
  return best;
}

}  // namespace

std::string_view to_string(EstimatorKind kind) {
  return kind == EstimatorKind::FirstOrder ? "first" : "second";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  if (name == "first") return EstimatorKind::FirstOrder;
  if (name == "second") return EstimatorKind::SecondOrder;
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "' (expected first or second)");
}

PairSums first_order_pair_sums(std::span<const double> w, const GrmView& g) {
  check_sizes(w, g);
  const auto n = static_cast<Eigen::Index>(w.size());
  PairSums s;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double wj = w[static_cast<std::size_t>(j)];
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double gij = g.g(i, j);
      s.numerator += w[static_cast<std::size_t>(i)] * wj * gij;
      s.denominator += gij * gij;
    }
  }
  s.numerator *= 2.0;
  s.denominator *= 2.0;
  return s;
}

EstimateReport first_order_from_sums(const PairSums& sums, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("first-order estimator: c must be positive");
  if (sums.denominator == 0.0) {
    throw DegenerateDesign("first-order estimator: sum of squared off-diagonal relationships is zero");
  }
  EstimateReport r;
  r.method = EstimatorKind::FirstOrder;
  r.raw_ratio = sums.numerator / (c * sums.denominator);
  r.eta_hat = std::clamp(r.raw_ratio, 0.0, 1.0);
  return r;
}

EstimateReport estimate_first_order(std::span<const double> w, const GrmView& g,
                                    const StudyDesign& design) {
  const auto start = Clock::now();
  EstimateReport r = first_order_from_sums(first_order_pair_sums(w, g), constant_c(design));
  r.wall_time = Clock::now() - start;
  return r;
}

double second_order_objective(double eta, std::span<const double> w, const GrmView& g,
                              const StudyDesign& design, SecondOrderVariant variant) {
  check_sizes(w, g);
  const double n_loci = static_cast<double>(g.n_loci);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (i == j) continue;
      const double expected =
          second_order_pair_expectation(sigma_pair(g, i, j), design, eta, n_loci, variant);
      const double residual = w[i] * w[j] - expected;
      total += residual * residual;
    }
  }
  return total;
}

double QuarticObjective::value(double eta) const {
  return coef[0] + eta * (coef[1] + eta * (coef[2] + eta * (coef[3] + eta * coef[4])));
}

double QuarticObjective::derivative(double eta) const {
  return coef[1] + eta * (2.0 * coef[2] + eta * (3.0 * coef[3] + eta * 4.0 * coef[4]));
}

double QuarticObjective::second_derivative(double eta) const {
  return 2.0 * coef[2] + eta * (6.0 * coef[3] + eta * 12.0 * coef[4]);
}

QuarticObjective accumulate_second_order_objective(std::span<const double> w, const GrmView& g,
                                                   const StudyDesign& design,
                                                   SecondOrderVariant variant) {
  check_sizes(w, g);
  const SecondOrderExpansion expansion(design, static_cast<double>(g.n_loci), variant);
  const double root_n = std::sqrt(static_cast<double>(g.n_loci));
  const auto n = static_cast<Eigen::Index>(w.size());

  Vector a(n);
  for (Eigen::Index i = 0; i < n; ++i) a[i] = root_n * (g.g(i, i) - 1.0);

  QuarticObjective q;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double wj = w[static_cast<std::size_t>(j)];
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const SigmaPair sp{a[i], a[j], root_n * g.g(i, j)};
      const SecondOrderCoefficients e = expansion.coefficients(sp);
      const double x = w[static_cast<std::size_t>(i)] * wj;
      // (x - alpha eta - beta eta^2)^2 expanded in powers of eta.
      q.coef[0] += x * x;
      q.coef[1] -= 2.0 * x * e.linear;
      q.coef[2] += e.linear * e.linear - 2.0 * x * e.quadratic;
      q.coef[3] += 2.0 * e.linear * e.quadratic;
      q.coef[4] += e.quadratic * e.quadratic;
    }
  }
  for (auto& c : q.coef) c *= 2.0;
  return q;
}

EstimateReport estimate_second_order(std::span<const double> w, const GrmView& g,
                                     const StudyDesign& design, SecondOrderVariant variant,
                                     const NewtonOptions& options) {
  const auto start = Clock::now();
  const QuarticObjective q = accumulate_second_order_objective(w, g, design, variant);

  double eta = 0.5;
  try {
    eta = first_order_from_sums(first_order_pair_sums(w, g), constant_c(design)).eta_hat;
  } catch (const DegenerateDesign&) {
  }

  EstimateReport r;
  r.method = EstimatorKind::SecondOrder;
  r.converged = false;
  bool fallback = false;
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    const double d1 = q.derivative(eta);
    const double d2 = q.second_derivative(eta);
    if (std::abs(d1) <= options.tolerance * (1.0 + std::abs(d2))) {
      r.converged = true;
      break;
    }
    if (!(d2 > 0.0)) {
      fallback = true;
      break;
    }
    eta -= d1 / d2;
    ++r.iterations;
    if (!(eta >= options.guard_lower && eta <= options.guard_upper)) {
      fallback = true;
      break;
    }
  }
  // A stationary point with negative curvature is a maximum, not an estimate.
  if (r.converged && q.second_derivative(eta) < 0.0) fallback = true;

  if (fallback) {
    eta = golden_section_min(q, 0.0, 1.0, options.tolerance, r.iterations);
    r.converged = true;
    r.used_fallback = true;
  }
  r.eta_hat = std::clamp(eta, 0.0, 1.0);
  r.objective_value = q.value(r.eta_hat);
  r.wall_time = Clock::now() - start;
  return r;
}

}  // namespace herit
