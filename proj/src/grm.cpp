#include "herit/grm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace herit {

GrmView grm_compute(const Matrix& z) {
  const Eigen::Index n = z.rows();
  if (n < 2) throw std::invalid_argument("grm_compute: need at least two individuals");
  if (z.cols() < 1) throw std::invalid_argument("grm_compute: need at least one locus");
  GrmView out;
  out.n_loci = static_cast<std::size_t>(z.cols());
  out.g = Matrix::Zero(n, n);
  // Blocked symmetric rank-k update of the lower triangle, then mirrored.
  out.g.selfadjointView<Eigen::Lower>().rankUpdate(z, 1.0 / static_cast<double>(z.cols()));
  out.g.triangularView<Eigen::StrictlyUpper>() = out.g.transpose();
  return out;
}

SigmaPair sigma_pair(const GrmView& g, std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("sigma_pair: i and j must differ");
  if (i >= g.size() || j >= g.size()) throw std::out_of_range("sigma_pair: index out of range");
  const double root_n = std::sqrt(static_cast<double>(g.n_loci));
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  return {root_n * (g.g(ii, ii) - 1.0), root_n * (g.g(jj, jj) - 1.0), root_n * g.g(ii, jj)};
}

EventCheck event_en_check(const GrmView& g, double gamma) {
  if (!(gamma > 0.0 && gamma < 0.1)) {
    throw std::invalid_argument("event_en_check: gamma must lie in (0, 0.1)");
  }
  EventCheck out;
  out.eps_n = std::pow(static_cast<double>(g.n_loci), -(0.5 - gamma));
  const Eigen::Index n = g.g.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.sup_diag_dev = std::max(out.sup_diag_dev, std::abs(g.g(i, i) - 1.0));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) out.sup_offdiag = std::max(out.sup_offdiag, std::abs(g.g(i, j)));
    }
  }
  out.holds = out.sup_diag_dev <= out.eps_n && out.sup_offdiag <= out.eps_n;
  return out;
}

double offdiag_square_mean(const GrmView& g) {
  const Eigen::Index n = g.g.rows();
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) total += g.g(i, j) * g.g(i, j);
  }
  return 2.0 * total / static_cast<double>(n);
}

namespace {

// Streaming mean / variance (Welford).
class Accumulator {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  MomentEstimate estimate() const {
    MomentEstimate e;
    e.mean = mean_;
    e.samples = count_;
    e.std_error = count_ > 1 ? std::sqrt(m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_)) : 0.0;
    return e;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct HigherMoment {
  const char* name;
  std::array<int, 4> exponents;
};

constexpr std::array<HigherMoment, 9> kHigher = {{
    {"E[Z1^3 Z2]", {3, 1, 0, 0}},
    {"E[Z1^2 Z2 Z3]", {2, 1, 1, 0}},
    {"E[Z1 Z2 Z3 Z4]", {1, 1, 1, 1}},
    {"E[Z1^5 Z2]", {5, 1, 0, 0}},
    {"E[Z1^3 Z2^3]", {3, 3, 0, 0}},
    {"E[Z1^4 Z2^2]", {4, 2, 0, 0}},
    {"E[Z1^4 Z2 Z3]", {4, 1, 1, 0}},
    {"E[Z1^3 Z2^2 Z3]", {3, 2, 1, 0}},
    {"E[Z1^3 Z2 Z3 Z4]", {3, 1, 1, 1}},
}};

}  // namespace

ZPropertyReport z_property_suite(const GenotypeDistribution& dist, std::size_t n, std::size_t reps,
                                 RandomSource& rs) {
  if (n < 5) throw std::invalid_argument("z_property_suite: need n >= 5");
  ZPropertyReport report;
  report.n = n;
  report.loci = dist.n_loci();
  report.reps = reps;

  Accumulator cross, p2, p4, p6, sq_sq;
  std::array<Accumulator, kHigher.size()> higher;

  std::vector<double> col(n);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const GenotypeSource source(dist, rs.next_u64());
    const GenotypeMatrix a = source.materialize(n);
    for (Eigen::Index k = 0; k < a.values.cols(); ++k) {
      for (std::size_t i = 0; i < n; ++i) col[i] = a.values(static_cast<Eigen::Index>(i), k);
      const ColumnStats stats = column_stats(col);
      // Constant column: not standardisable, left out.
      if (!(stats.sd > 0.0)) {
        ++report.skipped_columns;
        continue;
      }
      double sum = 0.0, sumsq = 0.0;
      for (auto& v : col) {
        v = (v - stats.mean) / stats.sd;
        sum += v;
        sumsq += v * v;
      }
      report.max_abs_col_sum = std::max(report.max_abs_col_sum, std::abs(sum));
      report.max_abs_col_sumsq_dev = std::max(report.max_abs_col_sumsq_dev, std::abs(sumsq - static_cast<double>(n)));
      const double z1 = col[0], z2 = col[1];
      cross.add(z1 * z2);
      p2.add(z1 * z1);
      p4.add(std::pow(z1, 4));
      p6.add(std::pow(z1, 6));
      sq_sq.add(z1 * z1 * z2 * z2);
      for (std::size_t m = 0; m < kHigher.size(); ++m) {
        double prod = 1.0;
        for (std::size_t r = 0; r < 4; ++r) prod *= std::pow(col[r], kHigher[m].exponents[r]);
        higher[m].add(prod);
      }
    }
  }
  report.cross = cross.estimate();
  report.power2 = p2.estimate();
  report.power4 = p4.estimate();
  report.power6 = p6.estimate();
  report.square_square = sq_sq.estimate();
  for (std::size_t m = 0; m < kHigher.size(); ++m) {
    report.higher.push_back({kHigher[m].name, higher[m].estimate()});
  }
  return report;
}

}  // namespace herit
