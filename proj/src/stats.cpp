#include "masslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "masslab/parallel.hpp"
#include "masslab/rng.hpp"

namespace masslab {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double integral_of(const TestFunction& phi, const KernelEvaluator& evaluator) {
  if (phi.integral) return *phi.integral;
  return evaluator.integrate_nodes(evaluator.sample_on_nodes(phi));
}

}  // namespace

MomentSummary moment_summary(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("moment_summary: needs at least 2 samples");
  const double n = static_cast<double>(samples.size());
  CompensatedSum total;
  for (double x : samples) total.add(x);
  const double mean = total.value() / n;
  CompensatedSum m2, m3, m4;
  for (double x : samples) {
    const double d = x - mean;
    const double d2 = d * d;
    m2.add(d2);
    m3.add(d2 * d);
    m4.add(d2 * d2);
  }
  MomentSummary out;
  out.count = samples.size();
  out.mean = mean;
  out.variance = m2.value() / (n - 1.0);
  const double c2 = m2.value() / n;
  if (c2 > 0.0) {
    out.skewness = (m3.value() / n) / std::pow(c2, 1.5);
    out.excess_kurtosis = (m4.value() / n) / (c2 * c2) - 3.0;
  }
  return out;
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

KSResult ks_statistic(std::span<const double> samples, double coefficient) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  if (samples.size() < 50) throw std::invalid_argument("ks_statistic: needs at least 50 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i]);
    const double di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - cdf, cdf - di / n});
  }
  KSResult out;
  out.statistic = d;
  out.count = sorted.size();
  out.threshold = coefficient / std::sqrt(n);
  out.pass = d <= out.threshold;
  return out;
}

double two_sample_ks(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two_sample_ks: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

CltResult clt_experiment(const KernelEvaluator& evaluator, const StatisticMatrix& matrix, std::size_t num_samples,
                         std::uint64_t seed) {
  CltResult out;
  out.exact = mass_moments(matrix);
  if (!(out.exact.variance > 0.0)) {
    throw std::invalid_argument("clt_experiment: Var M = 0 (test function " + matrix.phi_id + " vanishes)");
  }
  const ExactMoments main = main_moments(matrix);
  const double sd = std::sqrt(out.exact.variance);
  out.normalized.resize(num_samples);
  out.normalized_main.resize(num_samples);
  parallel_for(num_samples, [&](std::size_t i) {
    const RandomSection s = sample_section(evaluator.basis(), seed, i);
    const Decomposition parts = decompose_statistic(s, matrix);
    out.normalized[i] = (parts.mass - out.exact.mean) / sd;
    out.normalized_main[i] = (parts.main - main.mean) / sd;
  });
  out.summary = moment_summary(out.normalized);
  out.ks = ks_statistic(out.normalized);
  return out;
}

CltResult clt_experiment(const MetricSequenceSpec& spec, int p, const TestFunction& phi, std::size_t num_samples,
                         std::uint64_t seed) {
  const KernelEvaluator evaluator = KernelEvaluator::create(spec, p);
  const StatisticMatrix matrix = build_statistic_matrix(evaluator, phi);
  return clt_experiment(evaluator, matrix, num_samples, seed);
}

VarianceRatio variance_ratio(const StatisticMatrix& matrix) {
  const double mass = mass_moments(matrix).variance;
  if (!(mass > 0.0)) throw std::invalid_argument("variance_ratio: Var M = 0");
  VarianceRatio out;
  out.main_over_mass = main_moments(matrix).variance / mass;
  out.remainder_over_mass = remainder_moments(matrix).variance / mass;
  out.beta = std::sqrt(out.main_over_mass);
  return out;
}

std::vector<ProjectivePoint> fibonacci_grid(std::size_t count) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<ProjectivePoint> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
    grid.push_back(ProjectivePoint::from_polar(0.5 * (1.0 + t), golden * static_cast<double>(i)));
  }
  return grid;
}

TSConditionReport ts_conditions(const KernelEvaluator& evaluator, const TestFunction& phi, double b,
                                std::size_t grid_size) {
  TSConditionReport report;
  report.p = evaluator.p();
  report.degree = evaluator.degree();
  report.b = b;
  report.grid_size = grid_size;
  const double area = evaluator.area();

  const std::vector<ProjectivePoint> grid = fibonacci_grid(grid_size);
  report.sup_integral = -1.0;
  for (const auto& x : grid) {
    const double value = evaluator.integrate_nodes(evaluator.normalized_row(x));
    if (value > report.sup_integral) {
      report.sup_integral = value;
      report.sup_point = x;
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (i != j) nearest = std::min(nearest, geodesic_distance(grid[i], grid[j]));
    }
    if (grid.size() > 1) report.grid_spacing = std::max(report.grid_spacing, nearest);
  }
  const double width = 1.0 / std::sqrt(area);
  if (report.grid_spacing > width) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "x-grid spacing %.4g exceeds the kernel width 1/sqrt(A_p) = %.4g",
                  report.grid_spacing, width);
    report.warning = buf;
  }

  // Numerator of condition (i): int phi(x) int_{d(x,y) <= r} N^2(x, y) phi(y) dV(y) dV(x).
  report.ball_radius = b * std::log(area) / std::sqrt(area);
  const double angle = std::sqrt(kPi) * report.ball_radius;
  const double min_overlap = angle < kPi / 2 ? std::cos(angle) : 0.0;
  const QuadratureRule& rule = evaluator.quadrature();
  const std::vector<double> phi_nodes = evaluator.sample_on_nodes(phi);
  std::vector<ProjectivePoint> nodes;
  nodes.reserve(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) nodes.push_back(rule.node(i));

  const QuadratureRule outer = build_quadrature(6);
  double numerator = 0.0;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const ProjectivePoint x = outer.node(i);
    const double phix = phi(x);
    if (phix == 0.0) continue;
    std::vector<double> row = evaluator.normalized_row(x);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const bool inside = std::abs(hermitian_product(x, nodes[j])) >= min_overlap;
      row[j] = inside ? row[j] * row[j] * phi_nodes[j] : 0.0;
    }
    numerator += outer.weight(i) * phix * evaluator.integrate_nodes(row);
  }
  report.numerator = numerator;
  report.ratio = numerator / report.sup_integral;
  const double square = phi.integral_of_square
                            ? *phi.integral_of_square
                            : evaluator.integrate_nodes([&] {
                                auto v = phi_nodes;
                                for (double& e : v) e *= e;
                                return v;
                              }());
  report.predicted_limit = 0.5 * square;
  return report;
}

EquidistributionReport equidistribution_experiment(const MetricSequenceSpec& spec, int p_first, int p_last,
                                                   const TestFunction& phi, double eps, std::size_t num_sequences,
                                                   std::uint64_t seed) {
  if (!spec.summable_law()) {
    throw std::invalid_argument("equidistribution_experiment: degree law " + to_string(spec.degree_law) +
                                " has divergent sum of 1/k_p");
  }
  if (p_first < 1 || p_last < p_first) throw std::invalid_argument("equidistribution_experiment: bad p range");
  if (!(eps > 0.0)) throw std::invalid_argument("equidistribution_experiment: eps must be positive");
  if (num_sequences == 0) throw std::invalid_argument("equidistribution_experiment: no sequences requested");

  EquidistributionReport report;
  report.law_summable = true;
  const auto count = static_cast<std::size_t>(p_last - p_first + 1);
  std::vector<std::vector<char>> exceeded(count, std::vector<char>(num_sequences, 0));

  for (std::size_t idx = 0; idx < count; ++idx) {
    const int p = p_first + static_cast<int>(idx);
    const KernelEvaluator evaluator = KernelEvaluator::create(spec, p);
    StatisticMatrix matrix;
    matrix.p = p;
    matrix.phi_id = phi.id;
    matrix.area = evaluator.area();
    matrix.q = evaluator.statistic_matrix(phi);
    const ExactMoments moments = mass_moments(matrix);
    const double target = integral_of(phi, evaluator);

    EquidistributionRow row;
    row.p = p;
    row.degree = evaluator.degree();
    row.dimension = evaluator.dimension();
    row.mean = moments.mean;
    row.variance = moments.variance;
    row.bias = moments.mean - target;
    row.chebyshev_bound = moments.variance / (eps * eps);
    row.chebyshev_bound_2eps = moments.variance / (4.0 * eps * eps);

    const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(p));
    parallel_for(num_sequences, [&](std::size_t r) {
      const RandomSection s = sample_section(evaluator.basis(), stream, r);
      exceeded[idx][r] = std::abs(mass_statistic(s, matrix) - target) > 2.0 * eps ? 1 : 0;
    });
    std::size_t hits = 0;
    for (char e : exceeded[idx]) hits += static_cast<std::size_t>(e);
    const double n = static_cast<double>(num_sequences);
    row.exceed = static_cast<double>(hits) / n;
    row.exceed_se = std::sqrt(row.exceed * (1.0 - row.exceed) / n);
    report.bound_sum += row.chebyshev_bound;
    report.rows.push_back(row);
  }

  // Tail quantities: any exceedance at p' >= p.
  std::vector<char> any(num_sequences, 0);
  double tail_bound = 0.0;
  for (std::size_t idx = count; idx-- > 0;) {
    for (std::size_t r = 0; r < num_sequences; ++r) any[r] = static_cast<char>(any[r] | exceeded[idx][r]);
    std::size_t hits = 0;
    for (char e : any) hits += static_cast<std::size_t>(e);
    const double n = static_cast<double>(num_sequences);
    auto& row = report.rows[idx];
    tail_bound += row.chebyshev_bound;
    row.sup_exceed = static_cast<double>(hits) / n;
    row.sup_exceed_se = std::sqrt(row.sup_exceed * (1.0 - row.sup_exceed) / n);
    row.sup_bound = tail_bound;
  }
  return report;
}

}  // namespace masslab
