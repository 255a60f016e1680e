// Distributional tests and the limit-theorem experiments built on the sampling layer.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "masslab/sampling.hpp"

namespace masslab {

struct MomentSummary {
  std::size_t count = 0;
  double mean = 0.0;
  /// Unbiased (n - 1) estimator.
  double variance = 0.0;
  /// g1 = m3 / m2^{3/2}; empty when the sample is constant.
  std::optional<double> skewness;
  /// g2 = m4 / m2^2 - 3; empty when the sample is constant.
  std::optional<double> excess_kurtosis;
};

/// Two-pass moments with compensated sums. Throws std::invalid_argument for fewer than 2 samples.
MomentSummary moment_summary(std::span<const double> samples);

/// Standard normal distribution function.
double normal_cdf(double t);

struct KSResult {
  double statistic = 0.0;
  std::size_t count = 0;
  double threshold = 0.0;
  bool pass = false;
};

/// One-sample Kolmogorov-Smirnov distance to N(0, 1); threshold = coefficient / sqrt(N)
/// (1.63 is the asymptotic 1% level). Needs at least 50 samples.
KSResult ks_statistic(std::span<const double> samples, double coefficient = 1.63);

/// sup_t |F_a(t) - F_b(t)| between two empirical distributions.
double two_sample_ks(std::span<const double> a, std::span<const double> b);

struct CltResult {
  ExactMoments exact;
  MomentSummary summary;
  KSResult ks;
  /// (M - E M) / sqrt(Var M) per sample.
  std::vector<double> normalized;
  /// beta_p (F - E F) / sqrt(Var F) = (F - E F) / sqrt(Var M) per sample.
  std::vector<double> normalized_main;
};

/// Samples the trace-normalized mass statistic. The normalizing mean and variance come
/// from exact_moments_via_trace. Throws std::invalid_argument when Var M = 0.
CltResult clt_experiment(const KernelEvaluator& evaluator, const StatisticMatrix& matrix, std::size_t num_samples,
                         std::uint64_t seed);
CltResult clt_experiment(const MetricSequenceSpec& spec, int p, const TestFunction& phi, std::size_t num_samples,
                         std::uint64_t seed);

struct VarianceRatio {
  double main_over_mass = 0.0;       // Var F / Var M
  double remainder_over_mass = 0.0;  // Var R / Var M
  double beta = 0.0;                 // sqrt(Var F / Var M)
};

VarianceRatio variance_ratio(const StatisticMatrix& matrix);

struct TSConditionReport {
  int p = 0;
  int degree = 0;
  /// Condition (ii): max over the x-grid of int N_p(x, .) dV.
  double sup_integral = 0.0;
  ProjectivePoint sup_point = ProjectivePoint::from_affine(0.0);
  /// Condition (i) at alpha = 1, with the numerator restricted to d(x, y) <= ball_radius.
  double ratio = 0.0;
  double numerator = 0.0;
  /// (1/2) int phi^2 dV.
  double predicted_limit = 0.0;
  std::size_t grid_size = 0;
  /// Largest nearest-neighbour distance in the x-grid.
  double grid_spacing = 0.0;
  double ball_radius = 0.0;
  double b = 0.0;
  std::string warning;
};

/// Nearly uniform grid of count points (Fibonacci lattice on the sphere).
std::vector<ProjectivePoint> fibonacci_grid(std::size_t count);

TSConditionReport ts_conditions(const KernelEvaluator& evaluator, const TestFunction& phi, double b,
                                std::size_t grid_size = 32);

struct EquidistributionRow {
  int p = 0;
  int degree = 0;
  std::size_t dimension = 0;
  double mean = 0.0;      // exact E M
  double variance = 0.0;  // exact Var M
  double bias = 0.0;      // E M - int phi
  /// Var / eps^2: bounds P(|M - int phi| > 2 eps) once |bias| <= eps.
  double chebyshev_bound = 0.0;
  /// Var / (2 eps)^2.
  double chebyshev_bound_2eps = 0.0;
  double exceed = 0.0;  // empirical P(|M - int phi| > 2 eps)
  double exceed_se = 0.0;
  /// Empirical P(sup_{p' >= p} |M_{p'} - int phi| > 2 eps) over the configured range.
  double sup_exceed = 0.0;
  double sup_exceed_se = 0.0;
  /// Union bound sum_{p' >= p} Var_{p'} / eps^2 over the configured range.
  double sup_bound = 0.0;
};

struct EquidistributionReport {
  std::vector<EquidistributionRow> rows;
  bool law_summable = false;
  /// sum over the range of Var_p / eps^2.
  double bound_sum = 0.0;
};

/// Throws std::invalid_argument for degree laws with divergent sum 1/k_p.
EquidistributionReport equidistribution_experiment(const MetricSequenceSpec& spec, int p_first, int p_last,
                                                   const TestFunction& phi, double eps, std::size_t num_sequences,
                                                   std::uint64_t seed);

}  // namespace masslab
