// Gaussian random sections s_p = sum_j a_j S_j with i.i.d. standard complex Gaussian
// coefficients, and the mass linear statistic
//
//     M_p^phi(s) = (1/A_p) int |s|^2_{h_p} phi dV = a^* Q a / A_p,
//
// split as M = F + R with F = int |s|^2 phi / B_p dV = a^* Qn a.
#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "masslab/bergman.hpp"

namespace masslab {

struct RandomSection {
  int p = 0;
  Eigen::VectorXcd coefficients;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
};

/// Coefficient j is drawn from the Philox counter (sample_index, j) under seed.
RandomSection sample_section(const OrthonormalBasis& basis, std::uint64_t seed, std::uint64_t sample_index);

struct StatisticMatrix {
  int p = 0;
  std::string phi_id;
  double area = 1.0;
  /// Q_ij = int phi conj(S_i) S_j dV.
  Eigen::MatrixXcd q;
  /// Same with density phi / B_p.
  Eigen::MatrixXcd q_normalized;
};

StatisticMatrix build_statistic_matrix(const KernelEvaluator& evaluator, const TestFunction& phi);

/// a^* Q a / A_p.
double mass_statistic(const RandomSection& section, const StatisticMatrix& matrix);
/// (1/A_p) sum over quadrature nodes of w |s|^2 phi; independent of the Q path.
double mass_statistic_direct(const RandomSection& section, const KernelEvaluator& evaluator, const TestFunction& phi);

struct Decomposition {
  double mass = 0.0;
  double main = 0.0;       // F
  double remainder = 0.0;  // R = M - F
};

Decomposition decompose_statistic(const RandomSection& section, const StatisticMatrix& matrix);

struct ExactMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// For a^* Q a / scale with standard complex Gaussian a: mean tr(Q)/scale and
/// variance tr(Q^2)/scale^2. Throws std::invalid_argument unless Q is Hermitian.
ExactMoments exact_moments_via_trace(const Eigen::MatrixXcd& q, double scale = 1.0);

/// Moments of M, F and R from the two matrices.
ExactMoments mass_moments(const StatisticMatrix& matrix);
ExactMoments main_moments(const StatisticMatrix& matrix);
ExactMoments remainder_moments(const StatisticMatrix& matrix);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo mean of (|s(x)|^2 / B(x)) (|s(y)|^2 / B(y)); expected 1 + N_p(x, y)^2.
/// Throws std::invalid_argument below 1000 samples.
MonteCarloEstimate pair_correlation_estimate(const KernelEvaluator& evaluator, const ProjectivePoint& x,
                                             const ProjectivePoint& y, std::size_t num_samples, std::uint64_t seed);

}  // namespace masslab
