// Orthonormal bases of H^0(CP^1, O(k)), the Bergman kernel K_p, its diagonal B_p and
// the normalized kernel N_p = |K_p(x, y)| / sqrt(B_p(x) B_p(y)).
//
// Sections are represented in the reference family
//
//     sigma_i = sqrt((k+1) binom(k, i)) z^i e^{(x)k},   i = 0..k,
//
// which is orthonormal for the unperturbed metric. Pointwise values are taken
// against the h_p-unit frame, written in homogeneous coordinates as
// sigma_i(x) = c_i z1^i z0^{k-i} exp(-eps_p eta(x)), so no chart is singled out.
// Magnitudes are assembled in log space; c_i overflows a double near k = 1024.
#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "masslab/bundles.hpp"
#include "masslab/geometry.hpp"
#include "masslab/ring_transform.hpp"

namespace masslab {

struct OrthonormalBasis {
  int p = 0;
  int degree = 0;
  double epsilon = 0.0;
  /// Column j holds S_j in the reference family: S_j = sum_i C(i, j) sigma_i.
  Eigen::MatrixXcd coefficients;
  /// Set when C is exactly the identity (unperturbed metric).
  bool identity = false;
  /// max |C^* G C - I| with G the reference Gram matrix.
  double gram_residual = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(degree) + 1; }
};

/// 2 k_p, plus 8 when the metric is perturbed.
int required_quadrature_degree(const MetricSequenceSpec& spec, int p);

/// Thrown when the Gram factorization meets a non-positive pivot.
class GramFactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Orthonormalizes the reference family under <s1, s2>_p = int <s1, s2>_{h_p} dV by a
/// Cholesky factorization G = L L^* (C = L^{-*}). Unperturbed metrics return C = I
/// with the residual of the quadrature Gram matrix against I.
OrthonormalBasis build_onb(const MetricSequenceSpec& spec, int p, const QuadratureRule& rule);

class KernelEvaluator {
 public:
  KernelEvaluator(MetricSequenceSpec spec, int p, OrthonormalBasis basis, QuadratureRule rule);

  /// Builds the quadrature at the required degree and the orthonormal basis.
  static KernelEvaluator create(const MetricSequenceSpec& spec, int p);

  const MetricSequenceSpec& spec() const { return spec_; }
  const OrthonormalBasis& basis() const { return basis_; }
  const QuadratureRule& quadrature() const { return rule_; }
  int p() const { return p_; }
  int degree() const { return basis_.degree; }
  double area() const { return spec_.area(p_); }
  std::size_t dimension() const { return basis_.dimension(); }

  /// sigma_i(x), i = 0..k, against the h_p-unit frame.
  Eigen::VectorXcd reference_values(const ProjectivePoint& x) const;
  /// S_j(x), j = 0..k.
  Eigen::VectorXcd section_values(const ProjectivePoint& x) const;
  /// s(x) for s = sum_j a_j S_j.
  Complex evaluate(const Eigen::VectorXcd& coefficients, const ProjectivePoint& x) const;

  double bergman(const ProjectivePoint& x) const;
  /// K_p(x, y) = sum_j S_j(x) conj(S_j(y)) in unit frames; only |K| is frame independent.
  Complex kernel(const ProjectivePoint& x, const ProjectivePoint& y) const;
  double normalized(const ProjectivePoint& x, const ProjectivePoint& y) const;

  /// Gram matrix of the reference family under the quadrature.
  Eigen::MatrixXcd reference_gram() const;
  /// Q_ij = int phi conj(S_i) S_j dV in the orthonormal basis.
  Eigen::MatrixXcd statistic_matrix(const TestFunction& phi) const;
  /// Same with density phi / B_p.
  Eigen::MatrixXcd normalized_statistic_matrix(const TestFunction& phi) const;

  /// B_p at every quadrature node (computed on first use).
  const std::vector<double>& bergman_grid() const;
  /// K_p(x, y) for every node y.
  std::vector<Complex> kernel_row(const ProjectivePoint& x) const;
  /// N_p(x, y) for every node y.
  std::vector<double> normalized_row(const ProjectivePoint& x) const;
  /// s(y) for every node y.
  std::vector<Complex> section_grid(const Eigen::VectorXcd& coefficients) const;
  /// phi at every node.
  std::vector<double> sample_on_nodes(const TestFunction& phi) const;
  /// sum_nodes w f.
  double integrate_nodes(const std::vector<double>& values) const;

 private:
  // Q_ij = sum_r W_r v_ri v_rj ghat_r(j - i) for a density g sampled on the nodes.
  Eigen::MatrixXcd reference_matrix(const std::vector<double>& density) const;
  Eigen::MatrixXcd to_basis(const Eigen::MatrixXcd& reference) const;
  // B_p / exp(-2 eps eta) on the nodes.
  const std::vector<double>& bergman_core_grid() const;

  MetricSequenceSpec spec_;
  int p_;
  OrthonormalBasis basis_;
  QuadratureRule rule_;
  std::vector<double> log_norm_;     // log c_i
  std::vector<double> radial_;       // ring-major v_i(s_r) = c_i (1 - s_r)^{i/2} s_r^{(k-i)/2}
  std::vector<double> damping_;      // exp(-2 eps eta) on the nodes; empty when eps = 0
  std::shared_ptr<RingTransform> fft_;

  // Grids computed on first use; shared by copies of the evaluator.
  struct LazyGrids {
    std::once_flag core_once;
    std::vector<double> core;
    std::once_flag bergman_once;
    std::vector<double> bergman;
  };
  std::shared_ptr<LazyGrids> lazy_ = std::make_shared<LazyGrids>();
};

/// max over a spread of nodes x of |s(x) - int K(x, y) s(y) dV(y)|.
double reproducing_check(const KernelEvaluator& evaluator, const Eigen::VectorXcd& coefficients);

/// Coefficients of K_p(., x) / sqrt(B_p(x)): the unit section peaking at x.
Eigen::VectorXcd peak_section(const KernelEvaluator& evaluator, const ProjectivePoint& x);

struct NearDiagonalSample {
  double measured = 0.0;
  double target = 0.0;
  double deviation = 0.0;
};

/// N_p(x + u/sqrt(A_p), x + conj(v)/sqrt(A_p)) in the normal chart at x against
/// exp(-(lambda/A_p) |u - conj(v)|^2).
NearDiagonalSample near_diagonal_profile(const KernelEvaluator& evaluator, const ProjectivePoint& x, Complex u,
                                         Complex v, double lambda_over_area);
/// Uses lambda from the Taylor decomposition of the weight at x.
NearDiagonalSample near_diagonal_profile(const KernelEvaluator& evaluator, const ProjectivePoint& x, Complex u,
                                         Complex v);

using PointPair = std::pair<ProjectivePoint, ProjectivePoint>;

/// Uniform (under dV x dV) pairs with d(x, y) >= cutoff; empty when the cutoff is
/// not below the diameter.
std::vector<PointPair> sample_far_pairs(std::size_t count, double cutoff, std::uint64_t seed);

/// Envelope |K_p|^2 / A_p^2 <= C1 exp(-C2 sqrt(A_p) d). C2 is the least-squares slope of
/// log(|K|^2 / A^2) against sqrt(A) d on the even-indexed pairs and C1 lifts the fitted
/// line over those pairs; the violation fraction (by more than 5%) is measured on the
/// odd-indexed pairs.
struct DecayFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double violation_fraction = 1.0;
  std::size_t pair_count = 0;
  bool feasible = false;
};

DecayFit offdiagonal_decay_fit(const KernelEvaluator& evaluator, const std::vector<PointPair>& pairs);

}  // namespace masslab
