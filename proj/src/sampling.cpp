#include "masslab/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "masslab/parallel.hpp"
#include "masslab/rng.hpp"

namespace masslab {

namespace {

int& worker_setting() {
  static int workers = 1;
  return workers;
}

double quadratic_form(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& q) { return a.dot(q * a).real(); }

}  // namespace

int worker_count() { return worker_setting(); }
void set_worker_count(int n) { worker_setting() = n < 1 ? 1 : n; }

RandomSection sample_section(const OrthonormalBasis& basis, std::uint64_t seed, std::uint64_t sample_index) {
  RandomSection out;
  out.p = basis.p;
  out.seed = seed;
  out.sample_index = sample_index;
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  out.coefficients.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    out.coefficients(j) = complex_gaussian(seed, sample_index, static_cast<std::uint32_t>(j));
  }
  return out;
}

StatisticMatrix build_statistic_matrix(const KernelEvaluator& evaluator, const TestFunction& phi) {
  StatisticMatrix m;
  m.p = evaluator.p();
  m.phi_id = phi.id;
  m.area = evaluator.area();
  m.q = evaluator.statistic_matrix(phi);
  m.q_normalized = evaluator.normalized_statistic_matrix(phi);
  return m;
}

double mass_statistic(const RandomSection& section, const StatisticMatrix& matrix) {
  return quadratic_form(section.coefficients, matrix.q) / matrix.area;
}

double mass_statistic_direct(const RandomSection& section, const KernelEvaluator& evaluator, const TestFunction& phi) {
  const std::vector<Complex> values = evaluator.section_grid(section.coefficients);
  std::vector<double> density = evaluator.sample_on_nodes(phi);
  for (std::size_t i = 0; i < density.size(); ++i) density[i] *= std::norm(values[i]);
  return evaluator.integrate_nodes(density) / evaluator.area();
}

Decomposition decompose_statistic(const RandomSection& section, const StatisticMatrix& matrix) {
  Decomposition out;
  out.mass = mass_statistic(section, matrix);
  out.main = quadratic_form(section.coefficients, matrix.q_normalized);
  out.remainder = out.mass - out.main;
  return out;
}

ExactMoments exact_moments_via_trace(const Eigen::MatrixXcd& q, double scale) {
  if (q.rows() != q.cols()) throw std::invalid_argument("exact_moments_via_trace: matrix is not square");
  const double size = q.cwiseAbs().maxCoeff();
  if ((q - q.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, size)) {
    throw std::invalid_argument("exact_moments_via_trace: matrix is not Hermitian");
  }
  // tr(Q^2) = sum |Q_ij|^2 for Hermitian Q.
  return {q.trace().real() / scale, q.cwiseAbs2().sum() / (scale * scale)};
}

ExactMoments mass_moments(const StatisticMatrix& matrix) { return exact_moments_via_trace(matrix.q, matrix.area); }

ExactMoments main_moments(const StatisticMatrix& matrix) { return exact_moments_via_trace(matrix.q_normalized); }

ExactMoments remainder_moments(const StatisticMatrix& matrix) {
  const Eigen::MatrixXcd r = matrix.q / matrix.area - matrix.q_normalized;
  return exact_moments_via_trace(r);
}

MonteCarloEstimate pair_correlation_estimate(const KernelEvaluator& evaluator, const ProjectivePoint& x,
                                             const ProjectivePoint& y, std::size_t num_samples, std::uint64_t seed) {
  if (num_samples < 1000) throw std::invalid_argument("pair_correlation_estimate: needs at least 1000 samples");
  const Eigen::VectorXcd sx = evaluator.section_values(x);
  const Eigen::VectorXcd sy = evaluator.section_values(y);
  const double bx = sx.squaredNorm();
  const double by = sy.squaredNorm();
  std::vector<double> products(num_samples);
  const OrthonormalBasis& basis = evaluator.basis();
  parallel_for(num_samples, [&](std::size_t i) {
    const RandomSection s = sample_section(basis, seed, i);
    const double gx = std::norm((sx.array() * s.coefficients.array()).sum()) / bx;
    const double gy = std::norm((sy.array() * s.coefficients.array()).sum()) / by;
    products[i] = gx * gy;
  });
  double mean = 0.0;
  for (double v : products) mean += v;
  mean /= static_cast<double>(num_samples);
  double ss = 0.0;
  for (double v : products) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(num_samples);
  return {mean, std::sqrt(ss / (n - 1.0) / n), num_samples};
}

}  // namespace masslab
