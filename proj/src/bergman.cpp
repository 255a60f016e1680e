#include "masslab/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "masslab/parallel.hpp"
#include "masslab/rng.hpp"

namespace masslab {

int required_quadrature_degree(const MetricSequenceSpec& spec, int p) {
  return 2 * spec.degree(p) + (spec.unperturbed(p) ? 0 : 8);
}

OrthonormalBasis build_onb(const MetricSequenceSpec& spec, int p, const QuadratureRule& rule) {
  const int needed = required_quadrature_degree(spec, p);
  if (rule.max_exact_degree() < needed) {
    throw std::invalid_argument("build_onb: quadrature exact to degree " + std::to_string(rule.max_exact_degree()) +
                                " but k_p = " + std::to_string(spec.degree(p)) + " needs " + std::to_string(needed));
  }
  OrthonormalBasis basis;
  basis.p = p;
  basis.degree = spec.degree(p);
  basis.epsilon = spec.epsilon(p);
  basis.identity = true;

  const KernelEvaluator reference(spec, p, basis, rule);
  const Eigen::MatrixXcd gram = reference.reference_gram();
  const auto d = static_cast<Eigen::Index>(basis.dimension());
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(d, d);

  if (spec.unperturbed(p)) {
    basis.coefficients = eye;
    basis.gram_residual = (gram - eye).cwiseAbs().maxCoeff();
    return basis;
  }

  Eigen::LLT<Eigen::MatrixXcd, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw GramFactorizationError("build_onb: non-positive pivot in the Gram factorization at k_p = " +
                                 std::to_string(basis.degree) +
                                 " (quadrature under-resolved or metric not positive)");
  }
  // C = L^{-*}, so that C^* G C = L^{-1} L L^* L^{-*} = I.
  basis.coefficients = llt.matrixU().solve(eye);
  basis.identity = false;
  basis.gram_residual = (basis.coefficients.adjoint() * gram * basis.coefficients - eye).cwiseAbs().maxCoeff();
  return basis;
}

KernelEvaluator::KernelEvaluator(MetricSequenceSpec spec, int p, OrthonormalBasis basis, QuadratureRule rule)
    : spec_(std::move(spec)), p_(p), basis_(std::move(basis)), rule_(std::move(rule)) {
  const int k = basis_.degree;
  if (k != spec_.degree(p_)) throw std::invalid_argument("KernelEvaluator: basis degree does not match k_p");
  if (!basis_.identity && basis_.coefficients.rows() != k + 1) {
    throw std::invalid_argument("KernelEvaluator: coefficient matrix has the wrong size");
  }
  const auto d = static_cast<std::size_t>(k) + 1;

  log_norm_.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double di = static_cast<double>(i);
    log_norm_[i] = 0.5 * (std::log(k + 1.0) + std::lgamma(k + 1.0) - std::lgamma(di + 1.0) - std::lgamma(k - di + 1.0));
  }

  const std::size_t rings = rule_.ring_count();
  radial_.resize(rings * d);
  for (std::size_t r = 0; r < rings; ++r) {
    const double s = rule_.ring_s(r);
    const double log_s = std::log(s);
    const double log_t = std::log1p(-s);
    for (std::size_t i = 0; i < d; ++i) {
      const double di = static_cast<double>(i);
      radial_[r * d + i] = std::exp(log_norm_[i] + 0.5 * di * log_t + 0.5 * (k - di) * log_s);
    }
  }

  const double eps = spec_.epsilon(p_);
  if (eps != 0.0) {
    damping_.resize(rule_.size());
    parallel_for(rings, [&](std::size_t r) {
      for (std::size_t l = 0; l < rule_.angular_count(); ++l) {
        const std::size_t idx = r * rule_.angular_count() + l;
        damping_[idx] = std::exp(-2.0 * eps * spec_.eta(rule_.node(idx)));
      }
    });
  }
  fft_ = std::make_shared<RingTransform>(rule_.angular_count());
}

KernelEvaluator KernelEvaluator::create(const MetricSequenceSpec& spec, int p) {
  QuadratureRule rule = build_quadrature(required_quadrature_degree(spec, p));
  OrthonormalBasis basis = build_onb(spec, p, rule);
  return KernelEvaluator(spec, p, std::move(basis), std::move(rule));
}

Eigen::VectorXcd KernelEvaluator::reference_values(const ProjectivePoint& x) const {
  const int k = degree();
  const double lz0 = std::log(std::abs(x.z0()));
  const double lz1 = std::log(std::abs(x.z1()));
  const double a0 = std::arg(x.z0());
  const double a1 = std::arg(x.z1());
  const double eps = spec_.epsilon(p_);
  const double shift = eps != 0.0 ? eps * spec_.eta(x) : 0.0;
  Eigen::VectorXcd out(k + 1);
  for (int i = 0; i <= k; ++i) {
    double lm = log_norm_[static_cast<std::size_t>(i)] - shift;
    if (i > 0) lm += i * lz1;
    if (k - i > 0) lm += (k - i) * lz0;
    out(i) = std::polar(std::exp(lm), i * a1 + (k - i) * a0);
  }
  return out;
}

Eigen::VectorXcd KernelEvaluator::section_values(const ProjectivePoint& x) const {
  Eigen::VectorXcd sigma = reference_values(x);
  if (basis_.identity) return sigma;
  return basis_.coefficients.transpose() * sigma;
}

Complex KernelEvaluator::evaluate(const Eigen::VectorXcd& coefficients, const ProjectivePoint& x) const {
  const Eigen::VectorXcd sigma = reference_values(x);
  if (basis_.identity) return (sigma.array() * coefficients.array()).sum();
  const Eigen::VectorXcd b = basis_.coefficients * coefficients;
  return (sigma.array() * b.array()).sum();
}

double KernelEvaluator::bergman(const ProjectivePoint& x) const { return section_values(x).squaredNorm(); }

Complex KernelEvaluator::kernel(const ProjectivePoint& x, const ProjectivePoint& y) const {
  return section_values(y).dot(section_values(x));
}

double KernelEvaluator::normalized(const ProjectivePoint& x, const ProjectivePoint& y) const {
  const Eigen::VectorXcd sx = section_values(x);
  const Eigen::VectorXcd sy = section_values(y);
  return std::abs(sy.dot(sx)) / std::sqrt(sx.squaredNorm() * sy.squaredNorm());
}

Eigen::MatrixXcd KernelEvaluator::reference_matrix(const std::vector<double>& density) const {
  const std::size_t n = rule_.angular_count();
  const std::size_t rings = rule_.ring_count();
  const auto k = static_cast<std::size_t>(degree());
  const std::size_t d = k + 1;
  const std::size_t band = 2 * k + 1;
  if (density.size() != rule_.size()) throw std::invalid_argument("reference_matrix: density size mismatch");

  // ghat_r(m) = (1/n) sum_l g(r, l) exp(i m alpha_l), stored at m + k.
  std::vector<Complex> ghat(rings * band);
  parallel_for(rings, [&](std::size_t r) {
    std::vector<Complex> in(n), out(n);
    for (std::size_t l = 0; l < n; ++l) in[l] = density[r * n + l];
    fft_->execute(+1, in, out);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < band; ++j) {
      const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(k);
      const std::size_t idx = static_cast<std::size_t>((m % static_cast<std::ptrdiff_t>(n) + static_cast<std::ptrdiff_t>(n)) %
                                                       static_cast<std::ptrdiff_t>(n));
      ghat[r * band + j] = out[idx] * inv_n;
    }
  });

  Eigen::MatrixXcd q(d, d);
  parallel_for(d, [&](std::size_t i) {
    std::vector<Complex> acc(d, Complex(0.0));
    for (std::size_t r = 0; r < rings; ++r) {
      const double* v = &radial_[r * d];
      const double a = rule_.ring_weight(r) * v[i];
      if (a == 0.0) continue;
      // g[j] = ghat_r(j - i)
      const Complex* g = &ghat[r * band + k - i];
      for (std::size_t j = i; j < d; ++j) acc[j] += (a * v[j]) * g[j];
    }
    q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = acc[i].real();
    for (std::size_t j = i + 1; j < d; ++j) q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc[j];
  });
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < q.cols(); ++j) q(j, i) = std::conj(q(i, j));
  }
  return q;
}

Eigen::MatrixXcd KernelEvaluator::to_basis(const Eigen::MatrixXcd& reference) const {
  if (basis_.identity) return reference;
  const Eigen::MatrixXcd& c = basis_.coefficients;
  Eigen::MatrixXcd q = c.adjoint() * reference * c;
  // Restore exact Hermitian symmetry lost to rounding in the products.
  return 0.5 * (q + q.adjoint());
}

Eigen::MatrixXcd KernelEvaluator::reference_gram() const {
  if (!damping_.empty()) return reference_matrix(damping_);
  return reference_matrix(std::vector<double>(rule_.size(), 1.0));
}

std::vector<double> KernelEvaluator::sample_on_nodes(const TestFunction& phi) const {
  const std::size_t n = rule_.angular_count();
  std::vector<double> values(rule_.size());
  parallel_for(rule_.ring_count(), [&](std::size_t r) {
    if (phi.zonal) {
      const double v = phi(ProjectivePoint::from_polar(rule_.ring_s(r), 0.0));
      std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(r * n), n, v);
      return;
    }
    for (std::size_t l = 0; l < n; ++l) values[r * n + l] = phi(rule_.node(r * n + l));
  });
  return values;
}

Eigen::MatrixXcd KernelEvaluator::statistic_matrix(const TestFunction& phi) const {
  std::vector<double> density = sample_on_nodes(phi);
  if (!damping_.empty()) {
    for (std::size_t i = 0; i < density.size(); ++i) density[i] *= damping_[i];
  }
  return to_basis(reference_matrix(density));
}

Eigen::MatrixXcd KernelEvaluator::normalized_statistic_matrix(const TestFunction& phi) const {
  // phi exp(-2 eps eta) / B_p = phi / core.
  std::vector<double> density = sample_on_nodes(phi);
  const auto& core = bergman_core_grid();
  for (std::size_t i = 0; i < density.size(); ++i) density[i] /= core[i];
  return to_basis(reference_matrix(density));
}

const std::vector<double>& KernelEvaluator::bergman_core_grid() const {
  std::call_once(lazy_->core_once, [this] {
    auto& core_grid_ = lazy_->core;
    const std::size_t n = rule_.angular_count();
    const std::size_t rings = rule_.ring_count();
    const auto k = static_cast<std::size_t>(degree());
    const std::size_t d = k + 1;
    core_grid_.assign(rule_.size(), 0.0);
    if (basis_.identity) {
      for (std::size_t r = 0; r < rings; ++r) {
        double total = 0.0;
        for (std::size_t i = 0; i < d; ++i) total += radial_[r * d + i] * radial_[r * d + i];
        std::fill_n(core_grid_.begin() + static_cast<std::ptrdiff_t>(r * n), n, total);
      }
      return;
    }
    const Eigen::MatrixXcd projector = basis_.coefficients * basis_.coefficients.adjoint();
    parallel_for(rings, [&](std::size_t r) {
      // b_m = sum_{l - i = m} P(l, i) v_i v_l, placed at m mod n.
      std::vector<Complex> b(n, Complex(0.0)), out(n);
      const double* v = &radial_[r * d];
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t l = 0; l < d; ++l) {
          const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(l) - static_cast<std::ptrdiff_t>(i);
          const std::size_t idx = static_cast<std::size_t>((m + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n));
          b[idx] += projector(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) * (v[i] * v[l]);
        }
      }
      fft_->execute(+1, b, out);
      for (std::size_t l = 0; l < n; ++l) core_grid_[r * n + l] = out[l].real();
    });
  });
  return lazy_->core;
}

const std::vector<double>& KernelEvaluator::bergman_grid() const {
  std::call_once(lazy_->bergman_once, [this] {
    auto& bergman_grid_ = lazy_->bergman;
    bergman_grid_ = bergman_core_grid();
    if (!damping_.empty()) {
      for (std::size_t i = 0; i < bergman_grid_.size(); ++i) bergman_grid_[i] *= damping_[i];
    }
  });
  return lazy_->bergman;
}

std::vector<Complex> KernelEvaluator::kernel_row(const ProjectivePoint& x) const {
  // K(x, y) = exp(-eps eta(y)) sum_i u_i v_i(s) e^{-i i alpha}, u = conj(C) S(x).
  const Eigen::VectorXcd sx = section_values(x);
  const Eigen::VectorXcd u = basis_.identity ? sx : Eigen::VectorXcd(basis_.coefficients.conjugate() * sx);
  const std::size_t n = rule_.angular_count();
  const std::size_t d = dimension();
  std::vector<Complex> row(rule_.size());
  parallel_for(rule_.ring_count(), [&](std::size_t r) {
    std::vector<Complex> in(n, Complex(0.0)), out(n);
    for (std::size_t i = 0; i < d; ++i) in[i] = u(static_cast<Eigen::Index>(i)) * radial_[r * d + i];
    fft_->execute(-1, in, out);
    for (std::size_t l = 0; l < n; ++l) {
      const std::size_t idx = r * n + l;
      row[idx] = damping_.empty() ? out[l] : out[l] * std::sqrt(damping_[idx]);
    }
  });
  return row;
}

std::vector<double> KernelEvaluator::normalized_row(const ProjectivePoint& x) const {
  const std::vector<Complex> row = kernel_row(x);
  const std::vector<double>& b = bergman_grid();
  const double bx = bergman(x);
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = std::abs(row[i]) / std::sqrt(bx * b[i]);
  return out;
}

std::vector<Complex> KernelEvaluator::section_grid(const Eigen::VectorXcd& coefficients) const {
  const Eigen::VectorXcd b = basis_.identity ? coefficients : Eigen::VectorXcd(basis_.coefficients * coefficients);
  const std::size_t n = rule_.angular_count();
  const std::size_t d = dimension();
  std::vector<Complex> grid(rule_.size());
  parallel_for(rule_.ring_count(), [&](std::size_t r) {
    std::vector<Complex> in(n, Complex(0.0)), out(n);
    for (std::size_t i = 0; i < d; ++i) in[i] = b(static_cast<Eigen::Index>(i)) * radial_[r * d + i];
    fft_->execute(+1, in, out);
    for (std::size_t l = 0; l < n; ++l) {
      const std::size_t idx = r * n + l;
      grid[idx] = damping_.empty() ? out[l] : out[l] * std::sqrt(damping_[idx]);
    }
  });
  return grid;
}

double KernelEvaluator::integrate_nodes(const std::vector<double>& values) const {
  const std::size_t n = rule_.angular_count();
  double total = 0.0;
  for (std::size_t r = 0; r < rule_.ring_count(); ++r) {
    double ring = 0.0;
    for (std::size_t l = 0; l < n; ++l) ring += values[r * n + l];
    total += rule_.ring_weight(r) * ring / static_cast<double>(n);
  }
  return total;
}

double reproducing_check(const KernelEvaluator& evaluator, const Eigen::VectorXcd& coefficients) {
  const QuadratureRule& rule = evaluator.quadrature();
  const std::vector<Complex> s = evaluator.section_grid(coefficients);
  const std::size_t n = rule.angular_count();
  const std::size_t ring_stride = std::max<std::size_t>(1, rule.ring_count() / 7);
  const std::size_t angle_stride = std::max<std::size_t>(1, n / 6);
  double worst = 0.0;
  for (std::size_t r = 0; r < rule.ring_count(); r += ring_stride) {
    for (std::size_t l = 0; l < n; l += angle_stride) {
      const ProjectivePoint x = rule.node(r * n + l);
      const std::vector<Complex> k = evaluator.kernel_row(x);
      Complex projected(0.0);
      for (std::size_t rr = 0; rr < rule.ring_count(); ++rr) {
        Complex ring(0.0);
        for (std::size_t ll = 0; ll < n; ++ll) ring += k[rr * n + ll] * s[rr * n + ll];
        projected += rule.ring_weight(rr) * ring / static_cast<double>(n);
      }
      worst = std::max(worst, std::abs(projected - evaluator.evaluate(coefficients, x)));
    }
  }
  return worst;
}

Eigen::VectorXcd peak_section(const KernelEvaluator& evaluator, const ProjectivePoint& x) {
  const Eigen::VectorXcd sx = evaluator.section_values(x);
  return sx.conjugate() / sx.norm();
}

NearDiagonalSample near_diagonal_profile(const KernelEvaluator& evaluator, const ProjectivePoint& x, Complex u,
                                         Complex v, double lambda_over_area) {
  const NormalChart chart = normal_chart_at(x);
  const double root = std::sqrt(evaluator.area());
  const ProjectivePoint first = chart.map(u / root);
  const ProjectivePoint second = chart.map(std::conj(v) / root);
  NearDiagonalSample out;
  out.measured = evaluator.normalized(first, second);
  out.target = std::exp(-lambda_over_area * std::norm(u - std::conj(v)));
  out.deviation = std::abs(out.measured - out.target);
  return out;
}

NearDiagonalSample near_diagonal_profile(const KernelEvaluator& evaluator, const ProjectivePoint& x, Complex u,
                                         Complex v) {
  const TaylorDecomposition t = taylor_decomposition(evaluator.spec(), evaluator.p(), x);
  return near_diagonal_profile(evaluator, x, u, v, t.lambda / evaluator.area());
}

std::vector<PointPair> sample_far_pairs(std::size_t count, double cutoff, std::uint64_t seed) {
  std::vector<PointPair> pairs;
  if (!(cutoff < kDiameter)) return pairs;
  // Uniform s and alpha give the normalized area measure.
  auto draw = [seed](std::uint64_t index, std::uint32_t slot) {
    const auto u = uniform_pair(seed, index, slot, StreamTag::kPoint);
    return ProjectivePoint::from_polar(u[0], 2.0 * kPi * u[1]);
  };
  constexpr std::uint32_t kMaxAttempts = 1u << 16;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::uint32_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
      ProjectivePoint x = draw(i, 2 * attempt);
      ProjectivePoint y = draw(i, 2 * attempt + 1);
      if (geodesic_distance(x, y) >= cutoff) {
        pairs.emplace_back(x, y);
        break;
      }
    }
  }
  return pairs;
}

DecayFit offdiagonal_decay_fit(const KernelEvaluator& evaluator, const std::vector<PointPair>& pairs) {
  DecayFit fit;
  fit.pair_count = pairs.size();
  const double area = evaluator.area();
  const double root = std::sqrt(area);
  std::vector<double> xs(pairs.size()), ys(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [x, y] = pairs[i];
    xs[i] = root * geodesic_distance(x, y);
    ys[i] = std::log(std::norm(evaluator.kernel(x, y)) / (area * area));
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < pairs.size(); i += 2) {
    if (!std::isfinite(ys[i])) continue;
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    ++m;
  }
  if (m < 2) return fit;
  const double dm = static_cast<double>(m);
  const double denom = sxx - sx * sx / dm;
  if (!(denom > 0.0)) return fit;
  const double slope = (sxy - sx * sy / dm) / denom;
  fit.c2 = -slope;

  double log_c1 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pairs.size(); i += 2) {
    if (std::isfinite(ys[i])) log_c1 = std::max(log_c1, ys[i] + fit.c2 * xs[i]);
  }
  fit.c1 = std::exp(log_c1);

  std::size_t held_out = 0;
  std::size_t violations = 0;
  for (std::size_t i = 1; i < pairs.size(); i += 2) {
    ++held_out;
    if (ys[i] > std::log(1.05) + log_c1 - fit.c2 * xs[i]) ++violations;
  }
  fit.violation_fraction = held_out ? static_cast<double>(violations) / static_cast<double>(held_out) : 1.0;
  fit.feasible = held_out > 0 && fit.c2 > 0.0;
  return fit;
}

}  // namespace masslab
