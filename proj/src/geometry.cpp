#include "masslab/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/legendre.hpp>

namespace masslab {

ProjectivePoint::ProjectivePoint(Complex z0, Complex z1) {
  const double n = std::sqrt(std::norm(z0) + std::norm(z1));
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("ProjectivePoint: homogeneous coordinates must be finite and nonzero");
  }
  z0_ = z0 / n;
  z1_ = z1 / n;
}

ProjectivePoint ProjectivePoint::from_affine(Complex z) { return {1.0, z}; }

ProjectivePoint ProjectivePoint::infinity() { return {0.0, 1.0}; }

ProjectivePoint ProjectivePoint::from_polar(double s, double alpha) {
  s = std::clamp(s, 0.0, 1.0);
  return {std::sqrt(s), std::polar(std::sqrt(1.0 - s), alpha)};
}

std::optional<Complex> ProjectivePoint::affine() const {
  if (z0_ == Complex(0.0)) return std::nullopt;
  return z1_ / z0_;
}

std::array<double, 3> ProjectivePoint::to_sphere() const {
  const Complex w = 2.0 * std::conj(z0_) * z1_;
  return {w.real(), w.imag(), std::norm(z0_) - std::norm(z1_)};
}

bool ProjectivePoint::same_point(const ProjectivePoint& other, double tol) const {
  return std::abs(std::abs(hermitian_product(*this, other)) - 1.0) <= tol;
}

Complex hermitian_product(const ProjectivePoint& a, const ProjectivePoint& b) {
  return std::conj(a.z0()) * b.z0() + std::conj(a.z1()) * b.z1();
}

double geodesic_distance(const ProjectivePoint& x, const ProjectivePoint& y) {
  // arccos |<Z, W>| written as atan2(|Z ^ W|, |<Z, W>|), which stays accurate near 0.
  const double c = std::abs(hermitian_product(x, y));
  const double w = std::abs(x.z0() * y.z1() - x.z1() * y.z0());
  return std::atan2(w, c) / std::sqrt(kPi);
}

ProjectivePoint NormalChart::map(Complex w) const {
  const Eigen::Vector2cd rotated(1.0, w / scale);
  const Eigen::Vector2cd z = rotation.adjoint() * rotated;
  return {z(0), z(1)};
}

std::optional<Complex> NormalChart::coordinate(const ProjectivePoint& x) const {
  const Eigen::Vector2cd z = rotation * Eigen::Vector2cd(x.z0(), x.z1());
  if (std::abs(z(0)) < 1e-300) return std::nullopt;
  return scale * z(1) / z(0);
}

NormalChart normal_chart_at(const ProjectivePoint& x) {
  Eigen::Matrix2cd u;
  u << std::conj(x.z0()), std::conj(x.z1()),
      -x.z1(), x.z0();
  return NormalChart{x, u, 1.0 / std::sqrt(kPi)};
}

double chart_metric_density(const NormalChart& chart, Complex w, double step) {
  // Use whichever affine chart keeps the image point away from its pole.
  const ProjectivePoint image = chart.map(w);
  const bool use_first = std::abs(image.z0()) >= std::abs(image.z1());
  auto affine = [&](Complex v) {
    const ProjectivePoint q = chart.map(v);
    return use_first ? q.z1() / q.z0() : q.z0() / q.z1();
  };
  const Complex derivative = (affine(w + step) - affine(w - step)) / (2.0 * step);
  const double r2 = std::norm(affine(w));
  return std::norm(derivative) / (kPi * (1.0 + r2) * (1.0 + r2));
}

double QuadratureRule::angle(std::size_t l) const {
  return 2.0 * kPi * static_cast<double>(l) / static_cast<double>(angular_count_);
}

ProjectivePoint QuadratureRule::node(std::size_t index) const {
  const std::size_t ring = index / angular_count_;
  const std::size_t l = index % angular_count_;
  return ProjectivePoint::from_polar(s_nodes_[ring], angle(l));
}

double QuadratureRule::weight(std::size_t index) const {
  return s_weights_[index / angular_count_] / static_cast<double>(angular_count_);
}

double QuadratureRule::integrate(const std::function<double(const ProjectivePoint&)>& f) const {
  double total = 0.0;
  for (std::size_t ring = 0; ring < ring_count(); ++ring) {
    double ring_sum = 0.0;
    for (std::size_t l = 0; l < angular_count_; ++l) {
      ring_sum += f(ProjectivePoint::from_polar(s_nodes_[ring], angle(l)));
    }
    total += s_weights_[ring] * ring_sum / static_cast<double>(angular_count_);
  }
  return total;
}

QuadratureRule build_quadrature(int max_degree) {
  if (max_degree < 0) {
    throw std::invalid_argument("build_quadrature: max_degree must be nonnegative, got " +
                                std::to_string(max_degree));
  }
  const int ring_count = max_degree / 2 + 2;
  const auto angular = std::bit_ceil(static_cast<std::size_t>(2 * max_degree + 1));

  // boost returns the nonnegative zeros of P_n in increasing order.
  const std::vector<double> half = boost::math::legendre_p_zeros<double>(ring_count);
  std::vector<double> zeros;
  zeros.reserve(static_cast<std::size_t>(ring_count));
  for (auto it = half.rbegin(); it != half.rend(); ++it) {
    if (*it > 0.0) zeros.push_back(-*it);
  }
  for (double x : half) zeros.push_back(x);

  QuadratureRule rule;
  rule.max_exact_degree_ = max_degree;
  rule.angular_count_ = angular;
  rule.s_nodes_.reserve(zeros.size());
  rule.s_weights_.reserve(zeros.size());
  double total = 0.0;
  for (double x : zeros) {
    const double dp = boost::math::legendre_p_prime(ring_count, x);
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // = (2 / ((1-x^2) P'^2)) / 2
    rule.s_nodes_.push_back(0.5 * (1.0 + x));
    rule.s_weights_.push_back(w);
    total += w;
  }
  // Weights are accurate to a few ulps; remove the residual so the volume is 1.
  for (double& w : rule.s_weights_) w /= total;
  return rule;
}

std::vector<TestFunction> builtin_test_functions() {
  std::vector<TestFunction> out;
  out.push_back({"const1", [](const ProjectivePoint&) { return 1.0; }, 1.0, 1.0, true});
  out.push_back({"height", [](const ProjectivePoint& x) { return x.height(); }, 0.0, 1.0 / 3.0, true});
  out.push_back({"cap",
                 [](const ProjectivePoint& x) {
                   const double u = std::max(0.0, x.height());
                   return u * u;
                 },
                 1.0 / 6.0, 1.0 / 10.0, true});
  out.push_back({"tilt", [](const ProjectivePoint& x) { return x.to_sphere()[0]; }, 0.0, 1.0 / 3.0, false});
  return out;
}

TestFunction test_function_by_id(const std::string& id) {
  for (auto& f : builtin_test_functions()) {
    if (f.id == id) return f;
  }
  throw std::invalid_argument("unknown test function: " + id);
}

}  // namespace masslab
