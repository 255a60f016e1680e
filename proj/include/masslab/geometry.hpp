// The complex projective line with its Fubini-Study form normalized to area 1.
//
// Points are carried in homogeneous coordinates [z0 : z1] with |z0|^2 + |z1|^2 = 1;
// the affine coordinate z = z1 / z0 is extracted only where it is finite.
// In the standard chart the area form is
//
//     dV = (1/pi) dx dy / (1 + |z|^2)^2,
//
// and in the variables s = 1/(1+|z|^2) = |z0|^2, alpha = arg z it becomes
// dV = (1/2pi) ds dalpha, which is what the quadrature rule exploits.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace masslab {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Diameter of CP^1 under the area-one Fubini-Study metric.
inline const double kDiameter = std::sqrt(kPi) / 2.0;

class ProjectivePoint {
 public:
  /// Normalizes (z0, z1); throws std::invalid_argument for the zero vector.
  ProjectivePoint(Complex z0, Complex z1);

  /// The point [1 : z].
  static ProjectivePoint from_affine(Complex z);
  /// The point [0 : 1], i.e. z = infinity.
  static ProjectivePoint infinity();
  /// Point with s = |z0|^2 and arg(z1/z0) = alpha, z0 taken real and nonnegative.
  static ProjectivePoint from_polar(double s, double alpha);

  Complex z0() const { return z0_; }
  Complex z1() const { return z1_; }

  /// z1 / z0 when z0 != 0.
  std::optional<Complex> affine() const;
  /// s = |z0|^2 = 1 / (1 + |z|^2).
  double s() const { return std::norm(z0_); }
  /// Height function (1 - |z|^2)/(1 + |z|^2) = 2s - 1; +1 at z = 0, -1 at infinity.
  double height() const { return 2.0 * s() - 1.0; }
  /// Unit vector in R^3 under the Hopf map; the last entry is the height.
  std::array<double, 3> to_sphere() const;

  /// Same point of CP^1 (representatives differ by a unit scalar).
  bool same_point(const ProjectivePoint& other, double tol = 1e-12) const;

 private:
  Complex z0_;
  Complex z1_;
};

/// <Z, W> = conj(z0) w0 + conj(z1) w1 on unit representatives.
Complex hermitian_product(const ProjectivePoint& a, const ProjectivePoint& b);

/// (1/sqrt(pi)) arccos |<Z, W>|.
double geodesic_distance(const ProjectivePoint& x, const ProjectivePoint& y);

/// Coordinates centred at a point which are Kahler there: the pulled-back
/// area form is (i/2) dw ^ dw-bar + O(|w|^2).
struct NormalChart {
  ProjectivePoint center;
  /// Unitary matrix sending the center to [1 : 0].
  Eigen::Matrix2cd rotation;
  /// w = scale * (affine coordinate in the rotated frame); 1/sqrt(pi) here.
  double scale;

  ProjectivePoint map(Complex w) const;
  /// Inverse of map; nullopt for the antipode of the center.
  std::optional<Complex> coordinate(const ProjectivePoint& x) const;
};

NormalChart normal_chart_at(const ProjectivePoint& x);

/// Density of the pulled-back area form at w relative to du dv, from a
/// central finite difference of the chart map.
double chart_metric_density(const NormalChart& chart, Complex w, double step = 1e-5);

/// Product rule in (s, alpha): Gauss-Legendre in s on (0, 1), uniform in alpha.
/// Nodes are indexed ring-major: index = ring * angular_count + l.
class QuadratureRule {
 public:
  int max_exact_degree() const { return max_exact_degree_; }
  std::size_t ring_count() const { return s_nodes_.size(); }
  std::size_t angular_count() const { return angular_count_; }
  std::size_t size() const { return ring_count() * angular_count(); }

  double ring_s(std::size_t ring) const { return s_nodes_[ring]; }
  /// Gauss-Legendre weight of the ring; the ring weights sum to 1.
  double ring_weight(std::size_t ring) const { return s_weights_[ring]; }
  double angle(std::size_t l) const;

  ProjectivePoint node(std::size_t index) const;
  double weight(std::size_t index) const;

  double integrate(const std::function<double(const ProjectivePoint&)>& f) const;

  friend QuadratureRule build_quadrature(int max_degree);

 private:
  int max_exact_degree_ = 0;
  std::vector<double> s_nodes_;
  std::vector<double> s_weights_;
  std::size_t angular_count_ = 1;
};

/// Exact for all area densities |z|^{2j} (1 + |z|^2)^{-k} with j <= k <= max_degree
/// (and more generally for spherical polynomials up to that degree).
QuadratureRule build_quadrature(int max_degree);

struct TestFunction {
  std::string id;
  std::function<double(const ProjectivePoint&)> evaluate;
  /// Closed-form integrals when known.
  std::optional<double> integral;
  std::optional<double> integral_of_square;
  /// Depends on the point only through s (rotation invariant about z = 0).
  bool zonal = false;

  double operator()(const ProjectivePoint& x) const { return evaluate(x); }
};

/// const1, height, cap (= max(0, height)^2, supported in |z| < 1), tilt (= x1 on the sphere).
std::vector<TestFunction> builtin_test_functions();
/// Throws std::invalid_argument naming the id when unknown.
TestFunction test_function_by_id(const std::string& id);

}  // namespace masslab
