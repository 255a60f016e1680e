#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "masslab/geometry.hpp"
#include "masslab/rng.hpp"
#include "oracles.hpp"

using namespace masslab;

namespace {

ProjectivePoint random_point(std::uint64_t seed, std::uint64_t i) {
  const auto u = uniform_pair(seed, i, 0, StreamTag::kPoint);
  return ProjectivePoint::from_polar(u[0], 2.0 * kPi * u[1]);
}

}  // namespace

TEST_CASE("points are normalized and compared up to phase") {
  const ProjectivePoint x(Complex(3.0, 1.0), Complex(-2.0, 5.0));
  CHECK(std::abs(std::norm(x.z0()) + std::norm(x.z1()) - 1.0) <= 1e-12);
  const ProjectivePoint y(x.z0() * std::polar(2.5, 0.7), x.z1() * std::polar(2.5, 0.7));
  CHECK(x.same_point(y));
  CHECK_FALSE(x.same_point(ProjectivePoint::from_affine(0.0)));
  CHECK_THROWS_AS(ProjectivePoint(0.0, 0.0), std::invalid_argument);
  CHECK_FALSE(ProjectivePoint::infinity().affine().has_value());
}

TEST_CASE("distance examples") {
  const auto origin = ProjectivePoint::from_affine(0.0);
  CHECK(geodesic_distance(origin, origin) == 0.0);
  CHECK(geodesic_distance(origin, ProjectivePoint::infinity()) == doctest::Approx(std::sqrt(kPi) / 2).epsilon(1e-14));
  CHECK(kDiameter == doctest::Approx(0.886226925452758).epsilon(1e-14));

  // Length of the radial segment from 0 to 1, which is a geodesic: (1/sqrt(pi)) int dr / (1 + r^2).
  const double length = oracle::integrate([](double r) { return 1.0 / (std::sqrt(kPi) * (1.0 + r * r)); }, 0.0, 1.0);
  CHECK(geodesic_distance(origin, ProjectivePoint::from_affine(1.0)) == doctest::Approx(length).epsilon(1e-12));
  CHECK(length == doctest::Approx(0.443113462726379).epsilon(1e-12));
}

TEST_CASE("distance is a metric on random triples") {
  double largest = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto x = random_point(1, 3 * i), y = random_point(1, 3 * i + 1), w = random_point(1, 3 * i + 2);
    const double dxy = geodesic_distance(x, y);
    CHECK(dxy == doctest::Approx(geodesic_distance(y, x)).epsilon(1e-15));
    CHECK(dxy <= geodesic_distance(x, w) + geodesic_distance(w, y) + 1e-12);
    CHECK(dxy <= kDiameter + 1e-15);
    largest = std::max(largest, dxy);
  }
  CHECK(largest > 0.8 * kDiameter);
}

TEST_CASE("normal charts") {
  const auto north = normal_chart_at(ProjectivePoint::from_affine(0.0));
  CHECK(north.scale == doctest::Approx(1.0 / std::sqrt(kPi)));
  const Complex w(0.2, -0.1);
  const Complex z = *north.map(w).affine();
  CHECK(std::abs(z - std::sqrt(kPi) * w) <= 1e-14);

  for (std::uint64_t i = 0; i < 100; ++i) {
    const ProjectivePoint x = random_point(2, i);
    const NormalChart chart = normal_chart_at(x);
    const Eigen::Matrix2cd u = chart.rotation;
    CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).norm() <= 1e-14);
    CHECK(chart.map(0.0).same_point(x));
    CHECK(chart_metric_density(chart, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
    const auto uv = uniform_pair(3, i, 0, StreamTag::kPoint);
    const Complex v = std::polar(0.05 * uv[0], 2.0 * kPi * uv[1]);
    CHECK(std::abs(geodesic_distance(chart.map(v), x) - std::abs(v)) <= 0.02 * std::abs(v));
    const auto back = chart.coordinate(chart.map(v));
    REQUIRE(back.has_value());
    CHECK(std::abs(*back - v) <= 1e-12);
  }
}

TEST_CASE("quadrature sizes and volume") {
  CHECK_THROWS_AS(build_quadrature(-1), std::invalid_argument);
  for (int degree : {0, 1, 7, 16, 40}) {
    const QuadratureRule rule = build_quadrature(degree);
    CHECK(static_cast<int>(rule.ring_count()) >= degree / 2 + 2);
    CHECK(static_cast<int>(rule.angular_count()) >= 2 * degree + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      CHECK(rule.weight(i) > 0.0);
      total += rule.weight(i);
    }
    CHECK(std::abs(total - 1.0) <= 1e-14);
  }
}

TEST_CASE("quadrature is exact on Fubini-Study monomial densities") {
  const int max_degree = 24;
  const QuadratureRule rule = build_quadrature(max_degree);
  for (int k = 0; k <= max_degree; ++k) {
    for (int j = 0; j <= k; ++j) {
      const double value = rule.integrate([&](const ProjectivePoint& x) {
        return std::pow(x.s(), k - j) * std::pow(1.0 - x.s(), j);  // |z|^{2j} / (1 + |z|^2)^k
      });
      CHECK(std::abs(value - oracle::beta_value(j, k)) <= 1e-13);
    }
  }
  // Independent check of the Beta values themselves.
  CHECK(oracle::monomial_integral(1, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
  CHECK(oracle::monomial_integral(3, 7) == doctest::Approx(oracle::beta_value(3, 7)).epsilon(1e-10));
  // Angular symmetry.
  const double oscillating = rule.integrate([](const ProjectivePoint& x) {
    return (x.z1() * std::conj(x.z0())).real() * x.s();
  });
  CHECK(std::abs(oscillating) <= 1e-15);
}

TEST_CASE("builtin test functions") {
  const auto all = builtin_test_functions();
  REQUIRE(all.size() >= 3);
  const QuadratureRule rule = build_quadrature(12);
  for (const auto& f : all) {
    INFO(f.id);
    REQUIRE(f.integral.has_value());
    REQUIRE(f.integral_of_square.has_value());
    if (f.id == "cap") continue;  // not polynomial; checked below with a finer rule
    CHECK(rule.integrate(f.evaluate) == doctest::Approx(*f.integral).scale(1.0).epsilon(1e-13));
    CHECK(rule.integrate([&](const ProjectivePoint& x) { return f(x) * f(x); }) ==
          doctest::Approx(*f.integral_of_square).epsilon(1e-13));
  }
  const auto cap = test_function_by_id("cap");
  CHECK(cap(ProjectivePoint::from_affine(1.5)) == 0.0);
  CHECK(cap(ProjectivePoint::from_affine(0.0)) == 1.0);
  // In s, cap = (2s - 1)^2 on s > 1/2 and dV = ds.
  CHECK(oracle::integrate([](double s) { return s > 0.5 ? std::pow(2 * s - 1, 2) : 0.0; }, 0.5, 1.0) ==
        doctest::Approx(*cap.integral).epsilon(1e-12));
  CHECK(oracle::integrate([](double s) { return std::pow(2 * s - 1, 4); }, 0.5, 1.0) ==
        doctest::Approx(*cap.integral_of_square).epsilon(1e-12));
  CHECK(test_function_by_id("const1")(ProjectivePoint::from_affine(Complex(3, 4))) == 1.0);
  CHECK(test_function_by_id("height")(ProjectivePoint::from_affine(0.0)) == 1.0);
  CHECK(test_function_by_id("height")(ProjectivePoint::infinity()) == -1.0);
  CHECK_THROWS_WITH_AS(test_function_by_id("nope"), "unknown test function: nope", std::invalid_argument);
}
