#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "masslab/parallel.hpp"
#include "masslab/rng.hpp"
#include "masslab/sampling.hpp"

using namespace masslab;

namespace {

MetricSequenceSpec perturbed(std::vector<int> k) {
  return MetricSequenceSpec::perturbed(std::move(k), AmplitudeLaw::kPower, 0.1, "tilt");
}

}  // namespace

TEST_CASE("coefficient ensemble") {
  const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({3}), 1);
  const int n = 10000;
  Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(4);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(4);
  Eigen::MatrixXcd pseudo = Eigen::MatrixXcd::Zero(4, 4);
  for (int i = 0; i < n; ++i) {
    const RandomSection s = sample_section(ev.basis(), 21, static_cast<std::uint64_t>(i));
    mean += s.coefficients;
    second += s.coefficients.cwiseAbs2();
    pseudo += s.coefficients * s.coefficients.transpose();
  }
  mean /= n;
  second /= n;
  pseudo /= n;
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(mean(j)) <= 4.0 / std::sqrt(n));
    CHECK(std::abs(second(j) - 1.0) <= 4.0 * std::sqrt(1.0 / n));
    for (int l = 0; l < 4; ++l) CHECK(std::abs(pseudo(j, l)) <= 4.0 / std::sqrt(n));
  }
  const RandomSection a = sample_section(ev.basis(), 21, 5), b = sample_section(ev.basis(), 21, 5);
  CHECK(a.coefficients == b.coefficients);
  CHECK(a.seed == 21);
  CHECK(a.sample_index == 5);
}

TEST_CASE("statistic matrices") {
  for (const auto& spec : {MetricSequenceSpec::fubini_study({12}), perturbed({12})}) {
    const auto ev = KernelEvaluator::create(spec, 1);
    const auto one = build_statistic_matrix(ev, test_function_by_id("const1"));
    CHECK((one.q - Eigen::MatrixXcd::Identity(13, 13)).cwiseAbs().maxCoeff() <= 1e-12);
    for (const auto& phi : builtin_test_functions()) {
      const auto m = build_statistic_matrix(ev, phi);
      CHECK((m.q - m.q.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((m.q_normalized - m.q_normalized.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  Eigen::MatrixXcd skew = Eigen::MatrixXcd::Identity(3, 3);
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(exact_moments_via_trace(skew), std::invalid_argument);
  CHECK_THROWS_AS(exact_moments_via_trace(Eigen::MatrixXcd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("quadratic-form and direct quadrature paths agree") {
  for (const auto& spec : {MetricSequenceSpec::fubini_study({10}), perturbed({10})}) {
    const auto ev = KernelEvaluator::create(spec, 1);
    for (const auto& phi : builtin_test_functions()) {
      const auto m = build_statistic_matrix(ev, phi);
      for (std::uint64_t i = 0; i < 100; ++i) {
        const RandomSection s = sample_section(ev.basis(), 22, i);
        CHECK(std::abs(mass_statistic(s, m) - mass_statistic_direct(s, ev, phi)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("mass statistic examples") {
  const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({8}), 1);
  const auto m = build_statistic_matrix(ev, test_function_by_id("const1"));
  RandomSection s = sample_section(ev.basis(), 24, 0);
  CHECK(mass_statistic(s, m) == doctest::Approx(s.coefficients.squaredNorm() / 8.0).epsilon(1e-13));
  const Decomposition d = decompose_statistic(s, m);
  CHECK(d.main == doctest::Approx(s.coefficients.squaredNorm() / 9.0).epsilon(1e-13));
  CHECK(d.remainder == doctest::Approx(s.coefficients.squaredNorm() * (1.0 / 8 - 1.0 / 9)).epsilon(1e-12));
  CHECK(std::abs(d.main + d.remainder - d.mass) <= 1e-12);
  s.coefficients.setZero();
  s.coefficients(0) = 1.0;
  CHECK(mass_statistic(s, m) == doctest::Approx(1.0 / 8.0));
  s.coefficients.setZero();
  CHECK(mass_statistic(s, m) == 0.0);
}

TEST_CASE("exact moments") {
  const auto ev4 = KernelEvaluator::create(MetricSequenceSpec::fubini_study({4}), 1);
  const auto m4 = mass_moments(build_statistic_matrix(ev4, test_function_by_id("const1")));
  CHECK(m4.mean == doctest::Approx(5.0 / 4.0).epsilon(1e-13));
  CHECK(m4.variance == doctest::Approx(5.0 / 16.0).epsilon(1e-13));

  // Var * A / int phi^2 = (k + 1) / (k + 2) on FS for the height function.
  double previous_error = 1.0;
  for (int k : {16, 32, 64, 128}) {
    const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({k}), 1);
    const auto mm = mass_moments(build_statistic_matrix(ev, test_function_by_id("height")));
    const double law = mm.variance * k / (1.0 / 3.0);
    CHECK(law == doctest::Approx((k + 1.0) / (k + 2.0)).epsilon(1e-12));
    CHECK(std::abs(law - 1.0) < previous_error);
    previous_error = std::abs(law - 1.0);
  }

  // E[M] = int phi B / A.
  const auto ev = KernelEvaluator::create(perturbed({16}), 1);
  for (const auto& phi : builtin_test_functions()) {
    const auto mm = mass_moments(build_statistic_matrix(ev, phi));
    auto density = ev.sample_on_nodes(phi);
    for (std::size_t i = 0; i < density.size(); ++i) density[i] *= ev.bergman_grid()[i];
    CHECK(std::abs(mm.mean - ev.integrate_nodes(density) / ev.area()) <= 1e-10);
  }
}

TEST_CASE("trace moments match Monte Carlo") {
  const std::size_t n = 10000;
  for (int k : {8, 32}) {
    const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({k}), 1);
    for (const auto& phi : builtin_test_functions()) {
      INFO(phi.id << " k=" << k);
      const auto m = build_statistic_matrix(ev, phi);
      const ExactMoments exact = mass_moments(m);
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = mass_statistic(sample_section(ev.basis(), 25 + k, i), m);
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= n;
      double m2 = 0.0, m4 = 0.0;
      for (double v : x) {
        m2 += (v - mean) * (v - mean);
        m4 += std::pow(v - mean, 4);
      }
      const double var = m2 / (n - 1.0);
      const double se_mean = std::sqrt(var / n);
      const double se_var = std::sqrt((m4 / n - var * var) / n);
      CHECK(std::abs(mean - exact.mean) <= 4.0 * se_mean);
      CHECK(std::abs(var - exact.variance) <= 4.0 * se_var);
    }
  }
}

TEST_CASE("pair correlation identity") {
  const auto ev2 = KernelEvaluator::create(MetricSequenceSpec::fubini_study({2}), 1);
  const auto origin = ProjectivePoint::from_affine(0.0), one = ProjectivePoint::from_affine(1.0);
  CHECK_THROWS_AS(pair_correlation_estimate(ev2, origin, one, 999, 1), std::invalid_argument);
  const auto same = pair_correlation_estimate(ev2, origin, origin, 10000, 1);
  CHECK(std::abs(same.mean - 2.0) <= 3.0 * same.standard_error);
  const auto near = pair_correlation_estimate(ev2, origin, one, 10000, 2);
  CHECK(std::abs(near.mean - 1.25) <= 3.0 * near.standard_error);
  const auto far = pair_correlation_estimate(ev2, one, ProjectivePoint::from_affine(-1.0), 10000, 3);
  CHECK(std::abs(far.mean - 1.0) <= 3.0 * far.standard_error);
  const auto evp = KernelEvaluator::create(perturbed({16}), 1);
  const auto x = ProjectivePoint::from_affine(Complex(0.1, 0.2)), y = ProjectivePoint::from_affine(0.35);
  const double nxy = evp.normalized(x, y);
  const auto est = pair_correlation_estimate(evp, x, y, 10000, 4);
  CHECK(std::abs(est.mean - (1.0 + nxy * nxy)) <= 3.0 * est.standard_error);
}

TEST_CASE("estimates do not depend on the worker count") {
  const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({16}), 1);
  const auto x = ProjectivePoint::from_affine(0.2), y = ProjectivePoint::from_affine(0.5);
  set_worker_count(1);
  const auto a = pair_correlation_estimate(ev, x, y, 2000, 9);
  set_worker_count(4);
  const auto b = pair_correlation_estimate(ev, x, y, 2000, 9);
  set_worker_count(1);
  CHECK(a.mean == b.mean);
  CHECK(a.standard_error == b.standard_error);
}
