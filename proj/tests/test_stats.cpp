#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include "masslab/rng.hpp"
#include "masslab/stats.hpp"

using namespace masslab;

namespace {

std::vector<double> generator_normals(std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; i += 2) {
    const auto g = complex_gaussian(seed, i / 2, 0, StreamTag::kGenerator) * std::sqrt(2.0);
    out[i] = g.real();
    if (i + 1 < n) out[i + 1] = g.imag();
  }
  return out;
}

TestFunction scaled(const TestFunction& phi, double c) {
  TestFunction out = phi;
  out.id = phi.id + "_scaled";
  out.evaluate = [f = phi.evaluate, c](const ProjectivePoint& x) { return c * f(x); };
  if (phi.integral) out.integral = c * *phi.integral;
  if (phi.integral_of_square) out.integral_of_square = c * c * *phi.integral_of_square;
  return out;
}

}  // namespace

TEST_CASE("moment summary") {
  const std::vector<double> pm = {-1.0, 1.0};
  const MomentSummary s = moment_summary(pm);
  CHECK(s.mean == 0.0);
  CHECK(s.variance == 2.0);
  const std::vector<double> flat(10, 3.0);
  const MomentSummary c = moment_summary(flat);
  CHECK(c.variance == 0.0);
  CHECK_FALSE(c.skewness.has_value());
  CHECK_FALSE(c.excess_kurtosis.has_value());
  CHECK_THROWS_AS(moment_summary(std::vector<double>{1.0}), std::invalid_argument);
  // Large offsets: compensated two-pass sums keep the variance exact.
  const std::vector<double> offset = {1e9 + 1.0, 1e9 + 2.0, 1e9 + 3.0};
  CHECK(moment_summary(offset).variance == doctest::Approx(1.0).epsilon(1e-12));

  const std::size_t n = 1000000;
  const auto normals = generator_normals(n, 3);
  const MomentSummary big = moment_summary(normals);
  CHECK(std::abs(*big.excess_kurtosis) <= 4.0 * std::sqrt(24.0 / n));
  CHECK(std::abs(*big.skewness) <= 4.0 * std::sqrt(6.0 / n));
  CHECK(std::abs(big.variance - 1.0) <= 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("normal distribution function") {
  const boost::math::normal_distribution<double> law;
  for (double t = -8.0; t <= 8.0; t += 0.25) {
    CHECK(std::abs(normal_cdf(t) - boost::math::cdf(law, t)) <= 1e-12);
  }
}

TEST_CASE("Kolmogorov-Smirnov statistic") {
  CHECK_THROWS_AS(ks_statistic(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(ks_statistic(std::vector<double>(49, 0.0)), std::invalid_argument);

  const boost::math::normal_distribution<double> law;
  const std::size_t n = 1000;
  std::vector<double> quantiles(n);
  for (std::size_t i = 0; i < n; ++i) quantiles[i] = boost::math::quantile(law, (i + 0.5) / n);
  const KSResult exact = ks_statistic(quantiles);
  CHECK(exact.statistic <= 1.0 / (2.0 * n) + 1e-6);
  CHECK(exact.pass);

  const KSResult point = ks_statistic(std::vector<double>(100, 0.0));
  CHECK(point.statistic == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(point.pass);

  const KSResult mc = ks_statistic(generator_normals(2000, 17));
  CHECK(mc.threshold == doctest::Approx(1.63 / std::sqrt(2000.0)));
  CHECK(mc.pass);
  CHECK(mc.statistic >= 0.0);
  CHECK(mc.statistic <= 1.0);

  // A shifted sample is detected.
  auto shifted = generator_normals(2000, 18);
  for (double& v : shifted) v += 0.3;
  CHECK_FALSE(ks_statistic(shifted).pass);

  const std::vector<double> a = {0.0, 1.0, 2.0}, b = {10.0, 11.0};
  CHECK(two_sample_ks(a, b) == 1.0);
  CHECK(two_sample_ks(a, a) == 0.0);
}

TEST_CASE("CLT experiment") {
  const auto fs64 = MetricSequenceSpec::fubini_study({64});
  const CltResult r = clt_experiment(fs64, 1, test_function_by_id("const1"), 2000, 5);
  const double n = 2000;
  const double se = std::sqrt(6.0 * (n - 2) / ((n + 1) * (n + 3)));
  CHECK(r.exact.mean == doctest::Approx(65.0 / 64.0));
  CHECK(std::abs(*r.summary.skewness - 2.0 / std::sqrt(65.0)) <= 3.0 * se);

  const auto fs256 = MetricSequenceSpec::fubini_study({256});
  CHECK(clt_experiment(fs256, 1, test_function_by_id("height"), 2000, 6).ks.pass);

  const auto fs1024 = MetricSequenceSpec::fubini_study({1024});
  const CltResult big = clt_experiment(fs1024, 1, test_function_by_id("const1"), 2000, 7);
  CHECK(big.ks.pass);
  CHECK(std::abs(*big.summary.skewness - 2.0 / std::sqrt(1025.0)) <= 3.0 * se);

  TestFunction zero = test_function_by_id("const1");
  zero.evaluate = [](const ProjectivePoint&) { return 0.0; };
  CHECK_THROWS_AS(clt_experiment(fs64, 1, zero, 100, 1), std::invalid_argument);
}

TEST_CASE("CLT trend and normalization invariance") {
  for (const auto& phi : builtin_test_functions()) {
    INFO(phi.id);
    double previous = 1.0;
    for (int k : {16, 64, 256}) {
      const auto r = clt_experiment(MetricSequenceSpec::fubini_study({k}), 1, phi, 2000, 8);
      // Within two standard errors of the KS statistic (about 0.87 / sqrt(N) under the null).
      CHECK(r.ks.statistic <= previous + 2.0 * 0.87 / std::sqrt(2000.0));
      previous = r.ks.statistic;
    }
  }
  const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({32}), 1);
  const auto height = test_function_by_id("height");
  const auto a = clt_experiment(ev, build_statistic_matrix(ev, height), 200, 9);
  const auto b = clt_experiment(ev, build_statistic_matrix(ev, scaled(height, 3.5)), 200, 9);
  for (std::size_t i = 0; i < a.normalized.size(); ++i) {
    CHECK(a.normalized[i] == doctest::Approx(b.normalized[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("sandwich consistency of M and its main part") {
  const auto ev = KernelEvaluator::create(
      MetricSequenceSpec::perturbed({64}, AmplitudeLaw::kPower, 0.1, "tilt"), 1);
  const auto m = build_statistic_matrix(ev, test_function_by_id("height"));
  const CltResult r = clt_experiment(ev, m, 2000, 10);
  const VarianceRatio vr = variance_ratio(m);
  CHECK(two_sample_ks(r.normalized, r.normalized_main) <=
        2.0 * std::sqrt(vr.remainder_over_mass) + 2.0 / std::sqrt(2000.0));
}

TEST_CASE("variance ratios") {
  for (int k : {16, 64}) {
    const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({k}), 1);
    for (const char* id : {"const1", "height", "cap"}) {
      const VarianceRatio vr = variance_ratio(build_statistic_matrix(ev, test_function_by_id(id)));
      CHECK(std::abs(vr.main_over_mass - std::pow(k / (k + 1.0), 2)) <= 1e-12);
      CHECK(std::abs(vr.remainder_over_mass - 1.0 / std::pow(k + 1.0, 2)) <= 1e-12);
      CHECK(vr.beta == doctest::Approx(k / (k + 1.0)));
    }
  }
  const auto spec = MetricSequenceSpec::perturbed({16, 32, 64, 128}, AmplitudeLaw::kPower, 0.1, "tilt");
  double f_prev = 0.0, r_prev = 1.0;
  for (int p = 1; p <= 4; ++p) {
    const auto ev = KernelEvaluator::create(spec, p);
    const VarianceRatio vr = variance_ratio(build_statistic_matrix(ev, test_function_by_id("height")));
    CHECK(vr.main_over_mass > f_prev);
    CHECK(vr.remainder_over_mass < r_prev);
    f_prev = vr.main_over_mass;
    r_prev = vr.remainder_over_mass;
  }
}

TEST_CASE("Sodin-Tsirelson conditions") {
  const auto grid = fibonacci_grid(32);
  REQUIRE(grid.size() == 32);
  double previous = 1.0;
  for (int k : {16, 64, 256}) {
    const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({k}), 1);
    const TSConditionReport ts = ts_conditions(ev, test_function_by_id("const1"), 3.0);
    CHECK(std::abs(ts.sup_integral - 2.0 / (k + 2.0)) <= 1e-6);
    CHECK(ts.sup_integral < previous);
    previous = ts.sup_integral;
    CHECK(ts.ratio >= 0.25);
    CHECK(ts.predicted_limit == doctest::Approx(0.5));
    CHECK(ts.grid_size == 32);
    CHECK(ts.ball_radius == doctest::Approx(3.0 * std::log(k) / std::sqrt(k)));
    if (k == 256) {
      CHECK(std::abs(ts.ratio / 0.5 - 1.0) <= 0.15);
      CHECK_FALSE(ts.warning.empty());  // 32 points cannot resolve 1/sqrt(256)
    }
  }
  const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({64}), 1);
  const TSConditionReport h = ts_conditions(ev, test_function_by_id("height"), 3.0);
  CHECK(h.ratio >= 0.5 * h.predicted_limit);
  CHECK(h.predicted_limit == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("equidistribution experiment") {
  MetricSequenceSpec spec;
  spec.degree_law = DegreeLaw::kSquare;
  const auto one = test_function_by_id("const1");
  const EquidistributionReport r = equidistribution_experiment(spec, 4, 16, one, 0.1, 1000, 12);
  REQUIRE(r.rows.size() == 13);
  CHECK(r.law_summable);
  for (const auto& row : r.rows) {
    const double p = row.p;
    const double a = p * p;
    CHECK(row.variance == doctest::Approx((a + 1.0) / (a * a)).epsilon(1e-12));
    CHECK(row.bias == doctest::Approx(1.0 / a).epsilon(1e-12));
    CHECK(row.chebyshev_bound == doctest::Approx(row.variance / 0.01));
    CHECK(row.exceed <= row.chebyshev_bound_2eps + 3.0 * row.exceed_se + 1e-12);
    CHECK(row.sup_exceed >= row.exceed);
  }
  CHECK(r.rows[6].p == 10);
  CHECK(r.rows[6].chebyshev_bound == doctest::Approx(1.01));
  CHECK(r.rows.back().p == 16);

  spec.degree_law = DegreeLaw::kLinear;
  CHECK_THROWS_AS(equidistribution_experiment(spec, 1, 10, one, 0.1, 100, 1), std::invalid_argument);
}
