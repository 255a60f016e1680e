#include "masslab/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>

#include "masslab/rng.hpp"
#include "masslab/runner.hpp"
#include "masslab/sampling.hpp"
#include "masslab/stats.hpp"

namespace masslab {

namespace {

class Suite {
 public:
  // Records |value - expected| <= tol.
  void close(const std::string& name, double value, double expected, double tol) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "value %.12g expected %.12g tol %.1e", value, expected, tol);
    cases_.push_back({name, std::abs(value - expected) <= tol, buf});
  }
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    cases_.push_back({name, ok, detail});
  }
  void guarded(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      cases_.push_back({name, false, std::string("exception: ") + e.what()});
    }
  }
  std::vector<SelftestCase> take() { return std::move(cases_); }

 private:
  std::vector<SelftestCase> cases_;
};

}  // namespace

std::vector<SelftestCase> run_selftest() {
  Suite s;
  const ProjectivePoint origin = ProjectivePoint::from_affine(0.0);
  const ProjectivePoint one = ProjectivePoint::from_affine(1.0);

  s.guarded("geometry", [&] {
    s.close("distance to self", geodesic_distance(one, one), 0.0, 1e-12);
    s.close("distance between poles", geodesic_distance(origin, ProjectivePoint::infinity()), std::sqrt(kPi) / 2,
            1e-12);
    s.close("distance z=0 to z=1", geodesic_distance(origin, one), std::sqrt(kPi) / 4, 1e-12);
    const NormalChart chart = normal_chart_at(origin);
    s.check("chart maps 0 to centre", chart.map(0.0).same_point(origin));
    s.close("chart at [1:0] scales by sqrt(pi)", std::abs(*chart.map(0.3).affine()), std::sqrt(kPi) * 0.3, 1e-12);
    s.close("chart metric density at 0", chart_metric_density(chart, 0.0), 1.0, 1e-8);
    const QuadratureRule rule = build_quadrature(8);
    s.close("quadrature weights sum", rule.integrate([](const ProjectivePoint&) { return 1.0; }), 1.0, 1e-14);
    s.close("quadrature k=2 j=1 monomial", rule.integrate([](const ProjectivePoint& x) {
      return std::norm(x.z0()) * std::norm(x.z1());
    }), 1.0 / 6.0, 1e-14);
    s.close("height integrates to 0", rule.integrate(test_function_by_id("height").evaluate), 0.0, 1e-14);
    s.close("height at z=0", test_function_by_id("height")(origin), 1.0, 0.0);
    s.close("height at infinity", test_function_by_id("height")(ProjectivePoint::infinity()), -1.0, 0.0);
  });

  s.guarded("bundles", [&] {
    const auto fs2 = MetricSequenceSpec::fubini_study({2});
    s.close("FS weight at z=0", weight_at(fs2, 1, origin), 0.0, 0.0);
    s.close("FS k=2 weight at |z|=1", weight_at(fs2, 1, one), std::log(2.0), 1e-15);
    const auto shifted = MetricSequenceSpec::perturbed({2}, AmplitudeLaw::kConstant, 0.1, "const");
    s.close("constant profile shift", weight_at(shifted, 1, one) - weight_at(fs2, 1, one), 0.1, 1e-15);
    s.close("FS Diophantine deviation", check_diophantine(fs2, 1).deviation, 0.0, 0.0);
    const auto fs = MetricSequenceSpec::fubini_study({16, 32});
    s.check("metric norm proxy grows with k", estimate_metric_norm3(fs, 2) > estimate_metric_norm3(fs, 1));
    const TaylorDecomposition t = taylor_decomposition(fs, 1, one);
    s.close("FS lambda / (pi A)", t.lambda / (kPi * 16.0), 0.5, 1e-5);
  });

  s.guarded("bergman", [&] {
    const auto ev2 = KernelEvaluator::create(MetricSequenceSpec::fubini_study({2}), 1);
    s.check("FS basis is the identity", ev2.basis().identity);
    s.close("FS k=2 reference norm of z", ev2.reference_gram()(1, 1).real(), 1.0, 1e-13);
    s.close("FS k=2 N(0, 1)", ev2.normalized(origin, one), 0.5, 1e-12);
    const auto ev3 = KernelEvaluator::create(MetricSequenceSpec::fubini_study({3}), 1);
    s.close("FS k=3 Bergman function", ev3.bergman(ProjectivePoint::from_affine(Complex(0.4, 2.0))), 4.0, 1e-12);
    s.close("FS k=3 dimensional density", ev3.integrate_nodes(ev3.bergman_grid()), 4.0, 1e-12);
    const auto pert = MetricSequenceSpec::perturbed({4}, AmplitudeLaw::kConstant, 0.1, "const");
    const auto evc = KernelEvaluator::create(pert, 1);
    s.close("constant shift rescales basis", evc.basis().coefficients(2, 2).real(), std::exp(0.1), 1e-12);
    s.close("antipodal N at k=16",
            KernelEvaluator::create(MetricSequenceSpec::fubini_study({16}), 1)
                .normalized(one, ProjectivePoint::from_affine(-1.0)),
            0.0, 1e-12);
    const auto ev256 = KernelEvaluator::create(MetricSequenceSpec::fubini_study({256}), 1);
    const NearDiagonalSample nd = near_diagonal_profile(ev256, origin, 0.0, 1.0, kPi / 2);
    s.close("near-diagonal k=256 measured", nd.measured, std::pow(1.0 + kPi / 256.0, -128.0), 1e-10);
    s.close("near-diagonal k=256 target", nd.target, std::exp(-kPi / 2), 1e-15);
    const RandomSection sec = sample_section(ev3.basis(), 5, 0);
    s.check("reproducing property", reproducing_check(ev3, sec.coefficients) <= 1e-9);
  });

  s.guarded("sampling", [&] {
    const auto ev = KernelEvaluator::create(MetricSequenceSpec::fubini_study({4}), 1);
    const StatisticMatrix m = build_statistic_matrix(ev, test_function_by_id("const1"));
    const ExactMoments mm = mass_moments(m);
    s.close("trace mean k=4", mm.mean, 5.0 / 4.0, 1e-12);
    s.close("trace variance k=4", mm.variance, 5.0 / 16.0, 1e-12);
    const RandomSection sec = sample_section(ev.basis(), 11, 3);
    s.close("Parseval", mass_statistic(sec, m), sec.coefficients.squaredNorm() / 4.0, 1e-12);
    RandomSection zero = sec;
    zero.coefficients.setZero();
    s.close("zero section", mass_statistic(zero, m), 0.0, 0.0);
    const Decomposition dec = decompose_statistic(sec, m);
    s.close("F + R = M", dec.main + dec.remainder, dec.mass, 1e-12);
    s.close("FS main part", dec.main, sec.coefficients.squaredNorm() / 5.0, 1e-12);
    const MonteCarloEstimate self = pair_correlation_estimate(ev, origin, origin, 4000, 3);
    s.check("pair correlation at x = y", std::abs(self.mean - 2.0) <= 4.0 * self.standard_error);
  });

  s.guarded("stats", [&] {
    std::vector<double> pm = {-1.0, 1.0};
    const MomentSummary ms = moment_summary(pm);
    s.close("moments {-1, 1} mean", ms.mean, 0.0, 0.0);
    s.close("moments {-1, 1} variance", ms.variance, 2.0, 0.0);
    std::vector<double> zeros(100, 0.0);
    s.close("KS of point mass at 0", ks_statistic(zeros).statistic, 0.5, 1e-15);
    s.check("constant sample has no skewness", !moment_summary(zeros).skewness.has_value());
    const auto ev16 = KernelEvaluator::create(MetricSequenceSpec::fubini_study({16}), 1);
    s.close("FS integral of N at k=16", ev16.integrate_nodes(ev16.normalized_row(one)), 1.0 / 9.0, 1e-12);
    const StatisticMatrix m = build_statistic_matrix(
        KernelEvaluator::create(MetricSequenceSpec::fubini_study({64}), 1), test_function_by_id("height"));
    const VarianceRatio vr = variance_ratio(m);
    s.close("FS Var F / Var M at k=64", vr.main_over_mass, std::pow(64.0 / 65.0, 2), 1e-12);
  });

  s.guarded("runner", [&] {
    bool rejected = false;
    try {
      parse_config(R"({"kind":"clt","k":[64],"seed":7,"banana":1})");
    } catch (const ConfigError& e) {
      rejected = std::string(e.what()).find("unknown key: banana") != std::string::npos;
    }
    s.check("unknown key rejected", rejected);
    const RunConfig cfg = parse_config(R"({"kind":"clt","k":[64],"phi":"const1","samples":2000,"seed":7})");
    s.check("minimal config parses", cfg.kind == "clt" && cfg.k == std::vector<int>{64});
  });

  return s.take();
}

}  // namespace masslab
