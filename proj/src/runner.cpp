#include "masslab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "masslab/onb_cache.hpp"
#include "masslab/rng.hpp"
#include "masslab/sampling.hpp"
#include "masslab/stats.hpp"

namespace masslab {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string format_g(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ProjectivePoint random_point(std::uint64_t seed, std::uint64_t index) {
  const auto u = uniform_pair(seed, index, 0, StreamTag::kPoint);
  return ProjectivePoint::from_polar(u[0], 2.0 * kPi * u[1]);
}

ProjectivePoint antipode(const ProjectivePoint& x) { return ProjectivePoint(-std::conj(x.z1()), std::conj(x.z0())); }

double square_integral(const TestFunction& phi, const KernelEvaluator& ev) {
  if (phi.integral_of_square) return *phi.integral_of_square;
  auto v = ev.sample_on_nodes(phi);
  for (double& e : v) e *= e;
  return ev.integrate_nodes(v);
}

ResultRow make_row(const KernelEvaluator& ev, const std::string& phi, const std::string& check, double estimate,
                   double target, bool pass) {
  ResultRow row;
  row.k = ev.degree();
  row.area = ev.area();
  row.dimension = ev.dimension();
  row.phi = phi;
  row.check = check;
  row.estimate = estimate;
  row.target = target;
  row.abs_err = std::abs(estimate - target);
  row.pass = pass;
  return row;
}

// Per-kind experiment drivers. Each appends rows for one index p.
class Experiment {
 public:
  Experiment(const RunConfig& config, ExperimentReport& report)
      : config_(config), report_(report), spec_(config.metric_spec()), cache_dir_(config.out) {}

  void run() {
    const std::vector<int> indices = config_.indices();
    for (std::size_t i = 0; i < indices.size(); ++i) {
      last_ = i + 1 == indices.size();
      const int p = indices[i];
      if (config_.kind == "equidistribution") continue;
      const KernelEvaluator ev = cached_evaluator(spec_, p, cache_dir_);
      if (config_.kind == "basis") basis(ev);
      else if (config_.kind == "kernel-check") kernel_check(ev);
      else if (config_.kind == "variance") variance(ev);
      else if (config_.kind == "clt") clt(ev);
      else if (config_.kind == "ts-conditions") ts(ev);
    }
    if (config_.kind == "equidistribution") equidistribution(indices);
  }

 private:
  double tol(double fallback) const { return config_.tolerance.value_or(fallback); }
  bool fs() const { return config_.eps_law == "zero"; }

  // Trend check: true when value < previous value of the same check (or no previous value).
  bool decreasing(const std::string& key, double value) {
    auto [it, inserted] = previous_.try_emplace(key, value);
    const bool ok = inserted || value < it->second;
    it->second = value;
    return ok;
  }
  bool increasing(const std::string& key, double value) { return decreasing(key, -value); }

  void basis(const KernelEvaluator& ev) {
    const OrthonormalBasis& b = ev.basis();
    auto row = make_row(ev, "-", "gram_residual", b.gram_residual, 0.0, b.gram_residual <= tol(1e-10));
    row.extras = {{"identity", b.identity ? 1.0 : 0.0}, {"epsilon", b.epsilon}};
    report_.rows.push_back(row);

    const double integral = ev.integrate_nodes(ev.bergman_grid());
    const double d = static_cast<double>(ev.dimension());
    report_.rows.push_back(make_row(ev, "-", "bergman_integral", integral, d, std::abs(integral - d) <= 1e-9 * d));

    const DiophantineCheck dio = check_diophantine(spec_, ev.p(), config_.diophantine_constant);
    row = make_row(ev, "-", "diophantine", dio.scaled, dio.closed_form_bound * std::pow(ev.area(), spec_.a),
                   dio.within_constant);
    row.extras = {{"deviation", dio.deviation}, {"constant", config_.diophantine_constant}};
    report_.rows.push_back(row);
    if (!dio.warning.empty()) report_.warnings.push_back("k=" + std::to_string(ev.degree()) + ": " + dio.warning);

    const double norm3 = estimate_metric_norm3(spec_, ev.p());
    const double ratio = std::cbrt(norm3) / std::sqrt(ev.area());
    row = make_row(ev, "-", "metric_norm3_ratio", ratio, 0.0, decreasing("norm3", ratio));
    row.extras = {{"norm3_proxy", norm3}};
    report_.rows.push_back(row);
  }

  void kernel_check(const KernelEvaluator& ev) {
    const int k = ev.degree();
    const double area = ev.area();
    const std::uint64_t seed = derive_seed(config_.seed, static_cast<std::uint64_t>(k));

    // Diagonal: exact constancy on FS, uniform approach to A_p otherwise.
    double max_dev = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const double bx = ev.bergman(random_point(seed, i));
      max_dev = std::max(max_dev, fs() ? std::abs(bx - (k + 1.0)) : std::abs(bx / area - 1.0));
    }
    if (fs()) {
      report_.rows.push_back(make_row(ev, "-", "bergman_constant", max_dev, 0.0, max_dev <= 1e-9 * (k + 1.0)));
    } else {
      report_.rows.push_back(make_row(ev, "-", "bergman_over_area", max_dev, 0.0, decreasing("bdev", max_dev)));
    }
    const double integral = ev.integrate_nodes(ev.bergman_grid());
    const double d = static_cast<double>(ev.dimension());
    report_.rows.push_back(make_row(ev, "-", "bergman_integral", integral, d, std::abs(integral - d) <= 1e-9 * d));

    const RandomSection s = sample_section(ev.basis(), seed, 0);
    const double residual = reproducing_check(ev, s.coefficients) / std::max(1.0, s.coefficients.norm());
    report_.rows.push_back(make_row(ev, "-", "reproducing", residual, 0.0, residual <= 1e-9 * std::sqrt(area)));

    if (fs()) {
      double worst = 0.0;
      for (std::uint64_t i = 0; i < 50; ++i) {
        const ProjectivePoint x = random_point(seed, 1000 + 2 * i);
        const ProjectivePoint y = random_point(seed, 1001 + 2 * i);
        const double closed = std::pow(std::abs(hermitian_product(x, y)), k);
        worst = std::max(worst, std::abs(ev.normalized(x, y) - closed));
      }
      report_.rows.push_back(make_row(ev, "-", "kernel_closed_form", worst, 0.0, worst <= 1e-10));
    }

    // Near-diagonal profile at u = 0 on a 25-point polar grid |v| <= 1.5.
    const ProjectivePoint center = ProjectivePoint::from_affine(0.0);
    const double lambda_over_area = fs() ? kPi / 2 : taylor_decomposition(spec_, ev.p(), center).lambda / area;
    double near = 0.0;
    for (int i = 1; i <= 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const Complex v = std::polar(0.3 * i, 2.0 * kPi * j / 5.0);
        near = std::max(near, near_diagonal_profile(ev, center, 0.0, v, lambda_over_area).deviation);
      }
    }
    bool near_pass = decreasing("near", near);
    if (k >= 256) near_pass = near_pass && near <= tol(0.02);
    auto row = make_row(ev, "-", "near_diagonal", near, 0.0, near_pass);
    row.extras = {{"lambda_over_area", lambda_over_area}};
    report_.rows.push_back(row);

    // Off-diagonal envelope on pairs beyond b log A / sqrt(A).
    const double cutoff = config_.b * std::log(area) / std::sqrt(area);
    const auto pairs = sample_far_pairs(1000, cutoff, seed);
    if (pairs.empty()) {
      row = make_row(ev, "-", "offdiagonal_decay", kNaN, 0.0, false);
      row.abs_err = kNaN;
      row.extras = {{"cutoff", cutoff}, {"diameter", kDiameter}};
      report_.warnings.push_back("k=" + std::to_string(k) + ": far region d >= " + format_g(cutoff) +
                                 " is empty (diameter " + format_g(kDiameter) + "); decay fit not possible");
    } else {
      const DecayFit fit = offdiagonal_decay_fit(ev, pairs);
      row = make_row(ev, "-", "offdiagonal_decay", fit.violation_fraction, 0.0,
                     fit.feasible && fit.violation_fraction <= 0.01);
      row.extras = {{"cutoff", cutoff}, {"c1", fit.c1}, {"c2", fit.c2}, {"pairs", static_cast<double>(fit.pair_count)}};
    }
    report_.rows.push_back(row);

    // Pair correlation 1 + N^2 at coincident, antipodal and generic pairs.
    const std::size_t n = std::max<std::size_t>(config_.samples, 1000);
    const ProjectivePoint x = ProjectivePoint::from_affine(0.0);
    const std::pair<ProjectivePoint, ProjectivePoint> pairs_to_check[] = {
        {x, x}, {x, antipode(x)}, {x, ProjectivePoint::from_affine(1.0)}};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& [px, py] = pairs_to_check[i];
      const double nxy = ev.normalized(px, py);
      const MonteCarloEstimate mc = pair_correlation_estimate(ev, px, py, n, derive_seed(seed, 10 + i));
      row = make_row(ev, "-", "pair_correlation", mc.mean, 1.0 + nxy * nxy, false);
      row.pass = row.abs_err <= 3.0 * mc.standard_error;
      row.extras = {{"standard_error", mc.standard_error}, {"samples", static_cast<double>(n)}};
      report_.rows.push_back(row);
    }
  }

  void variance(const KernelEvaluator& ev) {
    const TestFunction phi = test_function_by_id(config_.phi);
    const StatisticMatrix m = build_statistic_matrix(ev, phi);
    const ExactMoments mm = mass_moments(m);
    const double sq = square_integral(phi, ev);
    const double law = mm.variance * ev.area() / sq;
    const double err = std::abs(law - 1.0);
    bool pass = decreasing("variance", err);
    if (last_) pass = pass && err <= tol(0.1);
    auto row = make_row(ev, phi.id, "variance_law", law, 1.0, pass);

    auto density = ev.sample_on_nodes(phi);
    const auto& bergman = ev.bergman_grid();
    for (std::size_t i = 0; i < density.size(); ++i) density[i] *= bergman[i];
    const double mean_target = ev.integrate_nodes(density) / ev.area();
    const VarianceRatio ratio = variance_ratio(m);
    row.extras = {{"mean", mm.mean},
                  {"variance", mm.variance},
                  {"integral_phi_sq", sq},
                  {"var_f_over_var_m", ratio.main_over_mass},
                  {"var_r_over_var_m", ratio.remainder_over_mass}};
    report_.rows.push_back(row);
    report_.rows.push_back(make_row(ev, phi.id, "mean", mm.mean, mean_target,
                                    std::abs(mm.mean - mean_target) <= 1e-10 * std::max(1.0, std::abs(mean_target))));

    if (fs()) {
      const double a = ev.area();
      const double f_target = (a / (a + 1.0)) * (a / (a + 1.0));
      const double r_target = 1.0 / ((a + 1.0) * (a + 1.0));
      report_.rows.push_back(make_row(ev, phi.id, "var_f_over_var_m", ratio.main_over_mass, f_target,
                                      std::abs(ratio.main_over_mass - f_target) <= 1e-12));
      report_.rows.push_back(make_row(ev, phi.id, "var_r_over_var_m", ratio.remainder_over_mass, r_target,
                                      std::abs(ratio.remainder_over_mass - r_target) <= 1e-12));
    } else {
      report_.rows.push_back(make_row(ev, phi.id, "var_f_over_var_m", ratio.main_over_mass, 1.0,
                                      increasing("vf", ratio.main_over_mass)));
      report_.rows.push_back(make_row(ev, phi.id, "var_r_over_var_m", ratio.remainder_over_mass, 0.0,
                                      decreasing("vr", ratio.remainder_over_mass)));
    }
  }

  void clt(const KernelEvaluator& ev) {
    const TestFunction phi = test_function_by_id(config_.phi);
    const StatisticMatrix m = build_statistic_matrix(ev, phi);
    const std::uint64_t seed = derive_seed(config_.seed, static_cast<std::uint64_t>(ev.degree()));
    const CltResult result = clt_experiment(ev, m, config_.samples, seed);
    const double n = static_cast<double>(config_.samples);

    auto row = make_row(ev, phi.id, "ks", result.ks.statistic, 0.0, result.ks.pass);
    row.extras = {{"threshold", result.ks.threshold}, {"samples", n}};
    report_.rows.push_back(row);

    // Skewness of a^* Q a: 2 tr(Q^3) / tr(Q^2)^{3/2}.
    const Eigen::MatrixXcd q2 = m.q * m.q;
    const double tr2 = q2.trace().real();
    const double tr3 = (q2 * m.q).trace().real();
    const double skew_target = 2.0 * tr3 / std::pow(tr2, 1.5);
    const double skew_se = std::sqrt(6.0 * (n - 2.0) / ((n + 1.0) * (n + 3.0)));
    const double skew = result.summary.skewness.value_or(kNaN);
    row = make_row(ev, phi.id, "skewness", skew, skew_target, std::abs(skew - skew_target) <= 3.0 * skew_se);
    row.extras = {{"standard_error", skew_se},
                  {"excess_kurtosis", result.summary.excess_kurtosis.value_or(kNaN)},
                  {"mean", result.summary.mean},
                  {"variance", result.summary.variance}};
    report_.rows.push_back(row);

    // Distance between the laws of M and of its main part F.
    const VarianceRatio ratio = variance_ratio(m);
    const double distance = two_sample_ks(result.normalized, result.normalized_main);
    const double bound = 2.0 * std::sqrt(ratio.remainder_over_mass) + 2.0 / std::sqrt(n);
    row = make_row(ev, phi.id, "sandwich_ks", distance, 0.0, distance <= bound);
    row.extras = {{"bound", bound}, {"beta", ratio.beta}};
    report_.rows.push_back(row);

    if (last_) report_.histogram_samples = result.normalized;
  }

  void ts(const KernelEvaluator& ev) {
    const TestFunction phi = test_function_by_id(config_.phi);
    const TSConditionReport ts = ts_conditions(ev, phi, config_.b);
    const double k = ev.degree();
    const double closed = 2.0 / (k + 2.0);
    bool pass = decreasing("ts_ii", ts.sup_integral);
    if (fs()) pass = pass && std::abs(ts.sup_integral - closed) <= tol(1e-6);
    auto row = make_row(ev, phi.id, "ts_ii_sup_integral", ts.sup_integral, closed, pass);
    row.extras = {{"grid_size", static_cast<double>(ts.grid_size)}, {"grid_spacing", ts.grid_spacing}};
    report_.rows.push_back(row);

    const double rel = std::abs(ts.ratio / ts.predicted_limit - 1.0);
    bool ratio_pass = ts.ratio >= 0.5 * ts.predicted_limit;
    if (k >= 256) ratio_pass = ratio_pass && rel <= 0.15;
    row = make_row(ev, phi.id, "ts_i_ratio", ts.ratio, ts.predicted_limit, ratio_pass);
    row.extras = {{"numerator", ts.numerator}, {"ball_radius", ts.ball_radius}, {"b", ts.b}};
    report_.rows.push_back(row);
    if (!ts.warning.empty()) report_.warnings.push_back("k=" + std::to_string(ev.degree()) + ": " + ts.warning);
  }

  void equidistribution(const std::vector<int>& indices) {
    const TestFunction phi = test_function_by_id(config_.phi);
    const EquidistributionReport eq = equidistribution_experiment(
        spec_, indices.front(), indices.back(), phi, config_.epsilon, config_.samples, config_.seed);
    const double n = static_cast<double>(config_.samples);
    for (const auto& r : eq.rows) {
      ResultRow row;
      row.k = r.degree;
      row.area = spec_.area(r.p);
      row.dimension = r.dimension;
      row.phi = phi.id;
      row.check = "exceedance";
      row.estimate = r.exceed;
      row.target = r.chebyshev_bound_2eps;
      row.abs_err = std::max(0.0, r.exceed - r.chebyshev_bound_2eps);
      row.pass = r.exceed <= r.chebyshev_bound_2eps + 3.0 * r.exceed_se;
      row.extras = {{"p", static_cast<double>(r.p)},
                    {"mean", r.mean},
                    {"variance", r.variance},
                    {"bias", r.bias},
                    {"standard_error", r.exceed_se},
                    {"chebyshev_bound_eps", r.chebyshev_bound},
                    {"sup_exceed", r.sup_exceed},
                    {"sup_exceed_se", r.sup_exceed_se},
                    {"sup_bound", r.sup_bound},
                    {"sequences", n}};
      report_.rows.push_back(row);
    }
    if (!eq.law_summable) report_.warnings.push_back("degree law is not summable");
  }

  const RunConfig& config_;
  ExperimentReport& report_;
  MetricSequenceSpec spec_;
  std::filesystem::path cache_dir_;
  std::map<std::string, double> previous_;
  bool last_ = false;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {"kind", "k",       "p_range", "kp_law", "eps_law",   "c",
                                             "a",    "profile", "phi",     "samples", "seed",     "b",
                                             "epsilon", "tolerance", "svg", "out", "diophantine_constant"};
  return keys;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"basis", "kernel-check", "variance", "clt", "ts-conditions",
                                                 "equidistribution"};
  return kinds;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors, "; ")), errors_(std::move(errors)) {}

MetricSequenceSpec RunConfig::metric_spec() const {
  MetricSequenceSpec spec;
  spec.degree_law = parse_degree_law(kp_law);
  spec.degrees = k;
  spec.amplitude_law = parse_amplitude_law(eps_law);
  spec.c = c;
  spec.a = a;
  spec.profile = profile_by_id(profile);
  return spec;
}

std::vector<int> RunConfig::indices() const {
  std::vector<int> out;
  if (kp_law == "list") {
    for (int p = 1; p <= static_cast<int>(k.size()); ++p) out.push_back(p);
  } else if (p_range) {
    for (int p = p_range->first; p <= p_range->second; ++p) out.push_back(p);
  }
  return out;
}

std::string RunConfig::to_json() const {
  Json j;
  j["kind"] = kind;
  if (kp_law == "list") j["k"] = k;
  if (p_range) j["p_range"] = {p_range->first, p_range->second};
  j["kp_law"] = kp_law;
  j["eps_law"] = eps_law;
  j["c"] = c;
  j["a"] = a;
  j["profile"] = profile;
  j["phi"] = phi;
  j["samples"] = samples;
  j["seed"] = seed;
  j["b"] = b;
  j["epsilon"] = epsilon;
  if (tolerance) j["tolerance"] = *tolerance;
  j["svg"] = svg;
  j["diophantine_constant"] = diophantine_constant;
  return j.dump();
}

RunConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError({std::string("invalid JSON: ") + e.what()});
  }
  if (!j.is_object()) throw ConfigError({"config must be a JSON object"});

  std::vector<std::string> errors;
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().count(key)) errors.push_back("unknown key: " + key);
    if (value.is_object()) errors.push_back("key " + key + ": nested objects are not allowed");
  }

  RunConfig cfg;
  auto read = [&](const char* key, auto& target, auto check) {
    if (!j.contains(key)) return false;
    try {
      using T = std::decay_t<decltype(target)>;
      T value = j.at(key).template get<T>();
      if (std::string why = check(value); !why.empty()) {
        errors.push_back(std::string("key ") + key + ": " + why);
        return false;
      }
      target = value;
      return true;
    } catch (const Json::exception&) {
      errors.push_back(std::string("key ") + key + ": wrong type");
      return false;
    }
  };
  auto any = [](const auto&) { return std::string(); };
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v) ? std::string() : std::string("must be > 0"); };
  auto nonneg = [](double v) { return v >= 0.0 && std::isfinite(v) ? std::string() : std::string("must be >= 0"); };

  if (!read("kind", cfg.kind, [](const std::string& v) {
        const auto& kinds = experiment_kinds();
        return std::find(kinds.begin(), kinds.end(), v) != kinds.end() ? std::string()
                                                                        : "unknown kind " + v;
      })) {
    if (!j.contains("kind")) errors.push_back("missing required key: kind");
  }
  if (!j.contains("seed")) errors.push_back("missing required key: seed");
  read("seed", cfg.seed, any);

  read("k", cfg.k, [](const std::vector<int>& v) {
    if (v.empty()) return std::string("must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 1) return std::string("degrees must be >= 1");
      if (i > 0 && v[i] <= v[i - 1]) return std::string("must be strictly increasing");
    }
    return std::string();
  });
  std::vector<int> range;
  const bool has_range = read("p_range", range, [](const std::vector<int>& v) {
    if (v.size() != 2) return std::string("must be [first, last]");
    if (v[0] < 1 || v[1] < v[0]) return std::string("needs 1 <= first <= last");
    return std::string();
  });
  if (has_range) cfg.p_range = std::make_pair(range[0], range[1]);

  cfg.kp_law = j.contains("k") ? "list" : "p^2";
  read("kp_law", cfg.kp_law, [](const std::string& v) {
    try {
      parse_degree_law(v);
      return std::string();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
  });
  if (cfg.kp_law == "list") {
    if (!j.contains("k")) errors.push_back("missing required key: k (degree list)");
    if (has_range) errors.push_back("key p_range: only used with kp_law p, p^2 or 2^p");
  } else {
    if (!j.contains("p_range")) errors.push_back("missing required key: p_range (for kp_law " + cfg.kp_law + ")");
    if (j.contains("k")) errors.push_back("key k: only used with kp_law list");
    if (cfg.kp_law == "2^p" && cfg.p_range && cfg.p_range->second > 30) {
      errors.push_back("key p_range: 2^p law limited to p <= 30");
    }
  }

  read("eps_law", cfg.eps_law, [](const std::string& v) {
    try {
      parse_amplitude_law(v);
      return std::string();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
  });
  read("c", cfg.c, nonneg);
  read("a", cfg.a, positive);
  read("profile", cfg.profile, [](const std::string& v) {
    try {
      profile_by_id(v);
      return std::string();
    } catch (const std::exception& e) {
      return std::string(e.what());
    }
  });
  read("phi", cfg.phi, [](const std::string& v) {
    try {
      test_function_by_id(v);
      return std::string();
    } catch (const std::exception& e) {
      return std::string(e.what());
    }
  });
  if (cfg.kind == "equidistribution" && !j.contains("samples")) cfg.samples = 1000;
  read("samples", cfg.samples, [](std::size_t v) { return v >= 1 ? std::string() : std::string("must be >= 1"); });
  if (cfg.kind == "clt" && cfg.samples < 50) errors.push_back("key samples: clt needs at least 50 samples");
  read("b", cfg.b, positive);
  read("epsilon", cfg.epsilon, positive);
  double tolerance = 0.0;
  if (read("tolerance", tolerance, positive)) cfg.tolerance = tolerance;
  read("svg", cfg.svg, any);
  read("out", cfg.out, [](const std::string& v) { return v.empty() ? std::string("must not be empty") : std::string(); });
  read("diophantine_constant", cfg.diophantine_constant, positive);

  if (cfg.kind == "equidistribution" && errors.empty()) {
    const DegreeLaw law = parse_degree_law(cfg.kp_law);
    if (law == DegreeLaw::kLinear) {
      errors.push_back("kp_law p: sum of 1/k_p diverges, equidistribution needs a summable law (p^2 or 2^p)");
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

bool ExperimentReport::all_pass() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.pass; });
}

KernelEvaluator cached_evaluator(const MetricSequenceSpec& spec, int p, const std::filesystem::path& cache_dir) {
  QuadratureRule rule = build_quadrature(required_quadrature_degree(spec, p));
  if (cache_dir.empty()) {
    OrthonormalBasis basis = build_onb(spec, p, rule);
    return KernelEvaluator(spec, p, std::move(basis), std::move(rule));
  }
  const auto path = onb_cache_path(cache_dir, spec, p);
  if (auto cached = load_onb(path, p, spec.degree(p), spec.epsilon(p))) {
    std::cerr << "cache hit: " << path.string() << "\n";
    return KernelEvaluator(spec, p, std::move(*cached), std::move(rule));
  }
  OrthonormalBasis basis = build_onb(spec, p, rule);
  save_onb(path, basis);
  return KernelEvaluator(spec, p, std::move(basis), std::move(rule));
}

ExperimentReport run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = config;
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, fnv1a64(config.metric_spec().canonical()));
  report.spec_hash = hash;
  Experiment(config, report).run();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string report_json(const ExperimentReport& report) {
  Json j;
  j["tool"] = "masslab";
  j["version"] = kToolVersion;
  j["config"] = Json::parse(report.config.to_json());
  j["spec_hash"] = report.spec_hash;
  j["all_pass"] = report.all_pass();
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["k"] = r.k;
    row["A_p"] = r.area;
    row["d_p"] = r.dimension;
    row["phi"] = r.phi;
    row["check"] = r.check;
    row["estimate"] = r.estimate;
    row["target"] = r.target;
    row["abs_err"] = r.abs_err;
    row["pass"] = r.pass;
    Json extras = Json::object();
    for (const auto& [name, value] : r.extras) extras[name] = value;
    row["extras"] = extras;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string rows_csv(const ExperimentReport& report) {
  std::string out = "k,A_p,d_p,phi,estimate,target,abs_err,pass\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.k) + "," + format_g(r.area) + "," + std::to_string(r.dimension) + "," + r.phi + "," +
           format_g(r.estimate) + "," + format_g(r.target) + "," + format_g(r.abs_err) + "," +
           (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::string histogram_svg(const std::vector<double>& samples) {
  constexpr int kBins = 40;
  constexpr double kLo = -4.0, kHi = 4.0;
  constexpr double kWidth = 640.0, kHeight = 400.0, kMargin = 40.0;
  const double bin = (kHi - kLo) / kBins;
  std::vector<std::size_t> counts(kBins, 0);
  for (double x : samples) {
    if (x < kLo || x >= kHi) continue;
    counts[static_cast<std::size_t>((x - kLo) / bin)] += 1;
  }
  const double n = std::max<double>(1.0, static_cast<double>(samples.size()));
  double top = 1.0 / std::sqrt(2.0 * kPi);
  for (auto c : counts) top = std::max(top, static_cast<double>(c) / (n * bin));
  top *= 1.1;
  auto sx = [&](double x) { return kMargin + (x - kLo) / (kHi - kLo) * (kWidth - 2 * kMargin); };
  auto sy = [&](double y) { return kHeight - kMargin - y / top * (kHeight - 2 * kMargin); };

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kWidth, kHeight, kWidth, kHeight);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i < kBins; ++i) {
    const double density = static_cast<double>(counts[static_cast<std::size_t>(i)]) / (n * bin);
    const double x0 = sx(kLo + i * bin), x1 = sx(kLo + (i + 1) * bin);
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n",
                  x0, sy(density), x1 - x0, sy(0.0) - sy(density));
    svg += buf;
  }
  svg += "<path fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" d=\"";
  for (int i = 0; i <= 200; ++i) {
    const double x = kLo + (kHi - kLo) * i / 200.0;
    const double y = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    std::snprintf(buf, sizeof buf, "%s%.3f %.3f", i == 0 ? "M" : " L", sx(x), sy(y));
    svg += buf;
  }
  svg += "\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n"
                "<text x=\"%.3f\" y=\"%.3f\" font-size=\"14\" font-family=\"sans-serif\">normalized statistic "
                "(N = %zu) vs standard normal density</text>\n",
                sx(kLo), sy(0.0), sx(kHi), sy(0.0), kMargin, kMargin * 0.6, samples.size());
  svg += buf;
  for (int t = -4; t <= 4; ++t) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.3f\" y=\"%.3f\" font-size=\"11\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\">%d</text>\n",
                  sx(t), sy(0.0) + 15.0, t);
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec || !std::filesystem::is_directory(directory)) {
    throw std::runtime_error("cannot create output directory " + directory.string());
  }
  auto write = [&](const std::string& name, const std::string& body) {
    const auto path = directory / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  };
  write("report.json", report_json(report));
  write("rows.csv", rows_csv(report));
  Json timing;
  timing["wall_seconds"] = report.wall_seconds;
  write("timing.json", timing.dump(2) + "\n");
  if (report.config.svg && !report.histogram_samples.empty()) {
    write("hist.svg", histogram_svg(report.histogram_samples));
  }
}

}  // namespace masslab
