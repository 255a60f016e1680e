#include "masslab/bundles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace masslab {

namespace {

// Fixed evaluation grid: a polar grid of |z| <= 1 in each affine chart.
std::vector<Complex> chart_grid() {
  std::vector<Complex> grid;
  grid.emplace_back(0.0, 0.0);
  for (double r : {0.25, 0.5, 0.75, 1.0}) {
    for (int j = 0; j < 8; ++j) grid.push_back(std::polar(r, 2.0 * kPi * j / 8.0 + 0.1));
  }
  return grid;
}

ProjectivePoint chart_point(Complex z, int chart) {
  return chart == 0 ? ProjectivePoint(1.0, z) : ProjectivePoint(z, 1.0);
}

// Weight as a function of the affine coordinate of the given chart.
double chart_weight(const MetricSequenceSpec& spec, int p, Complex z, int chart) {
  const double k = spec.degree(p);
  double value = 0.5 * k * std::log1p(std::norm(z));
  const double eps = spec.epsilon(p);
  if (eps != 0.0) value += eps * spec.eta(chart_point(z, chart));
  return value;
}

template <typename F>
double laplacian(F&& f, Complex z, double h) {
  const Complex ih(0.0, h);
  return (f(z + h) + f(z - h) + f(z + ih) + f(z - ih) - 4.0 * f(z)) / (h * h);
}

}  // namespace

std::vector<PerturbationProfile> builtin_profiles() {
  std::vector<PerturbationProfile> out;
  out.push_back({"const", [](const ProjectivePoint&) { return 1.0; },
                 [](const ProjectivePoint&) { return 0.0; }, 0.0});
  out.push_back({"height", [](const ProjectivePoint& x) { return x.height(); },
                 [](const ProjectivePoint& x) { return -4.0 * x.height(); }, 4.0});
  out.push_back({"tilt", [](const ProjectivePoint& x) { return x.to_sphere()[0]; },
                 [](const ProjectivePoint& x) { return -4.0 * x.to_sphere()[0]; }, 4.0});
  return out;
}

PerturbationProfile profile_by_id(const std::string& id) {
  for (auto& profile : builtin_profiles()) {
    if (profile.id == id) return profile;
  }
  throw std::invalid_argument("unknown perturbation profile: " + id);
}

std::string to_string(DegreeLaw law) {
  switch (law) {
    case DegreeLaw::kExplicit: return "list";
    case DegreeLaw::kLinear: return "p";
    case DegreeLaw::kSquare: return "p^2";
    case DegreeLaw::kExponential: return "2^p";
  }
  return "?";
}

std::string to_string(AmplitudeLaw law) {
  switch (law) {
    case AmplitudeLaw::kZero: return "zero";
    case AmplitudeLaw::kConstant: return "constant";
    case AmplitudeLaw::kPower: return "power";
  }
  return "?";
}

DegreeLaw parse_degree_law(const std::string& text) {
  if (text == "list") return DegreeLaw::kExplicit;
  if (text == "p") return DegreeLaw::kLinear;
  if (text == "p^2") return DegreeLaw::kSquare;
  if (text == "2^p") return DegreeLaw::kExponential;
  throw std::invalid_argument("unknown degree law: " + text);
}

AmplitudeLaw parse_amplitude_law(const std::string& text) {
  if (text == "zero") return AmplitudeLaw::kZero;
  if (text == "constant") return AmplitudeLaw::kConstant;
  if (text == "power") return AmplitudeLaw::kPower;
  throw std::invalid_argument("unknown amplitude law: " + text);
}

MetricSequenceSpec MetricSequenceSpec::fubini_study(std::vector<int> degrees) {
  MetricSequenceSpec spec;
  spec.degrees = std::move(degrees);
  return spec;
}

MetricSequenceSpec MetricSequenceSpec::perturbed(std::vector<int> degrees, AmplitudeLaw law, double c,
                                                 const std::string& profile_id, double a) {
  MetricSequenceSpec spec;
  spec.degrees = std::move(degrees);
  spec.amplitude_law = law;
  spec.c = c;
  spec.a = a;
  spec.profile = profile_by_id(profile_id);
  return spec;
}

int MetricSequenceSpec::degree(int p) const {
  if (p < 1) throw std::invalid_argument("metric sequence index must be >= 1");
  switch (degree_law) {
    case DegreeLaw::kExplicit:
      if (p > explicit_length()) {
        throw std::out_of_range("metric sequence index " + std::to_string(p) + " beyond the degree list");
      }
      return degrees[static_cast<std::size_t>(p - 1)];
    case DegreeLaw::kLinear: return p;
    case DegreeLaw::kSquare: return p * p;
    case DegreeLaw::kExponential:
      if (p > 30) throw std::out_of_range("2^p degree law limited to p <= 30");
      return 1 << p;
  }
  return 0;
}

double MetricSequenceSpec::epsilon(int p) const {
  switch (amplitude_law) {
    case AmplitudeLaw::kZero: return 0.0;
    case AmplitudeLaw::kConstant: return c;
    case AmplitudeLaw::kPower: return c * std::pow(area(p), 1.0 - a);
  }
  return 0.0;
}

bool MetricSequenceSpec::summable_law() const {
  switch (degree_law) {
    case DegreeLaw::kExplicit: return true;  // finite list
    case DegreeLaw::kLinear: return false;
    case DegreeLaw::kSquare:
    case DegreeLaw::kExponential: return true;
  }
  return false;
}

std::string MetricSequenceSpec::canonical() const {
  char buf[128];
  std::ostringstream out;
  out << "law=" << to_string(degree_law) << ";amp=" << to_string(amplitude_law);
  std::snprintf(buf, sizeof buf, ";c=%.17g;a=%.17g", c, a);
  out << buf << ";profile=" << profile.id;
  return out.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

double weight_in_chart(const MetricSequenceSpec& spec, int p, const ProjectivePoint& x, int chart) {
  if (chart != 0 && chart != 1) throw std::invalid_argument("chart index must be 0 or 1");
  const Complex num = chart == 0 ? x.z1() : x.z0();
  const Complex den = chart == 0 ? x.z0() : x.z1();
  if (den == Complex(0.0)) throw std::domain_error("point is the pole of the requested chart");
  return chart_weight(spec, p, num / den, chart);
}

double weight_at(const MetricSequenceSpec& spec, int p, const ProjectivePoint& x) {
  return weight_in_chart(spec, p, x, std::abs(x.z0()) >= std::abs(x.z1()) ? 0 : 1);
}

double curvature_deviation_at(const MetricSequenceSpec& spec, int p, const ProjectivePoint& x, double step) {
  const double eps = spec.epsilon(p);
  if (eps == 0.0) return 0.0;
  const int chart = std::abs(x.z0()) >= std::abs(x.z1()) ? 0 : 1;
  const Complex z = chart == 0 ? x.z1() / x.z0() : x.z0() / x.z1();
  auto eta = [&](Complex v) { return spec.eta(chart_point(v, chart)); };
  const double r = 1.0 + std::norm(z);
  // dd^c f = (Laplacian f / 2pi) dx dy and omega = (1/pi) dx dy / (1 + |z|^2)^2.
  return eps * 0.5 * r * r * laplacian(eta, z, step) / spec.area(p);
}

DiophantineCheck check_diophantine(const MetricSequenceSpec& spec, int p, double constant) {
  DiophantineCheck result;
  const double eps = spec.epsilon(p);
  if (eps == 0.0) return result;
  for (int chart = 0; chart < 2; ++chart) {
    for (Complex z : chart_grid()) {
      const double dev = std::abs(curvature_deviation_at(spec, p, chart_point(z, chart)));
      result.deviation = std::max(result.deviation, dev);
    }
  }
  const double area = spec.area(p);
  result.scaled = result.deviation * std::pow(area, spec.a);
  result.closed_form_bound = eps * spec.profile.curvature_sup / area;
  result.within_constant = result.scaled <= constant;
  if (!result.within_constant) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "deviation * A_p^a = %.6g exceeds the configured constant %.6g at p = %d",
                  result.scaled, constant, p);
    result.warning = buf;
  }
  return result;
}

double estimate_metric_norm3(const MetricSequenceSpec& spec, int p, double step) {
  if (step < 1e-4) {
    throw std::invalid_argument("estimate_metric_norm3: grid spacing below 1e-4 amplifies rounding noise");
  }
  const double h = step;
  double best = 1.0;
  for (int chart = 0; chart < 2; ++chart) {
    auto f = [&](double x, double y) { return chart_weight(spec, p, Complex(x, y), chart); };
    for (Complex z : chart_grid()) {
      const double x = z.real();
      const double y = z.imag();
      auto dxx = [&](double yy) { return (f(x + h, yy) - 2.0 * f(x, yy) + f(x - h, yy)) / (h * h); };
      auto dyy = [&](double xx) { return (f(xx, y + h) - 2.0 * f(xx, y) + f(xx, y - h)) / (h * h); };
      const double derivatives[] = {
          f(x, y),
          (f(x + h, y) - f(x - h, y)) / (2.0 * h),
          (f(x, y + h) - f(x, y - h)) / (2.0 * h),
          dxx(y),
          dyy(x),
          (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h),
          (f(x + 2 * h, y) - 2.0 * f(x + h, y) + 2.0 * f(x - h, y) - f(x - 2 * h, y)) / (2.0 * h * h * h),
          (f(x, y + 2 * h) - 2.0 * f(x, y + h) + 2.0 * f(x, y - h) - f(x, y - 2 * h)) / (2.0 * h * h * h),
          (dxx(y + h) - dxx(y - h)) / (2.0 * h),
          (dyy(x + h) - dyy(x - h)) / (2.0 * h),
      };
      for (double d : derivatives) best = std::max(best, std::abs(d));
    }
  }
  return best;
}

double normal_chart_weight(const MetricSequenceSpec& spec, int p, const NormalChart& chart, Complex w) {
  const double k = spec.degree(p);
  double value = 0.5 * k * std::log1p(std::norm(w / chart.scale));
  const double eps = spec.epsilon(p);
  if (eps != 0.0) value += eps * spec.eta(chart.map(w));
  return value;
}

TaylorDecomposition taylor_decomposition(const MetricSequenceSpec& spec, int p, const ProjectivePoint& x,
                                         double step) {
  const NormalChart chart = normal_chart_at(x);
  auto f = [&](double u, double v) { return normal_chart_weight(spec, p, chart, Complex(u, v)); };
  const double h = step;
  const double f0 = f(0, 0);
  const double fu = (f(h, 0) - f(-h, 0)) / (2 * h);
  const double fv = (f(0, h) - f(0, -h)) / (2 * h);
  const double fuu = (f(h, 0) - 2 * f0 + f(-h, 0)) / (h * h);
  const double fvv = (f(0, h) - 2 * f0 + f(0, -h)) / (h * h);
  const double fuv = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);

  TaylorDecomposition t;
  t.lambda = 0.25 * (fuu + fvv);
  t.psi[0] = f0;
  t.psi[1] = Complex(fu, -fv);
  t.psi[2] = 0.25 * Complex(fuu - fvv, -2.0 * fuv);

  double bound = 0.0;
  for (double r : {0.02, 0.04, 0.06, 0.08, 0.1}) {
    for (int j = 0; j < 12; ++j) {
      const Complex w = std::polar(r, 2.0 * kPi * j / 12.0);
      const double model = (t.psi[0] + t.psi[1] * w + t.psi[2] * w * w).real() + t.lambda * r * r;
      bound = std::max(bound, std::abs(f(w.real(), w.imag()) - model) / (r * r * r));
    }
  }
  // Slack for points between the fitting radii.
  t.remainder_bound = 1.5 * bound;
  return t;
}

}  // namespace masslab
