// The line bundle sequence (O(k_p), h_FS^{k_p} e^{-2 eps_p eta}) over CP^1.
//
// In the standard affine chart the weight of the frame e_p = (affine frame of O(k_p)) is
//
//     phi_p(z) = (k_p / 2) log(1 + |z|^2) + eps_p * eta(z),
//
// so |e_p|_{h_p} = exp(-phi_p) and c_1(L_p, h_p) = dd^c phi_p = k_p omega + eps_p dd^c eta,
// with dd^c = (i/pi) d d-bar.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "masslab/geometry.hpp"

namespace masslab {

/// A smooth real function eta on CP^1 used to perturb the Fubini-Study power metric.
struct PerturbationProfile {
  std::string id;
  std::function<double(const ProjectivePoint&)> eta;
  /// Closed-form density of dd^c eta with respect to omega.
  std::function<double(const ProjectivePoint&)> curvature_density;
  /// sup |dd^c eta / omega| over CP^1.
  double curvature_sup = 0.0;
};

/// const (eta = 1), height (eta = 2s - 1), tilt (eta = x1 on the sphere).
/// The two coordinate functions satisfy dd^c eta = -4 eta omega.
std::vector<PerturbationProfile> builtin_profiles();
PerturbationProfile profile_by_id(const std::string& id);

enum class DegreeLaw { kExplicit, kLinear, kSquare, kExponential };
enum class AmplitudeLaw { kZero, kConstant, kPower };

std::string to_string(DegreeLaw law);
std::string to_string(AmplitudeLaw law);
/// Accepts "list", "p", "p^2", "2^p".
DegreeLaw parse_degree_law(const std::string& text);
/// Accepts "zero", "constant", "power".
AmplitudeLaw parse_amplitude_law(const std::string& text);

struct MetricSequenceSpec {
  DegreeLaw degree_law = DegreeLaw::kExplicit;
  /// k_p = degrees[p - 1] for the explicit law.
  std::vector<int> degrees;
  AmplitudeLaw amplitude_law = AmplitudeLaw::kZero;
  double c = 0.1;
  /// Target Diophantine rate.
  double a = 0.5;
  PerturbationProfile profile = profile_by_id("tilt");

  static MetricSequenceSpec fubini_study(std::vector<int> degrees);
  static MetricSequenceSpec perturbed(std::vector<int> degrees, AmplitudeLaw law, double c,
                                      const std::string& profile_id, double a = 0.5);

  /// Number of indices for which k_p is defined (unbounded laws report 0).
  int explicit_length() const { return static_cast<int>(degrees.size()); }
  int degree(int p) const;
  /// A_p = k_p.
  double area(int p) const { return static_cast<double>(degree(p)); }
  double epsilon(int p) const;
  bool unperturbed(int p) const { return epsilon(p) == 0.0; }
  double eta(const ProjectivePoint& x) const { return profile.eta(x); }

  /// Whether sum_p 1/A_p converges for the law on all of N (n = 1).
  bool summable_law() const;

  /// Text fixing every field that affects a basis; hashed into cache names.
  std::string canonical() const;
};

/// 64-bit FNV-1a; names cache files.
std::uint64_t fnv1a64(const std::string& text);

/// Weight in the chart where the point's affine coordinate has modulus <= 1.
double weight_at(const MetricSequenceSpec& spec, int p, const ProjectivePoint& x);
/// Weight in chart 0 (z = z1/z0) or chart 1 (zeta = z0/z1); throws if x is that chart's pole.
double weight_in_chart(const MetricSequenceSpec& spec, int p, const ProjectivePoint& x, int chart);

struct DiophantineCheck {
  /// max over the grid of |eps_p (dd^c eta / omega)| / A_p, from second differences.
  double deviation = 0.0;
  /// deviation * A_p^a.
  double scaled = 0.0;
  /// eps_p * sup|dd^c eta / omega| / A_p from the profile's closed form.
  double closed_form_bound = 0.0;
  bool within_constant = true;
  std::string warning;
};

DiophantineCheck check_diophantine(const MetricSequenceSpec& spec, int p, double constant = 1.0);

/// Density of dd^c(eps_p eta) / omega at x, divided by A_p, from second differences.
double curvature_deviation_at(const MetricSequenceSpec& spec, int p, const ProjectivePoint& x,
                              double step = 1e-3);

/// Finite-difference proxy for ||h_p||_3: max over both charts (|z| <= 1) of the
/// derivatives of the weight up to order 3 in real coordinates; at least 1.
/// Throws std::invalid_argument when step < 1e-4.
double estimate_metric_norm3(const MetricSequenceSpec& spec, int p, double step = 1e-2);

/// Second-order jet of the weight in the normal chart at a point:
/// phi(w) = Re(c0 + c1 w + c2 w^2) + lambda |w|^2 + remainder(w).
struct TaylorDecomposition {
  double lambda = 0.0;
  std::array<Complex, 3> psi{};
  double remainder_bound = 0.0;
};

/// Weight of h_p in the normal chart at center, w.r.t. the rotated standard frame.
double normal_chart_weight(const MetricSequenceSpec& spec, int p, const NormalChart& chart, Complex w);

TaylorDecomposition taylor_decomposition(const MetricSequenceSpec& spec, int p, const ProjectivePoint& x,
                                         double step = 1e-3);

}  // namespace masslab
