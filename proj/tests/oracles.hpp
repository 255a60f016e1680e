// Independent reference computations used by the tests.
#pragma once

#include <cmath>
#include <complex>
#include <functional>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

/// Adaptive Simpson quadrature on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

/// int |z|^{2j} (1 + |z|^2)^{-k} dV over CP^1 for the area-one Fubini-Study form, by
/// integrating the radial profile 2 r^{2j+1} / (1 + r^2)^{k+2} numerically on r = t / (1 - t).
inline double monomial_integral(int j, int k) {
  return integrate(
      [&](double t) {
        if (t >= 1.0) return 0.0;
        const double r = t / (1.0 - t);
        const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
        return 2.0 * std::pow(r, 2 * j + 1) / std::pow(1.0 + r * r, k + 2) * jac;
      },
      0.0, 1.0, 1e-15);
}

/// j! (k - j)! / (k + 1)!.
inline double beta_value(int j, int k) {
  return std::exp(std::lgamma(j + 1.0) + std::lgamma(k - j + 1.0) - std::lgamma(k + 2.0));
}

inline double binomial(int n, int r) {
  double out = 1.0;
  for (int i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

/// |K_k(z, w)| for the Fubini-Study power metric in unit frames, summed term by term
/// from the monomial orthonormal basis sqrt((k+1) binom(k, j)) z^j.
inline double fs_kernel_modulus(int k, std::complex<double> z, std::complex<double> w) {
  std::complex<double> sum = 0.0;
  for (int j = 0; j <= k; ++j) sum += (k + 1.0) * binomial(k, j) * std::pow(z * std::conj(w), j);
  return std::abs(sum) / std::pow(1.0 + std::norm(z), 0.5 * k) / std::pow(1.0 + std::norm(w), 0.5 * k);
}

}  // namespace oracle
