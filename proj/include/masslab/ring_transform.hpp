// Discrete Fourier transforms along one angular ring of a QuadratureRule.
#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace masslab {

/// out[l] = sum_m in[m] exp(sign * 2 pi i m l / n). Plans are created once and
/// shared; execute() may be called concurrently from several threads.
class RingTransform {
 public:
  explicit RingTransform(std::size_t n);
  ~RingTransform();
  RingTransform(const RingTransform&) = delete;
  RingTransform& operator=(const RingTransform&) = delete;
  RingTransform(RingTransform&&) noexcept;
  RingTransform& operator=(RingTransform&&) noexcept;

  std::size_t size() const { return n_; }

  /// sign = +1: sum_m in[m] e^{+i m alpha_l}; sign = -1: e^{-i m alpha_l}.
  void execute(int sign, std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace masslab
