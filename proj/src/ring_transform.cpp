#include "masslab/ring_transform.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace masslab {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RingTransform::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

RingTransform::RingTransform(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw std::invalid_argument("RingTransform: size must be positive");
  std::vector<std::complex<double>> a(n), b(n);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  std::lock_guard lock(planner_mutex());
  const int len = static_cast<int>(n);
  // FFTW_ESTIMATE keeps plans (and therefore results) identical from run to run.
  plans_->forward = fftw_plan_dft_1d(len, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->backward = fftw_plan_dft_1d(len, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

RingTransform::~RingTransform() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
}

RingTransform::RingTransform(RingTransform&&) noexcept = default;
RingTransform& RingTransform::operator=(RingTransform&&) noexcept = default;

void RingTransform::execute(int sign, std::span<const std::complex<double>> in,
                            std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("RingTransform: size mismatch");
  // fftw_execute_dft does not write to its input for out-of-place complex transforms.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(sign < 0 ? plans_->forward : plans_->backward, src, dst);
}

}  // namespace masslab
