#include "semiclassical/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <numbers>

#include "semiclassical/errors.hpp"

namespace semiclassical {

namespace {
// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct FftPlan::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::size_t size = 0;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

FftPlan::FftPlan(const Grid& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  plans_->size = grid.size();
  std::vector<Complex> scratch(grid.size());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  if (grid.dim() == 1) {
    const int n = static_cast<int>(grid.axis(0).count);
    plans_->forward = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
    plans_->backward = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
  } else {
    const int n0 = static_cast<int>(grid.axis(0).count);
    const int n1 = static_cast<int>(grid.axis(1).count);
    plans_->forward = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_FORWARD, flags);
    plans_->backward = fftw_plan_dft_2d(n0, n1, buf, buf, FFTW_BACKWARD, flags);
  }
  require(plans_->forward && plans_->backward, ErrorKind::InvalidArgument, "FFTW planning failed");
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(std::vector<Complex>& data) const {
  require(data.size() == plans_->size, ErrorKind::Shape, "FFT buffer size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->forward, p, p);
}

void FftPlan::backward(std::vector<Complex>& data) const {
  require(data.size() == plans_->size, ErrorKind::Shape, "FFT buffer size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->backward, p, p);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& c : data) c *= scale;
}

std::vector<double> wavenumbers(const Axis& axis) {
  const std::size_t n = axis.count;
  const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * axis.spacing);
  std::vector<double> k(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto s = static_cast<long>(j);
    const auto ln = static_cast<long>(n);
    k[j] = base * static_cast<double>(2 * s < ln ? s : s - ln);
  }
  return k;
}

std::vector<Complex> spectral_derivative(const FftPlan& plan, const std::vector<Complex>& data,
                                         std::size_t axis) {
  const Grid& g = plan.grid();
  std::vector<Complex> out = data;
  plan.forward(out);
  const auto k = wavenumbers(g.axis(axis));
  const std::size_t n = g.axis(axis).count;
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const std::size_t j = axis == 0 ? g.row(flat) : g.col(flat);
    out[flat] *= (n % 2 == 0 && 2 * j == n) ? Complex{0.0, 0.0} : Complex{0.0, k[j]};
  }
  plan.backward(out);
  return out;
}

std::size_t fft_size_at_least(std::size_t n) {
  for (n = std::max<std::size_t>(n, 2);; ++n) {
    if (n % 2) continue;
    std::size_t m = n;
    for (std::size_t f : {2, 3, 5})
      while (m % f == 0) m /= f;
    if (m == 1) return n;
  }
}

}  // namespace semiclassical
