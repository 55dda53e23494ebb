#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "semiclassical/grid.hpp"

namespace semiclassical {

using Complex = std::complex<double>;

// In-place complex DFT over a 1D or 2D grid (FFTW). Backward transforms are normalized, so
// backward(forward(a)) == a.
class FftPlan {
 public:
  explicit FftPlan(const Grid& grid);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;

  void forward(std::vector<Complex>& data) const;
  void backward(std::vector<Complex>& data) const;

  const Grid& grid() const { return grid_; }

 private:
  struct Plans;
  Grid grid_;
  std::unique_ptr<Plans> plans_;
};

// Angular wavenumbers of a periodic axis in FFT order; the Nyquist mode of an even count is
// reported as negative.
std::vector<double> wavenumbers(const Axis& axis);

// Smallest even n' >= n whose only prime factors are 2, 3 and 5.
std::size_t fft_size_at_least(std::size_t n);

// Spectral derivative along `axis` of periodic samples (Nyquist mode dropped).
std::vector<Complex> spectral_derivative(const FftPlan& plan, const std::vector<Complex>& data,
                                         std::size_t axis);

}  // namespace semiclassical
