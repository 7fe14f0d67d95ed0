#pragma once

#include <algorithm>
#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "numeric.hpp"

namespace radonlab {

// Sign of the exponent: Plus computes sum_x a[x] e^{+2 pi i j.x/B} (the
// convention of the forward transform f^ used throughout), Minus the conjugate.
enum class PhaseSign { Plus, Minus };

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place unnormalized d-dimensional DFT over a row-major array.
inline void dft_inplace(std::vector<cplx>& data, const std::vector<int>& extents, PhaseSign sign) {
  size_t total = 1;
  for (int e : extents) {
    require(e >= 1, "DFT extent must be positive");
    total *= static_cast<size_t>(e);
  }
  require(total == data.size(), "DFT data size does not match extents");
  if (total == 0) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(extents.size()), extents.data(), ptr, ptr,
                         sign == PhaseSign::Plus ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
}

// Inverse of the Plus transform: conjugate sign and divide by the grid size.
inline void inverse_dft_inplace(std::vector<cplx>& data, const std::vector<int>& extents) {
  dft_inplace(data, extents, PhaseSign::Minus);
  double scale = 1.0 / static_cast<double>(data.size());
  for (auto& z : data) z *= scale;
}

// Smallest 7-smooth integer >= n: a length FFTW transforms quickly.
inline int fast_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace radonlab
