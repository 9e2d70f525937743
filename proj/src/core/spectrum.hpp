#pragma once

#include <cstddef>

#include "core/plane.hpp"

namespace kswap {

// Centered spectrum of one slice: the DC term sits at (rows/2, cols/2).
// Amplitude comes from an unnormalized forward transform; phase lies in (-pi, pi].
struct SliceSpectrum {
  Plane amplitude;
  Plane phase;
};

// Binary low-frequency disk used to pick which amplitudes are swapped.
struct MaskPlane {
  Plane values;
  double beta = 0.0;

  std::size_t count() const;
};

// Pixel radius of the swap disk for a given beta. The radius is snapped down
// to whole pixels: floor(beta * min(rows, cols) / 2).
double mask_radius(std::size_t rows, std::size_t cols, double beta);

SliceSpectrum decompose(const Plane& slice);

// Real part of the inverse transform. When `max_imag` is non-null it receives
// the largest absolute imaginary residual.
Plane recompose(const SliceSpectrum& spectrum, double* max_imag = nullptr);

// Residual above which recompose output should be treated as suspect.
inline constexpr double kImagResidualWarning = 1e-4;

MaskPlane circular_mask(std::size_t rows, std::size_t cols, double beta);

// Index helpers between FFT order and centered order along one axis.
inline std::size_t centered_index(std::size_t k, std::size_t n) { return (k + n / 2) % n; }
inline std::size_t fft_index(std::size_t c, std::size_t n) { return (c + n - n / 2) % n; }

}  // namespace kswap
