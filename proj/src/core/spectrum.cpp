#include "core/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "core/fft.hpp"

namespace kswap {

std::size_t MaskPlane::count() const {
  return static_cast<std::size_t>(std::count(values.values.begin(), values.values.end(), 1.0));
}

double mask_radius(std::size_t rows, std::size_t cols, double beta) {
  return std::floor(beta * static_cast<double>(std::min(rows, cols)) / 2.0);
}

SliceSpectrum decompose(const Plane& slice) {
  require(slice.rows >= 1 && slice.cols >= 1, ErrorCode::InvalidArgument,
          "cannot decompose an empty slice");
  std::vector<fft::Complex> buf(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    require(std::isfinite(slice.values[i]), ErrorCode::InvalidArgument,
            "slice contains non-finite values");
    buf[i] = slice.values[i];
  }
  const auto freq = fft::forward(buf, slice.rows, slice.cols);

  SliceSpectrum out{Plane(slice.rows, slice.cols), Plane(slice.rows, slice.cols)};
  for (std::size_t u = 0; u < slice.rows; ++u) {
    const std::size_t cu = centered_index(u, slice.rows);
    for (std::size_t v = 0; v < slice.cols; ++v) {
      const std::size_t cv = centered_index(v, slice.cols);
      const fft::Complex c = freq[u * slice.cols + v];
      double phase = std::arg(c);
      if (phase == -std::numbers::pi) phase = std::numbers::pi;
      out.amplitude.at(cu, cv) = std::abs(c);
      out.phase.at(cu, cv) = phase;
    }
  }
  return out;
}

Plane recompose(const SliceSpectrum& spectrum, double* max_imag) {
  const Plane& amp = spectrum.amplitude;
  const Plane& ph = spectrum.phase;
  require(amp.same_shape(ph), ErrorCode::ShapeMismatch,
          "amplitude " + amp.shape_string() + " and phase " + ph.shape_string() + " differ in shape");
  require(amp.rows >= 1 && amp.cols >= 1, ErrorCode::InvalidArgument,
          "cannot recompose an empty spectrum");

  std::vector<fft::Complex> buf(amp.size());
  for (std::size_t cu = 0; cu < amp.rows; ++cu) {
    const std::size_t u = fft_index(cu, amp.rows);
    for (std::size_t cv = 0; cv < amp.cols; ++cv) {
      const std::size_t v = fft_index(cv, amp.cols);
      buf[u * amp.cols + v] = std::polar(amp.at(cu, cv), ph.at(cu, cv));
    }
  }
  const auto spatial = fft::inverse(buf, amp.rows, amp.cols);

  Plane out(amp.rows, amp.cols);
  double worst = 0.0;
  for (std::size_t i = 0; i < spatial.size(); ++i) {
    out.values[i] = spatial[i].real();
    worst = std::max(worst, std::abs(spatial[i].imag()));
  }
  if (max_imag != nullptr) *max_imag = worst;
  return out;
}

MaskPlane circular_mask(std::size_t rows, std::size_t cols, double beta) {
  require(beta >= 0.0 && beta <= 1.0, ErrorCode::InvalidArgument,
          "beta " + std::to_string(beta) + " is outside [0,1]");
  require(rows >= 8 && cols >= 8, ErrorCode::InvalidArgument,
          "mask needs at least 8x8, got " + std::to_string(rows) + "x" + std::to_string(cols));
  MaskPlane mask{Plane(rows, cols), beta};
  if (beta == 0.0) return mask;
  const double r = mask_radius(rows, cols, beta);
  const double r2 = r * r;
  const auto cr = static_cast<double>(rows / 2);
  const auto cc = static_cast<double>(cols / 2);
  for (std::size_t i = 0; i < rows; ++i) {
    const double dy = static_cast<double>(i) - cr;
    for (std::size_t j = 0; j < cols; ++j) {
      const double dx = static_cast<double>(j) - cc;
      if (dy * dy + dx * dx <= r2) mask.values.at(i, j) = 1.0;
    }
  }
  return mask;
}

}  // namespace kswap
