#include "core/srsim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "core/error.hpp"
#include "core/fft.hpp"

namespace kswap {

void SrsimParams::validate() const {
  require(downsample_target > 0 && residual_window > 0 && smoothing_sigma > 0.0 && c1 > 0.0 &&
              c2 > 0.0 && lambda > 0.0,
          ErrorCode::InvalidArgument, "SR-SIM parameters must all be strictly positive");
}

namespace resample {

namespace {

// weights[k] lists (input index, weight) pairs for output sample k.
std::vector<std::vector<std::pair<std::size_t, double>>> area_weights(std::size_t n,
                                                                      std::size_t m) {
  std::vector<std::vector<std::pair<std::size_t, double>>> out(m);
  const double step = static_cast<double>(n) / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lo = static_cast<double>(k) * step;
    const double hi = static_cast<double>(k + 1) * step;
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = std::min(n, static_cast<std::size_t>(std::ceil(hi)));
    for (std::size_t i = first; i < last; ++i) {
      const double overlap =
          std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
      if (overlap > 0.0) out[k].emplace_back(i, overlap / step);
    }
  }
  return out;
}

}  // namespace

Plane area_downsample(const Plane& in, std::size_t rows, std::size_t cols) {
  if (rows == in.rows && cols == in.cols) return in;
  const auto wr = area_weights(in.rows, rows);
  const auto wc = area_weights(in.cols, cols);
  Plane tmp(in.rows, cols);
  for (std::size_t r = 0; r < in.rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (auto [i, w] : wc[c]) acc += w * in.at(r, i);
      tmp.at(r, c) = acc;
    }
  Plane out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (auto [i, w] : wr[r]) acc += w * tmp.at(i, c);
      out.at(r, c) = acc;
    }
  return out;
}

Plane bilinear(const Plane& in, std::size_t rows, std::size_t cols) {
  if (rows == in.rows && cols == in.cols) return in;
  auto axis = [](std::size_t out_i, std::size_t n_out, std::size_t n_in) {
    double s = (static_cast<double>(out_i) + 0.5) * static_cast<double>(n_in) /
                   static_cast<double>(n_out) - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
    const auto i0 = static_cast<std::size_t>(std::floor(s));
    const std::size_t i1 = std::min(i0 + 1, n_in - 1);
    return std::make_tuple(i0, i1, s - static_cast<double>(i0));
  };
  Plane out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto [r0, r1, fr] = axis(r, rows, in.rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const auto [c0, c1, fc] = axis(c, cols, in.cols);
      const double top = in.at(r0, c0) * (1.0 - fc) + in.at(r0, c1) * fc;
      const double bottom = in.at(r1, c0) * (1.0 - fc) + in.at(r1, c1) * fc;
      out.at(r, c) = top * (1.0 - fr) + bottom * fr;
    }
  }
  return out;
}

}  // namespace resample

namespace {

constexpr double kLogEpsilon = 1e-8;
constexpr double kFlatRange = 1e-12;

std::size_t clamp_index(long i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1));
}

// Mean filter over a window x window neighbourhood with replicated borders.
Plane box_filter(const Plane& in, int window) {
  const long lo = -(window - 1) / 2;
  const long hi = lo + window - 1;
  const double norm = 1.0 / static_cast<double>(window * window);
  Plane out(in.rows, in.cols);
  for (std::size_t r = 0; r < in.rows; ++r)
    for (std::size_t c = 0; c < in.cols; ++c) {
      double acc = 0.0;
      for (long dy = lo; dy <= hi; ++dy)
        for (long dx = lo; dx <= hi; ++dx)
          acc += in.at(clamp_index(static_cast<long>(r) + dy, in.rows),
                       clamp_index(static_cast<long>(c) + dx, in.cols));
      out.at(r, c) = acc * norm;
    }
  return out;
}

Plane gaussian_smooth(const Plane& in, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    total += kernel[k + radius];
  }
  for (double& k : kernel) k /= total;

  Plane tmp(in.rows, in.cols);
  for (std::size_t r = 0; r < in.rows; ++r)
    for (std::size_t c = 0; c < in.cols; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * in.at(r, clamp_index(static_cast<long>(c) + k, in.cols));
      tmp.at(r, c) = acc;
    }
  Plane out(in.rows, in.cols);
  for (std::size_t r = 0; r < in.rows; ++r)
    for (std::size_t c = 0; c < in.cols; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[k + radius] * tmp.at(clamp_index(static_cast<long>(r) + k, in.rows), c);
      out.at(r, c) = acc;
    }
  return out;
}

void check_slice(const Plane& slice) {
  require(slice.rows >= 8 && slice.cols >= 8, ErrorCode::InvalidArgument,
          "SR-SIM needs slices of at least 8x8, got " + slice.shape_string());
  for (double v : slice.values)
    require(std::isfinite(v), ErrorCode::InvalidArgument, "slice contains non-finite values");
}

}  // namespace

Plane spectral_residual_saliency(const Plane& slice, const SrsimParams& params) {
  params.validate();
  check_slice(slice);

  const std::size_t longer = std::max(slice.rows, slice.cols);
  const auto target = static_cast<std::size_t>(params.downsample_target);
  Plane small = slice;
  if (longer > target) {
    const double scale = static_cast<double>(target) / static_cast<double>(longer);
    const auto rows = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(static_cast<double>(slice.rows) * scale)));
    const auto cols = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(static_cast<double>(slice.cols) * scale)));
    small = resample::area_downsample(slice, rows, cols);
  }

  const auto [lo, hi] = std::minmax_element(small.values.begin(), small.values.end());
  if (*hi - *lo <= kFlatRange) return Plane(slice.rows, slice.cols);

  std::vector<fft::Complex> buf(small.values.begin(), small.values.end());
  const auto freq = fft::forward(buf, small.rows, small.cols);

  Plane log_amp(small.rows, small.cols);
  for (std::size_t i = 0; i < freq.size(); ++i)
    log_amp.values[i] = std::log(std::abs(freq[i]) + kLogEpsilon);
  const Plane local_mean = box_filter(log_amp, params.residual_window);

  std::vector<fft::Complex> residual(freq.size());
  for (std::size_t i = 0; i < freq.size(); ++i)
    residual[i] = std::polar(std::exp(log_amp.values[i] - local_mean.values[i]), std::arg(freq[i]));
  const auto back = fft::inverse(residual, small.rows, small.cols);

  Plane energy(small.rows, small.cols);
  for (std::size_t i = 0; i < back.size(); ++i) energy.values[i] = std::norm(back[i]);
  Plane smooth = gaussian_smooth(energy, params.smoothing_sigma);

  const auto [smin, smax] = std::minmax_element(smooth.values.begin(), smooth.values.end());
  const double low = *smin, span = *smax - *smin;
  if (span <= 0.0) return Plane(slice.rows, slice.cols);
  for (double& v : smooth.values) v = (v - low) / span;

  Plane full = resample::bilinear(smooth, slice.rows, slice.cols);
  for (double& v : full.values) v = std::max(v, 0.0);
  return full;
}

Plane scharr_gradient_magnitude(const Plane& slice) {
  Plane out(slice.rows, slice.cols);
  auto px = [&](long r, long c) {
    return slice.at(clamp_index(r, slice.rows), clamp_index(c, slice.cols));
  };
  for (std::size_t r = 0; r < slice.rows; ++r) {
    for (std::size_t c = 0; c < slice.cols; ++c) {
      const long y = static_cast<long>(r), x = static_cast<long>(c);
      const double gx = (3.0 * (px(y - 1, x + 1) - px(y - 1, x - 1)) +
                         10.0 * (px(y, x + 1) - px(y, x - 1)) +
                         3.0 * (px(y + 1, x + 1) - px(y + 1, x - 1))) / 16.0;
      const double gy = (3.0 * (px(y + 1, x - 1) - px(y - 1, x - 1)) +
                         10.0 * (px(y + 1, x) - px(y - 1, x)) +
                         3.0 * (px(y + 1, x + 1) - px(y - 1, x + 1))) / 16.0;
      out.at(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

SrsimFeatures srsim_features(const Plane& slice, const SrsimParams& params) {
  check_slice(slice);
  return {spectral_residual_saliency(slice, params), scharr_gradient_magnitude(slice)};
}

double srsim_score(const SrsimFeatures& a, const SrsimFeatures& b, const SrsimParams& params) {
  require(a.saliency.same_shape(b.saliency), ErrorCode::ShapeMismatch,
          "SR-SIM inputs differ in shape: " + a.saliency.shape_string() + " vs " +
              b.saliency.shape_string());
  const double c1 = params.c1;
  const double c2 = params.c2 / (255.0 * 255.0);

  double weighted = 0.0, weights = 0.0, plain = 0.0;
  const std::size_t n = a.saliency.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double v1 = a.saliency.values[i], v2 = b.saliency.values[i];
    const double g1 = a.gradient.values[i], g2 = b.gradient.values[i];
    // Written so that swapping the operands gives bit-identical values.
    const double s_vs = (2.0 * v1 * v2 + c1) / (v1 * v1 + v2 * v2 + c1);
    const double s_g = (2.0 * g1 * g2 + c2) / (g1 * g1 + g2 * g2 + c2);
    const double s = s_vs * std::pow(s_g, params.lambda);
    const double w = std::max(v1, v2);
    weighted += s * w;
    weights += w;
    plain += s;
  }
  // Both slices flat: no saliency to weight with, fall back to a plain mean.
  if (weights <= 0.0) return plain / static_cast<double>(n);
  return weighted / weights;
}

double srsim(const Plane& x, const Plane& y, const SrsimParams& params) {
  require(x.same_shape(y), ErrorCode::ShapeMismatch,
          "SR-SIM inputs differ in shape: " + x.shape_string() + " vs " + y.shape_string());
  return srsim_score(srsim_features(x, params), srsim_features(y, params), params);
}

double scan_similarity_3d(const Volume& s, const Volume& t, const SrsimParams& params) {
  require(s.shape() == t.shape(), ErrorCode::ShapeMismatch,
          "scan '" + s.id() + "' is " + s.shape().to_string() + " but '" + t.id() + "' is " +
              t.shape().to_string());
  double total = 0.0;
  for (std::size_t i = 0; i < s.shape().slices; ++i) total += srsim(s.slice(i), t.slice(i), params);
  return total / static_cast<double>(s.shape().slices);
}

}  // namespace kswap
