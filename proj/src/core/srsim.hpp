#pragma once

#include <cstddef>

#include "core/plane.hpp"
#include "core/volume.hpp"

namespace kswap {

// Constants of the spectral-residual similarity index. c2 is quoted on a
// 0-255 intensity scale and rescaled internally for [0,1] slices.
struct SrsimParams {
  int downsample_target = 64;
  int residual_window = 3;
  double smoothing_sigma = 2.5;
  double c1 = 0.40;
  double c2 = 225.0;
  double lambda = 0.5;

  void validate() const;
};

// Per-slice inputs of the index: normalized saliency and Scharr gradient
// magnitude, both at full resolution. Computing them once per slice lets
// candidate scoring reuse them; scores are identical to the direct route.
struct SrsimFeatures {
  Plane saliency;
  Plane gradient;
};

// Spectral residual visual saliency, scaled to [0,1]. A flat slice has no
// residual structure and yields an all-zero map.
Plane spectral_residual_saliency(const Plane& slice, const SrsimParams& params);

Plane scharr_gradient_magnitude(const Plane& slice);

SrsimFeatures srsim_features(const Plane& slice, const SrsimParams& params);
double srsim_score(const SrsimFeatures& a, const SrsimFeatures& b, const SrsimParams& params);
double srsim(const Plane& x, const Plane& y, const SrsimParams& params);

// Mean of per-index slice similarities, summed in slice order.
double scan_similarity_3d(const Volume& s, const Volume& t, const SrsimParams& params);

namespace resample {
// Area-averaging reduction to rows x cols (no-op when sizes match).
Plane area_downsample(const Plane& in, std::size_t rows, std::size_t cols);
// Pixel-centre aligned bilinear interpolation.
Plane bilinear(const Plane& in, std::size_t rows, std::size_t cols);
}  // namespace resample

}  // namespace kswap
