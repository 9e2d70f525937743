#pragma once

#include <cstddef>
#include <vector>

#include "core/volume.hpp"

namespace kswap {

struct SurfaceDiceParams {
  double tolerance = 1.0;        // voxels, or millimetres when tolerance_in_mm
  bool tolerance_in_mm = false;  // use Volume spacing for distances
};

// Voxels of the mask with a face neighbour outside the mask or outside the volume.
std::vector<unsigned char> boundary_voxels(const Volume& mask);

// Exact squared Euclidean distance from every voxel to the nearest feature
// voxel (separable lower-envelope method). `weights` are squared spacings per
// axis; voxels with no feature anywhere get +infinity.
std::vector<double> squared_distance_transform(const std::vector<unsigned char>& features,
                                               const Shape3& shape,
                                               const std::array<double, 3>& weights = {1, 1, 1});

double surface_dice(const Volume& pred, const Volume& gt, const SurfaceDiceParams& params = {});
double dice(const Volume& pred, const Volume& gt);

}  // namespace kswap
