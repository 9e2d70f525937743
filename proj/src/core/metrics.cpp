#include "core/metrics.hpp"

#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace kswap {

namespace {

void check_masks(const Volume& pred, const Volume& gt) {
  require(pred.shape() == gt.shape(), ErrorCode::ShapeMismatch,
          "prediction '" + pred.id() + "' is " + pred.shape().to_string() + " but ground truth '" +
              gt.id() + "' is " + gt.shape().to_string());
  require(pred.kind() == VolumeKind::Mask && gt.kind() == VolumeKind::Mask,
          ErrorCode::InvalidArgument, "metrics need binary mask volumes");
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// One pass of the 1D lower envelope of parabolas along a strided line.
void envelope_1d(double* f, std::size_t n, std::size_t stride, double weight,
                 std::vector<double>& line, std::vector<double>& out, std::vector<std::size_t>& v,
                 std::vector<double>& z) {
  line.resize(n);
  out.resize(n);
  v.resize(n);
  z.resize(n + 1);
  for (std::size_t i = 0; i < n; ++i) line[i] = f[i * stride];

  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (line[q] == kInf) continue;
    const double fq = line[q] + weight * static_cast<double>(q) * static_cast<double>(q);
    if (!any) {
      any = true;
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    while (true) {
      const std::size_t p = v[k];
      const double fp = line[p] + weight * static_cast<double>(p) * static_cast<double>(p);
      const double s = (fq - fp) / (2.0 * weight * static_cast<double>(q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      if (s <= z[k]) {
        // Only parabola left and it is dominated everywhere.
        v[0] = q;
        z[0] = -kInf;
        z[1] = kInf;
        break;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
  }
  if (!any) return;
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < static_cast<double>(q)) ++k;
    const double d = static_cast<double>(q) - static_cast<double>(v[k]);
    out[q] = line[v[k]] + weight * d * d;
  }
  for (std::size_t i = 0; i < n; ++i) f[i * stride] = out[i];
}

}  // namespace

std::vector<unsigned char> boundary_voxels(const Volume& mask) {
  const Shape3& s = mask.shape();
  const auto data = mask.data();
  std::vector<unsigned char> out(data.size(), 0);
  auto on = [&](std::size_t z, std::size_t y, std::size_t x) {
    return data[(z * s.rows + y) * s.cols + x] != 0.0f;
  };
  for (std::size_t z = 0; z < s.slices; ++z)
    for (std::size_t y = 0; y < s.rows; ++y)
      for (std::size_t x = 0; x < s.cols; ++x) {
        if (!on(z, y, x)) continue;
        const bool edge = z == 0 || z + 1 == s.slices || y == 0 || y + 1 == s.rows || x == 0 ||
                          x + 1 == s.cols;
        if (edge || !on(z - 1, y, x) || !on(z + 1, y, x) || !on(z, y - 1, x) ||
            !on(z, y + 1, x) || !on(z, y, x - 1) || !on(z, y, x + 1))
          out[(z * s.rows + y) * s.cols + x] = 1;
      }
  return out;
}

std::vector<double> squared_distance_transform(const std::vector<unsigned char>& features,
                                               const Shape3& shape,
                                               const std::array<double, 3>& weights) {
  require(features.size() == shape.voxels(), ErrorCode::ShapeMismatch,
          "feature map does not match shape " + shape.to_string());
  std::vector<double> f(features.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = features[i] != 0 ? 0.0 : kInf;

  std::vector<double> line, out, z;
  std::vector<std::size_t> v;
  const std::size_t S = shape.slices, R = shape.rows, C = shape.cols;
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t b = 0; b < R; ++b) envelope_1d(&f[(a * R + b) * C], C, 1, weights[2], line, out, v, z);
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t c = 0; c < C; ++c) envelope_1d(&f[a * R * C + c], R, C, weights[1], line, out, v, z);
  for (std::size_t b = 0; b < R; ++b)
    for (std::size_t c = 0; c < C; ++c) envelope_1d(&f[b * C + c], S, R * C, weights[0], line, out, v, z);
  return f;
}

double surface_dice(const Volume& pred, const Volume& gt, const SurfaceDiceParams& params) {
  check_masks(pred, gt);
  require(params.tolerance >= 0.0, ErrorCode::InvalidArgument, "tolerance must be >= 0");
  const auto pb = boundary_voxels(pred);
  const auto gb = boundary_voxels(gt);
  std::size_t np = 0, ng = 0;
  for (auto b : pb) np += b;
  for (auto b : gb) ng += b;
  if (np == 0 && ng == 0) return 1.0;
  if (np == 0 || ng == 0) return 0.0;

  std::array<double, 3> weights{1.0, 1.0, 1.0};
  if (params.tolerance_in_mm)
    for (int a = 0; a < 3; ++a) weights[a] = pred.spacing()[a] * pred.spacing()[a];
  const double tol2 = params.tolerance * params.tolerance;

  const auto to_gt = squared_distance_transform(gb, gt.shape(), weights);
  const auto to_pred = squared_distance_transform(pb, pred.shape(), weights);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < pb.size(); ++i) {
    if (pb[i] && to_gt[i] <= tol2) ++matched;
    if (gb[i] && to_pred[i] <= tol2) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(np + ng);
}

double dice(const Volume& pred, const Volume& gt) {
  check_masks(pred, gt);
  std::size_t both = 0, p = 0, g = 0;
  const auto a = pred.data(), b = gt.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0.0f, y = b[i] != 0.0f;
    p += x;
    g += y;
    both += x && y;
  }
  if (p + g == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

}  // namespace kswap
