#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/srsim.hpp"
#include "oracles.hpp"

using namespace kswap;

namespace {

Plane add_noise(const Plane& x, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Plane out = x;
  for (double& v : out.values) v = std::clamp(v + u(rng), 0.0, 1.0);
  return out;
}

}  // namespace

TEST_CASE("self similarity is exactly one and the index is symmetric") {
  std::mt19937_64 rng(9);
  const SrsimParams params;
  for (int k = 0; k < 10; ++k) {
    const Plane x = oracle::textured_plane(rng, 48, 40);
    const Plane y = oracle::random_plane(rng, 48, 40);
    CHECK(srsim(x, x, params) == 1.0);
    const double xy = srsim(x, y, params), yx = srsim(y, x, params);
    CHECK(std::abs(xy - yx) < 1e-12);
    CHECK(xy > 0.0);
    CHECK(xy <= 1.0);
  }
}

TEST_CASE("similarity decays with noise amplitude") {
  std::mt19937_64 rng(4);
  const Plane x = oracle::textured_plane(rng, 64, 64);
  const SrsimParams params;
  const double s05 = srsim(x, add_noise(x, 0.05, 77), params);
  const double s10 = srsim(x, add_noise(x, 0.10, 77), params);
  const double s20 = srsim(x, add_noise(x, 0.20, 77), params);
  CHECK(s05 > s10);
  CHECK(s10 > s20);
}

TEST_CASE("constant slices have no saliency") {
  const Plane flat(40, 40, 0.6);
  const Plane s = spectral_residual_saliency(flat, {});
  CHECK(*std::max_element(s.values.begin(), s.values.end()) < 1e-6);
  // Flat against flat falls back to a plain mean and reports identity.
  CHECK(srsim(flat, Plane(40, 40, 0.6), {}) == 1.0);
}

TEST_CASE("saliency peaks at a lone bright block") {
  // A faint noise floor: a perfect block on an exactly zero background has
  // exact spectral zeros, where the log-amplitude residual is meaningless.
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> floor(0.0, 0.02);
  for (auto [r0, c0] : {std::pair{10, 20}, {40, 8}, {27, 45}}) {
    Plane p(64, 64);
    for (double& v : p.values) v = floor(rng);
    for (int r = r0; r < r0 + 4; ++r)
      for (int c = c0; c < c0 + 4; ++c) p.at(r, c) = 1.0;
    const Plane s = spectral_residual_saliency(p, {});
    const auto it = std::max_element(s.values.begin(), s.values.end());
    const auto idx = static_cast<std::size_t>(it - s.values.begin());
    const double r = idx / 64, c = idx % 64;
    // Distance to the nearest pixel of the block.
    const double dr = std::max({0.0, r0 - r, r - (r0 + 3)});
    const double dc = std::max({0.0, c0 - c, c - (c0 + 3)});
    CHECK(std::hypot(dr, dc) <= 2.0);
    for (double v : s.values) CHECK(v >= 0.0);
  }
}

TEST_CASE("large slices are processed on a downsampled grid") {
  Plane p(200, 100);
  for (int r = 90; r < 100; ++r)
    for (int c = 60; c < 70; ++c) p.at(r, c) = 1.0;
  const Plane s = spectral_residual_saliency(p, {});
  CHECK(s.rows == 200);
  CHECK(s.cols == 100);
  const auto idx = static_cast<std::size_t>(std::max_element(s.values.begin(), s.values.end()) -
                                            s.values.begin());
  CHECK(std::abs(double(idx / 100) - 94.5) < 6);
  CHECK(std::abs(double(idx % 100) - 64.5) < 6);
}

TEST_CASE("area downsampling preserves the mean and bilinear keeps constants") {
  std::mt19937_64 rng(8);
  const Plane p = oracle::random_plane(rng, 90, 70);
  const Plane small = resample::area_downsample(p, 32, 25);
  double a = 0, b = 0;
  for (double v : p.values) a += v;
  for (double v : small.values) b += v;
  CHECK(a / p.size() == doctest::Approx(b / small.size()).epsilon(1e-12));
  const Plane up = resample::bilinear(Plane(5, 7, 0.25), 20, 9);
  for (double v : up.values) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("Scharr gradient of a ramp is its slope") {
  Plane ramp(16, 16);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 0; c < 16; ++c) ramp.at(r, c) = 0.05 * c;
  const Plane g = scharr_gradient_magnitude(ramp);
  for (std::size_t r = 0; r < 16; ++r)
    for (std::size_t c = 1; c < 15; ++c) CHECK(g.at(r, c) == doctest::Approx(0.1));
}

TEST_CASE("scan similarity is the slice mean") {
  std::mt19937_64 rng(12);
  std::vector<Plane> a, b;
  for (int i = 0; i < 5; ++i) {
    a.push_back(oracle::textured_plane(rng, 32, 32));
    b.push_back(oracle::textured_plane(rng, 32, 32));
  }
  const Volume va = oracle::volume_from(a, "a"), vb = oracle::volume_from(b, "b");
  const SrsimParams params;
  double total = 0;
  for (std::size_t i = 0; i < 5; ++i) total += srsim(va.slice(i), vb.slice(i), params);
  CHECK(scan_similarity_3d(va, vb, params) == total / 5);
  CHECK(scan_similarity_3d(va, va, params) == 1.0);

  std::vector<Plane> two(a.begin(), a.begin() + 2);
  std::vector<Plane> two_b(b.begin(), b.begin() + 2);
  const double s0 = srsim(va.slice(0), vb.slice(0), params), s1 = srsim(va.slice(1), vb.slice(1), params);
  CHECK(scan_similarity_3d(oracle::volume_from(two, "x"), oracle::volume_from(two_b, "y"), params) ==
        (s0 + s1) / 2);
  CHECK_THROWS_AS(scan_similarity_3d(oracle::volume_from(two, "x"), vb, params), Error);
}

TEST_CASE("SR-SIM argument checks") {
  CHECK_THROWS_AS(srsim(Plane(16, 16), Plane(16, 15), {}), Error);
  CHECK_THROWS_AS(spectral_residual_saliency(Plane(7, 16), {}), Error);
  SrsimParams bad;
  bad.c1 = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}
