#include <doctest.h>

#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "core/fft.hpp"
#include "core/spectrum.hpp"
#include "oracles.hpp"

using namespace kswap;

TEST_CASE("fft forward and inverse match the direct DFT") {
  std::mt19937_64 rng(7);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{8, 8}, {5, 7}, {6, 9}, {1, 4}, {12, 10}}) {
    const Plane p = oracle::random_plane(rng, r, c);
    std::vector<oracle::cd> x(p.values.begin(), p.values.end());
    const auto fast = fft::forward(x, r, c);
    const auto slow = oracle::dft2(x, r, c);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-9);
    const auto back = fft::inverse(fast, r, c);
    const auto slow_back = oracle::dft2(slow, r, c, true);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(back[i] - x[i]) < 1e-12);
      CHECK(std::abs(slow_back[i] - x[i]) < 1e-9);
    }
  }
}

TEST_CASE("decompose centres the spectrum of the direct DFT") {
  std::mt19937_64 rng(11);
  const Plane p = oracle::random_plane(rng, 8, 10);
  const auto slow = oracle::dft2({p.values.begin(), p.values.end()}, 8, 10);
  const SliceSpectrum s = decompose(p);
  for (std::size_t u = 0; u < 8; ++u)
    for (std::size_t v = 0; v < 10; ++v) {
      const auto ref = slow[u * 10 + v];
      const std::size_t cu = centered_index(u, 8), cv = centered_index(v, 10);
      CHECK(s.amplitude.at(cu, cv) == doctest::Approx(std::abs(ref)).epsilon(1e-12));
      if (std::abs(ref) > 1e-9) {
        const double d = std::remainder(s.phase.at(cu, cv) - std::arg(ref), 2 * std::numbers::pi);
        CHECK(std::abs(d) < 1e-9);
      }
    }
  double sum = 0;
  for (double v : p.values) sum += v;
  CHECK(s.amplitude.at(4, 5) == doctest::Approx(std::abs(sum)).epsilon(1e-12));
}

TEST_CASE("index helpers are inverse") {
  for (std::size_t n : {1, 2, 7, 8, 255, 256})
    for (std::size_t k = 0; k < n; ++k) CHECK(fft_index(centered_index(k, n), n) == k);
}

TEST_CASE("constant 2x2 plane has only a DC amplitude of 4") {
  const SliceSpectrum s = decompose(Plane(2, 2, 1.0));
  CHECK(s.amplitude.at(1, 1) == doctest::Approx(4.0));
  for (std::size_t i = 0; i < 4; ++i)
    if (i != 3) CHECK(s.amplitude.values[i] == doctest::Approx(0.0));
}

TEST_CASE("unit impulse has a flat amplitude spectrum") {
  Plane p(8, 8);
  p.at(0, 0) = 1.0;
  const SliceSpectrum s = decompose(p);
  for (double a : s.amplitude.values) CHECK(a == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-built 4x4 DC-only spectrum recomposes to ones") {
  SliceSpectrum s{Plane(4, 4), Plane(4, 4)};
  s.amplitude.at(2, 2) = 16.0;
  double imag = -1;
  const Plane out = recompose(s, &imag);
  for (double v : out.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(imag < 1e-12);
}

TEST_CASE("zero amplitude recomposes to zeros") {
  std::mt19937_64 rng(3);
  SliceSpectrum s{Plane(8, 8), oracle::random_plane(rng, 8, 8)};
  for (double v : recompose(s).values) CHECK(v == 0.0);
}

TEST_CASE("round trip and Parseval on random slices") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const Plane p = oracle::random_plane(rng, 16 + k % 3, 16);
    const SliceSpectrum s = decompose(p);
    const Plane back = recompose(s);
    double energy = 0, spectral = 0, err = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      err = std::max(err, std::abs(back.values[i] - p.values[i]));
      energy += p.values[i] * p.values[i];
      spectral += s.amplitude.values[i] * s.amplitude.values[i];
      CHECK(s.amplitude.values[i] >= 0.0);
      CHECK(s.phase.values[i] > -std::numbers::pi);
      CHECK(s.phase.values[i] <= std::numbers::pi);
    }
    CHECK(err < 1e-12);
    CHECK(std::abs(spectral / p.size() - energy) / energy < 1e-12);
  }
}

TEST_CASE("recompose rejects mismatched planes and decompose rejects non-finite input") {
  SliceSpectrum s{Plane(8, 8), Plane(8, 7)};
  CHECK_THROWS_AS(recompose(s), Error);
  Plane p(8, 8);
  p.at(3, 3) = std::nan("");
  CHECK_THROWS_AS(decompose(p), Error);
}

TEST_CASE("mask at beta 0.03 on 256x256 matches lattice enumeration: 29 pixels") {
  const MaskPlane m = circular_mask(256, 256, 0.03);
  CHECK(mask_radius(256, 256, 0.03) == 3.0);
  CHECK(m.count() == oracle::lattice_count(3.0));
  CHECK(m.count() == 29);
  // Every set pixel is within the radius of the centre and vice versa.
  for (std::size_t r = 0; r < 256; ++r)
    for (std::size_t c = 0; c < 256; ++c) {
      const double dy = double(r) - 128, dx = double(c) - 128;
      CHECK((m.values.at(r, c) == 1.0) == (dx * dx + dy * dy <= 9.0));
    }
}

TEST_CASE("mask edge cases") {
  CHECK(circular_mask(256, 256, 0.0).count() == 0);
  const MaskPlane full = circular_mask(256, 256, 1.0);
  CHECK(full.values.at(0, 0) == 0.0);
  CHECK(full.values.at(255, 255) == 0.0);
  CHECK(full.values.at(0, 128) == 1.0);  // distance exactly 128
  std::size_t on_grid = 0;
  for (int dy = -128; dy < 128; ++dy)
    for (int dx = -128; dx < 128; ++dx) on_grid += dx * dx + dy * dy <= 128 * 128;
  CHECK(full.count() == on_grid);
  CHECK_THROWS_AS(circular_mask(256, 256, 1.5), Error);
  CHECK_THROWS_AS(circular_mask(256, 256, -0.1), Error);
  CHECK_THROWS_AS(circular_mask(7, 256, 0.1), Error);
}

TEST_CASE("masks nest over the beta grid and are rotation symmetric") {
  const double grid[] = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
  for (std::size_t k = 1; k < std::size(grid); ++k) {
    const MaskPlane a = circular_mask(128, 96, grid[k - 1]);
    const MaskPlane b = circular_mask(128, 96, grid[k]);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values.values[i] <= b.values.values[i]);
  }
  const MaskPlane m = circular_mask(64, 64, 0.37);
  for (std::size_t r = 1; r < 64; ++r)
    for (std::size_t c = 1; c < 64; ++c)
      CHECK(m.values.at(r, c) == m.values.at(c, 64 - r));
}
