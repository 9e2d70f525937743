#include <doctest.h>

#include <filesystem>

#include "core/error.hpp"
#include "core/predictor.hpp"
#include "oracles.hpp"

using namespace kswap;

namespace {

// Stack-based flood fill; returns component sizes and labels.
std::vector<int> flood_labels(const std::vector<unsigned char>& img, std::size_t rows,
                              std::size_t cols, std::vector<std::size_t>& sizes) {
  std::vector<int> label(img.size(), -1);
  for (std::size_t start = 0; start < img.size(); ++start) {
    if (!img[start] || label[start] >= 0) continue;
    const int id = int(sizes.size());
    sizes.push_back(0);
    std::vector<std::size_t> stack{start};
    label[start] = id;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++sizes[id];
      const std::size_t r = p / cols, c = p % cols;
      const std::pair<long, long> nb[4] = {{long(r) - 1, long(c)}, {long(r) + 1, long(c)},
                                           {long(r), long(c) - 1}, {long(r), long(c) + 1}};
      for (auto [nr, nc] : nb) {
        if (nr < 0 || nc < 0 || nr >= long(rows) || nc >= long(cols)) continue;
        const std::size_t q = std::size_t(nr) * cols + std::size_t(nc);
        if (img[q] && label[q] < 0) {
          label[q] = id;
          stack.push_back(q);
        }
      }
    }
  }
  return label;
}

}  // namespace

TEST_CASE("baseline on blank and square slices") {
  const BaselineSegmenterParams params;
  for (double v : baseline_predict(Plane(32, 32), params).values) CHECK(v < 0.01);

  Plane sq(40, 40);
  for (int r = 10; r < 30; ++r)
    for (int c = 10; c < 30; ++c) sq.at(r, c) = 1.0;
  const Plane out = baseline_predict(sq, params);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c) {
      const bool interior = r >= 11 && r < 29 && c >= 11 && c < 29;
      const bool inside = r >= 10 && r < 30 && c >= 10 && c < 30;
      if (interior) CHECK(out.at(r, c) > 0.99);
      if (!inside) CHECK(out.at(r, c) < 0.01);
    }
}

TEST_CASE("keep-largest suppresses the smaller blob exactly as flood fill predicts") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 10; ++k) {
    const Plane p = oracle::textured_plane(rng, 48, 48);
    BaselineSegmenterParams params;
    params.opening_radius = 0;
    const Plane out = baseline_predict(p, params);
    std::vector<unsigned char> support(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
      support[i] = 1.0 / (1.0 + std::exp(-(p.values[i] - params.threshold) / params.softness)) > 0.5;
    std::vector<std::size_t> sizes;
    const auto label = flood_labels(support, 48, 48, sizes);
    int best = -1;
    for (std::size_t i = 0; i < sizes.size(); ++i)
      if (best < 0 || sizes[i] > sizes[std::size_t(best)]) best = int(i);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (best >= 0 && label[i] == best) CHECK(out.values[i] > 0.0);
      else CHECK(out.values[i] == 0.0);
    }
    CHECK(morphology::largest_component(support, 48, 48) ==
          [&] {
            std::vector<unsigned char> m(support.size(), 0);
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = best >= 0 && label[i] == best;
            return m;
          }());
  }
  Plane two(40, 40);
  for (int r = 2; r < 22; ++r)
    for (int c = 2; c < 22; ++c) two.at(r, c) = 1.0;
  for (int r = 30; r < 36; ++r)
    for (int c = 30; c < 36; ++c) two.at(r, c) = 1.0;
  const Plane out = baseline_predict(two, {});
  CHECK(out.at(32, 32) == 0.0);
  CHECK(out.at(10, 10) > 0.99);
}

TEST_CASE("opening removes thin structures") {
  Plane p(30, 30);
  for (int r = 5; r < 25; ++r)
    for (int c = 5; c < 25; ++c) p.at(r, c) = 1.0;
  for (int c = 25; c < 30; ++c) p.at(15, c) = 1.0;  // one-pixel spur, cut off by the opening
  const Plane out = baseline_predict(p, {});
  CHECK(out.at(15, 28) == 0.0);
  CHECK(out.at(15, 15) > 0.99);
  BaselineSegmenterParams raw;
  raw.keep_largest_component = false;
  CHECK(baseline_predict(p, raw).at(15, 28) > 0.99);
}

TEST_CASE("without post-processing the soft map is monotone in intensity") {
  BaselineSegmenterParams params;
  params.opening_radius = 0;
  params.keep_largest_component = false;
  Plane ramp(8, 64);
  for (std::size_t c = 0; c < 64; ++c)
    for (std::size_t r = 0; r < 8; ++r) ramp.at(r, c) = c / 63.0;
  const Plane out = baseline_predict(ramp, params);
  for (std::size_t c = 1; c < 64; ++c) CHECK(out.at(0, c) >= out.at(0, c - 1));
  params.threshold = 1.0;
  CHECK_THROWS_AS(params.validate(), Error);
}

TEST_CASE("precomputed predictor serves stored planes") {
  std::mt19937_64 rng(42);
  std::vector<Plane> planes{oracle::random_plane(rng, 8, 8), oracle::random_plane(rng, 8, 8)};
  const Volume store = oracle::volume_from(planes, "p", "d", VolumeKind::Probability);
  const Plane first = precomputed_predict(0, store);
  for (std::size_t i = 0; i < first.size(); ++i)
    CHECK(first.values[i] == static_cast<double>(store.data()[i]));
  CHECK_THROWS_AS(precomputed_predict(2, store), Error);

  const auto dir = std::filesystem::temp_directory_path() / "kswap_pred_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  save_volume(store.relabel("scan7", "d", VolumeKind::Probability), dir / "scan7_prob.vol");
  const auto pred = make_predictor("precomputed:" + dir.string());
  const Plane got = pred->predict(Plane(8, 8), {"scan7", 1});
  const Plane want = precomputed_predict(1, store);
  CHECK(got == want);
  CHECK_THROWS_AS(pred->predict(Plane(8, 8), {"other", 0}), Error);

  const auto single = make_predictor("precomputed:" + (dir / "scan7_prob.vol").string());
  CHECK(single->predict(Plane(8, 8), {"anything", 0}) == first);
  CHECK_THROWS_AS(make_predictor("oracle"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("checked_predict enforces the output contract") {
  class Bad final : public Predictor {
   public:
    std::string name() const override { return "bad"; }
    Plane predict(const Plane& s, const SliceContext&) const override {
      return Plane(s.rows, s.cols, 1.5);
    }
  };
  class Small final : public Predictor {
   public:
    std::string name() const override { return "small"; }
    Plane predict(const Plane&, const SliceContext&) const override { return Plane(2, 2); }
  };
  CHECK_THROWS_AS(checked_predict(Bad{}, Plane(8, 8), {}), Error);
  CHECK_THROWS_AS(checked_predict(Small{}, Plane(8, 8), {}), Error);
  const BaselinePredictor base;
  CHECK(checked_predict(base, Plane(8, 8, 0.7), {}) == checked_predict(base, Plane(8, 8, 0.7), {}));
}
