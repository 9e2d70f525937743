#include <doctest.h>

#include <algorithm>
#include <set>

#include "core/donor_selection.hpp"
#include "core/error.hpp"
#include "core/phantom.hpp"
#include "oracles.hpp"

using namespace kswap;
using namespace oracle;

namespace {

void check_matches(const DonorAssignment& a, const std::vector<std::vector<Candidate>>& ref,
                   const ScanCollection& src) {
  REQUIRE(a.per_slice.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    REQUIRE(a.per_slice[i].size() == ref[i].size());
    for (std::size_t k = 0; k < ref[i].size(); ++k) {
      CHECK(a.per_slice[i][k].scan_index == ref[i][k].scan);
      CHECK(a.per_slice[i][k].slice_index == ref[i][k].slice);
      CHECK(a.per_slice[i][k].score == ref[i][k].score);
      CHECK(a.per_slice[i][k].scan_id == src.scans[ref[i][k].scan].id());
    }
  }
}

// Four scans of six slices; scan 2 duplicates scan 0 under another id so
// exact score ties occur.
struct Phantom {
  ScanCollection sources;
  Volume target;

  explicit Phantom(std::uint64_t seed, std::size_t scans = 4, Shape3 shape = {6, 32, 32})
      : target(generate_scan(shape, seed * 100 + 99, tier_domain(Severity::Medium), "t", "tgt").first) {
    sources.domain = "src";
    for (std::size_t s = 0; s < scans; ++s) {
      const std::uint64_t a = s == 2 ? seed * 100 : seed * 100 + s;
      sources.scans.push_back(generate_scan(shape, a, reference_domain(), "s" + std::to_string(s), "src").first);
    }
  }
};

}  // namespace

TEST_CASE("2D and 2.5D selection equal the exhaustive ranking, ties included") {
  const Phantom p(3);
  check_matches(select_2d(p.target, p.sources, 3, {}), brute_slicewise(p.target, p.sources, 3, 0), p.sources);
  check_matches(select_25d(p.target, p.sources, 5, 2, {}),
                brute_slicewise(p.target, p.sources, 5, 2), p.sources);
  check_matches(select_25d(p.target, p.sources, 100, 1, {}),
                brute_slicewise(p.target, p.sources, 100, 1), p.sources);
  // The duplicate scan produces a tie resolved towards the lower scan index.
  const auto a = select_2d(p.target, p.sources, 4, {});
  for (const auto& slice : a.per_slice) {
    auto first = std::find_if(slice.begin(), slice.end(), [](auto& d) { return d.scan_index == 0; });
    auto dup = std::find_if(slice.begin(), slice.end(), [](auto& d) { return d.scan_index == 2; });
    REQUIRE(first != slice.end());
    REQUIRE(dup != slice.end());
    CHECK(first->score == dup->score);
    CHECK(first < dup);
  }
}

TEST_CASE("3D selection equals the exhaustive scan ranking") {
  const Phantom p(5);
  std::vector<Candidate> c;
  for (std::size_t s = 0; s < p.sources.size(); ++s)
    c.push_back({s, 0, scan_similarity_3d(p.target, p.sources.scans[s], {})});
  for (std::size_t n : {1, 2, 4, 9}) {
    const auto ref = brute_rank(c, n);
    const auto a = select_3d(p.target, p.sources, int(n), {});
    for (std::size_t i = 0; i < a.per_slice.size(); ++i) {
      REQUIRE(a.per_slice[i].size() == ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) {
        CHECK(a.per_slice[i][k].scan_index == ref[k].scan);
        CHECK(a.per_slice[i][k].slice_index == i);
        CHECK(a.per_slice[i][k].score == ref[k].score);
      }
    }
  }
}

TEST_CASE("an exact copy of the target wins with score one") {
  Phantom p(7);
  p.sources.scans.push_back(p.target.relabel("copy", "src", VolumeKind::Intensity));
  const auto a = select_3d(p.target, p.sources, 1, {});
  for (const auto& slice : a.per_slice) {
    CHECK(slice[0].scan_id == "copy");
    CHECK(slice[0].score == 1.0);
  }
  const auto b = select_2d(p.target, p.sources, 1, {});
  for (std::size_t i = 0; i < b.per_slice.size(); ++i) {
    CHECK(b.per_slice[i][0].scan_id == "copy");
    CHECK(b.per_slice[i][0].slice_index == i);
  }
}

TEST_CASE("2.5D with m=0 is 2D on random instances") {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const Phantom p(seed, 2 + seed % 3, {4, 32, 32});
    SimilarityCache cache;
    auto a = select_25d(p.target, p.sources, int(1 + seed % 4), 0, {}, &cache);
    const auto b = select_2d(p.target, p.sources, int(1 + seed % 4), {});
    a.strategy = b.strategy;
    CHECK(a == b);
  }
}

TEST_CASE("selection is prefix-monotone in n and cache-independent") {
  const Phantom p(11);
  SimilarityCache cache;
  for (int n = 1; n < 8; ++n) {
    const auto small = select_25d(p.target, p.sources, n, 2, {}, &cache);
    const auto big = select_25d(p.target, p.sources, n + 1, 2, {});
    for (std::size_t i = 0; i < small.per_slice.size(); ++i)
      CHECK(std::equal(small.per_slice[i].begin(), small.per_slice[i].end(), big.per_slice[i].begin()));
  }
}

TEST_CASE("single source scan and window clipping") {
  Phantom p(13, 1, {10, 32, 32});
  const auto a = select_2d(p.target, p.sources, 3, {});
  for (std::size_t i = 0; i < a.per_slice.size(); ++i) {
    REQUIRE(a.per_slice[i].size() == 1);
    CHECK(a.per_slice[i][0].slice_index == i);
  }
  CHECK(slice_window(0, 10, 2) == std::pair<std::size_t, std::size_t>{0, 2});
  CHECK(slice_window(9, 10, 2) == std::pair<std::size_t, std::size_t>{7, 9});
  CHECK(slice_window(5, 10, 2) == std::pair<std::size_t, std::size_t>{3, 7});
  const auto b = select_25d(p.target, p.sources, 10, 2, {});
  std::set<std::size_t> first;
  for (const auto& d : b.per_slice[0]) first.insert(d.slice_index);
  CHECK(first == std::set<std::size_t>{0, 1, 2});
}

TEST_CASE("random selection draws distinct candidates from the strategy pool") {
  const Phantom p(17);
  const auto a = select_random(p.target, p.sources, 3, DonorStrategy::D25, 1, 99);
  CHECK(a == select_random(p.target, p.sources, 3, DonorStrategy::D25, 1, 99));
  CHECK_FALSE(a == select_random(p.target, p.sources, 3, DonorStrategy::D25, 1, 100));
  for (std::size_t i = 0; i < a.per_slice.size(); ++i) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& d : a.per_slice[i]) {
      CHECK(seen.insert({d.scan_index, d.slice_index}).second);
      CHECK(std::abs(long(d.slice_index) - long(i)) <= 1);
      CHECK(d.score == 0.0);
    }
    CHECK(a.per_slice[i].size() == 3);
  }
  const auto d3 = select_random(p.target, p.sources, 9, DonorStrategy::D3, 0, 1);
  for (std::size_t i = 0; i < d3.per_slice.size(); ++i) {
    CHECK(d3.per_slice[i].size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(d3.per_slice[i][k].scan_index == d3.per_slice[0][k].scan_index);
      CHECK(d3.per_slice[i][k].slice_index == i);
    }
  }
}

TEST_CASE("donor selection errors and JSON report") {
  const Phantom p(19);
  ScanCollection empty;
  CHECK_THROWS_AS(select_3d(p.target, empty, 2, {}), Error);
  CHECK_THROWS_AS(select_2d(p.target, p.sources, 0, {}), Error);
  CHECK_THROWS_AS(select_25d(p.target, p.sources, 2, -1, {}), Error);
  ScanCollection odd = p.sources;
  odd.scans.push_back(generate_scan({5, 32, 32}, 1, reference_domain(), "short").first);
  try {
    (void)select_2d(p.target, odd, 2, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
  CHECK(donor_strategy_from_string("2.5d") == DonorStrategy::D25);
  CHECK_THROWS_AS(donor_strategy_from_string("4d"), Error);

  const auto j = to_json(select_2d(p.target, p.sources, 2, {}));
  CHECK(j["strategy"] == "2d");
  CHECK(j["per_slice"].size() == 6);
  CHECK(j["per_slice"][0].size() == 2);
  CHECK(j["per_slice"][0][0].contains("scan_id"));
  CHECK(j["per_slice"][0][0].contains("slice_index"));
  CHECK(j["per_slice"][0][0].contains("score"));
}
