#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "core/srsim.hpp"
#include "core/volume.hpp"

namespace kswap {

enum class DonorStrategy { D3, D2, D25, Random };

std::string_view to_string(DonorStrategy strategy);
// Accepts "3d", "2d", "2.5d" (and "random").
DonorStrategy donor_strategy_from_string(std::string_view name);

struct DonorRef {
  std::string scan_id;
  std::size_t scan_index = 0;
  std::size_t slice_index = 0;
  double score = 0.0;

  friend bool operator==(const DonorRef&, const DonorRef&) = default;
};

// Donors for every target slice. Ranked lists are sorted by descending score
// with ties broken by (scan index, slice index) ascending; random draws keep
// draw order and carry a score of 0.
struct DonorAssignment {
  std::string target_id;
  DonorStrategy strategy = DonorStrategy::D3;
  int n = 0;
  int m = 0;
  std::vector<std::vector<DonorRef>> per_slice;

  friend bool operator==(const DonorAssignment&, const DonorAssignment&) = default;
};

nlohmann::json to_json(const DonorAssignment& assignment);

// Thread-safe memo of per-slice SR-SIM features and pairwise slice scores.
// Volumes are keyed by (domain, id), so ids must be unique per domain.
class SimilarityCache {
 public:
  explicit SimilarityCache(SrsimParams params = {});

  const SrsimParams& params() const { return params_; }
  std::shared_ptr<const SrsimFeatures> features(const Volume& volume, std::size_t slice);
  double score(const Volume& a, std::size_t slice_a, const Volume& b, std::size_t slice_b);

 private:
  using SliceKey = std::tuple<std::string, std::string, std::size_t>;
  SrsimParams params_;
  std::shared_mutex mutex_;
  std::map<SliceKey, std::shared_ptr<const SrsimFeatures>> features_;
  std::map<std::pair<SliceKey, SliceKey>, double> scores_;
};

// A cache may be passed to share work across strategies; otherwise a private
// one is used. Scores are the same either way.
DonorAssignment select_3d(const Volume& target, const ScanCollection& sources, int n,
                          const SrsimParams& params, SimilarityCache* cache = nullptr);
DonorAssignment select_2d(const Volume& target, const ScanCollection& sources, int n,
                          const SrsimParams& params, SimilarityCache* cache = nullptr);
DonorAssignment select_25d(const Volume& target, const ScanCollection& sources, int n, int m,
                           const SrsimParams& params, SimilarityCache* cache = nullptr);

// Uniform draw without replacement from the candidate pool `pool` would rank:
// whole scans for 3D, same-index slices for 2D, the clipped +-m window for 2.5D.
DonorAssignment select_random(const Volume& target, const ScanCollection& sources, int n,
                              DonorStrategy pool, int m, std::uint64_t seed);

DonorAssignment select_donors(const Volume& target, const ScanCollection& sources,
                              DonorStrategy strategy, int n, int m, const SrsimParams& params,
                              SimilarityCache* cache = nullptr);

// Inclusive candidate slice window [lo, hi] for target slice i.
std::pair<std::size_t, std::size_t> slice_window(std::size_t i, std::size_t slices, int m);

}  // namespace kswap
