#include "core/donor_selection.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/random.hpp"

namespace kswap {

std::string_view to_string(DonorStrategy strategy) {
  switch (strategy) {
    case DonorStrategy::D3: return "3d";
    case DonorStrategy::D2: return "2d";
    case DonorStrategy::D25: return "2.5d";
    case DonorStrategy::Random: return "random";
  }
  return "3d";
}

DonorStrategy donor_strategy_from_string(std::string_view name) {
  if (name == "3d") return DonorStrategy::D3;
  if (name == "2d") return DonorStrategy::D2;
  if (name == "2.5d") return DonorStrategy::D25;
  if (name == "random") return DonorStrategy::Random;
  fail(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(name) +
                                       "' (expected 3d, 2d or 2.5d)");
}

nlohmann::json to_json(const DonorAssignment& assignment) {
  nlohmann::json slices = nlohmann::json::array();
  for (const auto& donors : assignment.per_slice) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& d : donors)
      list.push_back({{"scan_id", d.scan_id}, {"slice_index", d.slice_index}, {"score", d.score}});
    slices.push_back(std::move(list));
  }
  return {{"target", assignment.target_id},
          {"strategy", std::string(to_string(assignment.strategy))},
          {"n", assignment.n},
          {"m", assignment.m},
          {"per_slice", std::move(slices)}};
}

SimilarityCache::SimilarityCache(SrsimParams params) : params_(params) { params_.validate(); }

std::shared_ptr<const SrsimFeatures> SimilarityCache::features(const Volume& volume,
                                                               std::size_t slice) {
  SliceKey key{volume.domain(), volume.id(), slice};
  {
    std::shared_lock lock(mutex_);
    if (auto it = features_.find(key); it != features_.end()) return it->second;
  }
  auto computed = std::make_shared<const SrsimFeatures>(srsim_features(volume.slice(slice), params_));
  std::unique_lock lock(mutex_);
  return features_.try_emplace(std::move(key), std::move(computed)).first->second;
}

double SimilarityCache::score(const Volume& a, std::size_t slice_a, const Volume& b,
                              std::size_t slice_b) {
  auto key = std::make_pair(SliceKey{a.domain(), a.id(), slice_a}, SliceKey{b.domain(), b.id(), slice_b});
  {
    std::shared_lock lock(mutex_);
    if (auto it = scores_.find(key); it != scores_.end()) return it->second;
  }
  const double value = srsim_score(*features(a, slice_a), *features(b, slice_b), params_);
  std::unique_lock lock(mutex_);
  scores_.try_emplace(std::move(key), value);
  return value;
}

std::pair<std::size_t, std::size_t> slice_window(std::size_t i, std::size_t slices, int m) {
  const auto half = static_cast<std::size_t>(std::max(m, 0));
  const std::size_t lo = i >= half ? i - half : 0;
  const std::size_t hi = std::min(slices - 1, i + half);
  return {lo, hi};
}

namespace {

void check_inputs(const Volume& target, const ScanCollection& sources, int n) {
  require(!sources.scans.empty(), ErrorCode::InvalidArgument, "source collection is empty");
  require(n >= 1, ErrorCode::InvalidArgument, "number of donors must be >= 1");
  for (const Volume& s : sources.scans)
    require(s.shape() == target.shape(), ErrorCode::ShapeMismatch,
            "source '" + s.id() + "' is " + s.shape().to_string() + " but target '" +
                target.id() + "' is " + target.shape().to_string());
}

void rank(std::vector<DonorRef>& refs, int n) {
  std::sort(refs.begin(), refs.end(), [](const DonorRef& a, const DonorRef& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.scan_index != b.scan_index) return a.scan_index < b.scan_index;
    return a.slice_index < b.slice_index;
  });
  if (refs.size() > static_cast<std::size_t>(n)) refs.resize(static_cast<std::size_t>(n));
}

// Scores the candidate (scan, slice) set for each target slice and keeps the top n.
DonorAssignment select_slicewise(const Volume& target, const ScanCollection& sources, int n,
                                 int m, DonorStrategy strategy, SimilarityCache& cache) {
  const std::size_t slices = target.shape().slices;
  DonorAssignment out{target.id(), strategy, n, m, std::vector<std::vector<DonorRef>>(slices)};

  struct Job {
    std::size_t target_slice, scan, slice;
  };
  std::vector<Job> jobs;
  std::vector<std::size_t> first_job(slices + 1, 0);
  for (std::size_t i = 0; i < slices; ++i) {
    first_job[i] = jobs.size();
    const auto [lo, hi] = slice_window(i, slices, m);
    for (std::size_t s = 0; s < sources.size(); ++s)
      for (std::size_t j = lo; j <= hi; ++j) jobs.push_back({i, s, j});
  }
  first_job[slices] = jobs.size();

  std::vector<double> scores(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) {
    const Job& job = jobs[k];
    scores[k] = cache.score(target, job.target_slice, sources.scans[job.scan], job.slice);
  });

  for (std::size_t i = 0; i < slices; ++i) {
    auto& refs = out.per_slice[i];
    for (std::size_t k = first_job[i]; k < first_job[i + 1]; ++k)
      refs.push_back({sources.scans[jobs[k].scan].id(), jobs[k].scan, jobs[k].slice, scores[k]});
    rank(refs, n);
  }
  return out;
}

}  // namespace

DonorAssignment select_3d(const Volume& target, const ScanCollection& sources, int n,
                          const SrsimParams& params, SimilarityCache* cache) {
  check_inputs(target, sources, n);
  SimilarityCache local(params);
  SimilarityCache& c = cache != nullptr ? *cache : local;
  const std::size_t slices = target.shape().slices;

  std::vector<double> per_pair(sources.size() * slices);
  parallel_for(per_pair.size(), [&](std::size_t k) {
    const std::size_t s = k / slices, i = k % slices;
    per_pair[k] = c.score(target, i, sources.scans[s], i);
  });

  std::vector<DonorRef> scans;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < slices; ++i) total += per_pair[s * slices + i];
    scans.push_back({sources.scans[s].id(), s, 0, total / static_cast<double>(slices)});
  }
  rank(scans, n);

  DonorAssignment out{target.id(), DonorStrategy::D3, n, 0,
                      std::vector<std::vector<DonorRef>>(slices)};
  for (std::size_t i = 0; i < slices; ++i)
    for (const DonorRef& r : scans) out.per_slice[i].push_back({r.scan_id, r.scan_index, i, r.score});
  return out;
}

DonorAssignment select_2d(const Volume& target, const ScanCollection& sources, int n,
                          const SrsimParams& params, SimilarityCache* cache) {
  check_inputs(target, sources, n);
  SimilarityCache local(params);
  return select_slicewise(target, sources, n, 0, DonorStrategy::D2,
                          cache != nullptr ? *cache : local);
}

DonorAssignment select_25d(const Volume& target, const ScanCollection& sources, int n, int m,
                           const SrsimParams& params, SimilarityCache* cache) {
  check_inputs(target, sources, n);
  require(m >= 0, ErrorCode::InvalidArgument, "2.5D half-window m must be >= 0");
  SimilarityCache local(params);
  return select_slicewise(target, sources, n, m, DonorStrategy::D25,
                          cache != nullptr ? *cache : local);
}

DonorAssignment select_random(const Volume& target, const ScanCollection& sources, int n,
                              DonorStrategy pool, int m, std::uint64_t seed) {
  check_inputs(target, sources, n);
  require(pool != DonorStrategy::Random, ErrorCode::InvalidArgument,
          "random selection needs a 3d, 2d or 2.5d candidate pool");
  const std::size_t slices = target.shape().slices;
  const int window = pool == DonorStrategy::D25 ? m : 0;
  DonorAssignment out{target.id(), DonorStrategy::Random, n, window,
                      std::vector<std::vector<DonorRef>>(slices)};
  Rng rng(seed);

  // Partial Fisher-Yates: the first k entries become a uniform k-subset in draw order.
  auto draw = [&](std::vector<std::pair<std::size_t, std::size_t>> candidates) {
    const std::size_t k = std::min(candidates.size(), static_cast<std::size_t>(n));
    for (std::size_t a = 0; a < k; ++a) {
      const std::size_t b = a + static_cast<std::size_t>(rng.below(candidates.size() - a));
      std::swap(candidates[a], candidates[b]);
    }
    candidates.resize(k);
    return candidates;
  };

  if (pool == DonorStrategy::D3) {
    std::vector<std::pair<std::size_t, std::size_t>> scans;
    for (std::size_t s = 0; s < sources.size(); ++s) scans.emplace_back(s, 0);
    const auto chosen = draw(scans);
    for (std::size_t i = 0; i < slices; ++i)
      for (auto [s, unused] : chosen) out.per_slice[i].push_back({sources.scans[s].id(), s, i, 0.0});
    return out;
  }
  for (std::size_t i = 0; i < slices; ++i) {
    const auto [lo, hi] = slice_window(i, slices, window);
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t s = 0; s < sources.size(); ++s)
      for (std::size_t j = lo; j <= hi; ++j) candidates.emplace_back(s, j);
    for (auto [s, j] : draw(std::move(candidates)))
      out.per_slice[i].push_back({sources.scans[s].id(), s, j, 0.0});
  }
  return out;
}

DonorAssignment select_donors(const Volume& target, const ScanCollection& sources,
                              DonorStrategy strategy, int n, int m, const SrsimParams& params,
                              SimilarityCache* cache) {
  switch (strategy) {
    case DonorStrategy::D3: return select_3d(target, sources, n, params, cache);
    case DonorStrategy::D2: return select_2d(target, sources, n, params, cache);
    case DonorStrategy::D25: return select_25d(target, sources, n, m, params, cache);
    case DonorStrategy::Random: break;
  }
  fail(ErrorCode::InvalidArgument, "select_donors cannot rank with the random strategy");
}

}  // namespace kswap
