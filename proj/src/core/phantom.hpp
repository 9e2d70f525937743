#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/volume.hpp"

namespace kswap {

// Scanner appearance model applied on top of a shared anatomy.
struct DomainParams {
  double gamma = 1.0;           // intensity power law
  double bias_amplitude = 0.0;  // strength of the smooth multiplicative field
  double contrast_scale = 1.0;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;       // drives the bias field shape

  void validate() const;
  friend bool operator==(const DomainParams&, const DomainParams&) = default;
};

enum class Severity { Subtle, Medium, Severe };

std::string_view to_string(Severity severity);
Severity severity_from_string(std::string_view name);

// Appearance of the reference scanner (where the baseline predictor is tuned)
// and of the shifted scanners in each tier; `seed` is left at 0.
DomainParams reference_domain();
DomainParams tier_domain(Severity severity);

inline constexpr Shape3 kDefaultPhantomShape{8, 128, 128};

// Intensity scan and its brain mask. The anatomy depends only on
// anatomy_seed, so the mask is the same under every DomainParams.
std::pair<Volume, Volume> generate_scan(const Shape3& shape, std::uint64_t anatomy_seed,
                                        const DomainParams& domain, std::string id = "scan",
                                        std::string domain_name = "");

// Raw anatomy intensities in [0,1] (what generate_scan returns for the
// identity DomainParams).
std::vector<float> generate_anatomy(const Shape3& shape, std::uint64_t anatomy_seed,
                                    std::vector<float>* mask = nullptr);

struct Benchmark {
  Severity severity = Severity::Subtle;
  std::uint64_t seed = 0;
  std::vector<ScanCollection> domains;  // domains[0] is the reference scanner
  std::vector<DomainParams> params;
  std::vector<std::vector<std::uint64_t>> anatomy_seeds;
};

// n_domains collections of scans_per_domain scans each; domain 0 uses the
// reference appearance, the rest use the tier's appearance.
Benchmark generate_benchmark(int n_domains, int scans_per_domain, Severity severity,
                             std::uint64_t seed, const Shape3& shape = kDefaultPhantomShape);

nlohmann::json to_json(const DomainParams& params);
nlohmann::json manifest(const Benchmark& benchmark);
// Reference plus per-tier appearance table, as shipped in data/phantom_tiers.json.
nlohmann::json tier_table();

}  // namespace kswap
