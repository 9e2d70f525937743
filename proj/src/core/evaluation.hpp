#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/donor_selection.hpp"
#include "core/metrics.hpp"
#include "core/predictor.hpp"
#include "core/transfer.hpp"

namespace kswap {

// Arms of the ablation. Naive applies the predictor to raw target slices;
// SwapSingle and Mst draw 1 or n_mst donors at random from the strategy's
// candidate pool; SrsimMst ranks that pool by SR-SIM.
enum class EvaluationMode { Naive, SwapSingle, Mst, SrsimMst };

std::string_view to_string(EvaluationMode mode);
// "none" is accepted as an alias of "naive".
EvaluationMode evaluation_mode_from_string(std::string_view name);

struct EvaluationConfig {
  EvaluationMode mode = EvaluationMode::SrsimMst;
  DonorStrategy strategy = DonorStrategy::D3;
  int m = 2;
  std::uint64_t seed = 42;
  TransferConfig transfer{};
  SrsimParams srsim{};
  SurfaceDiceParams surface{};

  void validate() const;
};

struct ScanScore {
  std::string scan_id;
  double surface_dice = 0.0;
  double dice = 0.0;
};

struct PairEvaluation {
  std::string source_domain;
  std::string target_domain;
  EvaluationConfig config;
  std::vector<ScanScore> per_scan;
  double surface_dice = 0.0;  // mean over scans
  double dice = 0.0;
  std::vector<std::string> warnings;
};

// Donors each target scan would use under the config (empty for Naive).
// Random draws are seeded per target index so reruns repeat.
std::vector<DonorAssignment> plan_donors(const ScanCollection& sources,
                                         const ScanCollection& targets,
                                         const EvaluationConfig& config,
                                         SimilarityCache* cache = nullptr);

// Scores every target scan against its mask. `donors` may carry the output of
// plan_donors to reuse it across betas.
PairEvaluation evaluate_pair(const ScanCollection& sources, const ScanCollection& targets,
                             const EvaluationConfig& config, const Predictor& predictor,
                             const std::vector<DonorAssignment>* donors = nullptr);

// Probability volume of one target scan under the config.
TransferResult predict_target(const Volume& target, const ScanCollection& sources,
                              const DonorAssignment* donors, const EvaluationConfig& config,
                              const Predictor& predictor);

std::string pair_id(std::string_view source_domain, std::string_view target_domain);

nlohmann::json to_json(const PairEvaluation& evaluation);

}  // namespace kswap
