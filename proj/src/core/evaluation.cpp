#include "core/evaluation.hpp"

#include "core/error.hpp"
#include "core/random.hpp"

namespace kswap {

std::string_view to_string(EvaluationMode mode) {
  switch (mode) {
    case EvaluationMode::Naive: return "naive";
    case EvaluationMode::SwapSingle: return "swap-single";
    case EvaluationMode::Mst: return "mst";
    case EvaluationMode::SrsimMst: return "srsim-mst";
  }
  return "naive";
}

EvaluationMode evaluation_mode_from_string(std::string_view name) {
  if (name == "naive" || name == "none") return EvaluationMode::Naive;
  if (name == "swap-single") return EvaluationMode::SwapSingle;
  if (name == "mst") return EvaluationMode::Mst;
  if (name == "srsim-mst") return EvaluationMode::SrsimMst;
  fail(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) +
                                       "' (expected naive, none, swap-single, mst, srsim-mst)");
}

void EvaluationConfig::validate() const {
  transfer.validate();
  srsim.validate();
  require(m >= 0, ErrorCode::InvalidArgument, "m must be >= 0");
  require(strategy != DonorStrategy::Random, ErrorCode::InvalidArgument,
          "evaluation strategy must be 3d, 2d or 2.5d");
  require(surface.tolerance >= 0.0, ErrorCode::InvalidArgument, "tolerance must be >= 0");
}

std::string pair_id(std::string_view source_domain, std::string_view target_domain) {
  return std::string(source_domain) + "->" + std::string(target_domain);
}

std::vector<DonorAssignment> plan_donors(const ScanCollection& sources,
                                         const ScanCollection& targets,
                                         const EvaluationConfig& config, SimilarityCache* cache) {
  config.validate();
  std::vector<DonorAssignment> out;
  if (config.mode == EvaluationMode::Naive) return out;
  SimilarityCache local(config.srsim);
  SimilarityCache& c = cache != nullptr ? *cache : local;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Volume& target = targets.scans[t];
    switch (config.mode) {
      case EvaluationMode::SwapSingle:
        out.push_back(select_random(target, sources, 1, config.strategy, config.m,
                                    derive_seed(config.seed, t, 1)));
        break;
      case EvaluationMode::Mst:
        out.push_back(select_random(target, sources, config.transfer.n_mst, config.strategy,
                                    config.m, derive_seed(config.seed, t, 2)));
        break;
      case EvaluationMode::SrsimMst:
        out.push_back(select_donors(target, sources, config.strategy, config.transfer.n_mst,
                                    config.m, config.srsim, &c));
        break;
      case EvaluationMode::Naive: break;
    }
  }
  return out;
}

TransferResult predict_target(const Volume& target, const ScanCollection& sources,
                              const DonorAssignment* donors, const EvaluationConfig& config,
                              const Predictor& predictor) {
  if (config.mode == EvaluationMode::Naive) return {naive_predict(target, predictor), {}};
  require(donors != nullptr, ErrorCode::InvalidArgument,
          "mode " + std::string(to_string(config.mode)) + " needs a donor assignment");
  TransferConfig transfer = config.transfer;
  if (config.mode == EvaluationMode::SwapSingle) transfer.n_mst = 1;
  return multi_source_transfer(target, sources, *donors, transfer, predictor);
}

PairEvaluation evaluate_pair(const ScanCollection& sources, const ScanCollection& targets,
                             const EvaluationConfig& config, const Predictor& predictor,
                             const std::vector<DonorAssignment>* donors) {
  config.validate();
  require(targets.has_masks(), ErrorCode::InvalidArgument,
          "target collection '" + targets.domain + "' has no ground-truth masks");
  targets.validate();

  std::vector<DonorAssignment> planned;
  if (donors == nullptr) {
    planned = plan_donors(sources, targets, config);
    donors = &planned;
  }
  if (config.mode != EvaluationMode::Naive)
    require(donors->size() == targets.size(), ErrorCode::InvalidArgument,
            "donor plan covers " + std::to_string(donors->size()) + " of " +
                std::to_string(targets.size()) + " targets");

  PairEvaluation out;
  out.source_domain = sources.domain;
  out.target_domain = targets.domain;
  out.config = config;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Volume& target = targets.scans[t];
    const DonorAssignment* plan = config.mode == EvaluationMode::Naive ? nullptr : &(*donors)[t];
    TransferResult result = predict_target(target, sources, plan, config, predictor);
    const Volume pred = binarize(result.probabilities, config.transfer.binarize_threshold);
    const Volume gt = targets.masks[t];
    ScanScore score{target.id(), surface_dice(pred, gt, config.surface), dice(pred, gt)};
    out.surface_dice += score.surface_dice;
    out.dice += score.dice;
    out.per_scan.push_back(std::move(score));
    for (auto& w : result.warnings) out.warnings.push_back(target.id() + ": " + w);
  }
  out.surface_dice /= static_cast<double>(targets.size());
  out.dice /= static_cast<double>(targets.size());
  return out;
}

nlohmann::json to_json(const PairEvaluation& e) {
  nlohmann::json per_scan = nlohmann::json::array();
  for (const auto& s : e.per_scan)
    per_scan.push_back({{"scan_id", s.scan_id}, {"surface_dice", s.surface_dice}, {"dice", s.dice}});
  const bool uses_donors = e.config.mode != EvaluationMode::Naive;
  return {{"schema", 1},
          {"pair", pair_id(e.source_domain, e.target_domain)},
          {"mode", std::string(to_string(e.config.mode))},
          {"strategy", uses_donors ? nlohmann::json(std::string(to_string(e.config.strategy)))
                                   : nlohmann::json(nullptr)},
          {"beta", uses_donors ? nlohmann::json(e.config.transfer.beta) : nlohmann::json(0.0)},
          {"n_mst", e.config.transfer.n_mst},
          {"m", e.config.m},
          {"seed", e.config.seed},
          {"tolerance", e.config.surface.tolerance},
          {"surface_dice", e.surface_dice},
          {"dice", e.dice},
          {"per_scan", std::move(per_scan)},
          {"warnings", e.warnings}};
}

}  // namespace kswap
