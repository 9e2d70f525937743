#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/evaluation.hpp"

namespace kswap {

struct BetaPoint {
  double beta = 0.0;
  double score = 0.0;  // mean surface Dice over the validation targets
};

struct BetaCurve {
  std::string source_domain;
  std::string target_domain;
  std::vector<BetaPoint> points;  // strictly increasing beta

  std::string pair() const { return pair_id(source_domain, target_domain); }
};

struct DomainPair {
  const ScanCollection* sources = nullptr;
  const ScanCollection* targets = nullptr;  // must carry masks
};

struct PairFailure {
  std::string pair;
  std::string reason;
};

struct GridSearchResult {
  std::vector<BetaCurve> curves;
  std::vector<PairFailure> failures;
};

// {0.01, 0.02, 0.03, 0.05, 0.07, 0.10}
std::vector<double> default_beta_grid();
void validate_grid(const std::vector<double>& grid);

// For every pair, plan donors once and score each beta with config's arm.
// A pair whose volumes are shape-incompatible is recorded as a failure and
// skipped; the others still run.
GridSearchResult grid_search(const std::vector<DomainPair>& pairs, const std::vector<double>& grid,
                             const EvaluationConfig& config, const Predictor& predictor);

// Argmax beta per curve, ties to the smaller beta. Order follows `curves`.
std::vector<std::pair<std::string, double>> optimal_per_pair(const std::vector<BetaCurve>& curves);

// Argmax of the across-pair mean score, ties to the smaller beta.
double averaged_optimal(const std::vector<BetaCurve>& curves);

nlohmann::json to_json(const BetaCurve& curve);
nlohmann::json to_json(const GridSearchResult& result);

}  // namespace kswap
