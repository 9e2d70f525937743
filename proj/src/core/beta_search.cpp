#include "core/beta_search.hpp"

#include "core/error.hpp"

namespace kswap {

std::vector<double> default_beta_grid() { return {0.01, 0.02, 0.03, 0.05, 0.07, 0.10}; }

void validate_grid(const std::vector<double>& grid) {
  require(!grid.empty(), ErrorCode::InvalidArgument, "beta grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 0.0 && grid[i] <= 1.0, ErrorCode::InvalidArgument,
            "beta " + std::to_string(grid[i]) + " is outside [0,1]");
    if (i > 0)
      require(grid[i] > grid[i - 1], ErrorCode::InvalidArgument,
              "beta grid must be strictly increasing");
  }
}

GridSearchResult grid_search(const std::vector<DomainPair>& pairs, const std::vector<double>& grid,
                             const EvaluationConfig& config, const Predictor& predictor) {
  validate_grid(grid);
  config.validate();
  require(!pairs.empty(), ErrorCode::InvalidArgument, "grid search needs at least one pair");

  GridSearchResult out;
  SimilarityCache cache(config.srsim);
  for (const DomainPair& pair : pairs) {
    require(pair.sources != nullptr && pair.targets != nullptr, ErrorCode::InvalidArgument,
            "domain pair is missing a collection");
    require(pair.targets->has_masks(), ErrorCode::InvalidArgument,
            "targets '" + pair.targets->domain + "' carry no masks");
    BetaCurve curve{pair.sources->domain, pair.targets->domain, {}};
    try {
      const auto donors = plan_donors(*pair.sources, *pair.targets, config, &cache);
      for (double beta : grid) {
        EvaluationConfig at = config;
        at.transfer.beta = beta;
        const auto eval = evaluate_pair(*pair.sources, *pair.targets, at, predictor, &donors);
        curve.points.push_back({beta, eval.surface_dice});
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ShapeMismatch) throw;
      out.failures.push_back({curve.pair(), e.what()});
      continue;
    }
    out.curves.push_back(std::move(curve));
  }
  return out;
}

std::vector<std::pair<std::string, double>> optimal_per_pair(const std::vector<BetaCurve>& curves) {
  require(!curves.empty(), ErrorCode::InvalidArgument, "no curves to select from");
  std::vector<std::pair<std::string, double>> out;
  for (const BetaCurve& c : curves) {
    require(!c.points.empty(), ErrorCode::InvalidArgument, "curve '" + c.pair() + "' is empty");
    const BetaPoint* best = &c.points.front();
    for (const BetaPoint& p : c.points)
      if (p.score > best->score || (p.score == best->score && p.beta < best->beta)) best = &p;
    out.emplace_back(c.pair(), best->beta);
  }
  return out;
}

double averaged_optimal(const std::vector<BetaCurve>& curves) {
  require(!curves.empty(), ErrorCode::InvalidArgument, "no curves to average");
  const auto& grid = curves.front().points;
  require(!grid.empty(), ErrorCode::InvalidArgument, "curves are empty");
  for (const BetaCurve& c : curves) {
    bool same = c.points.size() == grid.size();
    for (std::size_t i = 0; same && i < grid.size(); ++i) same = c.points[i].beta == grid[i].beta;
    require(same, ErrorCode::InvalidArgument,
            "curve '" + c.pair() + "' uses a different beta grid");
  }
  double best_beta = grid.front().beta;
  double best_mean = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double total = 0.0;
    for (const BetaCurve& c : curves) total += c.points[i].score;
    const double mean = total / static_cast<double>(curves.size());
    if (mean > best_mean || (mean == best_mean && grid[i].beta < best_beta)) {
      best_mean = mean;
      best_beta = grid[i].beta;
    }
  }
  return best_beta;
}

nlohmann::json to_json(const BetaCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : curve.points) points.push_back({{"beta", p.beta}, {"score", p.score}});
  return {{"pair", curve.pair()},
          {"source", curve.source_domain},
          {"target", curve.target_domain},
          {"points", std::move(points)}};
}

nlohmann::json to_json(const GridSearchResult& result) {
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : result.curves) curves.push_back(to_json(c));
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : result.failures) failures.push_back({{"pair", f.pair}, {"reason", f.reason}});
  nlohmann::json out{{"schema", 1}, {"curves", std::move(curves)}, {"failures", std::move(failures)}};
  if (!result.curves.empty()) {
    nlohmann::json per_pair = nlohmann::json::object();
    for (const auto& [pair, beta] : optimal_per_pair(result.curves)) per_pair[pair] = beta;
    out["optimal_per_pair"] = std::move(per_pair);
    out["averaged_optimal"] = averaged_optimal(result.curves);
  }
  return out;
}

}  // namespace kswap
