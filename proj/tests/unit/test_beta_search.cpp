#include <doctest.h>

#include <algorithm>

#include "core/beta_search.hpp"
#include "core/error.hpp"
#include "core/phantom.hpp"
#include "oracles.hpp"

using namespace kswap;

namespace {

BetaCurve curve(std::string name, std::vector<std::pair<double, double>> pts) {
  BetaCurve c{"src", std::move(name), {}};
  for (auto [b, s] : pts) c.points.push_back({b, s});
  return c;
}

}  // namespace

TEST_CASE("optimal per pair picks the argmax, ties to the smaller beta") {
  const auto a = optimal_per_pair({curve("a", {{0.01, 0.5}, {0.03, 0.7}})});
  CHECK(a[0].second == 0.03);
  const auto b = optimal_per_pair({curve("b", {{0.01, 0.7}, {0.03, 0.7}})});
  CHECK(b[0].second == 0.01);
}

TEST_CASE("averaged optimal uses the across-pair mean") {
  CHECK(averaged_optimal({curve("a", {{0.01, 0.8}, {0.03, 0.2}}),
                          curve("b", {{0.01, 0.2}, {0.03, 0.9}})}) == 0.03);
  CHECK_THROWS_AS(averaged_optimal({curve("a", {{0.01, 0.8}}), curve("b", {{0.02, 0.2}})}), Error);
  CHECK_THROWS_AS(averaged_optimal({}), Error);
}

TEST_CASE("selections agree with brute force on random curve sets") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = default_beta_grid();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BetaCurve> curves;
    for (int p = 0; p < 6; ++p) {
      std::vector<std::pair<double, double>> pts;
      // Coarse scores make ties common.
      for (double b : grid) pts.push_back({b, std::round(u(rng) * 4) / 4});
      curves.push_back(curve("p" + std::to_string(p), pts));
    }
    const auto per = optimal_per_pair(curves);
    for (std::size_t p = 0; p < curves.size(); ++p) {
      double best = -1, at = -1;
      for (const auto& pt : curves[p].points)
        if (pt.score > best) best = pt.score, at = pt.beta;
      CHECK(per[p].second == at);
    }
    double best = -1, at = -1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double total = 0;
      for (const auto& c : curves) total += c.points[i].score;
      if (total / curves.size() > best) best = total / curves.size(), at = grid[i];
    }
    CHECK(averaged_optimal(curves) == at);

    // Identical curves: both strategies agree; positive scaling changes nothing.
    const std::vector<BetaCurve> same(4, curves[0]);
    CHECK(averaged_optimal(same) == optimal_per_pair(same)[0].second);
    CHECK(averaged_optimal({curves[0]}) == per[0].second);
    auto scaled = curves;
    for (auto& c : scaled)
      for (auto& pt : c.points) pt.score *= 0.37;
    CHECK(averaged_optimal(scaled) == averaged_optimal(curves));
  }
}

TEST_CASE("grid validation") {
  CHECK_NOTHROW(validate_grid({0.0}));
  CHECK_THROWS_AS(validate_grid({0.01, 0.01}), Error);
  CHECK_THROWS_AS(validate_grid({0.03, 0.01}), Error);
  CHECK_THROWS_AS(validate_grid({}), Error);
  CHECK_THROWS_AS(validate_grid({1.5}), Error);
}

TEST_CASE("grid search points equal independent evaluations") {
  const Benchmark b = generate_benchmark(2, 2, Severity::Medium, 9, {4, 32, 32});
  const BaselinePredictor pred;
  EvaluationConfig cfg;
  cfg.mode = EvaluationMode::SrsimMst;
  cfg.strategy = DonorStrategy::D25;
  const DomainPair pair{&b.domains[0], &b.domains[1]};
  const auto result = grid_search({pair}, {0.0, 0.05}, cfg, pred);
  REQUIRE(result.curves.size() == 1);
  REQUIRE(result.failures.empty());
  for (const auto& pt : result.curves[0].points) {
    EvaluationConfig at = cfg;
    at.transfer.beta = pt.beta;
    CHECK(pt.score == evaluate_pair(b.domains[0], b.domains[1], at, pred).surface_dice);
  }
  EvaluationConfig naive = cfg;
  naive.mode = EvaluationMode::Naive;
  CHECK(result.curves[0].points[0].score ==
        evaluate_pair(b.domains[0], b.domains[1], naive, pred).surface_dice);

  const auto j = to_json(result);
  CHECK(j["schema"] == 1);
  CHECK(j["curves"][0]["pair"] == "medium-ref->medium-shift1");
  CHECK(j.contains("averaged_optimal"));
  CHECK(j["optimal_per_pair"].contains("medium-ref->medium-shift1"));
}

TEST_CASE("a shape-incompatible pair is recorded and the others proceed") {
  const Benchmark good = generate_benchmark(2, 2, Severity::Subtle, 3, {4, 32, 32});
  Benchmark other = generate_benchmark(2, 2, Severity::Subtle, 4, {4, 40, 32});
  other.domains[1].domain = "odd";
  const BaselinePredictor pred;
  EvaluationConfig cfg;
  cfg.mode = EvaluationMode::Mst;
  const auto r = grid_search({{&good.domains[0], &other.domains[1]}, {&good.domains[0], &good.domains[1]}},
                             {0.02, 0.05}, cfg, pred);
  CHECK(r.curves.size() == 1);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].pair == "subtle-ref->odd");
}
