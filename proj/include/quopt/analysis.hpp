#pragma once

#include "quopt/match.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace quopt {

enum class BfsStatus { Found, NotWithinRadius, BudgetExhausted };

struct BfsOutcome {
    BfsStatus status = BfsStatus::NotWithinRadius;
    int radius = -1;        // valid when status == Found
    std::size_t explored = 0; // distinct circuits visited
};

// Shortest number of rewrite applications from `start` to any strictly
// cheaper circuit, exploring all (gate, rule) actions level by level with
// canonical-hash deduplication.
BfsOutcome bfs_radius(const Circuit& start, const RuleSet& rules, int max_radius,
                      CostMetric metric = CostMetric::Total,
                      std::size_t node_budget = 2'000'000);

struct LandscapeResult {
    std::size_t sampled = 0;
    std::vector<int> radii; // -1 when deeper than max_radius
    // cumulative fraction of samples with radius <= r, for r = 1..max_radius
    std::vector<std::pair<int, double>> cdf;
};

// Materializes the deduplicated reachable set within reach_depth rewrite
// applications, samples circuits uniformly, and measures each one's
// optimization-landscape radius.
LandscapeResult landscape_study(const Circuit& start, const RuleSet& rules, int reach_depth,
                                std::size_t samples, int max_radius, std::uint64_t seed,
                                CostMetric metric = CostMetric::Total,
                                std::size_t node_budget = 2'000'000);

struct AblationTrace {
    std::vector<std::pair<std::size_t, std::int64_t>> best_by_step; // recorded on change
    std::int64_t final_best = 0;
};

struct AblationResult {
    AblationTrace monotone;   // never accepts a cost increase
    AblationTrace permissive; // accepts anything within the alpha bound
};

// The same seeded random plateau walk run twice, with and without
// cost-increasing actions.
AblationResult cost_increase_ablation(const Circuit& input, const RuleSet& rules,
                                      std::size_t step_budget, std::uint64_t seed,
                                      double alpha = 1.2,
                                      CostMetric metric = CostMetric::Total);

// 1 - geomean(out_i / in_i); the headline reduction row of benchmark tables.
double geomean_reduction(const std::vector<std::pair<double, double>>& in_out);

} // namespace quopt
