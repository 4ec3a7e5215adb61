#include "quopt/analysis.hpp"

#include "quopt/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace quopt {

namespace {

// All circuits one rewrite away, deduplicated within the batch.
std::vector<Circuit> neighbors(const Circuit& c, const RuleSet& rules) {
    std::vector<Circuit> out;
    std::unordered_set<std::uint64_t> seen;
    for (const Gate& g : c.gates()) {
        for (std::size_t r = 1; r < rules.size(); ++r) {
            auto m = match_at(c, g.id, rules.rules[r]);
            if (!m)
                continue;
            ApplyResult res = apply(c, *m);
            if (seen.insert(res.circuit.canonical_hash()).second)
                out.push_back(std::move(res.circuit));
        }
    }
    return out;
}

} // namespace

BfsOutcome bfs_radius(const Circuit& start, const RuleSet& rules, int max_radius,
                      CostMetric metric, std::size_t node_budget) {
    if (max_radius < 1)
        throw std::invalid_argument("bfs_radius: max_radius must be >= 1");
    const std::int64_t target = cost_int(start, metric);

    BfsOutcome out;
    std::unordered_set<std::uint64_t> seen{start.canonical_hash()};
    std::vector<Circuit> level{start};
    out.explored = 1;

    for (int depth = 1; depth <= max_radius; ++depth) {
        std::vector<Circuit> next;
        for (const Circuit& c : level) {
            for (Circuit& n : neighbors(c, rules)) {
                if (!seen.insert(n.canonical_hash()).second)
                    continue;
                if (++out.explored > node_budget) {
                    out.status = BfsStatus::BudgetExhausted;
                    return out;
                }
                if (cost_int(n, metric) < target) {
                    out.status = BfsStatus::Found;
                    out.radius = depth;
                    return out;
                }
                next.push_back(std::move(n));
            }
        }
        if (next.empty())
            break; // nothing new is reachable
        level = std::move(next);
    }
    out.status = BfsStatus::NotWithinRadius;
    return out;
}

LandscapeResult landscape_study(const Circuit& start, const RuleSet& rules, int reach_depth,
                                std::size_t samples, int max_radius, std::uint64_t seed,
                                CostMetric metric, std::size_t node_budget) {
    // materialize the reachable set
    std::vector<Circuit> all{start};
    std::unordered_set<std::uint64_t> seen{start.canonical_hash()};
    std::size_t level_begin = 0, level_end = 1;
    for (int depth = 0; depth < reach_depth; ++depth) {
        for (std::size_t i = level_begin; i < level_end; ++i) {
            const Circuit c = all[i]; // copy: `all` grows below
            for (Circuit& n : neighbors(c, rules)) {
                if (!seen.insert(n.canonical_hash()).second)
                    continue;
                all.push_back(std::move(n));
                if (all.size() > node_budget)
                    throw std::runtime_error("landscape_study: node budget exhausted");
            }
        }
        level_begin = level_end;
        level_end = all.size();
    }

    LandscapeResult res;
    Rng rng(seed);
    std::vector<std::size_t> picks;
    if (samples >= all.size()) {
        picks.resize(all.size());
        for (std::size_t i = 0; i < all.size(); ++i)
            picks[i] = i;
    } else {
        // uniform sample without replacement (partial Fisher-Yates)
        std::vector<std::size_t> idx(all.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            idx[i] = i;
        for (std::size_t i = 0; i < samples; ++i)
            std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
        picks.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(samples));
    }

    for (std::size_t i : picks) {
        const BfsOutcome o = bfs_radius(all[i], rules, max_radius, metric, node_budget);
        res.radii.push_back(o.status == BfsStatus::Found ? o.radius : -1);
    }
    res.sampled = picks.size();

    for (int r = 1; r <= max_radius; ++r) {
        std::size_t covered = 0;
        for (int radius : res.radii)
            if (radius != -1 && radius <= r)
                ++covered;
        res.cdf.emplace_back(r, res.sampled == 0
                                    ? 0.0
                                    : static_cast<double>(covered) /
                                          static_cast<double>(res.sampled));
    }
    return res;
}

namespace {

AblationTrace plateau_walk(const Circuit& input, const RuleSet& rules, std::size_t step_budget,
                           std::uint64_t seed, bool allow_increase, double alpha,
                           CostMetric metric) {
    Rng rng(seed);
    Circuit cur = input;
    const std::int64_t input_cost = cost_int(input, metric);
    std::int64_t cur_cost = input_cost;
    AblationTrace trace;
    trace.best_by_step.emplace_back(0, input_cost);
    trace.final_best = input_cost;

    for (std::size_t step = 1; step <= step_budget; ++step) {
        struct Action {
            Circuit circuit;
            std::int64_t cost;
        };
        std::vector<Action> actions;
        for (Circuit& n : neighbors(cur, rules)) {
            const std::int64_t c = cost_int(n, metric);
            if (allow_increase) {
                if (c > static_cast<std::int64_t>(
                            std::floor(alpha * static_cast<double>(input_cost))))
                    continue;
            } else {
                if (c > cur_cost)
                    continue; // reject any negative-reward action
            }
            actions.push_back({std::move(n), c});
        }
        if (actions.empty())
            break;
        Action& pick = actions[rng.below(actions.size())];
        cur = std::move(pick.circuit);
        cur_cost = pick.cost;
        if (cur_cost < trace.final_best) {
            trace.final_best = cur_cost;
            trace.best_by_step.emplace_back(step, cur_cost);
        }
    }
    return trace;
}

} // namespace

AblationResult cost_increase_ablation(const Circuit& input, const RuleSet& rules,
                                      std::size_t step_budget, std::uint64_t seed, double alpha,
                                      CostMetric metric) {
    AblationResult res;
    res.monotone = plateau_walk(input, rules, step_budget, seed, false, alpha, metric);
    res.permissive = plateau_walk(input, rules, step_budget, seed, true, alpha, metric);
    return res;
}

double geomean_reduction(const std::vector<std::pair<double, double>>& in_out) {
    if (in_out.empty())
        return 0.0;
    double log_sum = 0.0;
    for (const auto& [in, out] : in_out) {
        if (in <= 0.0 || out <= 0.0)
            throw std::invalid_argument("geomean_reduction: nonpositive cost");
        log_sum += std::log(out / in);
    }
    return 1.0 - std::exp(log_sum / static_cast<double>(in_out.size()));
}

} // namespace quopt
