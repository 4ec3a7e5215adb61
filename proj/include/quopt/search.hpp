#pragma once

#include "quopt/checkpoint.hpp"
#include "quopt/train.hpp"

#include <unordered_map>

namespace quopt {

struct SearchConfig {
    // Deterministic schedule for the alternating fine-tune / search driver.
    std::size_t head_start_iterations = 1;  // fine-tune alone before search starts
    std::size_t ft_iterations_per_slice = 1;
    std::size_t pgs_steps_per_slice = 512;
    std::size_t max_slices = 64;
    // Search restart threshold: steps without improvement before the search
    // re-arms with the latest fine-tuned parameters.
    std::size_t pgs_steps_timeout = 4096;
    // Wall-clock backstop, checked between slices only so that a run that
    // finishes its quota is bit-reproducible. 0 disables the backstop.
    double wall_budget_s = 0.0;
    std::size_t partition_max_gates = 512;
    // Re-check the final circuit against the input with the unitary oracle
    // when small enough.
    int verify_max_qubits = 8;
};

// Greedy exploitation of a trained policy with hard/soft gate masks. The
// buffer holds only circuits of the current best cost; any strictly better
// discovery clears it and restarts from the new frontier.
class PolicyGuidedSearch {
public:
    PolicyGuidedSearch(const RuleSet& rules, const TrainConfig& cfg, std::uint64_t seed);

    void reset_start(const Circuit& start);
    void refresh_params(const AgentParams& params); // adopt a newer checkpoint

    // Runs up to n steps; returns the number of strictly-better improvements
    // found. Stops early when every frontier circuit is exhausted.
    std::size_t run_steps(std::size_t n);

    bool exhausted() const { return exhausted_; }
    std::int64_t best_cost() const { return best_cost_; }
    const Circuit& best() const { return frontier_.front(); }
    std::size_t steps_since_improvement() const { return since_improvement_; }
    std::size_t total_steps() const { return total_steps_; }
    std::size_t frontier_size() const { return frontier_.size(); }

    struct MaskCounts {
        std::size_t hard = 0, soft = 0;
        bool soft_cleared = false;
    };
    MaskCounts mask_counts(const Circuit& c) const;

private:
    struct MaskState {
        std::unordered_set<GateId> hard, soft;
        bool soft_cleared = false;
    };

    const RuleSet& rules_;
    TrainConfig cfg_;
    AgentParams params_;
    bool has_params_ = false;
    Rng rng_;
    std::vector<Circuit> frontier_; // all at best_cost_
    std::unordered_set<std::uint64_t> frontier_hashes_;
    std::unordered_map<std::uint64_t, MaskState> masks_;
    std::int64_t best_cost_ = 0;
    std::int64_t input_cost_ = 0;
    std::size_t since_improvement_ = 0;
    std::size_t total_steps_ = 0;
    bool exhausted_ = false;

    bool step(); // one action; true when an improvement happened
};

struct OptimizeReport {
    std::int64_t input_cost = 0;
    std::int64_t output_cost = 0;
    std::size_t steps = 0; // fine-tune entries + search steps
    std::vector<std::pair<double, std::int64_t>> improvements; // (wall seconds, cost)
    bool verified = false; // unitary equivalence re-checked (when small enough)
};

struct OptimizeResult {
    Circuit circuit;
    OptimizeReport report;
};

// Fig.-7 style cooperation, realized as deterministic alternation: one
// fine-tuning iteration, then a search slice, exchanging best circuits at
// the slice boundary; a stalled search re-arms with the newest parameters.
OptimizeResult optimize(const Circuit& input, AgentParams& params, const RuleSet& rules,
                        const TrainConfig& tcfg, const SearchConfig& scfg, std::uint64_t seed);

} // namespace quopt
