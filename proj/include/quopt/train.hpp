#pragma once

#include "quopt/agent.hpp"
#include "quopt/match.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <unordered_set>

namespace quopt {

struct TrainConfig {
    CostMetric metric = CostMetric::Total;
    std::size_t trajectories = 16; // B
    std::size_t horizon = 600;     // T
    double gamma = 0.95;
    double clip_eps = 0.2;
    double entropy_coef = 0.02; // c2
    double value_coef = 0.5;    // c1
    std::size_t epochs = 5;     // M
    std::size_t minibatch = 256;
    double lr_actor = 3e-4;
    double lr_critic = 5e-4;
    double lr_gnn = 3e-4;
    double alpha = 1.2;     // cost-bound stop factor
    int influence_hops = 1; // l
    double buffer_beta = 0.75;
    std::size_t buffer_capacity = 4096;
    std::size_t workers = 1;
};

// One collected step. `before`/`after` are shared along a trajectory.
struct RolloutEntry {
    std::shared_ptr<const Circuit> before, after;
    GateId gate = kNoGate;
    std::size_t xfer_index = 0;
    double reward = 0.0;
    double value_pred = 0.0;
    double behavior_prob = 0.0;
    std::vector<GateId> influenced;     // in `after`
    std::vector<std::uint8_t> mask;     // valid_xfers at (before, gate)
    bool done = false;                  // NOP or cost-bound stop
    double advantage = 0.0;             // frozen at collection time
};

// Cost-keyed store of discovered circuits, deduplicated by canonical hash.
// During pre-training there is one map per equivalence group; sampling picks
// a group uniformly, then a cost key with probability proportional to
// beta^rank (ascending cost), then a member uniformly.
class InitialCircuitBuffer {
public:
    InitialCircuitBuffer(double beta, std::size_t capacity_per_group)
        : beta_(beta), capacity_(capacity_per_group) {}

    std::size_t add_group(const Circuit& input, CostMetric metric);
    // Inserts into a group; ignores duplicates. Returns true when stored.
    bool insert(std::size_t group, const Circuit& c, CostMetric metric);

    struct Sampled {
        std::size_t group;
        const Circuit* circuit;
    };
    Sampled sample(Rng& rng) const;

    std::int64_t min_cost() const;
    const Circuit& best() const; // a circuit achieving min_cost
    std::int64_t input_cost(std::size_t group) const { return groups_[group].input_cost; }
    std::size_t group_count() const { return groups_.size(); }
    std::size_t size() const; // stored circuits across groups

private:
    struct Group {
        std::map<std::int64_t, std::deque<Circuit>> by_cost;
        std::unordered_set<std::uint64_t> hashes;
        std::int64_t input_cost = 0;
        std::uint64_t input_hash = 0;
        std::size_t count = 0;
    };
    void evict(Group& g);

    double beta_;
    std::size_t capacity_;
    std::vector<Group> groups_;
};

// Alg.-1 data collection: B trajectories of at most T steps from buffer-
// sampled starts, recording the rollout tuple per step; circuits at or below
// the trajectory's starting cost enter the buffer when the actors merge (in
// actor order, so any worker count reproduces the single-threaded result).
std::vector<RolloutEntry> collect_trajectories(InitialCircuitBuffer& buffer,
                                               const RuleSet& rules, const AgentParams& params,
                                               const TrainConfig& cfg, std::uint64_t seed);

// Eq.-5 hierarchical advantage of one entry under `params`: 1-step reward
// plus the discounted best gate value over the influenced set, minus the
// recorded state value. Terminal entries bootstrap with zero.
double hae_advantage(const RolloutEntry& e, const AgentParams& params, double gamma);

struct UpdateReport {
    double surrogate = 0.0; // mean clipped policy objective (maximized)
    double value_loss = 0.0;
    double entropy = 0.0;
    double total_loss = 0.0;
    std::size_t minibatches = 0;
};

// M epochs of minibatch updates of the joint loss
//   -L_TS + c1 * L_VE - c2 * H(pi_x)
// with the importance ratio recomputed through the fragment embedding and
// the value target bootstrapped under stop-gradient.
UpdateReport update_agent(const std::vector<RolloutEntry>& rollout, AgentParams& params,
                          nn::Adam& opt, const TrainConfig& cfg, Rng& rng);

// Registers every agent tensor with its module learning rate.
nn::Adam make_optimizer(const AgentParams& params, const TrainConfig& cfg);

struct IterationReport {
    std::size_t iteration = 0;
    std::int64_t best_cost = 0;
    double mean_return = 0.0;
    std::size_t entries = 0;
    std::size_t buffer_size = 0;
    UpdateReport update;
};

// Resumable Alg.-1 driver used by both pre-training and fine-tuning; the
// search side feeds improvements back in through insert_external.
class Trainer {
public:
    Trainer(std::vector<Circuit> inputs, const RuleSet& rules, AgentParams& params,
            TrainConfig cfg, std::uint64_t seed);

    IterationReport iterate();
    void insert_external(const Circuit& c);

    const InitialCircuitBuffer& buffer() const { return buffer_; }
    std::int64_t best_cost() const { return buffer_.min_cost(); }
    const Circuit& best_circuit() const { return buffer_.best(); }
    const AgentParams& params() const { return *params_; }

private:
    const RuleSet& rules_;
    AgentParams* params_;
    TrainConfig cfg_;
    InitialCircuitBuffer buffer_;
    nn::Adam opt_;
    Rng update_rng_;
    std::uint64_t seed_;
    std::size_t iteration_ = 0;
};

} // namespace quopt
