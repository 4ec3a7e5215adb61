#include "quopt/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace quopt {

// --- initial circuit buffer ------------------------------------------------

std::size_t InitialCircuitBuffer::add_group(const Circuit& input, CostMetric metric) {
    Group g;
    g.input_cost = cost_int(input, metric);
    g.input_hash = input.canonical_hash();
    g.hashes.insert(g.input_hash);
    g.by_cost[g.input_cost].push_back(input);
    g.count = 1;
    groups_.push_back(std::move(g));
    return groups_.size() - 1;
}

bool InitialCircuitBuffer::insert(std::size_t group, const Circuit& c, CostMetric metric) {
    Group& g = groups_.at(group);
    if (!g.hashes.insert(c.canonical_hash()).second)
        return false;
    g.by_cost[cost_int(c, metric)].push_back(c);
    ++g.count;
    if (g.count > capacity_)
        evict(g);
    return true;
}

void InitialCircuitBuffer::evict(Group& g) {
    // Oldest entry of the highest cost key goes first; the original input
    // circuit is never evicted.
    for (auto it = g.by_cost.rbegin(); it != g.by_cost.rend(); ++it) {
        auto& dq = it->second;
        for (std::size_t i = 0; i < dq.size(); ++i) {
            const std::uint64_t h = dq[i].canonical_hash();
            if (h == g.input_hash)
                continue;
            g.hashes.erase(h);
            dq.erase(dq.begin() + static_cast<std::ptrdiff_t>(i));
            if (dq.empty())
                g.by_cost.erase(std::next(it).base());
            --g.count;
            return;
        }
    }
}

InitialCircuitBuffer::Sampled InitialCircuitBuffer::sample(Rng& rng) const {
    if (groups_.empty())
        throw std::logic_error("buffer: no groups");
    const std::size_t gi = groups_.size() == 1 ? 0 : rng.below(groups_.size());
    const Group& g = groups_[gi];

    // key with ascending-cost rank i gets weight beta^i
    double total = 0.0, w = 1.0;
    for (std::size_t i = 0; i < g.by_cost.size(); ++i) {
        total += w;
        w *= beta_;
    }
    double u = rng.uniform() * total;
    w = 1.0;
    auto it = g.by_cost.begin();
    for (std::size_t i = 0; i + 1 < g.by_cost.size(); ++i, ++it) {
        if (u < w)
            break;
        u -= w;
        w *= beta_;
    }
    const auto& dq = it->second;
    return {gi, &dq[rng.below(dq.size())]};
}

std::int64_t InitialCircuitBuffer::min_cost() const {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const Group& g : groups_)
        if (!g.by_cost.empty())
            best = std::min(best, g.by_cost.begin()->first);
    return best;
}

const Circuit& InitialCircuitBuffer::best() const {
    const std::int64_t m = min_cost();
    for (const Group& g : groups_)
        if (!g.by_cost.empty() && g.by_cost.begin()->first == m)
            return g.by_cost.begin()->second.front();
    throw std::logic_error("buffer: empty");
}

std::size_t InitialCircuitBuffer::size() const {
    std::size_t n = 0;
    for (const Group& g : groups_)
        n += g.count;
    return n;
}

// --- data collection --------------------------------------------------------

namespace {

struct ActorResult {
    std::vector<RolloutEntry> entries;
    std::vector<std::pair<std::size_t, Circuit>> discovered; // (group, circuit)
};

ActorResult run_actor(const InitialCircuitBuffer& buffer, const RuleSet& rules,
                      const AgentParams& params, const TrainConfig& cfg, Rng rng) {
    ActorResult out;
    const auto sampled = buffer.sample(rng);
    const std::size_t group = sampled.group;
    const std::int64_t input_cost = buffer.input_cost(group);
    const std::int64_t start_cost = cost_int(*sampled.circuit, cfg.metric);

    auto cur = std::make_shared<const Circuit>(*sampled.circuit);
    Embedding emb = embed(*cur, params.gnn);

    for (std::size_t t = 0; t < cfg.horizon; ++t) {
        if (cur->empty())
            break; // nothing left to select
        const std::vector<double> values = gate_values(emb, params.critic);
        const double temp = temperature(cur->gate_count(), params.lambda);
        const std::vector<double> pi_g = gate_policy(values, temp);
        const std::size_t grow = sample_index(pi_g, rng);
        const GateId gate = emb.order[grow];

        RolloutEntry e;
        e.before = cur;
        e.gate = gate;
        e.value_pred = values[grow];
        e.mask = valid_xfers(*cur, gate, rules);

        std::vector<double> h(params.gnn.dim);
        for (std::size_t j = 0; j < h.size(); ++j)
            h[j] = emb.h.val()[grow * params.gnn.dim + j];
        const std::vector<double> logits = actor_logits(params.actor, h);
        const std::vector<double> pi_x = xfer_policy(logits, e.mask);
        const std::size_t xfer = sample_index(pi_x, rng);
        e.xfer_index = xfer;
        e.behavior_prob = pi_x[xfer];

        if (xfer == 0) { // NOP terminates the trajectory with zero reward
            e.after = cur;
            e.reward = 0.0;
            e.done = true;
            e.advantage = (e.reward + 0.0) - e.value_pred;
            out.entries.push_back(std::move(e));
            break;
        }

        auto m = match_at(*cur, gate, rules.rules[xfer]);
        if (!m)
            throw std::logic_error("collect: mask admitted an unmatchable rule");
        ApplyResult applied = apply(*cur, *m);
        auto next = std::make_shared<const Circuit>(std::move(applied.circuit));

        const std::int64_t cost_before = cost_int(*cur, cfg.metric);
        const std::int64_t cost_after = cost_int(*next, cfg.metric);
        e.after = next;
        e.reward = static_cast<double>(cost_before - cost_after);
        e.influenced = influenced_gates(*cur, *next, applied.new_gate_ids, cfg.influence_hops);
        e.done = cost_after > static_cast<std::int64_t>(
                                  std::floor(cfg.alpha * static_cast<double>(input_cost)));

        Embedding next_emb = embed(*next, params.gnn);
        if (e.done || e.influenced.empty()) {
            e.advantage = (e.reward + 0.0) - e.value_pred;
        } else {
            const std::vector<double> next_values = gate_values(next_emb, params.critic);
            double best = -std::numeric_limits<double>::infinity();
            for (GateId ig : e.influenced)
                best = std::max(best, next_values[next_emb.row_of.at(ig)]);
            e.advantage = (e.reward + cfg.gamma * best) - e.value_pred;
        }

        if (cost_after <= start_cost)
            out.discovered.emplace_back(group, *next);

        const bool stop = e.done;
        out.entries.push_back(std::move(e));
        if (stop)
            break;
        cur = std::move(next);
        emb = std::move(next_emb);
    }
    return out;
}

} // namespace

std::vector<RolloutEntry> collect_trajectories(InitialCircuitBuffer& buffer,
                                               const RuleSet& rules, const AgentParams& params,
                                               const TrainConfig& cfg, std::uint64_t seed) {
    const AgentParams snapshot = params.detached();
    std::vector<ActorResult> results(cfg.trajectories);

    auto actor_seed = [seed](std::size_t j) {
        return seed * 0x9e3779b97f4a7c15ull + 0x517cc1b727220a95ull * (j + 1);
    };

    const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
    if (workers == 1) {
        for (std::size_t j = 0; j < cfg.trajectories; ++j)
            results[j] = run_actor(buffer, rules, snapshot, cfg, Rng(actor_seed(j)));
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t j = next.fetch_add(1);
                    if (j >= cfg.trajectories)
                        return;
                    results[j] = run_actor(buffer, rules, snapshot, cfg, Rng(actor_seed(j)));
                }
            });
        for (auto& th : pool)
            th.join();
    }

    // Merge in actor order: worker count cannot change the outcome.
    std::vector<RolloutEntry> rollout;
    for (std::size_t j = 0; j < cfg.trajectories; ++j) {
        for (auto& [group, c] : results[j].discovered)
            buffer.insert(group, c, cfg.metric);
        for (auto& e : results[j].entries)
            rollout.push_back(std::move(e));
    }
    return rollout;
}

// --- hierarchical advantage -------------------------------------------------

double hae_advantage(const RolloutEntry& e, const AgentParams& params, double gamma) {
    if (e.done || e.influenced.empty())
        return (e.reward + 0.0) - e.value_pred;
    double best = -std::numeric_limits<double>::infinity();
    for (GateId g : e.influenced) {
        nn::Tensor h = embed_fragment(*e.after, g, params.gnn);
        best = std::max(best, params.critic.apply(h).item());
    }
    return (e.reward + gamma * best) - e.value_pred;
}

// --- agent update -------------------------------------------------------------

nn::Adam make_optimizer(const AgentParams& params, const TrainConfig& cfg) {
    nn::Adam opt;
    for (const auto& [name, t] : params.named_tensors()) {
        double lr = cfg.lr_gnn;
        if (name.rfind("critic/", 0) == 0)
            lr = cfg.lr_critic;
        else if (name.rfind("actor/", 0) == 0)
            lr = cfg.lr_actor;
        opt.add(t, lr);
    }
    return opt;
}

UpdateReport update_agent(const std::vector<RolloutEntry>& rollout, AgentParams& params,
                          nn::Adam& opt, const TrainConfig& cfg, Rng& rng) {
    if (rollout.empty())
        throw std::invalid_argument("update_agent: empty rollout");
    UpdateReport rep;

    std::vector<std::size_t> order(rollout.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the shared deterministic generator.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);

        for (std::size_t begin = 0; begin < order.size(); begin += cfg.minibatch) {
            const std::size_t end = std::min(order.size(), begin + cfg.minibatch);
            nn::Tensor batch_loss;
            double mb_surr = 0.0, mb_vloss = 0.0, mb_entropy = 0.0;

            for (std::size_t oi = begin; oi < end; ++oi) {
                const RolloutEntry& e = rollout[order[oi]];

                nn::Tensor h = embed_fragment(*e.before, e.gate, params.gnn);
                nn::Tensor logits = params.actor.apply(h);
                nn::Tensor logp = nn::masked_log_softmax(logits, e.mask);
                nn::Tensor lp_x = nn::index1(logp, e.xfer_index);
                nn::Tensor ratio =
                    nn::exp_elem(nn::sub(lp_x, nn::Tensor::scalar(std::log(e.behavior_prob))));

                nn::Tensor adv = nn::Tensor::scalar(e.advantage);
                nn::Tensor surrogate =
                    nn::minimum(nn::mul(ratio, adv),
                                nn::mul(nn::clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps),
                                        adv));

                // Value target: 1-step bootstrap under stop-gradient, from
                // the current parameters.
                double target = e.reward;
                if (!e.done && !e.influenced.empty()) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (GateId g : e.influenced) {
                        nn::Tensor hh = embed_fragment(*e.after, g, params.gnn);
                        best = std::max(best, params.critic.apply(hh).item());
                    }
                    target = e.reward + cfg.gamma * best;
                }
                nn::Tensor v = params.critic.apply(h);
                nn::Tensor verr = nn::square(nn::sub(v, nn::Tensor::scalar(target)));

                nn::Tensor probs = nn::exp_elem(logp);
                nn::Tensor entropy = nn::neg(nn::sum(nn::mul(probs, logp)));

                nn::Tensor loss =
                    nn::add(nn::add(nn::neg(surrogate), nn::scale(verr, cfg.value_coef)),
                            nn::scale(entropy, -cfg.entropy_coef));
                batch_loss = batch_loss.defined() ? nn::add(batch_loss, loss) : loss;

                mb_surr += surrogate.item();
                mb_vloss += verr.item();
                mb_entropy += entropy.item();
            }

            const double inv = 1.0 / static_cast<double>(end - begin);
            batch_loss = nn::scale(batch_loss, inv);
            opt.zero_grad();
            batch_loss.backward();
            opt.step();

            rep.surrogate += mb_surr * inv;
            rep.value_loss += mb_vloss * inv;
            rep.entropy += mb_entropy * inv;
            rep.total_loss += batch_loss.item();
            ++rep.minibatches;
        }
    }
    if (rep.minibatches > 0) {
        rep.surrogate /= static_cast<double>(rep.minibatches);
        rep.value_loss /= static_cast<double>(rep.minibatches);
        rep.entropy /= static_cast<double>(rep.minibatches);
        rep.total_loss /= static_cast<double>(rep.minibatches);
    }
    return rep;
}

// --- trainer -----------------------------------------------------------------

Trainer::Trainer(std::vector<Circuit> inputs, const RuleSet& rules, AgentParams& params,
                 TrainConfig cfg, std::uint64_t seed)
    : rules_(rules), params_(&params), cfg_(cfg),
      buffer_(cfg.buffer_beta, cfg.buffer_capacity), opt_(make_optimizer(params, cfg)),
      update_rng_(seed ^ 0xabcdef12345ull), seed_(seed) {
    if (inputs.empty())
        throw std::invalid_argument("trainer: need at least one input circuit");
    for (const Circuit& c : inputs)
        buffer_.add_group(c, cfg.metric);
}

IterationReport Trainer::iterate() {
    ++iteration_;
    const std::uint64_t iter_seed = seed_ + 0x1000003ull * iteration_;
    std::vector<RolloutEntry> rollout =
        collect_trajectories(buffer_, rules_, *params_, cfg_, iter_seed);

    IterationReport rep;
    rep.iteration = iteration_;
    rep.entries = rollout.size();
    double ret = 0.0;
    for (const RolloutEntry& e : rollout)
        ret += e.reward;
    rep.mean_return = rollout.empty() ? 0.0
                                      : ret / static_cast<double>(cfg_.trajectories);
    if (!rollout.empty())
        rep.update = update_agent(rollout, *params_, opt_, cfg_, update_rng_);
    rep.best_cost = buffer_.min_cost();
    rep.buffer_size = buffer_.size();
    return rep;
}

void Trainer::insert_external(const Circuit& c) {
    for (std::size_t g = 0; g < buffer_.group_count(); ++g)
        buffer_.insert(g, c, cfg_.metric);
}

} // namespace quopt
