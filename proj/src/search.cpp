#include "quopt/search.hpp"

#include "quopt/unitary.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace quopt {

PolicyGuidedSearch::PolicyGuidedSearch(const RuleSet& rules, const TrainConfig& cfg,
                                       std::uint64_t seed)
    : rules_(rules), cfg_(cfg), rng_(seed) {}

void PolicyGuidedSearch::reset_start(const Circuit& start) {
    frontier_.clear();
    frontier_hashes_.clear();
    masks_.clear();
    frontier_.push_back(start);
    frontier_hashes_.insert(start.canonical_hash());
    best_cost_ = cost_int(start, cfg_.metric);
    input_cost_ = best_cost_;
    since_improvement_ = 0;
    exhausted_ = false;
}

void PolicyGuidedSearch::refresh_params(const AgentParams& params) {
    params_ = params.detached();
    has_params_ = true;
}

PolicyGuidedSearch::MaskCounts PolicyGuidedSearch::mask_counts(const Circuit& c) const {
    MaskCounts out;
    auto it = masks_.find(c.canonical_hash());
    if (it == masks_.end())
        return out;
    out.hard = it->second.hard.size();
    out.soft = it->second.soft.size();
    out.soft_cleared = it->second.soft_cleared;
    return out;
}

std::size_t PolicyGuidedSearch::run_steps(std::size_t n) {
    if (!has_params_ || frontier_.empty())
        throw std::logic_error("search: reset_start/refresh_params first");
    std::size_t improvements = 0;
    for (std::size_t i = 0; i < n && !exhausted_; ++i)
        if (step())
            ++improvements;
    return improvements;
}

bool PolicyGuidedSearch::step() {
    // Pick a frontier circuit; skip exhausted ones (all gates hard-masked).
    std::size_t attempts = frontier_.size();
    std::size_t ci = rng_.below(frontier_.size());
    const Circuit* cur = nullptr;
    MaskState* ms = nullptr;
    std::vector<GateId> unmasked;
    while (attempts-- > 0) {
        const Circuit& cand = frontier_[ci];
        MaskState& m = masks_[cand.canonical_hash()];
        unmasked.clear();
        for (const Gate& g : cand.gates())
            if (!m.hard.count(g.id) && !m.soft.count(g.id))
                unmasked.push_back(g.id);
        if (unmasked.empty() && !m.soft_cleared && !m.soft.empty()) {
            // every gate is masked: drop the soft masks once, for good
            m.soft.clear();
            m.soft_cleared = true;
            for (const Gate& g : cand.gates())
                if (!m.hard.count(g.id))
                    unmasked.push_back(g.id);
        }
        if (!unmasked.empty() || cand.empty()) {
            cur = &cand;
            ms = &m;
            break;
        }
        ci = (ci + 1) % frontier_.size();
    }
    if (!cur || cur->empty() || unmasked.empty()) {
        exhausted_ = true;
        return false;
    }

    ++total_steps_;
    ++since_improvement_;

    // Gate choice: the gate-selecting softmax restricted to unmasked gates.
    Embedding emb = embed(*cur, params_.gnn);
    const std::vector<double> values = gate_values(emb, params_.critic);
    std::vector<double> masked_values(unmasked.size());
    for (std::size_t i = 0; i < unmasked.size(); ++i)
        masked_values[i] = values[emb.row_of.at(unmasked[i])];
    const double t = temperature(cur->gate_count(), params_.lambda);
    const std::vector<double> pi = gate_policy(masked_values, t);
    const GateId gate = unmasked[sample_index(pi, rng_)];

    // Transformation choice: highest-probability valid rule.
    const std::vector<std::uint8_t> mask = valid_xfers(*cur, gate, rules_);
    const std::size_t row = emb.row_of.at(gate);
    std::vector<double> h(params_.gnn.dim);
    for (std::size_t j = 0; j < h.size(); ++j)
        h[j] = emb.h.val()[row * params_.gnn.dim + j];
    const std::vector<double> probs = xfer_policy(actor_logits(params_.actor, h), mask);
    const std::size_t xfer = argmax_xfer(probs, mask);

    if (xfer == 0) { // NOP: a stop condition, so hard-mask this gate
        ms->hard.insert(gate);
        return false;
    }

    auto m = match_at(*cur, gate, rules_.rules[xfer]);
    if (!m)
        throw std::logic_error("search: mask admitted an unmatchable rule");
    ApplyResult applied = apply(*cur, *m);
    const std::int64_t c = cost_int(applied.circuit, cfg_.metric);

    if (c > static_cast<std::int64_t>(
                std::floor(cfg_.alpha * static_cast<double>(input_cost_)))) {
        ms->hard.insert(gate); // cost-bound stop condition
        return false;
    }

    if (!ms->soft_cleared)
        ms->soft.insert(gate); // visited

    if (c < best_cost_) {
        // restart the search from the strictly better circuit
        frontier_.clear();
        frontier_hashes_.clear();
        frontier_.push_back(std::move(applied.circuit));
        frontier_hashes_.insert(frontier_.back().canonical_hash());
        best_cost_ = c;
        since_improvement_ = 0;
        return true;
    }
    if (c == best_cost_ && frontier_hashes_.insert(applied.circuit.canonical_hash()).second)
        frontier_.push_back(std::move(applied.circuit));
    return false;
}

OptimizeResult optimize(const Circuit& input, AgentParams& params, const RuleSet& rules,
                        const TrainConfig& tcfg, const SearchConfig& scfg,
                        std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    OptimizeResult res;
    res.report.input_cost = cost_int(input, tcfg.metric);
    res.circuit = input;
    std::int64_t global_best = res.report.input_cost;

    Trainer ft({input}, rules, params, tcfg, seed);
    PolicyGuidedSearch pgs(rules, tcfg, seed ^ 0x5eac7ull);
    pgs.refresh_params(params);
    pgs.reset_start(input);

    auto note_improvement = [&](std::int64_t cost, const Circuit& c) {
        if (cost >= global_best)
            return;
        global_best = cost;
        res.circuit = c;
        res.report.improvements.emplace_back(elapsed(), cost);
    };

    for (std::size_t i = 0; i < scfg.head_start_iterations; ++i) {
        IterationReport rep = ft.iterate();
        res.report.steps += rep.entries;
        note_improvement(rep.best_cost, ft.best_circuit());
    }

    for (std::size_t slice = 0; slice < scfg.max_slices; ++slice) {
        if (scfg.wall_budget_s > 0.0 && elapsed() > scfg.wall_budget_s)
            break;

        for (std::size_t i = 0; i < scfg.ft_iterations_per_slice; ++i) {
            IterationReport rep = ft.iterate();
            res.report.steps += rep.entries;
            if (rep.best_cost < global_best) {
                note_improvement(rep.best_cost, ft.best_circuit());
                pgs.reset_start(ft.best_circuit()); // fine-tuning found it: restart search
            }
        }

        if (scfg.pgs_steps_per_slice > 0) {
            pgs.run_steps(scfg.pgs_steps_per_slice);
            res.report.steps += scfg.pgs_steps_per_slice;
            if (pgs.best_cost() < global_best) {
                note_improvement(pgs.best_cost(), pgs.best());
                ft.insert_external(pgs.best()); // search found it: feed fine-tuning
            }
            if (pgs.exhausted() || pgs.steps_since_improvement() >= scfg.pgs_steps_timeout) {
                // stalled: re-arm with the latest checkpoint from fine-tuning
                pgs.refresh_params(params);
                pgs.reset_start(res.circuit);
            }
        }
    }

    res.report.output_cost = global_best;
    if (input.num_qubits() <= static_cast<std::uint32_t>(scfg.verify_max_qubits)) {
        if (!equivalent_up_to_phase(input, res.circuit))
            throw std::logic_error("optimize: result failed the equivalence re-check");
        res.report.verified = true;
    }
    return res;
}

} // namespace quopt
