#include "quopt/match.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace quopt {

namespace {

inline constexpr std::uint32_t kUnboundWire = 0xffffffffu;

struct Grower {
    const Circuit& c;
    const Circuit& src;
    std::unordered_map<GateId, GateId> fwd;  // source -> circuit
    std::unordered_set<GateId> image;        // circuit gates used
    std::vector<std::uint32_t> wire_map;     // source wire -> circuit wire
    std::vector<std::uint32_t> wire_rev;     // circuit wire -> source wire
    std::vector<double> symbol_binding;
    std::vector<std::uint8_t> symbol_bound;

    Grower(const Circuit& circuit, const Circuit& source)
        : c(circuit), src(source), wire_map(source.num_qubits(), kUnboundWire),
          wire_rev(circuit.num_qubits(), kUnboundWire),
          symbol_binding(source.symbol_space(), 0.0),
          symbol_bound(source.symbol_space(), 0) {}

    bool bind(const Gate& sg, const Gate& cg) {
        if (sg.type != cg.type && sg.type->name != cg.type->name)
            return false;
        if (sg.type->param_count == 1) {
            if (sg.param.symbolic) {
                if (cg.param.symbolic)
                    return false; // cannot bind a symbol to a symbol
                if (symbol_bound[sg.param.symbol]) {
                    if (symbol_binding[sg.param.symbol] != cg.param.value)
                        return false;
                } else {
                    symbol_bound[sg.param.symbol] = 1;
                    symbol_binding[sg.param.symbol] = cg.param.value;
                }
            } else {
                if (cg.param.symbolic || sg.param.value != cg.param.value)
                    return false;
            }
        }
        for (int p = 0; p < sg.arity(); ++p) {
            const std::uint32_t sw = sg.wire[p], cw = cg.wire[p];
            if (wire_map[sw] == kUnboundWire) {
                if (wire_rev[cw] != kUnboundWire)
                    return false; // two source wires on one circuit wire
                wire_map[sw] = cw;
                wire_rev[cw] = sw;
            } else if (wire_map[sw] != cw) {
                return false;
            }
        }
        fwd.emplace(sg.id, cg.id);
        image.insert(cg.id);
        return true;
    }

    // Forced breadth-first growth from the anchor along source edges.
    bool grow(GateId src_anchor, GateId circuit_gate) {
        const Gate* cg = c.find(circuit_gate);
        if (!cg)
            return false;
        if (!bind(src.gate(src_anchor), *cg))
            return false;
        std::queue<GateId> work;
        work.push(src_anchor);
        while (!work.empty()) {
            const Gate& su = src.gate(work.front());
            work.pop();
            const Gate& cu = c.gate(fwd.at(su.id));
            for (int p = 0; p < su.arity(); ++p) {
                // incoming source edge: some source gate feeds su at port p
                if (!su.in[p].is_boundary()) {
                    const PortRef want = su.in[p]; // (source gate, its out port)
                    const PortRef have = cu.in[p];
                    if (have.is_boundary() || have.port != want.port)
                        return false;
                    auto it = fwd.find(want.gate);
                    if (it != fwd.end()) {
                        if (it->second != have.gate)
                            return false;
                    } else {
                        if (image.count(have.gate))
                            return false; // injectivity
                        if (!bind(src.gate(want.gate), c.gate(have.gate)))
                            return false;
                        work.push(want.gate);
                    }
                }
                // outgoing source edge
                if (!su.out[p].is_boundary()) {
                    const PortRef want = su.out[p]; // (source gate, its in port)
                    const PortRef have = cu.out[p];
                    if (have.is_boundary() || have.port != want.port)
                        return false;
                    auto it = fwd.find(want.gate);
                    if (it != fwd.end()) {
                        if (it->second != have.gate)
                            return false;
                    } else {
                        if (image.count(have.gate))
                            return false;
                        if (!bind(src.gate(want.gate), c.gate(have.gate)))
                            return false;
                        work.push(want.gate);
                    }
                }
            }
        }
        return fwd.size() == src.gate_count();
    }

    // Convexity: no directed path from a dangling-out edge of the image back
    // into the image (direct edges included). Such a path would thread
    // through the region being replaced and can invalidate the splice.
    bool convex() const {
        std::vector<GateId> frontier;
        for (const auto& [sid, cid] : fwd) {
            const Gate& sg = src.gate(sid);
            const Gate& cg = c.gate(cid);
            for (int p = 0; p < sg.arity(); ++p) {
                if (sg.out[p].is_boundary() && !cg.out[p].is_boundary())
                    frontier.push_back(cg.out[p].gate);
            }
        }
        std::unordered_set<GateId> visited;
        std::vector<GateId> stack;
        for (GateId g : frontier) {
            if (image.count(g))
                return false; // direct wrap-around edge
            if (visited.insert(g).second)
                stack.push_back(g);
        }
        while (!stack.empty()) {
            const Gate& g = c.gate(stack.back());
            stack.pop_back();
            for (int p = 0; p < g.arity(); ++p) {
                const PortRef succ = g.out[p];
                if (succ.is_boundary())
                    continue;
                if (image.count(succ.gate))
                    return false; // re-enters the image through a stub
                if (visited.insert(succ.gate).second)
                    stack.push_back(succ.gate);
            }
        }
        return true;
    }
};

std::optional<Match> match_core(const Circuit& c, GateId gate, const Transformation& rule,
                                bool with_hash) {
    if (!rule.matchable())
        return std::nullopt;
    if (!c.contains(gate))
        throw std::invalid_argument("match_at: gate not in circuit");

    Grower g(c, rule.source);
    if (!g.grow(rule.anchor, gate) || !g.convex())
        return std::nullopt;

    Match m;
    m.rule = &rule;
    m.anchored_at = gate;
    m.wire_map = std::move(g.wire_map);
    m.symbol_binding = std::move(g.symbol_binding);
    for (GateId sid : rule.source.canonical_order())
        m.mapping.emplace_back(sid, g.fwd.at(sid));
    if (with_hash)
        m.circuit_hash = c.canonical_hash();
    return m;
}

} // namespace

std::optional<Match> match_at(const Circuit& c, GateId gate, const Transformation& rule) {
    return match_core(c, gate, rule, /*with_hash=*/true);
}

std::vector<std::uint8_t> valid_xfers(const Circuit& c, GateId gate, const RuleSet& rs) {
    std::vector<std::uint8_t> mask(rs.size(), 0);
    mask[0] = 1; // NOP is always available
    for (std::size_t i = 1; i < rs.size(); ++i)
        mask[i] = match_core(c, gate, rs.rules[i], /*with_hash=*/false).has_value() ? 1 : 0;
    return mask;
}

ApplyResult apply(const Circuit& c, const Match& m) {
    if (m.circuit_hash != c.canonical_hash())
        throw std::runtime_error("apply: stale match (circuit changed since match_at)");
    const Transformation& rule = *m.rule;

    std::unordered_set<GateId> removed;
    for (const auto& [sid, cid] : m.mapping)
        removed.insert(cid);

    // Fresh ids for the instantiated target, in target canonical order.
    const std::vector<GateId> torder = rule.target.canonical_order();
    std::unordered_map<GateId, GateId> tid_map;
    std::vector<GateId> new_ids;
    GateId next = c.next_id();
    for (GateId tid : torder) {
        tid_map.emplace(tid, next);
        new_ids.push_back(next);
        ++next;
    }

    std::vector<Gate> gates;
    gates.reserve(c.gate_count() - removed.size() + torder.size());
    for (const Gate& g : c.gates())
        if (!removed.count(g.id))
            gates.push_back(g);
    for (GateId tid : torder) {
        const Gate& tg = rule.target.gate(tid);
        Gate ng;
        ng.id = tid_map.at(tid);
        ng.type = tg.type;
        if (tg.type->param_count == 1) {
            if (tg.param.symbolic) {
                if (tg.param.symbol >= m.symbol_binding.size())
                    throw std::logic_error("apply: target symbol not bound by the match");
                ng.param = Param::concrete(m.symbol_binding[tg.param.symbol]);
            } else {
                ng.param = tg.param;
            }
        }
        gates.push_back(ng);
    }

    // Splice each bound wire: [prefix][instantiated target chain][suffix].
    std::vector<std::vector<PortRef>> chains(c.num_qubits());
    std::vector<std::vector<PortRef>> replacement(c.num_qubits());
    std::vector<std::uint8_t> bound(c.num_qubits(), 0);
    for (std::uint32_t w = 0; w < rule.source.num_qubits(); ++w) {
        const std::uint32_t q = m.wire_map[w];
        bound[q] = 1;
        for (const PortRef& pr : rule.target.wire(w))
            replacement[q].push_back({tid_map.at(pr.gate), pr.port});
    }
    for (std::uint32_t q = 0; q < c.num_qubits(); ++q) {
        const auto& old_chain = c.wire(q);
        if (!bound[q]) {
            chains[q] = old_chain;
            continue;
        }
        auto& chain = chains[q];
        bool spliced = false;
        for (const PortRef& pr : old_chain) {
            if (removed.count(pr.gate)) {
                if (!spliced) {
                    chain.insert(chain.end(), replacement[q].begin(), replacement[q].end());
                    spliced = true;
                }
            } else {
                chain.push_back(pr);
            }
        }
        if (!spliced) // matched run may be empty only if the wire had no source gates
            throw std::logic_error("apply: bound wire without matched gates");
    }

    ApplyResult res{Circuit::from_chains(c.num_qubits(), std::move(gates), std::move(chains)),
                    std::move(new_ids)};
    return res;
}

std::vector<GateId> influenced_gates(const Circuit& before, const Circuit& after,
                                     const std::vector<GateId>& new_gate_ids, int l) {
    for (GateId id : new_gate_ids)
        if (!after.contains(id))
            throw std::invalid_argument("influenced_gates: new gate id not in after");

    std::unordered_set<GateId> new_set(new_gate_ids.begin(), new_gate_ids.end());
    std::unordered_set<GateId> removed;
    for (const Gate& g : before.gates())
        if (!after.contains(g.id))
            removed.insert(g.id);

    // Wires carrying new gates in `after`.
    std::vector<std::uint8_t> wire_has_new(after.num_qubits(), 0);
    for (GateId id : new_gate_ids) {
        const Gate& g = after.gate(id);
        for (int p = 0; p < g.arity(); ++p)
            wire_has_new[g.wire[p]] = 1;
    }

    // Per rewritten wire: nearest surviving gate after (and before) the
    // removed run, found on the pre-rewrite chains.
    std::set<GateId> bases;      // downstream survivors whose inputs changed
    std::set<GateId> up_bases;   // upstream survivors adopted when a wire ends
    for (std::uint32_t q = 0; q < before.num_qubits(); ++q) {
        const auto& chain = before.wire(q);
        bool touched = false;
        GateId up = kNoGate, down = kNoGate;
        for (std::size_t i = 0; i < chain.size(); ++i) {
            if (!removed.count(chain[i].gate))
                continue;
            touched = true;
            for (std::size_t j = i; j-- > 0;)
                if (!removed.count(chain[j].gate)) {
                    up = chain[j].gate;
                    break;
                }
            for (std::size_t j = i + 1; j < chain.size(); ++j)
                if (!removed.count(chain[j].gate)) {
                    down = chain[j].gate;
                    break;
                }
            break;
        }
        if (!touched)
            continue;
        if (down != kNoGate)
            bases.insert(down);
        else if (!wire_has_new[q] && up != kNoGate)
            up_bases.insert(up); // wire now ends at the boundary
    }

    // l-hop directed predecessors in `after`.
    auto back_bfs = [&](const std::set<GateId>& seeds, std::unordered_set<GateId>& out) {
        std::vector<std::pair<GateId, int>> stack;
        for (GateId s : seeds)
            stack.emplace_back(s, 0);
        std::unordered_map<GateId, int> best;
        while (!stack.empty()) {
            auto [id, d] = stack.back();
            stack.pop_back();
            if (d == l)
                continue;
            const Gate& g = after.gate(id);
            for (int p = 0; p < g.arity(); ++p) {
                if (g.in[p].is_boundary())
                    continue;
                const GateId pred = g.in[p].gate;
                auto it = best.find(pred);
                if (it != best.end() && it->second <= d + 1)
                    continue;
                best[pred] = d + 1;
                out.insert(pred);
                stack.emplace_back(pred, d + 1);
            }
        }
    };

    std::unordered_set<GateId> result(new_set);
    std::set<GateId> pred_seeds(new_set.begin(), new_set.end());
    pred_seeds.insert(bases.begin(), bases.end());
    back_bfs(pred_seeds, result);
    for (GateId u : up_bases)
        result.insert(u);
    back_bfs(up_bases, result);

    std::vector<GateId> out(result.begin(), result.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace quopt
