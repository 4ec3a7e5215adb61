#include "quopt/rulegen.hpp"

#include "quopt/unitary.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace quopt {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

// Relabels wires by first use in canonical order (untouched wires keep the
// tail positions) and renumbers symbols the same way. Isomorphic enumeration
// outputs then collide on canonical_hash.
Circuit canon(const Circuit& c) {
    const std::uint32_t nq = c.num_qubits();
    std::vector<std::uint32_t> wmap(nq, nq);
    std::vector<std::uint16_t> smap(c.symbol_space(), 0xffff);
    std::uint32_t next_wire = 0;
    std::uint16_t next_sym = 0;
    const auto order = c.canonical_order();
    for (GateId id : order) {
        const Gate& g = c.gate(id);
        for (int p = 0; p < g.arity(); ++p)
            if (wmap[g.wire[p]] == nq)
                wmap[g.wire[p]] = next_wire++;
        if (g.type->param_count == 1 && g.param.symbolic && smap[g.param.symbol] == 0xffff)
            smap[g.param.symbol] = next_sym++;
    }
    for (std::uint32_t q = 0; q < nq; ++q)
        if (wmap[q] == nq)
            wmap[q] = next_wire++;

    Circuit out(nq);
    for (GateId id : order) {
        const Gate& g = c.gate(id);
        std::vector<std::uint32_t> ws;
        for (int p = 0; p < g.arity(); ++p)
            ws.push_back(wmap[g.wire[p]]);
        if (g.type->param_count == 1) {
            Param pp = g.param.symbolic ? Param::sym(smap[g.param.symbol]) : g.param;
            out.append(g.type, ws, &pp);
        } else {
            out.append(g.type, ws, nullptr);
        }
    }
    return out;
}

bool connected(const Circuit& c) {
    if (c.empty())
        return true;
    std::unordered_set<GateId> seen{c.gates()[0].id};
    std::vector<GateId> stack{c.gates()[0].id};
    while (!stack.empty()) {
        const Gate& g = c.gate(stack.back());
        stack.pop_back();
        for (int p = 0; p < g.arity(); ++p)
            for (const PortRef& nb : {g.in[p], g.out[p]})
                if (!nb.is_boundary() && seen.insert(nb.gate).second)
                    stack.push_back(nb.gate);
    }
    return seen.size() == c.gate_count();
}

// Phase-normalized unitary fingerprint over the fixed parameter assignments.
std::uint64_t fingerprint(const Circuit& c) {
    const std::size_t symbols = c.symbol_space();
    std::uint64_t h = 0xf17e5;
    for (int s = 0; s < 4; ++s) {
        const auto assign = phase_check_assignment(symbols, s);
        CMat u = circuit_unitary(c.substituted(assign));
        std::size_t best = 0;
        double best_mag = -1.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (std::abs(u[i]) > best_mag) {
                best_mag = std::abs(u[i]);
                best = i;
            }
        const std::complex<double> lambda = u[best] / std::abs(u[best]);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const std::complex<double> z = u[i] / lambda;
            h = mix(h, static_cast<std::uint64_t>(std::llround(z.real() * 1e6)));
            h = mix(h, static_cast<std::uint64_t>(std::llround(z.imag() * 1e6)));
        }
        if (symbols == 0)
            break; // concrete circuits have a single distinct sample
    }
    return h;
}

// Drops wires idle on both sides, relabels the rest by joint first use and
// renumbers symbols by source first use. nullopt when the target needs a
// symbol or wire the source does not provide (not an applicable rewrite).
std::optional<std::pair<Circuit, Circuit>> compress_pair(const Circuit& src,
                                                         const Circuit& tgt) {
    const std::uint32_t nq = src.num_qubits();
    std::vector<std::uint32_t> wmap(nq, nq);
    std::uint32_t next_wire = 0;
    std::vector<std::uint16_t> smap(std::max(src.symbol_space(), tgt.symbol_space()), 0xffff);
    std::uint16_t next_sym = 0;

    auto walk_wires = [&](const Circuit& c) {
        for (GateId id : c.canonical_order()) {
            const Gate& g = c.gate(id);
            for (int p = 0; p < g.arity(); ++p)
                if (wmap[g.wire[p]] == nq)
                    wmap[g.wire[p]] = next_wire++;
        }
    };
    walk_wires(src);
    const std::uint32_t src_wires = next_wire;
    walk_wires(tgt);
    if (!src.empty() && next_wire != src_wires)
        return std::nullopt; // target touches a wire the source leaves idle

    auto rebuild = [&](const Circuit& c, bool bind_symbols) -> std::optional<Circuit> {
        Circuit out(next_wire);
        for (GateId id : c.canonical_order()) {
            const Gate& g = c.gate(id);
            std::vector<std::uint32_t> ws;
            for (int p = 0; p < g.arity(); ++p)
                ws.push_back(wmap[g.wire[p]]);
            if (g.type->param_count == 1) {
                Param pp = g.param;
                if (g.param.symbolic) {
                    if (smap[g.param.symbol] == 0xffff) {
                        if (!bind_symbols)
                            return std::nullopt; // unbound target symbol
                        smap[g.param.symbol] = next_sym++;
                    }
                    pp = Param::sym(smap[g.param.symbol]);
                }
                out.append(g.type, ws, &pp);
            } else {
                out.append(g.type, ws, nullptr);
            }
        }
        return out;
    };

    auto ns = rebuild(src, true);
    auto nt = rebuild(tgt, false);
    if (!ns || !nt)
        return std::nullopt;
    return std::make_pair(std::move(*ns), std::move(*nt));
}

} // namespace

RuleSet generate_ruleset(const GateSet& gs, std::uint32_t max_qubits, std::size_t max_gates,
                         const RulegenOptions& opt, RulegenReport* report) {
    if (max_qubits == 0)
        throw std::invalid_argument("generate_ruleset: need at least one qubit");

    // --- enumerate candidate circuits over exactly max_qubits wires -------
    std::vector<Circuit> pool;
    std::unordered_set<std::uint64_t> seen;
    auto add = [&](Circuit c) {
        Circuit cc = canon(c);
        if (seen.insert(cc.canonical_hash()).second) {
            pool.push_back(std::move(cc));
            if (pool.size() > opt.budget)
                throw std::runtime_error(
                    "generate_ruleset: enumeration budget exceeded at " +
                    std::to_string(pool.size()) + " candidates");
        }
    };

    add(Circuit(max_qubits));
    std::size_t level_begin = 0, level_end = pool.size();
    for (std::size_t len = 1; len <= max_gates; ++len) {
        for (std::size_t i = level_begin; i < level_end; ++i) {
            const Circuit base = pool[i]; // copy: pool grows below
            for (const GateType& t : gs.types()) {
                if (!opt.allowed.empty() &&
                    std::find(opt.allowed.begin(), opt.allowed.end(), t.name) ==
                        opt.allowed.end())
                    continue;
                std::vector<std::vector<std::uint32_t>> wire_choices;
                if (t.arity == 1) {
                    for (std::uint32_t w = 0; w < max_qubits; ++w)
                        wire_choices.push_back({w});
                } else {
                    for (std::uint32_t a = 0; a < max_qubits; ++a)
                        for (std::uint32_t b = 0; b < max_qubits; ++b)
                            if (a != b)
                                wire_choices.push_back({a, b});
                }
                for (const auto& ws : wire_choices) {
                    if (t.param_count == 0) {
                        Circuit c = base;
                        c.append(&t, ws, nullptr);
                        add(std::move(c));
                    } else {
                        Param sym = Param::sym(static_cast<std::uint16_t>(base.symbol_space()));
                        Circuit c = base;
                        c.append(&t, ws, &sym);
                        add(std::move(c));
                        for (double angle : opt.angles) {
                            Param conc = Param::concrete(angle);
                            Circuit cc = base;
                            cc.append(&t, ws, &conc);
                            add(std::move(cc));
                        }
                    }
                }
            }
        }
        level_begin = level_end;
        level_end = pool.size();
    }

    // --- group by unitary fingerprint --------------------------------------
    std::unordered_map<std::uint64_t, std::size_t> group_of;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const std::uint64_t fp = fingerprint(pool[i]);
        auto [it, fresh] = group_of.try_emplace(fp, groups.size());
        if (fresh)
            groups.emplace_back();
        groups[it->second].push_back(i);
    }

    // --- emit verified rules -----------------------------------------------
    RuleSet rs;
    rs.gate_set = &gs;
    rs.rules.push_back(RuleSet::make_nop());
    std::set<std::pair<std::uint64_t, std::uint64_t>> rule_seen;
    std::size_t classes = 0;

    for (const auto& group : groups) {
        if (group.size() < 2)
            continue;
        ++classes;
        for (std::size_t i : group) {
            for (std::size_t j : group) {
                if (i == j)
                    continue;
                const Circuit& src = pool[i];
                const Circuit& tgt = pool[j];
                auto pair = compress_pair(src, tgt);
                if (!pair)
                    continue;
                auto& [ns, nt] = *pair;
                if (!connected(ns) || !connected(nt))
                    continue;
                const auto key = std::make_pair(ns.canonical_hash(), nt.canonical_hash());
                if (key.first == key.second || !rule_seen.insert(key).second)
                    continue;
                if (!equivalent_up_to_phase(ns, nt, 4, opt.verify_tol))
                    continue; // fingerprint collision
                Transformation t = RuleSet::finish(std::move(ns), std::move(nt));
                rs.max_source_depth = std::max(rs.max_source_depth, t.depth_of_source);
                rs.rules.push_back(std::move(t));
            }
        }
    }

    if (report) {
        report->candidates = pool.size();
        report->classes = classes;
        report->emitted = rs.rules.size() - 1;
        report->verified = rs.rules.size() - 1;
    }
    return rs;
}

} // namespace quopt
