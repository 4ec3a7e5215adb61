#include "quopt/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace quopt {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

} // namespace

Circuit::Circuit(std::uint32_t num_qubits) : wires_(num_qubits) {}

const Gate* Circuit::find(GateId id) const {
    auto it = std::lower_bound(gates_.begin(), gates_.end(), id,
                               [](const Gate& g, GateId v) { return g.id < v; });
    if (it == gates_.end() || it->id != id)
        return nullptr;
    return &*it;
}

Gate* Circuit::find_mut(GateId id) {
    return const_cast<Gate*>(find(id));
}

const Gate& Circuit::gate(GateId id) const {
    const Gate* g = find(id);
    if (!g)
        throw std::invalid_argument("circuit: no gate with id " + std::to_string(id));
    return *g;
}

GateId Circuit::append(const GateType* type, std::span<const std::uint32_t> wires,
                       const Param* param) {
    if (!type)
        throw std::invalid_argument("circuit: null gate type");
    if (static_cast<int>(wires.size()) != type->arity)
        throw std::invalid_argument("circuit: wire count does not match arity of " + type->name);
    if (type->arity == 2 && wires[0] == wires[1])
        throw std::invalid_argument("circuit: 2-qubit gate with repeated wire");
    if ((type->param_count == 1) != (param != nullptr))
        throw std::invalid_argument("circuit: parameter count mismatch for " + type->name);

    Gate g;
    g.id = next_id_++;
    g.type = type;
    if (param)
        g.param = *param;
    for (std::size_t p = 0; p < wires.size(); ++p) {
        const std::uint32_t q = wires[p];
        if (q >= num_qubits())
            throw std::invalid_argument("circuit: wire index out of range");
        g.wire[p] = q;
        if (!wires_[q].empty()) {
            const PortRef prev = wires_[q].back();
            g.in[p] = prev;
            find_mut(prev.gate)->out[prev.port] = {g.id, static_cast<std::uint8_t>(p)};
        }
        wires_[q].push_back({g.id, static_cast<std::uint8_t>(p)});
    }
    gates_.push_back(g);
    return g.id;
}

Circuit Circuit::from_chains(std::uint32_t num_qubits, std::vector<Gate> gates,
                             std::vector<std::vector<PortRef>> chains) {
    if (chains.size() != num_qubits)
        throw std::invalid_argument("from_chains: chain count != num_qubits");
    Circuit c(num_qubits);
    c.gates_ = std::move(gates);
    std::sort(c.gates_.begin(), c.gates_.end(),
              [](const Gate& a, const Gate& b) { return a.id < b.id; });
    c.wires_ = std::move(chains);
    for (const Gate& g : c.gates_)
        c.next_id_ = std::max(c.next_id_, g.id + 1);
    c.relink();
    return c;
}

void Circuit::relink() {
    for (Gate& g : gates_) {
        g.in = {PortRef{}, PortRef{}};
        g.out = {PortRef{}, PortRef{}};
    }
    std::unordered_map<GateId, std::uint8_t> seen; // per gate: bitmask of ports
    for (std::uint32_t q = 0; q < num_qubits(); ++q) {
        PortRef prev{};
        for (const PortRef& pr : wires_[q]) {
            Gate* g = find_mut(pr.gate);
            if (!g)
                throw std::logic_error("relink: chain references unknown gate");
            if (pr.port >= g->arity())
                throw std::logic_error("relink: port out of range");
            if (seen[pr.gate] & (1u << pr.port))
                throw std::logic_error("relink: port appears twice");
            seen[pr.gate] |= static_cast<std::uint8_t>(1u << pr.port);
            g->wire[pr.port] = q;
            g->in[pr.port] = prev;
            if (!prev.is_boundary())
                find_mut(prev.gate)->out[prev.port] = pr;
            prev = pr;
        }
    }
    for (const Gate& g : gates_)
        for (int p = 0; p < g.arity(); ++p)
            if (!(seen[g.id] & (1u << p)))
                throw std::logic_error("relink: gate port missing from chains");
}

std::vector<GateId> Circuit::canonical_order() const {
    // Kahn's algorithm; the ready set is ordered by (smallest incident wire,
    // type name, id). Ready gates never share a wire, so the first key is
    // already unique; the rest keeps the comparison total.
    struct Key {
        std::uint32_t wire;
        std::string_view type_name;
        GateId id;
        bool operator<(const Key& o) const {
            if (wire != o.wire)
                return wire < o.wire;
            if (type_name != o.type_name)
                return type_name < o.type_name;
            return id < o.id;
        }
    };
    std::unordered_map<GateId, int> indegree;
    indegree.reserve(gates_.size());
    for (const Gate& g : gates_) {
        int d = 0;
        for (int p = 0; p < g.arity(); ++p)
            if (!g.in[p].is_boundary())
                ++d;
        indegree[g.id] = d;
    }
    auto key_of = [&](const Gate& g) {
        std::uint32_t w = g.wire[0];
        if (g.arity() == 2)
            w = std::min(w, g.wire[1]);
        return Key{w, g.type->name, g.id};
    };
    std::set<Key> ready;
    for (const Gate& g : gates_)
        if (indegree[g.id] == 0)
            ready.insert(key_of(g));

    std::vector<GateId> order;
    order.reserve(gates_.size());
    while (!ready.empty()) {
        const Key k = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(k.id);
        const Gate& g = gate(k.id);
        for (int p = 0; p < g.arity(); ++p) {
            const PortRef succ = g.out[p];
            if (succ.is_boundary())
                continue;
            if (--indegree[succ.gate] == 0)
                ready.insert(key_of(gate(succ.gate)));
        }
    }
    if (order.size() != gates_.size())
        throw std::logic_error("canonical_order: cycle detected");
    return order;
}

std::uint64_t Circuit::canonical_hash() const {
    std::uint64_t h = mix(0x51c12fca4ce6d26bull, num_qubits());
    for (GateId id : canonical_order()) {
        const Gate& g = gate(id);
        h = mix(h, fnv1a(g.type->name.data(), g.type->name.size()));
        for (int p = 0; p < g.arity(); ++p)
            h = mix(h, g.wire[p]);
        if (g.type->param_count == 1) {
            if (g.param.symbolic) {
                h = mix(h, 0xa11ce5ull);
                h = mix(h, g.param.symbol);
            } else {
                h = mix(h, std::bit_cast<std::uint64_t>(g.param.value));
            }
        }
    }
    return h;
}

Circuit Circuit::k_hop_neighborhood(GateId from, int k) const {
    if (!contains(from))
        throw std::invalid_argument("k_hop_neighborhood: gate not in circuit");
    if (k < 0)
        throw std::invalid_argument("k_hop_neighborhood: negative k");

    std::unordered_map<GateId, int> dist{{from, 0}};
    std::queue<GateId> frontier;
    frontier.push(from);
    while (!frontier.empty()) {
        const GateId cur = frontier.front();
        frontier.pop();
        const int d = dist[cur];
        if (d == k)
            continue;
        const Gate& g = gate(cur);
        for (int p = 0; p < g.arity(); ++p) {
            for (const PortRef& nb : {g.in[p], g.out[p]}) {
                if (nb.is_boundary() || dist.count(nb.gate))
                    continue;
                dist[nb.gate] = d + 1;
                frontier.push(nb.gate);
            }
        }
    }

    // Carve per-wire chains into maximal runs of included gates; each run
    // becomes one fragment wire so that severed stretches stay severed.
    std::vector<Gate> frag_gates;
    for (const Gate& g : gates_)
        if (dist.count(g.id)) {
            Gate copy = g;
            copy.in = {PortRef{}, PortRef{}};
            copy.out = {PortRef{}, PortRef{}};
            frag_gates.push_back(copy);
        }
    std::vector<std::vector<PortRef>> segs;
    for (const auto& chain : wires_) {
        std::vector<PortRef> run;
        for (const PortRef& pr : chain) {
            if (dist.count(pr.gate)) {
                run.push_back(pr);
            } else if (!run.empty()) {
                segs.push_back(std::move(run));
                run.clear();
            }
        }
        if (!run.empty())
            segs.push_back(std::move(run));
    }
    const auto n_segs = static_cast<std::uint32_t>(segs.size());
    return from_chains(n_segs, std::move(frag_gates), std::move(segs));
}

Circuit Circuit::substituted(std::span<const double> values) const {
    Circuit c = *this;
    for (Gate& g : c.gates_) {
        if (g.type->param_count == 1 && g.param.symbolic) {
            if (g.param.symbol >= values.size())
                throw std::invalid_argument("substituted: symbol index out of range");
            g.param = Param::concrete(values[g.param.symbol]);
        }
    }
    return c;
}

bool Circuit::has_symbolic_params() const {
    for (const Gate& g : gates_)
        if (g.type->param_count == 1 && g.param.symbolic)
            return true;
    return false;
}

std::size_t Circuit::symbol_space() const {
    std::size_t n = 0;
    for (const Gate& g : gates_)
        if (g.type->param_count == 1 && g.param.symbolic)
            n = std::max(n, static_cast<std::size_t>(g.param.symbol) + 1);
    return n;
}

void Circuit::validate() const {
    std::unordered_map<GateId, std::uint8_t> seen;
    for (std::uint32_t q = 0; q < num_qubits(); ++q) {
        PortRef prev{};
        for (const PortRef& pr : wires_[q]) {
            const Gate* g = find(pr.gate);
            if (!g)
                throw std::logic_error("validate: chain references unknown gate");
            if (pr.port >= g->arity())
                throw std::logic_error("validate: port out of range");
            if (g->wire[pr.port] != q)
                throw std::logic_error("validate: gate wire label disagrees with chain");
            if (seen[pr.gate] & (1u << pr.port))
                throw std::logic_error("validate: port appears on two wires");
            seen[pr.gate] |= static_cast<std::uint8_t>(1u << pr.port);
            if (!(g->in[pr.port] == prev))
                throw std::logic_error("validate: in-edge does not match wire chain");
            if (!prev.is_boundary()) {
                const Gate& pg = gate(prev.gate);
                if (!(pg.out[prev.port] == pr))
                    throw std::logic_error("validate: out-edge does not match wire chain");
            }
            prev = pr;
        }
        if (!prev.is_boundary()) {
            const Gate& lg = gate(prev.gate);
            if (!lg.out[prev.port].is_boundary())
                throw std::logic_error("validate: last gate on wire has a dangling successor");
        }
    }
    for (const Gate& g : gates_) {
        if (g.type->arity == 2 && g.wire[0] == g.wire[1])
            throw std::logic_error("validate: 2-qubit gate with repeated wire");
        for (int p = 0; p < g.arity(); ++p)
            if (!(seen[g.id] & (1u << p)))
                throw std::logic_error("validate: gate port missing from every chain");
    }
    canonical_order(); // throws on cycles
}

// --- cost metrics ---------------------------------------------------------

std::optional<CostMetric> cost_metric_by_name(std::string_view n) {
    if (n == "total")
        return CostMetric::Total;
    if (n == "cnot")
        return CostMetric::Cnot;
    if (n == "depth")
        return CostMetric::Depth;
    if (n == "fidelity")
        return CostMetric::Fidelity;
    return std::nullopt;
}

std::string_view cost_metric_name(CostMetric m) {
    switch (m) {
    case CostMetric::Total:
        return "total";
    case CostMetric::Cnot:
        return "cnot";
    case CostMetric::Depth:
        return "depth";
    case CostMetric::Fidelity:
        return "fidelity";
    }
    return "?";
}

std::int64_t total_gate_count(const Circuit& c) {
    return static_cast<std::int64_t>(c.gate_count());
}

std::int64_t cnot_count(const Circuit& c) {
    std::int64_t n = 0;
    for (const Gate& g : c.gates())
        if (g.arity() == 2)
            ++n;
    return n;
}

std::int64_t depth(const Circuit& c) {
    std::unordered_map<GateId, std::int64_t> level;
    std::int64_t best = 0;
    for (GateId id : c.canonical_order()) {
        const Gate& g = c.gate(id);
        std::int64_t d = 0;
        for (int p = 0; p < g.arity(); ++p)
            if (!g.in[p].is_boundary())
                d = std::max(d, level[g.in[p].gate]);
        level[id] = d + 1;
        best = std::max(best, d + 1);
    }
    return best;
}

double fidelity(const Circuit& c, const ErrorModel& em) {
    double f = 1.0;
    for (const Gate& g : c.gates()) {
        auto it = em.rate.find(g.type->name);
        if (it == em.rate.end())
            throw std::invalid_argument("fidelity: no error rate for gate type " + g.type->name);
        f *= 1.0 - it->second;
    }
    return f;
}

double cost(const Circuit& c, CostMetric m, const ErrorModel* em) {
    switch (m) {
    case CostMetric::Total:
        return static_cast<double>(total_gate_count(c));
    case CostMetric::Cnot:
        return static_cast<double>(cnot_count(c));
    case CostMetric::Depth:
        return static_cast<double>(depth(c));
    case CostMetric::Fidelity:
        if (!em)
            throw std::invalid_argument("cost: fidelity requires an error model");
        return fidelity(c, *em);
    }
    throw std::invalid_argument("cost: unknown metric");
}

std::int64_t cost_int(const Circuit& c, CostMetric m) {
    switch (m) {
    case CostMetric::Total:
        return total_gate_count(c);
    case CostMetric::Cnot:
        return cnot_count(c);
    case CostMetric::Depth:
        return depth(c);
    case CostMetric::Fidelity:
        break;
    }
    throw std::invalid_argument("cost_int: fidelity is not an integer metric");
}

} // namespace quopt
