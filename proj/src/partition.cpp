#include "quopt/partition.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace quopt {

std::vector<PartitionFragment> partition(const Circuit& c, std::size_t max_gates) {
    if (max_gates == 0)
        throw std::invalid_argument("partition: max_gates must be positive");
    std::vector<PartitionFragment> out;
    const std::vector<GateId> order = c.canonical_order();

    for (std::size_t begin = 0; begin < order.size(); begin += max_gates) {
        const std::size_t end = std::min(order.size(), begin + max_gates);

        // wires crossing this chunk, in ascending original index
        std::map<std::uint32_t, std::uint32_t> wire_map;
        for (std::size_t i = begin; i < end; ++i) {
            const Gate& g = c.gate(order[i]);
            for (int p = 0; p < g.arity(); ++p)
                wire_map.emplace(g.wire[p], 0);
        }
        PartitionFragment frag;
        for (auto& [q, local] : wire_map) {
            local = static_cast<std::uint32_t>(frag.wire_to_qubit.size());
            frag.wire_to_qubit.push_back(q);
        }

        Circuit fc(static_cast<std::uint32_t>(frag.wire_to_qubit.size()));
        for (std::size_t i = begin; i < end; ++i) {
            const Gate& g = c.gate(order[i]);
            std::vector<std::uint32_t> ws;
            for (int p = 0; p < g.arity(); ++p)
                ws.push_back(wire_map.at(g.wire[p]));
            fc.append(g.type, ws, g.type->param_count == 1 ? &g.param : nullptr);
        }
        frag.fragment = std::move(fc);
        out.push_back(std::move(frag));
    }
    if (out.empty()) {
        // empty circuit partitions into a single empty fragment
        PartitionFragment frag;
        frag.fragment = Circuit(0);
        out.push_back(std::move(frag));
    }
    return out;
}

Circuit stitch(const std::vector<PartitionFragment>& fragments, std::uint32_t num_qubits) {
    Circuit out(num_qubits);
    for (const PartitionFragment& frag : fragments) {
        for (GateId id : frag.fragment.canonical_order()) {
            const Gate& g = frag.fragment.gate(id);
            std::vector<std::uint32_t> ws;
            for (int p = 0; p < g.arity(); ++p) {
                const std::uint32_t q = frag.wire_to_qubit.at(g.wire[p]);
                if (q >= num_qubits)
                    throw std::invalid_argument("stitch: fragment wire outside the circuit");
                ws.push_back(q);
            }
            out.append(g.type, ws, g.type->param_count == 1 ? &g.param : nullptr);
        }
    }
    return out;
}

} // namespace quopt
