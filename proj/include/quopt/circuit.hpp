#pragma once

#include "quopt/gate.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace quopt {

using GateId = std::uint32_t;
inline constexpr GateId kNoGate = 0xffffffffu;

// One endpoint of a wire edge. gate == kNoGate means the circuit boundary
// (input boundary for in-edges, output boundary for out-edges) or, in a
// fragment, a dangling stub.
struct PortRef {
    GateId gate = kNoGate;
    std::uint8_t port = 0;

    bool is_boundary() const { return gate == kNoGate; }
    friend bool operator==(const PortRef&, const PortRef&) = default;
};

struct Gate {
    GateId id = kNoGate;
    const GateType* type = nullptr;
    std::array<std::uint32_t, 2> wire{};  // wire index per port
    Param param;                          // valid iff type->param_count == 1
    std::array<PortRef, 2> in{}, out{};   // filled by Circuit

    int arity() const { return type->arity; }
};

// A circuit (or circuit fragment) as a DAG of gates over qubit wires. Each
// wire is a simple path from the input boundary through its gates to the
// output boundary; a wire may carry no gates at all. Values are immutable
// after construction in the sense that rewriting produces new circuits.
class Circuit {
public:
    Circuit() = default;
    explicit Circuit(std::uint32_t num_qubits);

    std::uint32_t num_qubits() const { return static_cast<std::uint32_t>(wires_.size()); }
    std::size_t gate_count() const { return gates_.size(); }
    bool empty() const { return gates_.empty(); }

    // Gates sorted by id.
    const std::vector<Gate>& gates() const { return gates_; }
    const Gate* find(GateId id) const;
    const Gate& gate(GateId id) const; // throws when absent
    bool contains(GateId id) const { return find(id) != nullptr; }

    // Ordered (gate, port) chain along wire q.
    const std::vector<PortRef>& wire(std::uint32_t q) const { return wires_[q]; }

    // Appends a gate at the current end of its wires and returns its id.
    GateId append(const GateType* type, std::span<const std::uint32_t> wires,
                  const Param* param = nullptr);

    // Builds a circuit from explicit per-wire chains. `chains[q]` lists
    // (gate-id, port) pairs in wire order; every gate port must appear
    // exactly once. Used by the rewrite engine.
    static Circuit from_chains(std::uint32_t num_qubits, std::vector<Gate> gates,
                               std::vector<std::vector<PortRef>> chains);

    // Deterministic topological order: repeatedly emit the ready gate with
    // the smallest incident wire index. Also the canonical gate order used
    // for hashing and for embedding-row layout.
    std::vector<GateId> canonical_order() const;

    // 64-bit digest over the canonical order; equal for identical-label
    // isomorphic circuits produced by this engine, stable across runs.
    std::uint64_t canonical_hash() const;

    // All gates within undirected distance <= k of `from`, as a fragment
    // that keeps gate ids. Severed wire runs become separate fragment wires
    // with dangling stubs. Throws when `from` is not in the circuit.
    Circuit k_hop_neighborhood(GateId from, int k) const;

    // Substitutes symbolic parameters using values[symbol].
    Circuit substituted(std::span<const double> values) const;

    bool has_symbolic_params() const;
    // 1 + max symbol index, 0 when fully concrete.
    std::size_t symbol_space() const;

    GateId next_id() const { return next_id_; }

    // Structural validation (wire integrity, port consistency, acyclicity);
    // throws std::logic_error with a description when violated.
    void validate() const;

private:
    std::vector<Gate> gates_; // sorted by id
    std::vector<std::vector<PortRef>> wires_;
    GateId next_id_ = 0;

    Gate* find_mut(GateId id);
    void relink();

    friend struct RewriteAccess;
};

// --- cost metrics --------------------------------------------------------

enum class CostMetric { Total, Cnot, Depth, Fidelity };

std::optional<CostMetric> cost_metric_by_name(std::string_view n); // total|cnot|depth|fidelity
std::string_view cost_metric_name(CostMetric m);

std::int64_t total_gate_count(const Circuit& c);
std::int64_t cnot_count(const Circuit& c); // counts 2-qubit gates
std::int64_t depth(const Circuit& c);      // longest gate chain, every gate is one layer
// Product of per-gate success rates; throws when a present gate type has no
// rate in the model.
double fidelity(const Circuit& c, const ErrorModel& em);

double cost(const Circuit& c, CostMetric m, const ErrorModel* em = nullptr);
// Integer cost for the RL reward and buffer keys; Fidelity is rejected.
std::int64_t cost_int(const Circuit& c, CostMetric m);

} // namespace quopt
