#pragma once

#include "quopt/circuit.hpp"

#include <vector>

namespace quopt {

struct PartitionFragment {
    Circuit fragment;
    // fragment wire -> original qubit
    std::vector<std::uint32_t> wire_to_qubit;
};

// Cuts the canonical topological order into consecutive chunks of at most
// max_gates gates. Boundaries cut only wire edges; a fragment's qubit count
// is the number of wires crossing it.
std::vector<PartitionFragment> partition(const Circuit& c, std::size_t max_gates);

// Concatenates fragments back onto the full wire set. stitch(partition(c))
// is canonical-hash-identical to c.
Circuit stitch(const std::vector<PartitionFragment>& fragments, std::uint32_t num_qubits);

} // namespace quopt
