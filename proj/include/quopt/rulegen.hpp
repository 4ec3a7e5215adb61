#pragma once

#include "quopt/rules.hpp"

#include <cstddef>
#include <vector>

namespace quopt {

struct RulegenOptions {
    // Concrete rz angles enumerated alongside the symbolic parameter. Empty
    // by default: generated rules then contain no synthesized parameter
    // values, only symbolic ones.
    std::vector<double> angles;
    // Restrict enumeration to these type names (empty = whole gate set).
    std::vector<std::string> allowed;
    // Hard cap on enumerated candidate circuits.
    std::size_t budget = 2'000'000;
    double verify_tol = 1e-8;
};

struct RulegenReport {
    std::size_t candidates = 0;   // circuits enumerated after dedup
    std::size_t classes = 0;      // equivalence classes with >= 2 members
    std::size_t emitted = 0;      // non-NOP rules in the set
    std::size_t verified = 0;     // all emitted rules pass the oracle
};

// Enumerates circuits over the gate set with at most max_qubits wires and
// max_gates gates (rz parameters symbolic unless opt.angles adds concrete
// values), groups them by unitary fingerprint at the fixed parameter
// assignments, and emits every verified rewrite between distinct members of
// a group, both directions. NOP sits at index 0. Deterministic.
RuleSet generate_ruleset(const GateSet& gs, std::uint32_t max_qubits, std::size_t max_gates,
                         const RulegenOptions& opt = {}, RulegenReport* report = nullptr);

} // namespace quopt
