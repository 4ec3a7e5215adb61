#pragma once

#include "quopt/rules.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace quopt {

// A placement of a rule's source graph in a circuit. Produced by match_at;
// consumed by apply on the same circuit revision.
struct Match {
    const Transformation* rule = nullptr;
    // (source gate id, circuit gate id) in source canonical order.
    std::vector<std::pair<GateId, GateId>> mapping;
    GateId anchored_at = kNoGate;
    // source wire -> circuit wire
    std::vector<std::uint32_t> wire_map;
    // symbol -> bound concrete value
    std::vector<double> symbol_binding;
    std::uint64_t circuit_hash = 0;
};

// The unique match of `rule` anchored at `gate`, if one exists. Growth from
// the anchor is forced along labeled ports; gate types, parameters (symbolic
// bindings must agree exactly), port labels and convexity are checked.
// Deterministic for fixed inputs.
std::optional<Match> match_at(const Circuit& c, GateId gate, const Transformation& rule);

// mask[0] (NOP) is always true; mask[i] says rule i matches anchored at
// `gate`. Length equals rule_set.size().
std::vector<std::uint8_t> valid_xfers(const Circuit& c, GateId gate, const RuleSet& rs);

struct ApplyResult {
    Circuit circuit;
    std::vector<GateId> new_gate_ids; // instantiated target gates, canonical order
};

// Replaces the matched subgraph with the instantiated target. Untouched
// gates keep their ids. Throws when the match is stale (circuit hash
// mismatch).
ApplyResult apply(const Circuit& c, const Match& m);

// The gates of `after` whose applicable-transformation sets may have changed:
// the new gates, their directed predecessors within l hops, and the l-hop
// predecessors of the first surviving gate downstream on each rewritten wire
// (for a wire whose downstream side is the circuit boundary and carries no
// new gate, the upstream survivor and its predecessors stand in). Never
// empty after a rewrite unless `after` has no gates at all.
std::vector<GateId> influenced_gates(const Circuit& before, const Circuit& after,
                                     const std::vector<GateId>& new_gate_ids, int l);

} // namespace quopt
