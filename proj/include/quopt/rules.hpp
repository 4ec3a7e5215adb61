#pragma once

#include "quopt/circuit.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace quopt {

// A rewrite rule: a pair of equivalent circuit fragments over a shared wire
// space (wire w of the source corresponds to wire w of the target). The
// anchor is the topologically first source gate; matching a rule against a
// circuit is uniquely determined once the anchor is placed.
struct Transformation {
    Circuit source;
    Circuit target;
    GateId anchor = kNoGate; // kNoGate when the source is empty
    bool is_nop = false;
    int depth_of_source = 0;
    // Every rule wire carries at least one source gate; rules without this
    // property (the empty-source reverses) stay in the action space but can
    // never be anchored.
    bool source_covers_wires = false;

    bool matchable() const { return !is_nop && anchor != kNoGate && source_covers_wires; }
};

// Indexed transformation space. Index 0 is always the reserved NOP rule that
// terminates trajectories and never matches a circuit.
struct RuleSet {
    std::vector<Transformation> rules;
    const GateSet* gate_set = nullptr;
    int max_source_depth = 0;

    // |X| + 1: the action-space width including NOP.
    std::size_t size() const { return rules.size(); }

    std::uint64_t digest() const;

    static Transformation make_nop();
    // Computes the anchor and cached depth for a freshly built rule.
    static Transformation finish(Circuit source, Circuit target);
};

struct RuleVerifyFailure {
    std::size_t index;
    double residual;
};

struct VerifyReport {
    std::size_t rules = 0;    // non-NOP rules checked
    std::size_t verified = 0; // rules that passed
    std::vector<RuleVerifyFailure> failures;
    bool ok() const { return failures.empty(); }
};

// Re-checks every non-NOP rule with the unitary oracle.
VerifyReport verify_ruleset(const RuleSet& rs, double tol = 1e-8);

// Line-oriented rule file. save followed by load preserves rule indices and
// graphs; load re-verifies unless trust is set and throws on the first
// failing rule, naming its index and residual.
void save_ruleset(const RuleSet& rs, const std::string& path);
RuleSet load_ruleset(const std::string& path, bool trust = false);
RuleSet parse_ruleset(std::string_view text, bool trust = false);

} // namespace quopt
