#include "quopt/rulegen.hpp"

#include "quopt/match.hpp"
#include "quopt/unitary.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <numbers>
#include <unordered_map>
#include <unordered_set>

using namespace quopt;
using quopt::testing::pick;
using quopt::testing::random_circuit;

namespace {

// Shared small rule set for the property tests.
const RuleSet& nam_2q3g() {
    static const RuleSet rs = generate_ruleset(GateSet::nam(), 2, 3);
    return rs;
}

bool set_contains_rule(const RuleSet& rs, std::size_t src_gates, std::size_t tgt_gates,
                       const char* src_type) {
    for (std::size_t i = 1; i < rs.size(); ++i) {
        const Transformation& t = rs.rules[i];
        if (t.source.gate_count() != src_gates || t.target.gate_count() != tgt_gates)
            continue;
        bool all = !t.source.empty();
        for (const Gate& g : t.source.gates())
            all = all && g.type->name == src_type;
        if (!t.source.empty() ? all : t.target.gates()[0].type->name == src_type)
            return true;
    }
    return false;
}

} // namespace

TEST_CASE("{h} with two gates yields the cancellation in both directions") {
    RulegenReport rep;
    RuleSet rs = generate_ruleset(GateSet::nam(), 1, 2, {.allowed = {"h"}}, &rep);
    CHECK(set_contains_rule(rs, 2, 0, "h")); // h h -> empty
    bool reverse = false;
    for (std::size_t i = 1; i < rs.size(); ++i)
        reverse = reverse || (rs.rules[i].source.empty() && rs.rules[i].target.gate_count() == 2);
    CHECK(reverse); // empty -> h h exists but is never matchable
    for (std::size_t i = 1; i < rs.size(); ++i)
        if (rs.rules[i].source.empty())
            CHECK_FALSE(rs.rules[i].matchable());
}

TEST_CASE("{cx} with two gates yields the cx-pair cancellation") {
    RuleSet rs = generate_ruleset(GateSet::nam(), 2, 2, {.allowed = {"cx"}});
    CHECK(set_contains_rule(rs, 2, 0, "cx"));
}

TEST_CASE("{rz} alone emits nothing under the symbolic default") {
    RulegenReport rep;
    RuleSet rs = generate_ruleset(GateSet::nam(), 1, 2, {.allowed = {"rz"}}, &rep);
    CHECK(rs.size() == 1); // NOP only
    CHECK(rep.emitted == 0);
    CHECK(rep.classes == 0); // no class has two members in the same parameter space
    CHECK(rep.candidates == 3); // empty, rz(s0), rz(s0) rz(s1)
}

TEST_CASE("nop sits at index zero and is never matchable") {
    const RuleSet& rs = nam_2q3g();
    CHECK(rs.rules[0].is_nop);
    CHECK_FALSE(rs.rules[0].matchable());
    CHECK(rs.max_source_depth >= 2);
}

TEST_CASE("generation is deterministic") {
    RuleSet a = generate_ruleset(GateSet::nam(), 2, 2);
    RuleSet b = generate_ruleset(GateSet::nam(), 2, 2);
    CHECK(a.digest() == b.digest());
    CHECK(a.size() == b.size());
}

TEST_CASE("every generated rule passes verification") {
    const RuleSet& rs = nam_2q3g();
    const VerifyReport rep = verify_ruleset(rs);
    CHECK(rep.rules == rs.size() - 1);
    CHECK(rep.verified == rep.rules);
}

TEST_CASE("budget cap reports an error") {
    RulegenOptions opt;
    opt.budget = 5;
    CHECK_THROWS(generate_ruleset(GateSet::nam(), 2, 3, opt));
}

TEST_CASE("concrete angles extend the space when requested") {
    RulegenOptions opt;
    opt.angles = {std::numbers::pi / 4, -std::numbers::pi / 4};
    RuleSet rs = generate_ruleset(GateSet::nam(), 1, 2, opt);
    // rz(pi/4) rz(-pi/4) -> empty is reachable only with concrete angles
    bool cancel = false;
    for (std::size_t i = 1; i < rs.size(); ++i) {
        const Transformation& t = rs.rules[i];
        if (t.source.gate_count() == 2 && t.target.empty() &&
            t.source.gates()[0].type->name == "rz")
            cancel = true;
    }
    CHECK(cancel);
}

TEST_CASE("rewrite soundness on random circuits") {
    const RuleSet& rs = nam_2q3g();
    std::mt19937_64 rng(1234);
    int applied = 0;
    while (applied < 60) {
        Circuit c = random_circuit(rng, GateSet::nam(), 3 + pick(rng, 3), 8 + pick(rng, 18));
        // random applicable action
        std::vector<std::pair<GateId, std::size_t>> apps;
        for (const Gate& g : c.gates())
            for (std::size_t r = 1; r < rs.size(); ++r)
                if (match_at(c, g.id, rs.rules[r]))
                    apps.emplace_back(g.id, r);
        if (apps.empty())
            continue;
        auto [gid, ri] = apps[pick(rng, apps.size())];
        auto m = match_at(c, gid, rs.rules[ri]);
        REQUIRE(m.has_value());
        auto res = apply(c, *m);
        CHECK_NOTHROW(res.circuit.validate());
        CHECK(equivalent_up_to_phase(c, res.circuit));
        ++applied;
    }
}

TEST_CASE("theorem: masks outside the d-hop influenced set are invariant") {
    const RuleSet& rs = nam_2q3g();
    const int d = rs.max_source_depth;
    std::mt19937_64 rng(987);
    int events = 0;
    while (events < 40) {
        Circuit c = random_circuit(rng, GateSet::nam(), 3 + pick(rng, 3), 10 + pick(rng, 16));
        std::vector<std::pair<GateId, std::size_t>> apps;
        std::unordered_map<GateId, std::vector<std::uint8_t>> mask_before;
        for (const Gate& g : c.gates()) {
            auto mask = valid_xfers(c, g.id, rs);
            for (std::size_t r = 1; r < rs.size(); ++r)
                if (mask[r])
                    apps.emplace_back(g.id, r);
            mask_before.emplace(g.id, std::move(mask));
        }
        if (apps.empty())
            continue;
        auto [gid, ri] = apps[pick(rng, apps.size())];
        auto m = match_at(c, gid, rs.rules[ri]);
        auto res = apply(c, *m);
        auto ig = influenced_gates(c, res.circuit, res.new_gate_ids, d);
        std::unordered_set<GateId> influenced(ig.begin(), ig.end());
        for (const Gate& g : res.circuit.gates()) {
            if (!c.contains(g.id) || influenced.count(g.id))
                continue;
            CHECK(valid_xfers(res.circuit, g.id, rs) == mask_before.at(g.id));
        }
        ++events;
    }
}

TEST_CASE("reversibility: applying a rule then its reverse restores the hash") {
    const RuleSet& rs = nam_2q3g();
    std::mt19937_64 rng(555);
    int tested = 0;
    for (std::size_t ri = 1; ri < rs.size() && tested < 12; ++ri) {
        const Transformation& r = rs.rules[ri];
        if (!r.matchable() || r.target.empty())
            continue;
        // the reverse is only matchable when the target also covers all wires
        bool target_covers = true;
        for (std::uint32_t q = 0; q < r.target.num_qubits(); ++q)
            target_covers = target_covers && !r.target.wire(q).empty();
        if (!target_covers)
            continue;

        // host: the instantiated source itself
        std::vector<double> angles(r.source.symbol_space());
        for (double& a : angles)
            a = 0.25 * std::numbers::pi * (1.0 + static_cast<double>(pick(rng, 7)));
        Circuit host = r.source.substituted(angles);
        auto m = match_at(host, host.canonical_order()[0], r);
        if (!m) // anchor of the substituted host may differ; find it
            for (const Gate& g : host.gates())
                if ((m = match_at(host, g.id, r)))
                    break;
        REQUIRE(m.has_value());
        auto fwd = apply(host, *m);

        bool restored = false;
        for (const Gate& g : fwd.circuit.gates()) {
            for (std::size_t rj = 1; rj < rs.size() && !restored; ++rj) {
                auto mb = match_at(fwd.circuit, g.id, rs.rules[rj]);
                if (!mb)
                    continue;
                auto back = apply(fwd.circuit, *mb);
                restored = back.circuit.canonical_hash() == host.canonical_hash();
            }
            if (restored)
                break;
        }
        CHECK(restored);
        ++tested;
    }
    CHECK(tested > 0);
}
