#include "quopt/search.hpp"

#include "quopt/partition.hpp"
#include "quopt/rulegen.hpp"
#include "quopt/unitary.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <cstdlib>

using namespace quopt;
using quopt::testing::qasm;
using quopt::testing::random_circuit;

namespace {

std::string data_dir() {
    if (const char* env = std::getenv("QUOPT_DATA_DIR"))
        return env;
    return ".";
}

AgentConfig tiny_agent() {
    AgentConfig cfg;
    cfg.gnn_layers = 2;
    cfg.gnn_dim = 10;
    cfg.critic_hidden = 12;
    cfg.actor_hidden = 12;
    return cfg;
}

TrainConfig tiny_train() {
    TrainConfig cfg;
    cfg.trajectories = 2;
    cfg.horizon = 10;
    cfg.minibatch = 16;
    cfg.epochs = 1;
    return cfg;
}

} // namespace

TEST_CASE("pgs on a rule-less landscape hard-masks every gate and stops") {
    RuleSet rs;
    rs.gate_set = &GateSet::nam();
    rs.rules.push_back(RuleSet::make_nop());

    AgentParams params = AgentParams::init(GateSet::nam(), rs.size(), tiny_agent(), 3);
    Circuit start = qasm("qreg q[2]; h q[0]; cx q[0],q[1]; x q[1];");
    PolicyGuidedSearch pgs(rs, tiny_train(), 11);
    pgs.refresh_params(params);
    pgs.reset_start(start);

    pgs.run_steps(100);
    CHECK(pgs.exhausted());
    CHECK(pgs.best_cost() == 3);
    CHECK(pgs.best().canonical_hash() == start.canonical_hash());
    // NOP stops hard-mask; one pass selects every gate exactly once
    CHECK(pgs.total_steps() == start.gate_count());
    CHECK(pgs.mask_counts(start).hard == start.gate_count());
}

TEST_CASE("pgs cancels the h pair when the actor prefers that rule") {
    RuleSet rs = generate_ruleset(GateSet::nam(), 2, 2);
    std::size_t hh = 0;
    for (std::size_t i = 1; i < rs.size(); ++i)
        if (rs.rules[i].matchable() && rs.rules[i].target.empty() &&
            rs.rules[i].source.gate_count() == 2 &&
            rs.rules[i].source.gates()[0].type->name == "h")
            hh = i;
    REQUIRE(hh != 0);

    AgentParams params = AgentParams::init(GateSet::nam(), rs.size(), tiny_agent(), 5);
    std::fill(params.actor.b2.val_mut().begin(), params.actor.b2.val_mut().end(), -50.0);
    params.actor.b2.val_mut()[hh] = 50.0;

    PolicyGuidedSearch pgs(rs, tiny_train(), 17);
    pgs.refresh_params(params);
    pgs.reset_start(qasm("qreg q[1]; h q[0]; h q[0];"));
    const std::size_t improvements = pgs.run_steps(2);
    CHECK(improvements == 1);
    CHECK(pgs.best_cost() == 0);
    CHECK(pgs.best().gate_count() == 0);
}

TEST_CASE("pgs soft-masks visited gates; clearing happens once") {
    // plateau moves only: rz-cx commutation keeps the cost at 2
    RuleSet rs = generate_ruleset(GateSet::nam(), 2, 2);
    AgentParams params = AgentParams::init(GateSet::nam(), rs.size(), tiny_agent(), 7);
    Circuit start = qasm("qreg q[2]; rz(0.5) q[0]; cx q[0],q[1];");
    PolicyGuidedSearch pgs(rs, tiny_train(), 19);
    pgs.refresh_params(params);
    pgs.reset_start(start);

    pgs.run_steps(1);
    auto counts = pgs.mask_counts(start);
    CHECK(counts.hard + counts.soft == 1); // the visited gate is masked either way

    // the frontier only ever holds cost-2 circuits
    pgs.run_steps(40);
    CHECK(pgs.best_cost() == 2);
    for (std::size_t i = 0; i < pgs.frontier_size(); ++i)
        CHECK(total_gate_count(pgs.best()) == 2);
}

TEST_CASE("pgs visits every gate before any clearing (soft-mask guarantee)") {
    RuleSet rs;
    rs.gate_set = &GateSet::nam();
    rs.rules.push_back(RuleSet::make_nop());
    AgentParams params = AgentParams::init(GateSet::nam(), rs.size(), tiny_agent(), 13);

    std::mt19937_64 mix(99);
    for (int trial = 0; trial < 5; ++trial) {
        Circuit start = random_circuit(mix, GateSet::nam(), 3, 6);
        PolicyGuidedSearch pgs(rs, tiny_train(), 23 + trial);
        pgs.refresh_params(params);
        pgs.reset_start(start);
        const std::size_t n = start.gate_count();
        pgs.run_steps(n); // n visits on an n-gate circuit
        auto counts = pgs.mask_counts(start);
        CHECK(counts.hard + counts.soft == n); // every gate selected at least once
    }
}

TEST_CASE("optimize: zero search quota means pure fine-tuning") {
    RuleSet rs = generate_ruleset(GateSet::nam(), 2, 2);
    AgentParams params = AgentParams::init(GateSet::nam(), rs.size(), tiny_agent(), 29);
    TrainConfig tcfg = tiny_train();
    SearchConfig scfg;
    scfg.head_start_iterations = 1;
    scfg.ft_iterations_per_slice = 1;
    scfg.pgs_steps_per_slice = 0;
    scfg.max_slices = 2;

    Circuit input = qasm("qreg q[1]; h q[0]; h q[0]; x q[0];");
    OptimizeResult res = optimize(input, params, rs, tcfg, scfg, 31);
    CHECK(res.report.input_cost == 3);
    CHECK(res.report.output_cost <= res.report.input_cost);
    CHECK(res.report.verified);
    CHECK(equivalent_up_to_phase(input, res.circuit));
}

TEST_CASE("optimize shrinks an obviously reducible circuit") {
    RuleSet rs = generate_ruleset(GateSet::nam(), 2, 2);
    AgentParams params = AgentParams::init(GateSet::nam(), rs.size(), tiny_agent(), 37);
    TrainConfig tcfg = tiny_train();
    tcfg.trajectories = 4;
    tcfg.horizon = 20;
    SearchConfig scfg;
    scfg.head_start_iterations = 1;
    scfg.ft_iterations_per_slice = 1;
    scfg.pgs_steps_per_slice = 64;
    scfg.max_slices = 6;

    Circuit input = qasm("qreg q[2]; h q[0]; h q[0]; cx q[0],q[1]; cx q[0],q[1]; x q[1]; x q[1];");
    OptimizeResult res = optimize(input, params, rs, tcfg, scfg, 41);
    CHECK(res.report.output_cost < res.report.input_cost);
    CHECK(equivalent_up_to_phase(input, res.circuit));
    CHECK(cost_int(res.circuit, tcfg.metric) == res.report.output_cost);
    // improvements are recorded in decreasing cost order
    for (std::size_t i = 1; i < res.report.improvements.size(); ++i)
        CHECK(res.report.improvements[i].second < res.report.improvements[i - 1].second);
}

TEST_CASE("partition: chunk sizes and stitch identity") {
    Circuit chain(1);
    for (int i = 0; i < 10; ++i)
        chain.append(GateSet::nam().find(i % 2 ? "h" : "x"), std::vector<std::uint32_t>{0},
                     nullptr);
    auto frags = partition(chain, 4);
    REQUIRE(frags.size() == 3);
    CHECK(frags[0].fragment.gate_count() == 4);
    CHECK(frags[1].fragment.gate_count() == 4);
    CHECK(frags[2].fragment.gate_count() == 2);
    CHECK(stitch(frags, 1).canonical_hash() == chain.canonical_hash());

    // single fragment when the bound is loose
    auto whole = partition(chain, 100);
    REQUIRE(whole.size() == 1);
    CHECK(stitch(whole, 1).canonical_hash() == chain.canonical_hash());
}

TEST_CASE("partition round trip on random circuits") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        Circuit c = random_circuit(rng, GateSet::nam(), 5, 40);
        for (std::size_t mg : {3u, 7u, 16u, 512u}) {
            auto frags = partition(c, mg);
            for (const auto& f : frags) {
                CHECK(f.fragment.gate_count() <= mg);
                CHECK_NOTHROW(f.fragment.validate());
            }
            CHECK(stitch(frags, c.num_qubits()).canonical_hash() == c.canonical_hash());
        }
    }
}

TEST_CASE("per-fragment optimization preserves whole-circuit equivalence") {
    RuleSet rs = generate_ruleset(GateSet::nam(), 2, 2);
    AgentParams params = AgentParams::init(GateSet::nam(), rs.size(), tiny_agent(), 43);
    TrainConfig tcfg = tiny_train();
    SearchConfig scfg;
    scfg.head_start_iterations = 1;
    scfg.ft_iterations_per_slice = 1;
    scfg.pgs_steps_per_slice = 32;
    scfg.max_slices = 2;

    Circuit input = qasm("qreg q[3]; h q[0]; h q[0]; cx q[0],q[1]; x q[2]; x q[2]; "
                         "cx q[1],q[2]; cx q[1],q[2]; h q[2];");
    auto frags = partition(input, 4);
    std::vector<PartitionFragment> optimized;
    for (auto& f : frags) {
        AgentParams local = params; // shared starting checkpoint
        OptimizeResult r = optimize(f.fragment, local, rs, tcfg, scfg, 47);
        optimized.push_back({std::move(r.circuit), f.wire_to_qubit});
    }
    Circuit out = stitch(optimized, input.num_qubits());
    CHECK(total_gate_count(out) <= total_gate_count(input));
    CHECK(equivalent_up_to_phase(input, out));
}
