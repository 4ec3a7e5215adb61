#include "quopt/circuit.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace quopt;
using quopt::testing::qasm;
using quopt::testing::random_circuit;

TEST_CASE("cost metrics on the empty circuit") {
    Circuit c(1);
    CHECK(total_gate_count(c) == 0);
    CHECK(depth(c) == 0);
    CHECK(fidelity(c, ErrorModel::ibm_washington()) == 1.0);
}

TEST_CASE("two-CNOT fidelity under the default error model") {
    Circuit c = qasm("qreg q[2]; cx q[0],q[1]; cx q[0],q[1];");
    const double f = fidelity(c, ErrorModel::ibm_washington());
    CHECK(f == doctest::Approx((1 - 0.01214) * (1 - 0.01214)).epsilon(1e-12));
}

TEST_CASE("fidelity needs a rate for every present gate type") {
    Circuit c = qasm("qreg q[1]; h q[0];");
    CHECK_THROWS(fidelity(c, ErrorModel::ibm_washington())); // no 'h' rate
}

TEST_CASE("depth counts the longest gate chain") {
    Circuit c = qasm("qreg q[2]; h q[0]; h q[0]; cx q[0],q[1];");
    CHECK(depth(c) == 3);
    CHECK(cnot_count(c) == 1);
    CHECK(total_gate_count(c) == 3);
}

TEST_CASE("depth <= gate count, equality on a single chain") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 50; ++i) {
        Circuit c = random_circuit(rng, GateSet::nam(), 4, 20);
        CHECK(depth(c) <= total_gate_count(c));
    }
    Circuit chain = qasm("qreg q[1]; h q[0]; x q[0]; h q[0];");
    CHECK(depth(chain) == total_gate_count(chain));
}

TEST_CASE("fidelity product equals the log-sum form") {
    std::mt19937_64 rng(7);
    ErrorModel em = ErrorModel::ibm_washington();
    em.rate["h"] = 1.3e-3;
    for (int i = 0; i < 20; ++i) {
        Circuit c = random_circuit(rng, GateSet::nam(), 4, 25);
        double logsum = 0.0;
        for (const Gate& g : c.gates())
            logsum += std::log(1.0 - em.rate.at(g.type->name));
        CHECK(std::abs(fidelity(c, em) - std::exp(logsum)) < 1e-12);
    }
}

TEST_CASE("wire integrity holds for random circuits") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        Circuit c = random_circuit(rng, GateSet::nam(), 5, 30);
        CHECK_NOTHROW(c.validate());
        // each wire is a simple path: ports seen exactly once overall
        std::size_t total_ports = 0;
        for (std::uint32_t q = 0; q < c.num_qubits(); ++q)
            total_ports += c.wire(q).size();
        std::size_t want = 0;
        for (const Gate& g : c.gates())
            want += static_cast<std::size_t>(g.arity());
        CHECK(total_ports == want);
    }
}

TEST_CASE("canonical hash: determinism, content sensitivity") {
    Circuit c = qasm("qreg q[3]; h q[0]; cx q[0],q[1]; rz(0.5) q[2];");
    Circuit copy = c;
    CHECK(c.canonical_hash() == copy.canonical_hash());

    Circuit extra = qasm("qreg q[3]; h q[0]; cx q[0],q[1]; rz(0.5) q[2]; x q[1];");
    CHECK(c.canonical_hash() != extra.canonical_hash());

    // insertion order of incomparable gates does not matter
    Circuit a = qasm("qreg q[2]; h q[0]; x q[1];");
    Circuit b = qasm("qreg q[2]; x q[1]; h q[0];");
    CHECK(a.canonical_hash() == b.canonical_hash());
}

TEST_CASE("k-hop neighborhood") {
    // linear chain g1-g2-g3-g4 on one wire
    Circuit c = qasm("qreg q[1]; h q[0]; x q[0]; h q[0]; x q[0];");
    const GateId g2 = c.gates()[1].id;

    SUBCASE("k = 0 keeps only the gate itself") {
        Circuit f = c.k_hop_neighborhood(g2, 0);
        CHECK(f.gate_count() == 1);
        CHECK(f.gates()[0].id == g2);
    }
    SUBCASE("k = 1 on the chain keeps g1,g2,g3") {
        Circuit f = c.k_hop_neighborhood(g2, 1);
        CHECK(f.gate_count() == 3);
        CHECK(f.contains(c.gates()[0].id));
        CHECK(f.contains(c.gates()[2].id));
        CHECK_FALSE(f.contains(c.gates()[3].id));
    }
    SUBCASE("k at least the diameter gives the whole circuit") {
        Circuit f = c.k_hop_neighborhood(g2, 10);
        CHECK(f.gate_count() == c.gate_count());
    }
    SUBCASE("monotone in k") {
        std::mt19937_64 rng(17);
        for (int i = 0; i < 20; ++i) {
            Circuit r = random_circuit(rng, GateSet::nam(), 4, 15);
            const GateId g = r.gates()[quopt::testing::pick(rng, r.gate_count())].id;
            std::set<GateId> prev;
            for (int k = 0; k <= 4; ++k) {
                Circuit f = r.k_hop_neighborhood(g, k);
                std::set<GateId> cur;
                for (const Gate& gg : f.gates())
                    cur.insert(gg.id);
                CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
                prev = cur;
            }
        }
    }
    SUBCASE("unknown gate throws") {
        CHECK_THROWS(c.k_hop_neighborhood(GateId{4242}, 1));
    }
}

TEST_CASE("k-hop fragments keep severed runs apart") {
    // wire 0: a . b   with . excluded at k=1 from a 2-wire bridge
    // build: x a(q0); cx(q0,q1); m(q0); b(q0)  and query the cx at k=1
    Circuit c = qasm("qreg q[2]; x q[0]; cx q[0],q[1]; x q[0]; h q[0]; h q[1];");
    const GateId cxid = c.gates()[1].id;
    Circuit f = c.k_hop_neighborhood(cxid, 1);
    // neighbors of cx: x(before), x(after), h(q1 after)
    CHECK(f.gate_count() == 4);
    CHECK_NOTHROW(f.validate());
}

TEST_CASE("error model parser") {
    ErrorModel em = ErrorModel::parse("cx = 0.01\nrz = 0 # exact\n\nx = 2.77e-4\n");
    CHECK(em.rate.at("cx") == 0.01);
    CHECK(em.rate.at("x") == 2.77e-4);
    CHECK_THROWS(ErrorModel::parse("cx 0.01"));
    CHECK_THROWS(ErrorModel::parse("cx = 1.5"));
}

TEST_CASE("cost metric names") {
    CHECK(cost_metric_by_name("total") == CostMetric::Total);
    CHECK(cost_metric_by_name("cnot") == CostMetric::Cnot);
    CHECK(cost_metric_by_name("depth") == CostMetric::Depth);
    CHECK(cost_metric_by_name("fidelity") == CostMetric::Fidelity);
    CHECK_FALSE(cost_metric_by_name("bogus").has_value());
    CHECK_THROWS(cost_int(Circuit(1), CostMetric::Fidelity));
}
