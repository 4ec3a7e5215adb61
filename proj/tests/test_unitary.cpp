#include "quopt/unitary.hpp"

#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace quopt;
using quopt::testing::qasm;
using quopt::testing::random_circuit;

namespace {

double max_abs_diff(const CMat& a, const CMat& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

CMat identity(std::size_t dim) {
    CMat u(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
        u[i * dim + i] = 1.0;
    return u;
}

} // namespace

TEST_CASE("CNOT twice is the identity") {
    Circuit c = qasm("qreg q[2]; cx q[0],q[1]; cx q[0],q[1];");
    CHECK(max_abs_diff(circuit_unitary(c), identity(4)) < 1e-12);
}

TEST_CASE("H twice is the identity") {
    Circuit c = qasm("qreg q[1]; h q[0]; h q[0];");
    CHECK(max_abs_diff(circuit_unitary(c), identity(2)) < 1e-12);
}

TEST_CASE("reversed CNOT equals the H-conjugated one") {
    Circuit a = qasm("qreg q[2]; cx q[0],q[1];");
    Circuit b = qasm("qreg q[2]; h q[0]; h q[1]; cx q[1],q[0]; h q[0]; h q[1];");
    CHECK(max_abs_diff(circuit_unitary(a), circuit_unitary(b)) < 1e-9);
}

TEST_CASE("qubit 0 is the most significant index bit") {
    // X on qubit 0 of two flips the high bit: |00> -> |10>
    Circuit c = qasm("qreg q[2]; x q[0];");
    CMat u = circuit_unitary(c);
    CHECK(std::abs(u[2 * 4 + 0] - 1.0) < 1e-15); // column 0 maps to row 2
    CHECK(std::abs(u[0 * 4 + 2] - 1.0) < 1e-15);
}

TEST_CASE("unitarity of random circuits") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 25; ++i) {
        Circuit c = random_circuit(rng, GateSet::nam(), 6, 30);
        CHECK(is_unitary(circuit_unitary(c), 1e-9));
    }
}

TEST_CASE("limits") {
    CHECK_THROWS(circuit_unitary(Circuit(9)));
    Circuit sym(1);
    Param p = Param::sym(0);
    sym.append(GateSet::nam().find("rz"), std::vector<std::uint32_t>{0}, &p);
    CHECK_THROWS(circuit_unitary(sym));
}

TEST_CASE("phase equivalence is reflexive") {
    Circuit c = qasm("qreg q[2]; h q[0]; cx q[0],q[1]; rz(0.3) q[1];");
    CHECK(equivalent_up_to_phase(c, c));
}

TEST_CASE("rz versus the pure phase gate differs only by a global phase") {
    // diag(1, e^{i theta}) differs from rz(theta) by e^{i theta/2}
    static const GateSet phase_set("test", {
        {"rz", 1, 1, [](const double* p, std::complex<double>* out) {
             const double h = p[0] / 2;
             out[0] = {std::cos(h), -std::sin(h)};
             out[1] = 0;
             out[2] = 0;
             out[3] = {std::cos(h), std::sin(h)};
         }},
        {"p", 1, 1, [](const double* p, std::complex<double>* out) {
             out[0] = 1;
             out[1] = 0;
             out[2] = 0;
             out[3] = {std::cos(p[0]), std::sin(p[0])};
         }},
    });
    Circuit a(1), b(1);
    Param s0 = Param::sym(0);
    a.append(phase_set.find("rz"), std::vector<std::uint32_t>{0}, &s0);
    b.append(phase_set.find("p"), std::vector<std::uint32_t>{0}, &s0);
    CHECK(equivalent_up_to_phase(a, b));
    // and the residual really is tiny across the sampled assignments
    CHECK(phase_equiv_residual(a, b) < 1e-10);
}

TEST_CASE("CNOT is not the identity wire pair") {
    Circuit a = qasm("qreg q[2]; cx q[0],q[1];");
    Circuit b(2);
    CHECK_FALSE(equivalent_up_to_phase(a, b));
}

TEST_CASE("dimension mismatch throws") {
    CHECK_THROWS(equivalent_up_to_phase(Circuit(1), Circuit(2)));
}

TEST_CASE("symbolic equivalence: rz commutes with cx on the control") {
    const GateSet& gs = GateSet::nam();
    Circuit a(2), b(2);
    Param s0 = Param::sym(0);
    a.append(gs.find("rz"), std::vector<std::uint32_t>{0}, &s0);
    a.append(gs.find("cx"), std::vector<std::uint32_t>{0, 1}, nullptr);
    b.append(gs.find("cx"), std::vector<std::uint32_t>{0, 1}, nullptr);
    b.append(gs.find("rz"), std::vector<std::uint32_t>{0}, &s0);
    CHECK(equivalent_up_to_phase(a, b));

    // but not on the target
    Circuit d(2);
    d.append(gs.find("cx"), std::vector<std::uint32_t>{0, 1}, nullptr);
    d.append(gs.find("rz"), std::vector<std::uint32_t>{1}, &s0);
    CHECK_FALSE(equivalent_up_to_phase(a, d));
}
