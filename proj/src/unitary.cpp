#include "quopt/unitary.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace quopt {

namespace {

using cplx = std::complex<double>;

// Left-multiplies the embedding of a 1-qubit gate acting on state-index bit b.
void apply_1q(CMat& u, std::size_t n_states, int b, const cplx m[4]) {
    const std::size_t stride = std::size_t{1} << b;
    for (std::size_t base = 0; base < n_states; ++base) {
        if (base & stride)
            continue;
        const std::size_t r0 = base, r1 = base | stride;
        for (std::size_t c = 0; c < n_states; ++c) {
            const cplx a0 = u[r0 * n_states + c];
            const cplx a1 = u[r1 * n_states + c];
            u[r0 * n_states + c] = m[0] * a0 + m[1] * a1;
            u[r1 * n_states + c] = m[2] * a0 + m[3] * a1;
        }
    }
}

// 2-qubit gate on bits (b0 = port-0 qubit, b1 = port-1 qubit); the 4x4
// matrix is indexed by the 2-bit value (port0 << 1) | port1.
void apply_2q(CMat& u, std::size_t n_states, int b0, int b1, const cplx m[16]) {
    const std::size_t s0 = std::size_t{1} << b0;
    const std::size_t s1 = std::size_t{1} << b1;
    for (std::size_t base = 0; base < n_states; ++base) {
        if ((base & s0) || (base & s1))
            continue;
        std::size_t rows[4] = {base, base | s1, base | s0, base | s0 | s1};
        for (std::size_t c = 0; c < n_states; ++c) {
            cplx a[4];
            for (int i = 0; i < 4; ++i)
                a[i] = u[rows[i] * n_states + c];
            for (int i = 0; i < 4; ++i) {
                cplx acc = 0;
                for (int j = 0; j < 4; ++j)
                    acc += m[i * 4 + j] * a[j];
                u[rows[i] * n_states + c] = acc;
            }
        }
    }
}

} // namespace

CMat circuit_unitary(const Circuit& c, int max_qubits) {
    if (c.num_qubits() > static_cast<std::uint32_t>(max_qubits))
        throw std::invalid_argument("circuit_unitary: qubit limit exceeded");
    if (c.has_symbolic_params())
        throw std::invalid_argument("circuit_unitary: symbolic parameter present");

    const int n = static_cast<int>(c.num_qubits());
    const std::size_t dim = std::size_t{1} << n;
    CMat u(dim * dim, cplx(0));
    for (std::size_t i = 0; i < dim; ++i)
        u[i * dim + i] = 1;

    for (GateId id : c.canonical_order()) {
        const Gate& g = c.gate(id);
        cplx m[16];
        const double* pv = g.type->param_count == 1 ? &g.param.value : nullptr;
        g.type->unitary(pv, m);
        if (g.arity() == 1) {
            apply_1q(u, dim, n - 1 - static_cast<int>(g.wire[0]), m);
        } else {
            apply_2q(u, dim, n - 1 - static_cast<int>(g.wire[0]),
                     n - 1 - static_cast<int>(g.wire[1]), m);
        }
    }
    return u;
}

bool is_unitary(const CMat& u, double tol) {
    std::size_t dim = 1;
    while (dim * dim < u.size())
        dim <<= 1;
    if (dim * dim != u.size())
        return false;
    // U U^dagger == I
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            cplx acc = 0;
            for (std::size_t k = 0; k < dim; ++k)
                acc += u[i * dim + k] * std::conj(u[j * dim + k]);
            const cplx want = i == j ? cplx(1) : cplx(0);
            if (std::abs(acc - want) > tol)
                return false;
        }
    }
    return true;
}

// Fixed-seed parameter assignments shared by verification and rule
// fingerprinting: sample s of symbol k is uniform in [0, 2*pi).
std::vector<double> phase_check_assignment(std::size_t symbols, int sample) {
    std::mt19937_64 rng(0x51a3c0de9b1ful + static_cast<std::uint64_t>(sample) * 0x9e3779b9ull);
    std::vector<double> vals(symbols);
    for (double& v : vals)
        v = 2.0 * std::numbers::pi * (static_cast<double>(rng() >> 11) * 0x1p-53);
    return vals;
}

namespace {

double residual_once(const Circuit& a, const Circuit& b, std::span<const double> assign,
                     int max_qubits) {
    const CMat ua = circuit_unitary(a.substituted(assign), max_qubits);
    const CMat ub = circuit_unitary(b.substituted(assign), max_qubits);

    // lambda from the largest-magnitude entry of U_a
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < ua.size(); ++i) {
        const double mag = std::abs(ua[i]);
        if (mag > best_mag) {
            best_mag = mag;
            best = i;
        }
    }
    if (std::abs(ub[best]) < 1e-12)
        return 1.0; // U_b vanishes where U_a peaks: not equivalent
    const cplx lambda = ua[best] / ub[best];

    double worst = std::abs(std::abs(lambda) - 1.0);
    for (std::size_t i = 0; i < ua.size(); ++i)
        worst = std::max(worst, std::abs(ua[i] - lambda * ub[i]));
    return worst;
}

} // namespace

double phase_equiv_residual(const Circuit& a, const Circuit& b, int param_samples,
                            int max_qubits) {
    if (a.num_qubits() != b.num_qubits())
        throw std::invalid_argument("equivalent_up_to_phase: qubit count mismatch");
    const std::size_t symbols = std::max(a.symbol_space(), b.symbol_space());
    const int samples = symbols == 0 ? 1 : param_samples;
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const auto assign = phase_check_assignment(symbols, s);
        worst = std::max(worst, residual_once(a, b, assign, max_qubits));
    }
    return worst;
}

bool equivalent_up_to_phase(const Circuit& a, const Circuit& b, int param_samples, double tol,
                            int max_qubits) {
    return phase_equiv_residual(a, b, param_samples, max_qubits) <= tol;
}

} // namespace quopt
