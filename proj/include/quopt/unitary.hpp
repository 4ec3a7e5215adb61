#pragma once

#include "quopt/circuit.hpp"

#include <complex>
#include <vector>

namespace quopt {

// Row-major 2^n x 2^n matrix. Qubit 0 is the most significant bit of the
// state index.
using CMat = std::vector<std::complex<double>>;

inline constexpr int kDefaultQubitLimit = 8;

// Product of the gate unitaries in topological order with the standard
// tensor embedding. Throws when the qubit count exceeds the limit or a
// symbolic parameter is present.
CMat circuit_unitary(const Circuit& c, int max_qubits = kDefaultQubitLimit);

bool is_unitary(const CMat& u, double tol = 1e-9);

// True iff U_a = lambda * U_b entrywise (|lambda| = 1) for every sampled
// assignment of the shared symbolic-parameter space. Concrete circuits are
// compared directly. lambda is estimated from the largest-magnitude entry
// of U_a. Throws on qubit-count mismatch.
bool equivalent_up_to_phase(const Circuit& a, const Circuit& b, int param_samples = 4,
                            double tol = 1e-8, int max_qubits = kDefaultQubitLimit);

// Largest |U_a - lambda U_b| entry over the sampled assignments; the residual
// reported by rule verification.
double phase_equiv_residual(const Circuit& a, const Circuit& b, int param_samples = 4,
                            int max_qubits = kDefaultQubitLimit);

// The fixed-seed parameter assignment used for sample index `sample`; shared
// by equivalence checking and rule-generation fingerprints.
std::vector<double> phase_check_assignment(std::size_t symbols, int sample);

} // namespace quopt
