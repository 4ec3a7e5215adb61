#pragma once

#include "quopt/circuit.hpp"
#include "quopt/qasm.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace quopt::testing {

// Uniform double in [0, 1) with a portable mapping.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

// Random concrete circuit over the gate set; rz angles land on multiples of
// pi/4 so that concrete-angle rules have something to match.
inline Circuit random_circuit(std::mt19937_64& rng, const GateSet& gs, std::uint32_t nq,
                              std::size_t ngates) {
    Circuit c(nq);
    for (std::size_t i = 0; i < ngates; ++i) {
        const GateType& t = gs.types()[pick(rng, gs.types().size())];
        std::vector<std::uint32_t> ws;
        ws.push_back(static_cast<std::uint32_t>(pick(rng, nq)));
        if (t.arity == 2) {
            std::uint32_t w2;
            do {
                w2 = static_cast<std::uint32_t>(pick(rng, nq));
            } while (w2 == ws[0]);
            ws.push_back(w2);
        }
        if (t.param_count == 1) {
            const double angle = (1.0 + static_cast<double>(pick(rng, 7))) * 0.25 * 3.14159265358979323846;
            Param p = Param::concrete(angle);
            c.append(&t, ws, &p);
        } else {
            c.append(&t, ws, nullptr);
        }
    }
    return c;
}

inline Circuit qasm(const std::string& body, const GateSet& gs = GateSet::nam()) {
    return parse_qasm(body, gs);
}

} // namespace quopt::testing
