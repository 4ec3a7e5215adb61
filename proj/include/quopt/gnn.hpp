#pragma once

#include "quopt/circuit.hpp"
#include "quopt/tensor.hpp"

#include <random>
#include <unordered_map>
#include <vector>

namespace quopt {

// Message-passing gate representation generator. Layer k aggregates each
// gate's neighbors (one term per edge, both directions, with edge features
// encoding direction and the two port labels) through a ReLU MLP, then
// updates the gate state from the concatenation of its previous state and
// the aggregate. The layer-K output of a gate depends on exactly its K-hop
// neighborhood.
struct GnnParams {
    struct Layer {
        nn::Tensor w_a; // [(D_in + 6), D]
        nn::Tensor b_a; // [D]
        nn::Tensor w_u; // [(D_in + D), D], no bias
    };
    nn::Tensor type_embedding; // [num types, D]
    std::vector<Layer> layers; // K entries
    const GateSet* gate_set = nullptr;
    std::size_t dim = 0;

    int k_hops() const { return static_cast<int>(layers.size()); }

    static GnnParams init(const GateSet& gs, int k, std::size_t dim, std::mt19937_64& rng);
};

struct Embedding {
    std::vector<GateId> order; // canonical order; row i belongs to order[i]
    std::unordered_map<GateId, std::size_t> row_of;
    nn::Tensor h; // [n, D]
};

// Per-gate layer-K vectors for the whole circuit.
Embedding embed(const Circuit& c, const GnnParams& params);

// The single row of `gate`, computed on its K-hop neighborhood fragment
// only; equal to the full-circuit row within numerical noise.
nn::Tensor embed_fragment(const Circuit& c, GateId gate, const GnnParams& params);

// Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] initialization.
nn::Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in,
                        std::mt19937_64& rng, bool requires_grad = true);

} // namespace quopt
