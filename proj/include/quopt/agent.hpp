#pragma once

#include "quopt/gnn.hpp"
#include "quopt/rules.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace quopt {

// Deterministic uniform sampling helper shared by every stochastic component.
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    double uniform() { return static_cast<double>(engine() >> 11) * 0x1p-53; }
    std::size_t below(std::size_t n) {
        return std::min<std::size_t>(n - 1, static_cast<std::size_t>(uniform() * n));
    }
};

struct Mlp2 {
    nn::Tensor w1, b1, w2, b2;

    static Mlp2 init(std::size_t in, std::size_t hidden, std::size_t out, std::mt19937_64& rng);
    // x: [n, in] -> [n, out]  or  [in] -> [out]
    nn::Tensor apply(const nn::Tensor& x) const;
};

struct AgentConfig {
    int gnn_layers = 6;          // K
    std::size_t gnn_dim = 128;   // D
    std::size_t critic_hidden = 128;
    std::size_t actor_hidden = 256;
    double lambda = 0.9; // exploitation measure of the gate-selecting softmax
};

// The hierarchical policy: shared GNN trunk, gate value predictor (critic,
// one scalar per gate) and transformation selector (actor, one logit per
// rule including NOP at index 0).
struct AgentParams {
    GnnParams gnn;
    Mlp2 critic;
    Mlp2 actor;
    double lambda = 0.9;
    std::size_t num_actions = 0; // rule_set.size() == |X|+1

    static AgentParams init(const GateSet& gs, std::size_t num_actions, const AgentConfig& cfg,
                            std::uint64_t seed);

    // Stable names for checkpointing and optimizer registration.
    std::vector<std::pair<std::string, nn::Tensor>> named_tensors() const;
    // Value-identical snapshot detached from gradient tracking.
    AgentParams detached() const;
};

// V_g = critic(h_g) for every row of the embedding; plain values.
std::vector<double> gate_values(const Embedding& emb, const Mlp2& critic);

// Eq-style temperature: t = 1 / ln(lambda (n-1) / (1-lambda)); falls back to
// 1 when n < 2 or the log argument is not > 1.
double temperature(std::size_t num_gates, double lambda);

// Stable softmax of values/t.
std::vector<double> gate_policy(std::span<const double> values, double t);
std::size_t sample_index(std::span<const double> probs, Rng& rng);

// Masked softmax over actor logits; masked entries get probability exactly 0.
std::vector<double> xfer_policy(std::span<const double> logits,
                                std::span<const std::uint8_t> mask);
// Highest-probability valid transformation, ties to the lowest index.
std::size_t argmax_xfer(std::span<const double> probs, std::span<const std::uint8_t> mask);

// Plain (graph-free) actor logits for one gate vector.
std::vector<double> actor_logits(const Mlp2& actor, std::span<const double> h);

} // namespace quopt
