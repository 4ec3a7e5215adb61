#include "quopt/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace quopt {

using nn::Tensor;

Mlp2 Mlp2::init(std::size_t in, std::size_t hidden, std::size_t out, std::mt19937_64& rng) {
    Mlp2 m;
    m.w1 = uniform_init({in, hidden}, in, rng);
    m.b1 = uniform_init({hidden}, in, rng);
    m.w2 = uniform_init({hidden, out}, hidden, rng);
    m.b2 = uniform_init({out}, hidden, rng);
    return m;
}

Tensor Mlp2::apply(const Tensor& x) const {
    if (x.rank() == 2) {
        Tensor h = nn::relu(nn::add_rowvec(nn::matmul(x, w1), b1));
        return nn::add_rowvec(nn::matmul(h, w2), b2);
    }
    return nn::flatten(apply(nn::as_row(x)));
}

AgentParams AgentParams::init(const GateSet& gs, std::size_t num_actions,
                              const AgentConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    AgentParams p;
    p.gnn = GnnParams::init(gs, cfg.gnn_layers, cfg.gnn_dim, rng);
    p.critic = Mlp2::init(cfg.gnn_dim, cfg.critic_hidden, 1, rng);
    p.actor = Mlp2::init(cfg.gnn_dim, cfg.actor_hidden, num_actions, rng);
    p.lambda = cfg.lambda;
    p.num_actions = num_actions;
    return p;
}

std::vector<std::pair<std::string, Tensor>> AgentParams::named_tensors() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("gnn/type_embedding", gnn.type_embedding);
    for (std::size_t k = 0; k < gnn.layers.size(); ++k) {
        const std::string p = "gnn/layer" + std::to_string(k) + "/";
        out.emplace_back(p + "w_a", gnn.layers[k].w_a);
        out.emplace_back(p + "b_a", gnn.layers[k].b_a);
        out.emplace_back(p + "w_u", gnn.layers[k].w_u);
    }
    out.emplace_back("critic/w1", critic.w1);
    out.emplace_back("critic/b1", critic.b1);
    out.emplace_back("critic/w2", critic.w2);
    out.emplace_back("critic/b2", critic.b2);
    out.emplace_back("actor/w1", actor.w1);
    out.emplace_back("actor/b1", actor.b1);
    out.emplace_back("actor/w2", actor.w2);
    out.emplace_back("actor/b2", actor.b2);
    return out;
}

AgentParams AgentParams::detached() const {
    AgentParams p = *this;
    p.gnn.type_embedding = gnn.type_embedding.detach();
    for (std::size_t k = 0; k < gnn.layers.size(); ++k) {
        p.gnn.layers[k].w_a = gnn.layers[k].w_a.detach();
        p.gnn.layers[k].b_a = gnn.layers[k].b_a.detach();
        p.gnn.layers[k].w_u = gnn.layers[k].w_u.detach();
    }
    p.critic.w1 = critic.w1.detach();
    p.critic.b1 = critic.b1.detach();
    p.critic.w2 = critic.w2.detach();
    p.critic.b2 = critic.b2.detach();
    p.actor.w1 = actor.w1.detach();
    p.actor.b1 = actor.b1.detach();
    p.actor.w2 = actor.w2.detach();
    p.actor.b2 = actor.b2.detach();
    return p;
}

std::vector<double> gate_values(const Embedding& emb, const Mlp2& critic) {
    const std::size_t n = emb.order.size();
    if (n == 0)
        return {};
    Tensor v = critic.apply(emb.h); // [n, 1]
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = v.val()[i];
    return out;
}

double temperature(std::size_t num_gates, double lambda) {
    if (lambda <= 0.0 || lambda >= 1.0)
        throw std::invalid_argument("temperature: lambda must be in (0, 1)");
    if (num_gates < 2)
        return 1.0;
    const double arg = lambda * static_cast<double>(num_gates - 1) / (1.0 - lambda);
    // arg == 1 is the uniform limit (t -> infinity keeps the single-
    // opportunity calibration exact); below 1 the formula has no solution
    // and such circuits are terminal anyway.
    if (arg == 1.0)
        return std::numeric_limits<double>::infinity();
    if (arg < 1.0)
        return 1.0;
    return 1.0 / std::log(arg);
}

std::vector<double> gate_policy(std::span<const double> values, double t) {
    if (values.empty())
        return {};
    double m = values[0];
    for (double v : values)
        m = std::max(m, v);
    std::vector<double> p(values.size());
    double z = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        p[i] = std::exp((values[i] - m) / t);
        z += p[i];
    }
    for (double& x : p)
        x /= z;
    return p;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc)
            return i;
    }
    // numerical tail: last entry with nonzero probability
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0)
            return i;
    throw std::invalid_argument("sample_index: no probability mass");
}

std::vector<double> xfer_policy(std::span<const double> logits,
                                std::span<const std::uint8_t> mask) {
    if (logits.size() != mask.size())
        throw std::invalid_argument("xfer_policy: mask length mismatch");
    double m = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < logits.size(); ++i)
        if (mask[i]) {
            m = std::max(m, logits[i]);
            any = true;
        }
    if (!any)
        throw std::invalid_argument("xfer_policy: empty mask");
    std::vector<double> p(logits.size(), 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i)
        if (mask[i]) {
            p[i] = std::exp(logits[i] - m);
            z += p[i];
        }
    for (double& x : p)
        x /= z;
    return p;
}

std::size_t argmax_xfer(std::span<const double> probs, std::span<const std::uint8_t> mask) {
    std::size_t best = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!mask[i])
            continue;
        if (best == probs.size() || probs[i] > probs[best])
            best = i;
    }
    if (best == probs.size())
        throw std::invalid_argument("argmax_xfer: empty mask");
    return best;
}

std::vector<double> actor_logits(const Mlp2& actor, std::span<const double> h) {
    Tensor x = Tensor::from({1, h.size()}, std::vector<double>(h.begin(), h.end()));
    Tensor out = actor.apply(x); // rollout callers pass detached weights
    return {out.val().begin(), out.val().end()};
}

} // namespace quopt
