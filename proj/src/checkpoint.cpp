#include "quopt/checkpoint.hpp"

#include "json.hpp"

#include <fstream>
#include <stdexcept>

namespace quopt {

using json = nlohmann::json;

void save_checkpoint(const AgentParams& params, const std::string& path) {
    json j;
    j["format"] = "quopt-checkpoint-1";
    j["gate_set"] = params.gnn.gate_set->name();
    j["num_actions"] = params.num_actions;
    j["gnn_layers"] = params.gnn.layers.size();
    j["gnn_dim"] = params.gnn.dim;
    j["critic_hidden"] = params.critic.w1.cols();
    j["actor_hidden"] = params.actor.w1.cols();
    j["lambda"] = params.lambda;
    json tensors = json::object();
    for (const auto& [name, t] : params.named_tensors()) {
        json entry;
        entry["shape"] = t.shape();
        entry["values"] = std::vector<double>(t.val().begin(), t.val().end());
        tensors[name] = std::move(entry);
    }
    j["tensors"] = std::move(tensors);

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump();
}

AgentParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open checkpoint: " + path);
    json j = json::parse(in);
    if (j.value("format", "") != "quopt-checkpoint-1")
        throw std::runtime_error("checkpoint: unknown format");

    const GateSet* gs = GateSet::by_name(j.at("gate_set").get<std::string>());
    if (!gs)
        throw std::runtime_error("checkpoint: unknown gate set");

    AgentConfig cfg;
    cfg.gnn_layers = j.at("gnn_layers").get<int>();
    cfg.gnn_dim = j.at("gnn_dim").get<std::size_t>();
    cfg.critic_hidden = j.at("critic_hidden").get<std::size_t>();
    cfg.actor_hidden = j.at("actor_hidden").get<std::size_t>();
    cfg.lambda = j.at("lambda").get<double>();

    AgentParams params =
        AgentParams::init(*gs, j.at("num_actions").get<std::size_t>(), cfg, /*seed=*/0);

    const json& tensors = j.at("tensors");
    for (auto& [name, t] : params.named_tensors()) {
        if (!tensors.contains(name))
            throw std::runtime_error("checkpoint: missing tensor " + name);
        const json& entry = tensors.at(name);
        const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        if (shape != t.shape())
            throw std::runtime_error("checkpoint: shape mismatch for " + name);
        const auto values = entry.at("values").get<std::vector<double>>();
        if (values.size() != t.size())
            throw std::runtime_error("checkpoint: value count mismatch for " + name);
        std::copy(values.begin(), values.end(), t.val_mut().begin());
    }
    return params;
}

} // namespace quopt
