#include "quopt/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace quopt {

Profile profile_by_name(std::string_view name, TrainPhase phase) {
    Profile p;
    if (name == "paper") {
        p.name = "paper";
        p.train.trajectories = phase == TrainPhase::Pretrain ? 128 : 64;
        p.train.epochs = phase == TrainPhase::Pretrain ? 20 : 5;
        p.train.minibatch = 4800;
        p.agent.gnn_layers = 6;
        p.agent.gnn_dim = 128;
        p.agent.critic_hidden = 128;
        p.agent.actor_hidden = 256;
    } else if (name == "desk") {
        p.name = "desk";
        p.train.trajectories = 16;
        p.train.epochs = phase == TrainPhase::Pretrain ? 20 : 5;
        p.train.minibatch = 256;
        p.agent.gnn_layers = 3;
        p.agent.gnn_dim = 64;
        p.agent.critic_hidden = 64;
        p.agent.actor_hidden = 64;
    } else {
        throw std::invalid_argument("unknown profile '" + std::string(name) +
                                    "' (expected paper or desk)");
    }
    return p;
}

void apply_config_kv(const std::string& key, const std::string& value, Profile& p) {
    auto as_u = [&] { return static_cast<std::size_t>(std::stoull(value)); };
    auto as_d = [&] { return std::stod(value); };
    auto as_i = [&] { return std::stoi(value); };

    if (key == "trajectories")
        p.train.trajectories = as_u();
    else if (key == "horizon")
        p.train.horizon = as_u();
    else if (key == "gamma")
        p.train.gamma = as_d();
    else if (key == "clip_eps")
        p.train.clip_eps = as_d();
    else if (key == "entropy_coef")
        p.train.entropy_coef = as_d();
    else if (key == "value_coef")
        p.train.value_coef = as_d();
    else if (key == "epochs")
        p.train.epochs = as_u();
    else if (key == "minibatch")
        p.train.minibatch = as_u();
    else if (key == "lr_actor")
        p.train.lr_actor = as_d();
    else if (key == "lr_critic")
        p.train.lr_critic = as_d();
    else if (key == "lr_gnn")
        p.train.lr_gnn = as_d();
    else if (key == "alpha")
        p.train.alpha = as_d();
    else if (key == "influence_hops")
        p.train.influence_hops = as_i();
    else if (key == "buffer_beta")
        p.train.buffer_beta = as_d();
    else if (key == "buffer_capacity")
        p.train.buffer_capacity = as_u();
    else if (key == "workers")
        p.train.workers = as_u();
    else if (key == "metric") {
        auto m = cost_metric_by_name(value);
        if (!m)
            throw std::invalid_argument("config: unknown metric '" + value + "'");
        p.train.metric = *m;
    } else if (key == "lambda")
        p.agent.lambda = as_d();
    else if (key == "gnn_layers")
        p.agent.gnn_layers = as_i();
    else if (key == "gnn_dim")
        p.agent.gnn_dim = as_u();
    else if (key == "critic_hidden")
        p.agent.critic_hidden = as_u();
    else if (key == "actor_hidden")
        p.agent.actor_hidden = as_u();
    else if (key == "head_start_iterations")
        p.search.head_start_iterations = as_u();
    else if (key == "ft_iterations_per_slice")
        p.search.ft_iterations_per_slice = as_u();
    else if (key == "pgs_steps_per_slice")
        p.search.pgs_steps_per_slice = as_u();
    else if (key == "max_slices")
        p.search.max_slices = as_u();
    else if (key == "pgs_steps_timeout")
        p.search.pgs_steps_timeout = as_u();
    else if (key == "wall_budget_s")
        p.search.wall_budget_s = as_d();
    else if (key == "partition_max_gates")
        p.search.partition_max_gates = as_u();
    else
        throw std::invalid_argument("config: unknown key '" + key + "'");
}

void apply_config_file(const std::string& path, Profile& p) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key, eq, value;
        if (!(ls >> key))
            continue;
        if (!(ls >> eq) || eq != "=" || !(ls >> value))
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected 'key = value'");
        try {
            apply_config_kv(key, value, p);
        } catch (const std::exception& e) {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    p.train.workers = std::max<std::size_t>(1, p.train.workers);
}

} // namespace quopt
