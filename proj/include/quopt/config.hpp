#pragma once

#include "quopt/search.hpp"

#include <string>

namespace quopt {

enum class TrainPhase { Pretrain, Finetune };

// Everything the CLI wires together: training hyperparameters, network
// sizes, and the search schedule.
struct Profile {
    std::string name;
    TrainConfig train;
    AgentConfig agent;
    SearchConfig search;
};

// "paper": the published hyperparameters (6x128 GNN, 128/256 heads,
// 128/64 actors, minibatch 4800, 20/5 epochs).
// "desk": the scaled-down defaults for single-host runs (3x64 GNN, 64-wide
// heads, 16 actors, minibatch 256).
Profile profile_by_name(std::string_view name, TrainPhase phase);

// key = value lines overriding profile fields; '#' comments.
void apply_config_file(const std::string& path, Profile& p);
void apply_config_kv(const std::string& key, const std::string& value, Profile& p);

} // namespace quopt
