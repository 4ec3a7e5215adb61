#pragma once

#include "quopt/agent.hpp"

#include <string>

namespace quopt {

// Versioned JSON checkpoint of all named parameter tensors plus the shape
// manifest (gate set, action count, layer sizes). Loading validates the
// manifest and every tensor shape; values round-trip exactly.
void save_checkpoint(const AgentParams& params, const std::string& path);
AgentParams load_checkpoint(const std::string& path);

} // namespace quopt
