#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "udld/simulation.hpp"

namespace udld {

// The canonical config document: one JSON object with blocks
// {scene, radio, learning, simulation}. Absent fields keep their defaults.
nlohmann::json default_config_json();
nlohmann::json config_to_json(const SimConfig& cfg);
SimConfig config_from_json(const nlohmann::json& doc);

SimConfig load_config(const std::string& path);

// Applies `path.to.leaf=value` assignments; values parse as JSON literals,
// falling back to strings. Unknown paths create fields, which
// config_from_json then rejects with the offending path.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace udld
