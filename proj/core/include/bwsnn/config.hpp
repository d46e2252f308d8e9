#pragma once

// JSON network and sweep-family configuration. The schema is documented in
// docs/formats.md; unknown keys are rejected with ConfigError.

#include <filesystem>

#include <nlohmann/json.hpp>

#include "bwsnn/costmodel.hpp"
#include "bwsnn/netmodel.hpp"

namespace bwsnn {

// Parses and runs shape inference. Kernel sets are left empty except for
// average-pool layers, which get their all-ones weights.
NetworkGraph network_from_json(const nlohmann::json& config);
NetworkGraph load_network_config(const std::filesystem::path& path);
nlohmann::json network_to_json(const NetworkGraph& graph);

struct FamilyConfig {
  TopologyFamily family;
  std::optional<std::int64_t> budget_um2;
};

FamilyConfig family_from_json(const nlohmann::json& config);
FamilyConfig load_family_config(const std::filesystem::path& path);

// Reads a whole file as JSON; FileError if unreadable, ConfigError if not JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace bwsnn
