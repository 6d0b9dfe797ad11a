#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "sieve/protocol/executor.hpp"

namespace sieve::protocol {

// The instrument configuration document: sieve pore map, device settings,
// time allocations and the default method/soil used for process parameters.
struct InstrumentConfig {
  EngineConfig engine;  // params left at defaults; resolved by the caller
  std::string method{"robotic"};
  std::string soil{"muscatine"};
};

// Throws ConfigError unless the map names exactly #20, #60, #200 and #500
// with the openings of the simulated sieves.
void validate_pore_map(const nlohmann::json& sieves);

// Throws ConfigError on any schema problem.
InstrumentConfig parse_config(const nlohmann::json& doc);
InstrumentConfig load_config(const std::string& path);

}  // namespace sieve::protocol
