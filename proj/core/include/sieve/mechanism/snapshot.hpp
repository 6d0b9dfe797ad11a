#pragma once

#include <nlohmann/json.hpp>

#include "sieve/mechanism/machine_state.hpp"

namespace sieve::mech {

// Mirrors the state fields; consumed by the event stream and the operator panel.
nlohmann::json to_json(const MachineState& s);
MachineState machine_state_from_json(const nlohmann::json& j);

}  // namespace sieve::mech
