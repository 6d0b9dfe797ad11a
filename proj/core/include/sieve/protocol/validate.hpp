#pragma once

#include <string>
#include <vector>

#include "sieve/hal/device_bus.hpp"
#include "sieve/mechanism/machine_state.hpp"
#include "sieve/protocol/step.hpp"

namespace sieve::protocol {

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Runs the script symbolically from `initial` without touching devices.
// Static problems (totals, allocations shorter than the motion they carry,
// an egg script without grinding) are all listed; symbolic execution stops
// at the first interlock violation since later states are undefined.
ValidationReport validate_script(const ProtocolScript& script, const mech::MachineState& initial,
                                 const hal::HalConfig& hal = {});

}  // namespace sieve::protocol
