#pragma once

#include "sieve/protocol/step.hpp"
#include "sieve/protocol/timing.hpp"

namespace sieve::protocol {

// Decant over #20/#60, wash #20 through to #60, then move #60 on top of the
// #200/#500 column. Starts from mech::cyst_layout().
ProtocolScript build_cyst_protocol(const TimingConfig& t);

// Grind and spray the #60 column at the grinder station and collect the #500
// contents. Starts from mech::egg_layout().
ProtocolScript build_egg_protocol(const TimingConfig& t);

// Sample mixing and settling followed by both protocols back to back.
ProtocolScript build_full_protocol(const TimingConfig& t);

enum class ProtocolKind { Cyst, Egg, Full };

ProtocolKind parse_protocol_kind(std::string_view s);
std::string_view to_string(ProtocolKind k);
ProtocolScript build_protocol(ProtocolKind k, const TimingConfig& t);
mech::MachineState initial_layout(ProtocolKind k);

}  // namespace sieve::protocol
