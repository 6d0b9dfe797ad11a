#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sieve/mechanism/machine_state.hpp"

namespace sieve::protocol {

namespace action {
// Pour the suspension over the column at the decant station.
struct Decant {};
// Spray the sieve on top of the washing station for duration_s.
struct Wash {
  model::SieveId sieve{model::kMesh20};
  double duration_s{0.0};
};
struct Rotate {
  int quarter_turns{1};
};
struct Compress {
  mech::Compression target{mech::Compression::Full};
};
struct SprayerRetract {};
struct GripperTransfer {
  mech::SlotRef from;
  mech::SlotRef to;
};
// Pad height above the top mesh; 0 is contact.
struct GrinderLower {
  double height_mm{mech::kPadHoverMm};
};
struct GrinderSpin {
  bool on{true};
};
struct Grind {
  double duration_s{10.0};
};
struct GrinderRaise {
  double height_mm{mech::kPadClearMm};
};
struct NozzleSpray {
  double duration_s{10.0};
};
// Wash the #500 contents into the collection container.
struct CollectOutput {};
struct Dwell {
  double duration_s{0.0};
  std::string label;
};
}  // namespace action

using Action = std::variant<action::Decant, action::Wash, action::Rotate, action::Compress, action::SprayerRetract,
                            action::GripperTransfer, action::GrinderLower, action::GrinderSpin, action::Grind,
                            action::GrinderRaise, action::NozzleSpray, action::CollectOutput, action::Dwell>;

std::string_view action_name(const Action& a);

struct ProtocolStep {
  Action action;
  std::int64_t duration_ms{0};
};

// Timed actions run for exactly their nominal duration; motion actions take
// their allocation from the timing config.
bool is_timed(const Action& a);
std::int64_t nominal_ms(const Action& a);

enum class ScriptName { CystExtraction, EggExtraction, FullExtraction, Custom };

std::string_view to_string(ScriptName n);
ScriptName parse_script_name(std::string_view s);

struct ProtocolScript {
  ScriptName name{ScriptName::Custom};
  std::vector<ProtocolStep> steps;
  std::int64_t expected_total_ms{0};
  int grind_cycles{0};

  std::int64_t sum_ms() const;
};

// Concatenates b after a and recomputes the total.
ProtocolScript concat(ScriptName name, const ProtocolScript& a, const ProtocolScript& b);

nlohmann::json to_json(const ProtocolStep& s);
ProtocolStep step_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProtocolScript& s);
// Throws ConfigError on unknown actions, missing parameters or a total that
// disagrees with the steps.
ProtocolScript script_from_json(const nlohmann::json& j);
ProtocolScript load_script(const std::string& path);

std::string describe(const ProtocolStep& s);

}  // namespace sieve::protocol
