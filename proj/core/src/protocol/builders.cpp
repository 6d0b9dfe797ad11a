#include "sieve/protocol/builders.hpp"

#include "sieve/errors.hpp"

namespace sieve::protocol {

using mech::Compression;
using mech::Level;

namespace {

ProtocolStep timed(Action a) {
  const auto ms = nominal_ms(a);
  return {std::move(a), ms};
}

}  // namespace

ProtocolScript build_cyst_protocol(const TimingConfig& t) {
  const auto& c = t.cyst;
  ProtocolScript s;
  s.name = ScriptName::CystExtraction;
  s.steps = {
      {action::Decant{}, c.decant_ms},
      {action::Rotate{1}, c.rotate_ms},
      {action::Compress{Compression::Full}, c.compress_ms},
      timed(action::Wash{model::kMesh20, c.wash_s}),
      {action::Compress{Compression::Uncompressed}, c.uncompress_ms},
      {action::SprayerRetract{}, c.sprayer_retract_ms},
      {action::GripperTransfer{{Level::Middle, mech::station::kWash}, {Level::Top, mech::station::kTransfer}},
       c.transfer_ms},
  };
  s.expected_total_ms = s.sum_ms();
  return s;
}

ProtocolScript build_egg_protocol(const TimingConfig& t) {
  const auto& e = t.egg;
  ProtocolScript s;
  s.name = ScriptName::EggExtraction;
  s.grind_cycles = e.cycles;
  s.steps = {
      {action::Rotate{1}, e.rotate_ms},
      {action::Compress{Compression::Full}, e.compress_ms},
      {action::GrinderLower{mech::kPadHoverMm}, e.lower_ms},
      {action::GrinderSpin{true}, e.spin_on_ms},
  };
  for (int i = 0; i < e.cycles; ++i) {
    s.steps.push_back({action::GrinderLower{0.0}, e.contact_ms});
    s.steps.push_back(timed(action::Grind{e.grind_s}));
    s.steps.push_back({action::GrinderRaise{mech::kPadHoverMm}, e.lift_ms});
    s.steps.push_back(timed(action::NozzleSpray{e.spray_s}));
  }
  s.steps.push_back({action::GrinderSpin{false}, e.spin_off_ms});
  s.steps.push_back({action::GrinderRaise{mech::kPadClearMm}, e.raise_ms});
  s.steps.push_back({action::CollectOutput{}, e.collect_ms});
  s.expected_total_ms = s.sum_ms();
  return s;
}

ProtocolScript build_full_protocol(const TimingConfig& t) {
  ProtocolScript prep;
  prep.steps = {timed(action::Dwell{t.prep.mix_s, "mix"}), timed(action::Dwell{t.prep.settle_s, "settle"})};
  auto cyst = concat(ScriptName::CystExtraction, prep, build_cyst_protocol(t));
  return concat(ScriptName::FullExtraction, cyst, build_egg_protocol(t));
}

ProtocolKind parse_protocol_kind(std::string_view s) {
  if (s == "cyst") return ProtocolKind::Cyst;
  if (s == "egg") return ProtocolKind::Egg;
  if (s == "full") return ProtocolKind::Full;
  throw ConfigError("unknown protocol " + std::string(s) + " (expected cyst, egg or full)");
}

std::string_view to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::Cyst: return "cyst";
    case ProtocolKind::Egg: return "egg";
    case ProtocolKind::Full: return "full";
  }
  return "cyst";
}

ProtocolScript build_protocol(ProtocolKind k, const TimingConfig& t) {
  switch (k) {
    case ProtocolKind::Cyst: return build_cyst_protocol(t);
    case ProtocolKind::Egg: return build_egg_protocol(t);
    case ProtocolKind::Full: return build_full_protocol(t);
  }
  return build_cyst_protocol(t);
}

mech::MachineState initial_layout(ProtocolKind k) {
  return k == ProtocolKind::Egg ? mech::egg_layout() : mech::cyst_layout();
}

}  // namespace sieve::protocol
