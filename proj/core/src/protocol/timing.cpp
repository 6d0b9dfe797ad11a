#include "sieve/protocol/timing.hpp"

#include <nlohmann/json.hpp>

#include "sieve/errors.hpp"

namespace sieve::protocol {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* section, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("timing.") + section + " is missing " + key);
  T v;
  try {
    v = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("timing.") + section + "." + key + " has the wrong type");
  }
  if (v < 0) throw ConfigError(std::string("timing.") + section + "." + key + " must be >= 0");
  return v;
}

const json& section(const json& j, const char* name) {
  if (!j.contains(name) || !j.at(name).is_object()) throw ConfigError(std::string("timing is missing ") + name);
  return j.at(name);
}

}  // namespace

TimingConfig timing_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("timing must be an object");
  TimingConfig t;
  const auto& c = section(j, "cyst");
  t.cyst.decant_ms = required<std::int64_t>(c, "cyst", "decant_ms");
  t.cyst.rotate_ms = required<std::int64_t>(c, "cyst", "rotate_ms");
  t.cyst.compress_ms = required<std::int64_t>(c, "cyst", "compress_ms");
  t.cyst.wash_s = required<double>(c, "cyst", "wash_s");
  t.cyst.uncompress_ms = required<std::int64_t>(c, "cyst", "uncompress_ms");
  t.cyst.sprayer_retract_ms = required<std::int64_t>(c, "cyst", "sprayer_retract_ms");
  t.cyst.transfer_ms = required<std::int64_t>(c, "cyst", "transfer_ms");

  const auto& e = section(j, "egg");
  t.egg.rotate_ms = required<std::int64_t>(e, "egg", "rotate_ms");
  t.egg.compress_ms = required<std::int64_t>(e, "egg", "compress_ms");
  t.egg.lower_ms = required<std::int64_t>(e, "egg", "lower_ms");
  t.egg.spin_on_ms = required<std::int64_t>(e, "egg", "spin_on_ms");
  t.egg.contact_ms = required<std::int64_t>(e, "egg", "contact_ms");
  t.egg.grind_s = required<double>(e, "egg", "grind_s");
  t.egg.lift_ms = required<std::int64_t>(e, "egg", "lift_ms");
  t.egg.spray_s = required<double>(e, "egg", "spray_s");
  t.egg.spin_off_ms = required<std::int64_t>(e, "egg", "spin_off_ms");
  t.egg.raise_ms = required<std::int64_t>(e, "egg", "raise_ms");
  t.egg.collect_ms = required<std::int64_t>(e, "egg", "collect_ms");
  t.egg.cycles = required<int>(e, "egg", "cycles");

  const auto& p = section(j, "prep");
  t.prep.mix_s = required<double>(p, "prep", "mix_s");
  t.prep.settle_s = required<double>(p, "prep", "settle_s");
  return t;
}

json to_json(const TimingConfig& t) {
  return {{"cyst",
           {{"decant_ms", t.cyst.decant_ms},
            {"rotate_ms", t.cyst.rotate_ms},
            {"compress_ms", t.cyst.compress_ms},
            {"wash_s", t.cyst.wash_s},
            {"uncompress_ms", t.cyst.uncompress_ms},
            {"sprayer_retract_ms", t.cyst.sprayer_retract_ms},
            {"transfer_ms", t.cyst.transfer_ms}}},
          {"egg",
           {{"rotate_ms", t.egg.rotate_ms},
            {"compress_ms", t.egg.compress_ms},
            {"lower_ms", t.egg.lower_ms},
            {"spin_on_ms", t.egg.spin_on_ms},
            {"contact_ms", t.egg.contact_ms},
            {"grind_s", t.egg.grind_s},
            {"lift_ms", t.egg.lift_ms},
            {"spray_s", t.egg.spray_s},
            {"spin_off_ms", t.egg.spin_off_ms},
            {"raise_ms", t.egg.raise_ms},
            {"collect_ms", t.egg.collect_ms},
            {"cycles", t.egg.cycles}}},
          {"prep", {{"mix_s", t.prep.mix_s}, {"settle_s", t.prep.settle_s}}}};
}

}  // namespace sieve::protocol
