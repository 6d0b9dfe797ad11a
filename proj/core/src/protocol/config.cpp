#include "sieve/protocol/config.hpp"

#include <fstream>

#include "sieve/errors.hpp"

namespace sieve::protocol {

using nlohmann::json;

void validate_pore_map(const json& sieves) {
  if (!sieves.is_object()) throw ConfigError("sieves must be an object of mesh -> pore_um");
  if (sieves.size() != model::standard_sieves().size()) {
    throw ConfigError("sieves must list exactly #20, #60, #200 and #500");
  }
  for (const auto& spec : model::standard_sieves()) {
    const auto key = model::to_string(spec.id);
    if (!sieves.contains(key)) throw ConfigError("sieves is missing " + key);
    const auto& v = sieves.at(key);
    if (!v.is_number_integer() || v.get<int>() <= 0) throw ConfigError("pore of " + key + " must be a positive integer");
    if (v.get<int>() != spec.pore.value) {
      throw ConfigError("pore of " + key + " must be " + std::to_string(spec.pore.value) + " um");
    }
  }
}

InstrumentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  InstrumentConfig c;
  if (!doc.contains("sieves")) throw ConfigError("config is missing sieves");
  validate_pore_map(doc.at("sieves"));
  c.engine.hal = hal::hal_config_from_json(doc.value("hal", json::object()));
  if (!doc.contains("timing")) throw ConfigError("config is missing timing");
  c.engine.timing = timing_from_json(doc.at("timing"));
  try {
    c.engine.tick_ms = doc.value("tick_ms", c.engine.tick_ms);
    c.method = doc.value("method", c.method);
    c.soil = doc.value("soil", c.soil);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.engine.tick_ms <= 0) throw ConfigError("tick_ms must be positive");
  if (c.method != "robotic" && c.method != "manual") throw ConfigError("method must be robotic or manual");
  return c;
}

InstrumentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return parse_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

}  // namespace sieve::protocol
