#include "sieve/service/config_store.hpp"

#include <fstream>

#include "sieve/errors.hpp"

namespace sieve::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

protocol::InstrumentConfig checked(const json& doc) {
  try {
    return protocol::parse_config(doc);
  } catch (const ConfigError& e) {
    throw SchemaViolation(e.what());
  }
}

}  // namespace

ConfigStore::ConfigStore(fs::path dir, json initial) : path_(dir / "config.json") {
  fs::create_directories(dir);
  if (fs::exists(path_)) {
    std::ifstream in(path_);
    json saved;
    try {
      saved = json::parse(in);
    } catch (const json::parse_error& e) {
      throw SchemaViolation(std::string("stored config: ") + e.what());
    }
    current_.version = saved.value("version", std::uint64_t{1});
    current_.document = saved.at("config");
  } else {
    current_.document = std::move(initial);
  }
  current_.parsed = checked(current_.document);
}

VersionedConfig ConfigStore::get() const {
  std::lock_guard lock(mu_);
  return current_;
}

VersionedConfig ConfigStore::put(const json& doc, bool run_active) {
  if (run_active) throw ConfigLocked();
  auto parsed = checked(doc);
  std::lock_guard lock(mu_);
  current_.document = doc;
  current_.parsed = std::move(parsed);
  ++current_.version;
  persist();
  return current_;
}

void ConfigStore::persist() const {
  const auto tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << json{{"version", current_.version}, {"config", current_.document}}.dump(2) << '\n';
  }
  fs::rename(tmp, path_);
}

}  // namespace sieve::service
