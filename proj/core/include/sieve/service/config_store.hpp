#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sieve/protocol/config.hpp"

namespace sieve::service {

class ConfigLocked : public std::runtime_error {
 public:
  ConfigLocked() : std::runtime_error("configuration is locked while a run is active") {}
};

class SchemaViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VersionedConfig {
  std::uint64_t version{1};
  nlohmann::json document;
  protocol::InstrumentConfig parsed;
};

// Active instrument configuration. Each accepted document bumps the version
// and is written to <dir>/config.json, so it survives a restart.
class ConfigStore {
 public:
  // Loads <dir>/config.json when present, else `initial`. Throws
  // SchemaViolation if the starting document is invalid.
  ConfigStore(std::filesystem::path dir, nlohmann::json initial);

  VersionedConfig get() const;
  // Throws ConfigLocked when run_active, SchemaViolation when the document
  // fails validation; the active config is unchanged in both cases.
  VersionedConfig put(const nlohmann::json& doc, bool run_active);

 private:
  void persist() const;

  std::filesystem::path path_;
  mutable std::mutex mu_;
  VersionedConfig current_;
};

}  // namespace sieve::service
