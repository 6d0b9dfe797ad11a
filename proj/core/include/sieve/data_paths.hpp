#pragma once

#include <filesystem>
#include <string>

#include "sieve/model/sample.hpp"
#include "sieve/sim/params.hpp"

namespace sieve {

// Shipped data: config/, profiles/, params/, scripts/, targets/.
class DataDir {
 public:
  explicit DataDir(std::filesystem::path root);
  // --data-dir, else $SIEVE_DATA_DIR, else the build-time default.
  static DataDir resolve(const std::string& flag = {});

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path config() const { return root_ / "config" / "default.json"; }

  // A bare name (muscatine) maps to profiles/<name>.json; anything else is a
  // path. Throws ConfigError when the file is missing or invalid.
  model::SampleProfile profile(const std::string& name_or_path) const;
  // params/<soil>-<method>.json. Throws ConfigError when missing.
  sim::MethodProfile params(const std::string& soil, const std::string& method) const;
  std::filesystem::path targets(const std::string& name) const;
  // First parameter file found for soil, then fallback_soil; defaults when
  // neither ships one.
  sim::ProcessParams params_or_default(const std::string& soil, const std::string& fallback_soil,
                                       const std::string& method) const;

 private:
  std::filesystem::path root_;
};

}  // namespace sieve
