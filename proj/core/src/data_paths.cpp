#include "sieve/data_paths.hpp"

#include <cstdlib>

#include "sieve/errors.hpp"

#ifndef SIEVE_DEFAULT_DATA_DIR
#define SIEVE_DEFAULT_DATA_DIR "data"
#endif

namespace sieve {

namespace fs = std::filesystem;

namespace {

bool is_bare_name(const std::string& s) {
  return !s.empty() && s.find('/') == std::string::npos && s.find('.') == std::string::npos;
}

}  // namespace

DataDir::DataDir(fs::path root) : root_(std::move(root)) {}

DataDir DataDir::resolve(const std::string& flag) {
  if (!flag.empty()) return DataDir(flag);
  if (const char* env = std::getenv("SIEVE_DATA_DIR"); env && *env) return DataDir(env);
  return DataDir(SIEVE_DEFAULT_DATA_DIR);
}

model::SampleProfile DataDir::profile(const std::string& name_or_path) const {
  const fs::path p = is_bare_name(name_or_path) ? root_ / "profiles" / (name_or_path + ".json") : fs::path(name_or_path);
  if (!fs::exists(p)) throw ConfigError("profile not found: " + p.string());
  return model::load_profile(p.string());
}

sim::MethodProfile DataDir::params(const std::string& soil, const std::string& method) const {
  const auto p = root_ / "params" / (soil + "-" + method + ".json");
  if (!fs::exists(p)) throw ConfigError("parameter file not found: " + p.string());
  return sim::load_method_profile(p.string());
}

fs::path DataDir::targets(const std::string& name) const {
  return is_bare_name(name) ? root_ / "targets" / (name + ".json") : fs::path(name);
}

sim::ProcessParams DataDir::params_or_default(const std::string& soil, const std::string& fallback_soil,
                                              const std::string& method) const {
  for (const auto& s : {soil, fallback_soil}) {
    if (fs::exists(root_ / "params" / (s + "-" + method + ".json"))) return params(s, method).params;
  }
  return sim::ProcessParams{};
}

}  // namespace sieve
