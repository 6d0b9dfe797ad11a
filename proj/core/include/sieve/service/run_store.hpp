#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sieve/protocol/run_record.hpp"

namespace sieve::service {

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunFilter {
  std::optional<std::string> profile;
  std::optional<std::string> protocol;
  std::optional<protocol::RunStatus> status;
};

// Append-only JSON-lines log of run records plus an index snapshot. Each line
// is {"kind": "started"|"record", ...}; a started run with no record line is
// closed as Faulted on the next open. A torn final line (crash mid-write) is
// discarded.
class RunStore {
 public:
  // Opens or creates <dir>/runs.jsonl and replays it.
  explicit RunStore(std::filesystem::path dir, int index_every = 16);

  std::string next_id();
  void append_started(const protocol::RunRecord& r);
  // Terminal records only; a second terminal record for the same id throws.
  void append_record(const protocol::RunRecord& r);

  // Throws NotFound.
  protocol::RunRecord get(const std::string& id) const;
  std::vector<protocol::RunRecord> list(const RunFilter& f = {}) const;
  std::size_t size() const;

  const std::filesystem::path& log_path() const { return log_; }
  const std::filesystem::path& index_path() const { return index_; }
  // Lines dropped as torn during the last replay.
  int torn_lines() const { return torn_; }
  // Lines read from the log (not the index) during the last replay.
  std::size_t replayed_lines() const { return replayed_; }

 private:
  void replay();
  void append_line(const std::string& line);
  void write_index();
  void absorb(const nlohmann::json& line, std::uint64_t offset);

  std::filesystem::path dir_, log_, index_;
  int index_every_;
  mutable std::mutex mu_;
  std::map<std::string, protocol::RunRecord> records_;
  std::map<std::string, std::uint64_t> offsets_;  // id -> offset of its record line
  std::map<std::string, protocol::RunRecord> open_;
  std::uint64_t next_{1};
  std::uint64_t log_bytes_{0};
  int since_index_{0};
  int torn_{0};
  std::size_t replayed_{0};
};

}  // namespace sieve::service
