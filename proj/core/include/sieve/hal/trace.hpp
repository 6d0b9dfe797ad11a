#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sieve/hal/virtual_clock.hpp"

namespace sieve::hal {

struct TraceLine {
  std::int64_t now_ms{0};
  std::string device;
  std::string command;
  std::string value;

  bool operator==(const TraceLine&) const = default;
};

// Tab separated `now_ms  device  command  value`, one line per device command
// or device event, in emission order.
class TraceLog {
 public:
  void record(Millis now, std::string device, std::string command, std::string value);

  const std::vector<TraceLine>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  void clear() { lines_.clear(); }

  void write(std::ostream& os) const;
  std::string str() const;

 private:
  std::vector<TraceLine> lines_;
};

std::string format_line(const TraceLine& line);

}  // namespace sieve::hal
